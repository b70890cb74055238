//! Closed-form limits of the clustering coefficients.
//!
//! The model has two regimes: with `r_d <= r_s < 2 r_d` (weak community
//! structure) a mixed-label triangle needs the two same-label nodes to be
//! close as well, while for `r_s >= 2 r_d` (strong) that constraint is
//! implied by both being within `r_d` of the third node. Every formula below
//! switches form at `r_s = 2 r_d` and is continuous there.
//!
//! Functions in `lambda` form (`g`, `f`, `h`) use `r_s = lambda * r_d`; the
//! limits are scale free, so `r_d` drops out.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Community, GbmParams};

/// The value every limit takes without community structure.
pub const RGG_LIMIT: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LimitError {
    #[error("{field}: value must be finite (got {value})")]
    NotFinite { field: &'static str, value: f64 },
    #[error("r_d: radius must be positive (got {0})")]
    NonPositiveRadius(f64),
    #[error("{field}: radius must not exceed 0.5 (got {value})")]
    RadiusTooLarge { field: &'static str, value: f64 },
    #[error("r_s: radius-order violation, r_s = {r_s} is smaller than r_d = {r_d}")]
    RadiusOrder { r_s: f64, r_d: f64 },
    #[error("tau: community fraction must lie in [0, 1] (got {0})")]
    TauOutOfRange(f64),
    #[error("lambda: must be at least 1 (got {0})")]
    LambdaBelowOne(f64),
    #[error("tau: the minimiser needs 0 < tau < 1 (got {0})")]
    DegenerateTau(f64),
}

fn finite(field: &'static str, value: f64) -> Result<f64, LimitError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(LimitError::NotFinite { field, value })
    }
}

fn check_tau(tau: f64) -> Result<f64, LimitError> {
    finite("tau", tau)?;
    if (0.0..=1.0).contains(&tau) {
        Ok(tau)
    } else {
        Err(LimitError::TauOutOfRange(tau))
    }
}

fn check_lambda(lambda: f64) -> Result<f64, LimitError> {
    finite("lambda", lambda)?;
    if lambda >= 1.0 {
        Ok(lambda)
    } else {
        Err(LimitError::LambdaBelowOne(lambda))
    }
}

/// Phase of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `r_d <= r_s < 2 r_d`.
    Weak,
    /// `r_s >= 2 r_d`, boundary included.
    Strong,
}

impl Regime {
    fn of(r_s: f64, r_d: f64) -> Self {
        if r_s < 2.0 * r_d {
            Regime::Weak
        } else {
            Regime::Strong
        }
    }

    fn of_lambda(lambda: f64) -> Self {
        if lambda < 2.0 {
            Regime::Weak
        } else {
            Regime::Strong
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Weak => "weak (r_s < 2 r_d)",
            Regime::Strong => "strong (r_s >= 2 r_d)",
        })
    }
}

/// Validated radius pair `0 < r_d <= r_s <= 0.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radii {
    r_s: f64,
    r_d: f64,
}

impl Radii {
    pub fn new(r_s: f64, r_d: f64) -> Result<Self, LimitError> {
        finite("r_s", r_s)?;
        finite("r_d", r_d)?;
        if r_d <= 0.0 {
            return Err(LimitError::NonPositiveRadius(r_d));
        }
        if r_s > 0.5 {
            return Err(LimitError::RadiusTooLarge {
                field: "r_s",
                value: r_s,
            });
        }
        if r_s < r_d {
            return Err(LimitError::RadiusOrder { r_s, r_d });
        }
        Ok(Radii { r_s, r_d })
    }

    pub fn r_s(&self) -> f64 {
        self.r_s
    }
    pub fn r_d(&self) -> f64 {
        self.r_d
    }
    pub fn lambda(&self) -> f64 {
        self.r_s / self.r_d
    }
    pub fn regime(&self) -> Regime {
        Regime::of(self.r_s, self.r_d)
    }
}

/// Regime of a radius pair; the boundary `r_s = 2 r_d` is [`Regime::Strong`].
pub fn classify_regime(r_s: f64, r_d: f64) -> Result<Regime, LimitError> {
    Radii::new(r_s, r_d).map(|r| r.regime())
}

/// Label pattern of a 2-path `2 - 1 - 3` centred at node 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoPathPattern {
    /// All three labels equal.
    AllSame,
    /// The centre shares its label with exactly one leaf.
    CenterSharesOne,
    /// Both leaves share a label the centre does not have.
    LeavesShare,
}

impl TwoPathPattern {
    pub const ALL: [TwoPathPattern; 3] = [
        TwoPathPattern::AllSame,
        TwoPathPattern::CenterSharesOne,
        TwoPathPattern::LeavesShare,
    ];

    /// Pattern of `(centre, leaf, leaf)` labels.
    pub fn classify(center: Community, a: Community, b: Community) -> Self {
        match (center == a, center == b) {
            (true, true) => TwoPathPattern::AllSame,
            (true, false) | (false, true) => TwoPathPattern::CenterSharesOne,
            (false, false) => TwoPathPattern::LeavesShare,
        }
    }

    /// A representative `(centre, leaf, leaf)` labelling.
    pub fn representative(self) -> [Community; 3] {
        use Community::{One, Two};
        match self {
            TwoPathPattern::AllSame => [One, One, One],
            TwoPathPattern::CenterSharesOne => [One, One, Two],
            TwoPathPattern::LeavesShare => [One, Two, Two],
        }
    }
}

impl fmt::Display for TwoPathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwoPathPattern::AllSame => "all-same",
            TwoPathPattern::CenterSharesOne => "center-shares-one",
            TwoPathPattern::LeavesShare => "leaves-share",
        })
    }
}

#[inline]
fn mixed_triangle(regime: Regime, r_s: f64, r_d: f64) -> f64 {
    match regime {
        Regime::Weak => 4.0 * r_s * r_d - r_s * r_s,
        Regime::Strong => 4.0 * r_d * r_d,
    }
}

/// `P(A_12 A_13 A_23 = 1)`, the same conditional on any one position.
pub fn triangle_prob(radii: Radii, same_community: bool) -> f64 {
    triangle_prob_in(radii.regime(), radii, same_community)
}

/// [`triangle_prob`] with the formula of `regime` forced.
pub fn triangle_prob_in(regime: Regime, radii: Radii, same_community: bool) -> f64 {
    if same_community {
        3.0 * radii.r_s * radii.r_s
    } else {
        mixed_triangle(regime, radii.r_s, radii.r_d)
    }
}

/// `P(A_12 A_13 = 1)` for a 2-path centred at node 1. Regime free.
pub fn twopath_prob(radii: Radii, pattern: TwoPathPattern) -> f64 {
    let (r_s, r_d) = (radii.r_s, radii.r_d);
    match pattern {
        TwoPathPattern::AllSame => 4.0 * r_s * r_s,
        TwoPathPattern::CenterSharesOne => 4.0 * r_s * r_d,
        TwoPathPattern::LeavesShare => 4.0 * r_d * r_d,
    }
}

/// Leading `n^3` coefficients of the ordered triangle and 2-path sums, using
/// `a = tau (1 - tau)`: all-same triples have weight `1 - 3a`, mixed ones `3a`.
fn ordered_sum_coefficients(regime: Regime, r_s: f64, r_d: f64, tau: f64) -> (f64, f64) {
    let a = tau * (1.0 - tau);
    let triangle = (1.0 - 3.0 * a) * 3.0 * r_s * r_s + 3.0 * a * mixed_triangle(regime, r_s, r_d);
    let twopath = (1.0 - 3.0 * a) * 4.0 * r_s * r_s + 8.0 * a * r_s * r_d + 4.0 * a * r_d * r_d;
    (triangle, twopath)
}

/// Limit of the global clustering coefficient.
pub fn global_cc_limit(radii: Radii, tau: f64) -> Result<f64, LimitError> {
    global_cc_limit_in(radii.regime(), radii, tau)
}

/// [`global_cc_limit`] with the formula of `regime` forced.
pub fn global_cc_limit_in(regime: Regime, radii: Radii, tau: f64) -> Result<f64, LimitError> {
    let tau = check_tau(tau)?;
    let (r_s, r_d) = (radii.r_s, radii.r_d);
    let a = tau * (1.0 - tau);
    let numerator = match regime {
        Regime::Weak => (3.0 - 9.0 * a) * r_s * r_s + 3.0 * a * (4.0 * r_s * r_d - r_s * r_s),
        Regime::Strong => (3.0 - 9.0 * a) * r_s * r_s + 12.0 * a * r_d * r_d,
    };
    let denominator = (4.0 - 12.0 * a) * r_s * r_s + 8.0 * a * r_s * r_d + 4.0 * a * r_d * r_d;
    Ok(numerator / denominator)
}

/// Leading-order `n^2` coefficient of a node's ordered triangle sum, and the
/// `n` coefficient of its expected degree, for each community.
fn node_coefficients(regime: Regime, r_s: f64, r_d: f64, tau: f64, c: Community) -> (f64, f64) {
    let mixed = mixed_triangle(regime, r_s, r_d);
    let (own, other) = match c {
        Community::One => (tau, 1.0 - tau),
        Community::Two => (1.0 - tau, tau),
    };
    // Pairs of neighbours fully in the own community, versus any mixed pair:
    // 2 own*other + other^2 = 1 - own^2.
    let triangles = 3.0 * own * own * r_s * r_s + mixed * (1.0 - own * own);
    let degree = 2.0 * (own * r_s + other * r_d);
    (triangles, degree)
}

/// Limit of the average clustering coefficient.
pub fn avg_cc_limit(radii: Radii, tau: f64) -> Result<f64, LimitError> {
    avg_cc_limit_in(radii.regime(), radii, tau)
}

/// [`avg_cc_limit`] with the formula of `regime` forced.
pub fn avg_cc_limit_in(regime: Regime, radii: Radii, tau: f64) -> Result<f64, LimitError> {
    let tau = check_tau(tau)?;
    let (r_s, r_d) = (radii.r_s, radii.r_d);
    let (t1, mu1) = node_coefficients(regime, r_s, r_d, tau, Community::One);
    let (t2, mu2) = node_coefficients(regime, r_s, r_d, tau, Community::Two);
    Ok(tau * t1 / (mu1 * mu1) + (1.0 - tau) * t2 / (mu2 * mu2))
}

/// Global limit as a function of `lambda = r_s / r_d`.
pub fn g_of(lambda: f64, tau: f64) -> Result<f64, LimitError> {
    let lambda = check_lambda(lambda)?;
    g_in(Regime::of_lambda(lambda), lambda, tau)
}

/// [`g_of`] with the branch of `regime` forced (`lambda` only needs to be finite).
pub fn g_in(regime: Regime, lambda: f64, tau: f64) -> Result<f64, LimitError> {
    let lambda = finite("lambda", lambda)?;
    let tau = check_tau(tau)?;
    let a = tau * (1.0 - tau);
    let l2 = lambda * lambda;
    let numerator = match regime {
        Regime::Weak => (3.0 - 9.0 * a) * l2 + 3.0 * a * (4.0 * lambda - l2),
        Regime::Strong => (3.0 - 9.0 * a) * l2 + 12.0 * a,
    };
    Ok(numerator / ((4.0 - 12.0 * a) * l2 + 8.0 * a * lambda + 4.0 * a))
}

/// Balanced (`tau = 1/2`) global limit as a function of `lambda`.
pub fn f_of(lambda: f64) -> Result<f64, LimitError> {
    let lambda = check_lambda(lambda)?;
    Ok(f_in(Regime::of_lambda(lambda), lambda))
}

/// [`f_of`] with the branch of `regime` forced.
pub fn f_in(regime: Regime, lambda: f64) -> f64 {
    let s = 1.0 + lambda;
    match regime {
        Regime::Weak => 3.0 * lambda / (s * s),
        Regime::Strong => 3.0 * (4.0 + lambda * lambda) / (4.0 * s * s),
    }
}

/// Average-coefficient limit as a function of `lambda`.
pub fn h_of(lambda: f64, tau: f64) -> Result<f64, LimitError> {
    let lambda = check_lambda(lambda)?;
    h_in(Regime::of_lambda(lambda), lambda, tau)
}

/// [`h_of`] with the branch of `regime` forced.
pub fn h_in(regime: Regime, lambda: f64, tau: f64) -> Result<f64, LimitError> {
    let lambda = finite("lambda", lambda)?;
    let tau = check_tau(tau)?;
    let l2 = lambda * lambda;
    let mixed = match regime {
        Regime::Weak => 4.0 * lambda - l2,
        Regime::Strong => 4.0,
    };
    let u = 1.0 - tau;
    let d1 = tau * lambda + u;
    let d2 = u * lambda + tau;
    let first = tau * (3.0 * tau * tau * l2 + mixed * (1.0 - tau * tau)) / (4.0 * d1 * d1);
    let second = u * (3.0 * u * u * l2 + mixed * tau * (2.0 - tau)) / (4.0 * d2 * d2);
    Ok(first + second)
}

/// Minimiser of `g(., tau)` over `lambda >= 1`.
pub fn lambda_star(tau: f64) -> Result<f64, LimitError> {
    let tau = check_tau(tau)?;
    if tau == 0.0 || tau == 1.0 {
        return Err(LimitError::DegenerateTau(tau));
    }
    let a = tau * (1.0 - tau);
    Ok(1.5 + 0.5 * ((9.0 - 11.0 * a) / (1.0 - 3.0 * a)).sqrt())
}

/// Regime of a parameter set; `r_d = 0` counts as strong.
fn params_regime(params: &GbmParams) -> Regime {
    Regime::of(params.r_s(), params.r_d())
}

/// Expected degree `2 r_s (tau n - 1) + 2 r_d (1 - tau) n` of a community-one
/// node, and the mirror expression for community two.
pub fn expected_degree(params: &GbmParams, community: Community) -> f64 {
    let n = params.n() as f64;
    let (tau, r_s, r_d) = (params.tau(), params.r_s(), params.r_d());
    let own = match community {
        Community::One => tau,
        Community::Two => 1.0 - tau,
    };
    2.0 * n * ((1.0 - own) * r_d + own * r_s) - 2.0 * r_s
}

/// Leading-order expectations of the ordered sums over distinct triples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderedSums {
    /// `E[sum A_ij A_jk A_ki]`.
    pub triangle: f64,
    /// `E[sum A_ij A_ik]`.
    pub twopath: f64,
}

impl OrderedSums {
    pub fn ratio(&self) -> f64 {
        self.triangle / self.twopath
    }
}

/// `n^3`-leading expectations of the ordered triangle and 2-path sums.
pub fn expected_ordered_sums(params: &GbmParams) -> OrderedSums {
    let n3 = (params.n() as f64).powi(3);
    let (t, p) = ordered_sum_coefficients(params_regime(params), params.r_s(), params.r_d(), params.tau());
    OrderedSums {
        triangle: t * n3,
        twopath: p * n3,
    }
}

/// `n^2`-leading expectation of `sum_{j != k} A_ij A_jk A_ki` for a node `i`
/// in `community`.
pub fn expected_node_triangle_sum(params: &GbmParams, community: Community) -> f64 {
    let n2 = (params.n() as f64).powi(2);
    let (t, _) = node_coefficients(
        params_regime(params),
        params.r_s(),
        params.r_d(),
        params.tau(),
        community,
    );
    t * n2
}

/// One closed-form evaluation with the intermediate probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitEval {
    pub regime: Regime,
    pub global_limit: f64,
    pub average_limit: f64,
    pub triangle_prob_same: f64,
    pub triangle_prob_mixed: f64,
    /// Indexed like [`TwoPathPattern::ALL`].
    pub twopath_probs: [f64; 3],
}

/// Evaluates every limit for a radius pair.
pub fn evaluate(radii: Radii, tau: f64) -> Result<LimitEval, LimitError> {
    Ok(LimitEval {
        regime: radii.regime(),
        global_limit: global_cc_limit(radii, tau)?,
        average_limit: avg_cc_limit(radii, tau)?,
        triangle_prob_same: triangle_prob(radii, true),
        triangle_prob_mixed: triangle_prob(radii, false),
        twopath_probs: TwoPathPattern::ALL.map(|p| twopath_prob(radii, p)),
    })
}

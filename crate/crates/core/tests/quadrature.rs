//! Convergence and structure of the quadrature oracle at full resolution.

use gbm_lab::limits::{triangle_prob, twopath_prob};
use gbm_lab::quadrature::{
    anchor_invariance_check, triangle_prob_quadrature, twopath_prob_quadrature, QuadratureConfig, DEFAULT_GRID_M,
};
use gbm_lab::{Community, GbmParams, Radii, TwoPathPattern};
use Community::{One, Two};

const WEAK: [(f64, f64); 3] = [(0.1, 0.08), (0.1, 0.1), (0.15, 0.1)];
const STRONG: [(f64, f64); 3] = [(0.2, 0.08), (0.15, 0.05), (0.2, 0.1)];
const GRIDS: [usize; 6] = [256, 512, 1024, 2048, 4096, DEFAULT_GRID_M];

/// Indicator integrands make the midpoint error oscillate with the alignment
/// of the radii to the grid, so the deviation is not monotone in `m`. What
/// holds is first-order convergence: `m * deviation` stays bounded.
const RATE_CONSTANT: f64 = 2.0;

fn deviations(r_s: f64, r_d: f64) -> Vec<(String, usize, f64)> {
    let radii = Radii::new(r_s, r_d).unwrap();
    let mut out = Vec::new();
    for m in GRIDS {
        let cfg = QuadratureConfig::with_grid(m);
        for (labels, same) in [([One; 3], true), ([One, One, Two], false)] {
            let est = triangle_prob_quadrature(r_s, r_d, labels, &cfg).unwrap();
            out.push((
                format!("triangle same={same}"),
                m,
                (est - triangle_prob(radii, same)).abs(),
            ));
        }
        for pattern in TwoPathPattern::ALL {
            let est = twopath_prob_quadrature(r_s, r_d, pattern.representative(), &cfg).unwrap();
            out.push((
                format!("2-path {pattern}"),
                m,
                (est - twopath_prob(radii, pattern)).abs(),
            ));
        }
    }
    out
}

#[test]
fn deviation_shrinks_at_first_order() {
    for (r_s, r_d) in WEAK.into_iter().chain(STRONG) {
        for (case, m, dev) in deviations(r_s, r_d) {
            assert!(
                dev * m as f64 <= RATE_CONSTANT,
                "{case} r_s={r_s} r_d={r_d} m={m}: deviation {dev:e} exceeds {RATE_CONSTANT}/m"
            );
        }
    }
}

#[test]
fn pinned_node_does_not_matter() {
    let tol = 2.0 * RATE_CONSTANT / DEFAULT_GRID_M as f64;
    for (r_s, r_d) in WEAK.into_iter().chain(STRONG) {
        for labels in [[One, One, Two], [One, Two, Two], [One; 3]] {
            let at = |conditioned| {
                let cfg = QuadratureConfig {
                    conditioned,
                    ..Default::default()
                };
                triangle_prob_quadrature(r_s, r_d, labels, &cfg).unwrap()
            };
            let (first, third) = (at(0), at(2));
            assert!(
                (first - third).abs() <= tol,
                "{labels:?} r_s={r_s} r_d={r_d}: {first} vs {third}"
            );
        }
    }
}

#[test]
fn two_path_factorises_into_edge_probabilities() {
    let cfg = QuadratureConfig::default();
    for (r_s, r_d) in WEAK.into_iter().chain(STRONG) {
        let params = GbmParams::new(3, 1.0, r_s, r_d, 0).unwrap();
        for labels in [[One; 3], [One, One, Two], [One, Two, Two], [Two, One, Two]] {
            let product = 2.0 * params.radius_for(labels[0], labels[1]) * 2.0 * params.radius_for(labels[0], labels[2]);
            let est = twopath_prob_quadrature(r_s, r_d, labels, &cfg).unwrap();
            assert!(
                (est - product).abs() <= RATE_CONSTANT / DEFAULT_GRID_M as f64,
                "{labels:?} r_s={r_s} r_d={r_d}: {est} vs {product}"
            );
        }
    }
}

#[test]
fn anchor_examples() {
    let cfg = QuadratureConfig::default();
    let spread = anchor_invariance_check(0.1, 0.08, [One, One, Two], &[0.1, 0.5, 0.9], &cfg).unwrap();
    assert!(spread <= 1e-3, "{spread}");
    let spread = anchor_invariance_check(0.1, 0.1, [One, Two, One], &[0.0, 0.5], &cfg).unwrap();
    assert!(spread <= 1e-3, "{spread}");
}

#[test]
fn pinned_examples() {
    let cfg = QuadratureConfig::default();
    for (r_s, r_d, labels, expected) in [
        (0.1, 0.1, [One; 3], 0.03),
        (0.1, 0.08, [One, One, Two], 0.022),
        (0.2, 0.08, [One, Two, Two], 0.0256),
    ] {
        let est = triangle_prob_quadrature(r_s, r_d, labels, &cfg).unwrap();
        assert!((est - expected).abs() <= 5e-4, "{labels:?} r_s={r_s} r_d={r_d}: {est}");
    }
}

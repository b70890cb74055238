//! Deterministic midpoint-rule quadrature of edge-indicator products.
//!
//! One node is pinned at an anchor position and the other two range over an
//! `m x m` grid of cell midpoints on the circle. The integrand is evaluated
//! with [`edge_indicator`] only, so these estimates are independent of the
//! closed forms in [`crate::limits`]. Each row is an exact integer count,
//! which keeps the sum identical under any execution order.

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::model::{edge_indicator, Community, GbmParams, ParamError};

pub const DEFAULT_GRID_M: usize = 8192;
pub const MIN_GRID_M: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("grid-m: needs at least {MIN_GRID_M} points per axis (got {0})")]
    GridTooSmall(usize),
    #[error("anchor: must lie in [0, 1) (got {0})")]
    AnchorOutOfRange(f64),
    #[error("conditioned node must be 0, 1 or 2 (got {0})")]
    BadNode(usize),
    #[error("anchor invariance needs at least two anchors (got {0})")]
    TooFewAnchors(usize),
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Grid resolution and the pinned node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub grid_m: usize,
    pub anchor: f64,
    /// Which of the three nodes (0-based, node 0 is the 2-path centre) is
    /// pinned at `anchor`.
    pub conditioned: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            grid_m: DEFAULT_GRID_M,
            anchor: 0.5,
            conditioned: 0,
        }
    }
}

impl QuadratureConfig {
    pub fn with_grid(grid_m: usize) -> Self {
        QuadratureConfig {
            grid_m,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if self.grid_m < MIN_GRID_M {
            return Err(QuadratureError::GridTooSmall(self.grid_m));
        }
        if !(0.0..1.0).contains(&self.anchor) {
            return Err(QuadratureError::AnchorOutOfRange(self.anchor));
        }
        if self.conditioned > 2 {
            return Err(QuadratureError::BadNode(self.conditioned));
        }
        Ok(())
    }
}

const TRIANGLE: &[(usize, usize)] = &[(0, 1), (0, 2), (1, 2)];
const TWO_PATH: &[(usize, usize)] = &[(0, 1), (0, 2)];

fn integrate(
    r_s: f64,
    r_d: f64,
    labels: [Community; 3],
    motif: &[(usize, usize)],
    config: &QuadratureConfig,
    exec: Exec,
) -> Result<f64, QuadratureError> {
    config.validate()?;
    let params = GbmParams::new(3, 1.0, r_s, r_d, 0)?;
    let pinned = config.conditioned;
    // The outer node shares a motif edge with the pinned one, so whole rows
    // vanish whenever that edge is absent.
    let outer = motif
        .iter()
        .find_map(|&(a, b)| match (a == pinned, b == pinned) {
            (true, _) => Some(b),
            (_, true) => Some(a),
            _ => None,
        })
        .expect("every motif edge set touches all three nodes");
    let inner = 3 - pinned - outer;
    let m = config.grid_m;
    let h = 1.0 / m as f64;
    let linked = |x: &[f64; 3], a: usize, b: usize| edge_indicator(x[a], labels[a], x[b], labels[b], &params);

    let rows = exec.map(m, |i| {
        let mut x = [0.0; 3];
        x[pinned] = config.anchor;
        x[outer] = (i as f64 + 0.5) * h;
        if !linked(&x, pinned, outer) {
            return 0u64;
        }
        let mut count = 0u64;
        for j in 0..m {
            x[inner] = (j as f64 + 0.5) * h;
            if motif.iter().all(|&(a, b)| linked(&x, a, b)) {
                count += 1;
            }
        }
        count
    });
    let total: u64 = rows.iter().sum();
    Ok(total as f64 * h * h)
}

/// Estimate of `E[A_12 A_13 A_23 | X_c = anchor]`.
pub fn triangle_prob_quadrature(
    r_s: f64,
    r_d: f64,
    labels: [Community; 3],
    config: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    integrate(r_s, r_d, labels, TRIANGLE, config, Exec::default())
}

/// [`triangle_prob_quadrature`] with an explicit execution strategy.
pub fn triangle_prob_quadrature_with(
    r_s: f64,
    r_d: f64,
    labels: [Community; 3],
    config: &QuadratureConfig,
    exec: Exec,
) -> Result<f64, QuadratureError> {
    integrate(r_s, r_d, labels, TRIANGLE, config, exec)
}

/// Estimate of `E[A_12 A_13 | X_c = anchor]`, node 1 (index 0) being the centre.
pub fn twopath_prob_quadrature(
    r_s: f64,
    r_d: f64,
    labels: [Community; 3],
    config: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    integrate(r_s, r_d, labels, TWO_PATH, config, Exec::default())
}

/// Largest pairwise difference of the triangle estimate across `anchors`.
pub fn anchor_invariance_check(
    r_s: f64,
    r_d: f64,
    labels: [Community; 3],
    anchors: &[f64],
    config: &QuadratureConfig,
) -> Result<f64, QuadratureError> {
    if anchors.len() < 2 {
        return Err(QuadratureError::TooFewAnchors(anchors.len()));
    }
    let estimates = anchors
        .iter()
        .map(|&anchor| {
            let cfg = QuadratureConfig { anchor, ..*config };
            triangle_prob_quadrature(r_s, r_d, labels, &cfg)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max = estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = estimates.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

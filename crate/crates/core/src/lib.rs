//! Simulation and verification tools for clustering in the two-community
//! geometric block model (GBM).
//!
//! * [`model`] samples graphs and builds adjacency lists with a circular sweep.
//! * [`stats`] computes triangle counts and clustering coefficients exactly.
//! * [`limits`] evaluates the closed-form large-`n` limits.
//! * [`quadrature`] checks the triangle and 2-path probabilities numerically.
//! * [`experiment`] runs seeded Monte Carlo sweeps and writes CSV tables.
//! * [`cli`] is the command-line front end.

pub mod cli;
pub mod exec;
pub mod experiment;
pub mod limits;
pub mod model;
pub mod quadrature;
pub mod stats;

pub use exec::Exec;
pub use limits::{LimitError, LimitEval, Radii, Regime, TwoPathPattern};
pub use model::{AdjacencyList, Community, GbmParams, ParamError, SampledGraph};
pub use stats::{brute_force_stats, compute_stats, compute_stats_with, empirical_sums, ClusteringStats};

/// Formats a float with 17 significant digits, enough to round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

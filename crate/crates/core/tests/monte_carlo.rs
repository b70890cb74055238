//! Monte Carlo checks of the model against its expectations and limits.

use gbm_lab::experiment::{convergence_study, run_experiment, summarize, ExperimentConfig, RadiusRule};
use gbm_lab::limits::{h_of, RGG_LIMIT};
use gbm_lab::model::derive_seed;
use gbm_lab::{compute_stats, GbmParams, SampledGraph};

const MC_GAP_TOL: f64 = 0.02;

#[test]
fn edge_frequency_matches_twice_the_radius() {
    // Nodes 0, 1 share community one; node 3 is in community two.
    let params = GbmParams::new(4, 0.5, 0.1, 0.05, 0).unwrap();
    let trials = 40_000u64;
    let (mut same, mut diff) = (0u64, 0u64);
    for seed in 0..trials {
        let graph = SampledGraph::sample(&params.with_seed(derive_seed(5, &[seed])));
        same += graph.adjacent(0, 1) as u64;
        diff += graph.adjacent(0, 3) as u64;
    }
    for (hits, p) in [(same, 0.2), (diff, 0.1)] {
        let freq = hits as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * se, "frequency {freq} vs {p}");
    }
}

#[test]
fn plain_geometric_graph_approaches_three_quarters() {
    let params = GbmParams::new(4096, 1.0, 0.01, 0.01, 11).unwrap();
    let global = compute_stats(&SampledGraph::sample(&params).build_adjacency())
        .global_cc
        .unwrap();
    assert!((global - RGG_LIMIT).abs() <= MC_GAP_TOL, "{global}");
}

#[test]
fn average_coefficient_cross_check() {
    let config = ExperimentConfig {
        n_values: vec![8192],
        lambda_values: vec![5.0],
        tau_values: vec![0.3],
        r_d: RadiusRule::Fixed(0.01),
        replicates: 50,
        base_seed: 3,
        output_path: None,
    };
    let outcome = run_experiment(&config).unwrap();
    let summary = &summarize(&outcome.records)[0];
    let h = h_of(5.0, 0.3).unwrap();
    assert!((summary.average_limit - h).abs() <= 1e-12);
    assert!(
        summary.average_gap() <= MC_GAP_TOL,
        "mean {} vs {h}",
        summary.mean_average_cc
    );
    assert_eq!(summary.undefined, 0);
}

#[test]
fn error_shrinks_with_n() {
    let config = ExperimentConfig {
        n_values: vec![512, 2048, 8192],
        lambda_values: vec![2.0],
        tau_values: vec![0.5],
        r_d: RadiusRule::Fixed(0.02),
        replicates: 10,
        base_seed: 17,
        output_path: None,
    };
    let rows = convergence_study(&config).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [512, 2048, 8192]);
    let (first, last) = (&rows[0], &rows[2]);
    assert!(last.mean_abs_err_global < first.mean_abs_err_global, "{rows:?}");
    assert!(last.mean_abs_err_average < first.mean_abs_err_average, "{rows:?}");
    assert!(rows.iter().all(|r| r.undefined == 0 && r.used == 10));
}

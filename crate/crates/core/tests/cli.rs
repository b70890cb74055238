//! End-to-end tests of the `gbm-lab` binary: exit codes, files and output.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gbm_lab::model::read_dump;

fn gbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbm-lab"))
        .args(args)
        .env_remove("GBM_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&gbm(&["--help"])), 0);
    assert_eq!(code(&gbm(&["--version"])), 0);
    assert_eq!(code(&gbm(&[])), 1);
    assert_eq!(code(&gbm(&["bogus"])), 1);
}

#[test]
fn sample_writes_dump_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    for path in [&a, &b] {
        let out = gbm(&[
            "sample",
            "--n",
            "100",
            "--tau",
            "0.5",
            "--rs",
            "0.1",
            "--rd",
            "0.05",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stdout(&out).contains("edges: "));
        assert!(stdout(&out).contains("mean_degree: "));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let dump = read_dump(std::io::BufReader::new(fs::File::open(&a).unwrap())).unwrap();
    assert_eq!(dump.positions.len(), 100);
}

#[test]
fn invalid_parameters_exit_one_and_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("g.txt");
    let out = gbm(&[
        "sample",
        "--n",
        "10",
        "--tau",
        "0.5",
        "--rs",
        "0.05",
        "--rd",
        "0.1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("radius-order violation"), "{}", stderr(&out));
    for bad in ["NaN", "inf", "-inf"] {
        let out = gbm(&["limits", "--lambda", bad, "--tau", "0.5"]);
        assert_eq!(code(&out), 1, "{bad}");
    }
    let out = gbm(&["limits", "--lambda", "0.9", "--tau", "0.5"]);
    assert_eq!(code(&out), 1);
    let out = gbm(&["stats", "--n", "10", "--tau", "1.5", "--rs", "0.1", "--rd", "0.1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("tau"), "{}", stderr(&out));
}

#[test]
fn stats_from_dump_matches_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("g.txt");
    let flags = [
        "--n", "300", "--tau", "0.3", "--rs", "0.06", "--rd", "0.02", "--seed", "5",
    ];
    let mut args = vec!["sample"];
    args.extend(flags);
    args.extend(["--out", dump.to_str().unwrap()]);
    assert_eq!(code(&gbm(&args)), 0);
    let mut sampled = vec!["stats", "--json"];
    sampled.extend(flags);
    let a = gbm(&sampled);
    let b = gbm(&["stats", "--json", "--graph", dump.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn json_outputs_are_single_objects_with_all_fields() {
    for args in [
        vec!["limits", "--lambda", "4", "--tau", "0.5"],
        vec!["limits", "--rs", "0.1", "--rd", "0.04", "--tau", "0.3"],
        vec!["stats", "--n", "200", "--tau", "0.5", "--rs", "0.1", "--rd", "0.05"],
    ] {
        let human = stdout(&gbm(&args));
        let mut with_json = args.clone();
        with_json.push("--json");
        let raw = stdout(&gbm(&with_json));
        let value: serde_json::Value = serde_json::from_str(raw.trim()).unwrap();
        let obj = value.as_object().expect("a single JSON object");
        for line in human.lines() {
            let key = line.split(':').next().unwrap();
            assert!(obj.contains_key(key), "{args:?}: --json lacks {key}");
        }
    }
    let value: serde_json::Value =
        serde_json::from_str(stdout(&gbm(&["limits", "--lambda", "4", "--tau", "0.5", "--json"])).trim()).unwrap();
    assert!((value["global_limit"].as_f64().unwrap() - 0.6).abs() < 1e-15);
    assert!((value["lambda_star"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn oracle_check_exit_codes() {
    let out = gbm(&["oracle-check", "--grid-m", "63"]);
    assert_eq!(code(&out), 1);
    let out = gbm(&["oracle-check", "--grid-m", "1024"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("max_deviation"));
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("sweep.cfg");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn experiment_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.cfg");
    assert_eq!(code(&gbm(&["experiment", "--config", missing.to_str().unwrap()])), 1);

    let cfg = write_config(dir.path(), "n_values = 100\nlambda_values = 1\n");
    assert_eq!(code(&gbm(&["experiment", "--config", &cfg, "--out", "x.csv"])), 1);

    // r_s = 60 * 0.01 > 0.5 in every cell.
    let out_csv = dir.path().join("none.csv");
    let cfg = write_config(
        dir.path(),
        "n_values = 100\nlambda_values = 60\ntau_values = 0.5\nr_d = 0.01\nreplicates = 2\n",
    );
    let out = gbm(&["experiment", "--config", &cfg, "--out", out_csv.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out_csv = dir.path().join("some.csv");
    let cfg = write_config(
        dir.path(),
        "n_values = 200\nlambda_values = 2, 60\ntau_values = 0.5\nr_d = 0.01\nreplicates = 2\nbase_seed = 4\n",
    );
    let out = gbm(&[
        "experiment",
        "--config",
        &cfg,
        "--out",
        out_csv.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("skipped"));
    assert_eq!(fs::read_to_string(&out_csv).unwrap().lines().count(), 3);
}

#[test]
fn thread_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "n_values = 100\nlambda_values = 2\ntau_values = 0.5\nr_d = 0.01\nreplicates = 1\n",
    );
    let out_csv = dir.path().join("o.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_gbm-lab"))
        .args(["experiment", "--config", &cfg, "--out", out_csv.to_str().unwrap()])
        .env("GBM_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("GBM_LAB_THREADS"));
}

#[test]
fn figures_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = gbm(&["figures", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let fig1 = fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
    assert!(fig1
        .lines()
        .any(|l| l == "4.0000000000000000e0,5.9999999999999998e-1" || l.starts_with("4.0000000000000000e0,6")));
    // A regular file where the directory should be.
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = gbm(&["figures", "--out-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

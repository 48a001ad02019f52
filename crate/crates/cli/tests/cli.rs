use std::path::Path;
use std::process::{Command, Output};

use pmallows_cli::io::{load_clicks, load_rankings};
use pmallows_cli::table::{read_table, Format};

fn pmallows(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmallows"))
        .args(args)
        .env("PMALLOWS_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = pmallows(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_fit_and_recommend() {
    let dir = tempfile::tempdir().unwrap();
    let rankings = dir.path().join("r.csv");
    let clicks = dir.path().join("c.csv");
    ok(&[
        "simulate", "--n", "6", "--users", "80", "--alpha", "4", "--seed", "3",
        "--output", s(&rankings), "--clicks-output", s(&clicks), "--lambda", "2",
    ]);
    assert_eq!(load_rankings(&rankings).unwrap().n_users(), 80);
    assert_eq!(load_clicks(&clicks).unwrap().n_items(), 6);

    let samples = dir.path().join("samples.csv");
    let out = ok(&[
        "fit-rho", "-i", s(&rankings), "--alpha", "4", "--samples", "200", "-o", s(&samples),
    ]);
    assert!(out.contains("cp consensus: 1,2,3,4,5,6"), "{out}");
    assert_eq!(load_rankings(&samples).unwrap().n_users(), 200);

    let out = ok(&["fit-rho", "-i", s(&rankings), "--method", "mcmc", "--iters", "20000"]);
    assert!(out.contains("cp consensus: 1,2,3,4,5,6"), "{out}");
    let out = ok(&["fit-rho", "-i", s(&rankings), "--samples", "50"]);
    assert!(out.starts_with("cp consensus:"));

    let out = ok(&["fit-clicks", "-i", s(&clicks), "--alpha", "4", "--samples", "100"]);
    assert!(out.starts_with("cp consensus:"));

    let recs = dir.path().join("recs.csv");
    ok(&["recommend", "-i", s(&clicks), "--alpha", "4", "--samples", "100", "-k", "2", "-o", s(&recs)]);
    let text = std::fs::read_to_string(&recs).unwrap();
    assert_eq!(text.lines().next(), Some("user,item,probability"));
    assert_eq!(text.lines().count(), 1 + 80 * 2);
}

#[test]
fn ordering_commands() {
    let dir = tempfile::tempdir().unwrap();
    let rankings = dir.path().join("r.csv");
    ok(&["simulate", "--n", "4", "--users", "60", "--alpha", "2", "--output", s(&rankings)]);
    let v = ok(&["eval-kl", "-i", s(&rankings), "--alpha", "2", "--ordering", "3,1,2,4"]);
    let far = ok(&["eval-kl", "-i", s(&rankings), "--alpha", "2", "--ordering", "1,2,3,4"]);
    let kl = |out: &str| -> f64 {
        out.lines()
            .find_map(|l| l.strip_prefix("marginal kl: "))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(kl(&v) >= 0.0 && kl(&far) >= 0.0);
    let sampled = ok(&["eval-kl", "-i", s(&rankings), "--alpha", "2", "--mode", "sampled", "--draws", "300"]);
    assert!(kl(&sampled).is_finite());

    let trace = dir.path().join("trace.csv");
    let out = ok(&[
        "search-ordering", "-i", s(&rankings), "--alpha", "2", "--init", "1,2,3,4", "-o", s(&trace),
    ]);
    assert!(out.contains("best marginal kl"));
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("iteration,kl,v_distance"));
}

#[test]
fn experiment_from_config_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"kind": "full-timing", "n": 6, "n_users": 40, "alpha0": 2.0, "seed": 4,
            "replicates": 2, "pm_samples": [20, 40], "mcmc_iterations": [300, 600]}"#,
    )
    .unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.csv");
    ok(&["experiment", "full-timing", "-c", s(&cfg), "-o", s(&a)]);
    ok(&["--threads", "1", "experiment", "full-timing", "-c", s(&cfg), "-o", s(&b)]);
    let mut ta = read_table(Format::Json, &a).unwrap();
    let mut tb = read_table(Format::Csv, &b).unwrap();
    assert_eq!(ta.len(), 8);
    for r in ta.rows.iter_mut().chain(tb.rows.iter_mut()) {
        r.wall_clock = 0.0;
    }
    assert_eq!(ta, tb);

    let out = ok(&["experiment", "g-bias", "--n", "5", "--users", "1", "--alpha", "3"]);
    assert!(out.starts_with("experiment,replicate,method"));
}

#[test]
fn errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"kind": "g-bias", "n": 5, "n_users": 1, "alpha0": 2.0, "seed": 1, "bogus": 1}"#).unwrap();
    let out = pmallows(&["experiment", "g-bias", "-c", s(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let out = pmallows(&["experiment", "sigma-study", "-c", s(&cfg)]);
    assert!(!out.status.success());

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2,3\n3,3,1\n").unwrap();
    let out = pmallows(&["fit-rho", "-i", s(&bad), "--alpha", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

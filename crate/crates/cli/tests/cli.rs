use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use canoma::model::AllocationMatrix;
use canoma::{ChannelGains, NormalizedPowers, Objective, TargetKind, Weights};

fn canoma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canoma"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_run(dir: &Path) -> Output {
    canoma(&[
        "simulate",
        "--instances",
        "10",
        "--seed",
        "7",
        "--grid",
        "41,201",
        "--out-dir",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn missing_config_names_path() {
    let out = canoma(&[
        "simulate",
        "--config",
        "/nonexistent/run.json",
        "--instances",
        "1",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/run.json"), "{err}");
}

#[test]
fn bad_config_field_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"grid": {"grid_points_2d": "many"}}"#).unwrap();
    let out = canoma(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grid.grid_points_2d"), "{err}");
}

#[test]
fn simulate_writes_all_outputs_reproducibly() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = small_run(a.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(small_run(b.path()).status.success());
    for name in canoma::report::FIGURE_FILES {
        let x = fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name}");
        assert!(!x.is_empty());
    }
    let fig1 = fs::read_to_string(a.path().join("fig1.csv")).unwrap();
    assert_eq!(fig1.lines().count(), 11);
    assert!(a.path().join("manifest.json").exists());
    assert!(a.path().join("summary.json").exists());
}

#[test]
fn sweep_alias_and_figures_regeneration() {
    let a = tempfile::tempdir().unwrap();
    let out = canoma(&[
        "sweep",
        "--instances",
        "5",
        "--noise",
        "5e-11,5e-10",
        "--weights",
        "two-to-one",
        "--grid",
        "21,101",
        "--out-dir",
        a.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fig2 = fs::read_to_string(a.path().join("fig2.csv")).unwrap();
    assert_eq!(fig2.lines().count(), 3);

    let b = tempfile::tempdir().unwrap();
    let summary = a.path().join("summary.json");
    let out = canoma(&[
        "figures",
        "--summary",
        summary.to_str().unwrap(),
        "--out-dir",
        b.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for name in canoma::report::FIGURE_FILES {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn non_nested_grid_is_rejected() {
    let out = canoma(&["simulate", "--instances", "1", "--grid", "201,1000"]);
    assert!(!out.status.success());
}

fn instance_json(gains: &str) -> serde_json::Value {
    let out = canoma(&["instance", "--gains", gains, "--grid", "41,201", "--json"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn symmetric_fixture_has_zero_alpha() {
    let v = instance_json("2e-8,2e-8,2e-8,2e-8");
    assert_eq!(v["alpha"].as_f64().unwrap(), 0.0);
}

#[test]
fn dominant_fixture_selects_bs1_edges() {
    let v = instance_json("1e-7,1e-15,1e-8,1e-7");
    assert!((v["alpha"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["branch"], "bs_one_serves_user_one");
    let m = &v["method"];
    let (f11, f12) = (m["f11"].as_f64().unwrap(), m["f12"].as_f64().unwrap());
    assert!(
        f11 == 1.0 || f12 == 0.0,
        "method point ({f11}, {f12}) off the selected edges"
    );
}

#[test]
fn printed_value_re_evaluates_exactly() {
    let (g, noise) = ([[3e-12, 1e-12], [5e-13, 2e-12]], 5e-11);
    let v = instance_json(&format!("{},{},{},{}", g[0][0], g[0][1], g[1][0], g[1][1]));
    let gains = ChannelGains::two_by_two(g).unwrap();
    let powers = NormalizedPowers::from_watts(&[10.0, 10.0], noise).unwrap();
    for key in ["oracle", "method"] {
        let r = &v[key];
        let f = AllocationMatrix::two_user(r["f11"].as_f64().unwrap(), r["f12"].as_f64().unwrap())
            .unwrap();
        let (value, _) = Objective::new(TargetKind::Static)
            .best_over_orders(&f, &gains, &powers, &Weights::equal(2))
            .unwrap();
        assert_eq!(value, r["value"].as_f64().unwrap(), "{key}");
    }
}

#[test]
fn instance_text_block_lists_results() {
    let out = canoma(&["instance", "--index", "2", "--grid", "21,101"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for needle in [
        "user 1 at",
        "gains",
        "edges",
        "alpha",
        "oracle",
        "method",
        "rel_gap",
    ] {
        assert!(text.contains(needle), "missing {needle}: {text}");
    }
}

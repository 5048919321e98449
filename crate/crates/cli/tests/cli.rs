use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn beaconsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beaconsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL: &str =
    "duration = 20.0\nnode_count = 25\narea_a = 600.0\narea_b = 600.0\nflow_count = 3\n";

#[test]
fn run_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let file = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = beaconsim(&[
        "run",
        "--scenario",
        &file,
        "--out",
        out.to_str().unwrap(),
        "--trace",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "metrics.csv",
        "accuracy.csv",
        "energy.csv",
        "flows.csv",
        "beacons.csv",
        "mobility.csv",
    ] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let trace = fs::read_to_string(out.join("mobility.csv")).unwrap();
    assert!(trace.lines().any(|l| l == "time_s,node,x,y,vx,vy"));
}

#[test]
fn seed_flag_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = scenario(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, seed) in [(&a, "1"), (&b, "2")] {
        let o = beaconsim(&[
            "run",
            "--scenario",
            &file,
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_ne!(
        fs::read(a.join("metrics.csv")).unwrap(),
        fs::read(b.join("metrics.csv")).unwrap()
    );
}

#[test]
fn compare_and_sweep_emit_tables() {
    let dir = tempfile::tempdir().unwrap();
    let file = scenario(dir.path(), SMALL);
    let cmp = dir.path().join("cmp");
    let o = beaconsim(&[
        "compare",
        "--scenario",
        &file,
        "--strategies",
        "pb,apu",
        "--out",
        cmp.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(cmp.join("compare.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(cmp.join("APU").join("flows.csv").is_file());

    let sw = dir.path().join("sweep");
    let o = beaconsim(&[
        "sweep",
        "--scenario",
        &file,
        "--param",
        "speed_max",
        "--values",
        "5,10",
        "--replications",
        "2",
        "--strategies",
        "apu",
        "--out",
        sw.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(sw.join("sweep.csv").is_file() && sw.join("sweep_summary.csv").is_file());
}

#[test]
fn predict_prints_model_terms() {
    let o = beaconsim(&["predict", "--no-run"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("mean_distance_m"));
    assert!(text.contains("mean_hops"));
    let o = beaconsim(&["predict", "--no-run", "--gamma", "0.05"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("odl_beacons"));
}

#[test]
fn bad_input_exits_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let file = scenario(dir.path(), "radio_range = -5.0\n");
    let o = beaconsim(&[
        "run",
        "--scenario",
        &file,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("radio_range"));

    let file = scenario(dir.path(), "warp = 9\n");
    let o = beaconsim(&[
        "run",
        "--scenario",
        &file,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warp"));

    let o = beaconsim(&[
        "run",
        "--scenario",
        "/nonexistent/x.toml",
        "--out",
        "/tmp/x",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/x.toml"));

    let o = beaconsim(&["compare", "--strategies", "xyz", "--out", "/tmp/x"]);
    assert!(!o.status.success());
}

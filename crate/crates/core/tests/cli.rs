use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn monodens(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monodens"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn estimate_with_interval() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.txt"), "# sample\n1.0\n3.0\n\n").unwrap();
    let out = monodens(
        &[
            "estimate",
            "--data",
            "x.txt",
            "--functional",
            "power:2",
            "--ci",
            "0.9",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    // Levels 1/2 on (0, 1] and 1/4 on (1, 3]: 1/4 + 2/16.
    assert!((v["estimate"].as_f64().unwrap() - 0.375).abs() < 1e-15);
    assert_eq!(v["density"]["levels"], serde_json::json!([0.5, 0.25]));
    assert_eq!(v["ci"]["level"], 0.9);
    assert_eq!(v["n"], 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "1.0\n-2.0\n").unwrap();
    let out = monodens(
        &["estimate", "--data", "bad.txt", "--functional", "xz2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative"));

    fs::write(dir.path().join("ok.txt"), "1.0\n").unwrap();
    let out = monodens(
        &["estimate", "--data", "ok.txt", "--functional", "entropy"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power:<p>"));

    let out = monodens(
        &["uniform-clt", "--h", "identity", "--n", "50", "--reps", "2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));

    let out = monodens(&["simulate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_files_and_seed_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"scenario": {"kind": "exponential", "params": {"rate": 1.0}, "seed": 1},
            "functional": "power:2", "n": [300], "replications": 20}"#,
    )
    .unwrap();
    let run = |seed: &str, out: &str| {
        let o = monodens(
            &[
                "simulate",
                "--config",
                "c.json",
                "--seed",
                seed,
                "--out",
                out,
                "--threads",
                "2",
            ],
            dir.path(),
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        fs::read_to_string(
            dir.path()
                .join(out)
                .join("exponential_power-2_n300_statistics.csv"),
        )
        .unwrap()
    };
    let a = run("5", "a");
    let b = run("5", "b");
    let c = run("6", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with("replication,statistic\n"));
    assert_eq!(a.lines().count(), 21);
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("a/exponential_power-2_n300_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["reference"]["kind"], "normal");
    let qq = fs::read_to_string(dir.path().join("a/exponential_power-2_n300_qq.csv")).unwrap();
    assert_eq!(qq.lines().count(), 100);
}

#[test]
fn limit_sample_then_simulate_against_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"scenario": {"kind": "two_slope", "seed": 3}, "functional": "xz2",
            "n": [500], "replications": 10, "grid_size": 100}"#,
    )
    .unwrap();
    let out = monodens(
        &["limit-sample", "--config", "c.json", "--draws", "200"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["metadata"]["grid_size"], 100);
    assert_eq!(v["metadata"]["truncation"], 1.0);
    let path = dir.path().join(v["path"].as_str().unwrap());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# {"));
    assert_eq!(text.lines().count(), 202);

    fs::write(
        dir.path().join("s.json"),
        format!(
            r#"{{"scenario": {{"kind": "two_slope", "seed": 3}}, "functional": "xz2",
                "n": [500], "replications": 10,
                "reference": {{"kind": "limit_sample", "path": "{}"}}}}"#,
            path.display()
        ),
    )
    .unwrap();
    let out = monodens(&["simulate", "--config", "s.json"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v[0]["reference"]["kind"], "limit_sample");
    assert_eq!(v[0]["reference"]["draws"], 200);
}

#[test]
fn uniform_clt_reports_each_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = monodens(
        &[
            "uniform-clt",
            "--h",
            "power:3",
            "--n",
            "200,400",
            "--reps",
            "5",
            "--seed",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert!(dir
        .path()
        .join("out/uniform_power-3_n400_statistics.csv")
        .exists());
}

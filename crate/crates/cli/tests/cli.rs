use std::process::{Command, Output};

fn coalcost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coalcost"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_n2_totals_are_one() {
    let out = coalcost(&["simulate", "--n", "2", "--reps", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let totals: Vec<_> = rows
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["checkpoint"] == "total")
        .collect();
    assert_eq!(totals.len(), 6);
    for r in totals {
        let want = if r["functional"] == "displacement" {
            0.0
        } else {
            1.0
        };
        assert_eq!(r["mean"].as_f64(), Some(want), "{r}");
        assert_eq!(r["seed"], 1);
    }
}

#[test]
fn simulate_output_files_are_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let out = coalcost(&[
            "simulate",
            "--n",
            "500",
            "--reps",
            "40",
            "--seed",
            "9",
            "--workers",
            workers,
            "--out",
            p,
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "8"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n = 3\noracle = dp\nfunctional = predator,prey\n").unwrap();
    let out = coalcost(&["exact", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains(",predator,8/3,"), "{text}");
    assert!(text.contains(",prey,7/3,"), "{text}");

    let out = coalcost(&[
        "exact",
        "--config",
        cfg.to_str().unwrap(),
        "--oracle",
        "pmk",
    ]);
    assert!(stdout(&out).contains(",1,1/3,"));
}

#[test]
fn invalid_config_exits_with_usage_code_and_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    let out = coalcost(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "config");

    assert_eq!(coalcost(&["simulate", "--nope"]).status.code(), Some(1));
    assert_eq!(
        coalcost(&["simulate", "--embedding", "ring"]).status.code(),
        Some(1)
    );
}

#[test]
fn oracle_caps_are_named() {
    let out = coalcost(&["exact", "--oracle", "trees", "--n", "7"]);
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"], "oracle_cap");
    assert!(record["message"].as_str().unwrap().contains("n <= 6"));
}

#[test]
fn limit_prey_row() {
    let out = coalcost(&["limit", "--functional", "prey", "--alpha-grid", "0,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text
        .lines()
        .find(|l| l.contains(",5.0000000000000000e-1,prey,"))
        .unwrap();
    let phi: f64 = row.split(',').nth(7).unwrap().parse().unwrap();
    assert!((phi - std::f64::consts::LN_2).abs() < 1e-6);
}

#[test]
fn verify_only_and_mutation() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = coalcost(&[
        "verify",
        "--only",
        "oracle-equivalence",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["criteria"][0]["status"], "pass");
    assert_eq!(json["criteria"].as_array().unwrap().len(), 1);

    let out = coalcost(&["verify", "--only", "pmk-chi-square", "--mutate"]);
    assert_eq!(out.status.code(), Some(2));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["criteria"][0]["status"], "fail");
}

#[test]
fn sweep_runs() {
    let out = coalcost(&["sweep", "--n-list", "2,100", "--reps", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 3);
}

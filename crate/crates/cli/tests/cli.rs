use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nsregret"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nsregret-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_writes_csv_to_stdout() {
    let out = run(&["run", "--alg", "gd-fixed", "--env", "switching", "--gamma", "3", "-T", "50", "-K", "2", "--reps", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("step,cum_regret,alg,env,seed,rep"));
    assert_eq!(text.lines().count(), 1 + 2 * 50);
}

#[test]
fn run_is_deterministic_and_writes_plot() {
    let dir = scratch("det");
    let (a, b, svg) = (dir.join("a.csv"), dir.join("b.csv"), dir.join("a.svg"));
    for path in [&a, &b] {
        let out = run(&[
            "run", "--alg", "rerun-ucbv", "--env", "drifting", "--drift", "2", "--variance", "0.01",
            "-T", "300", "-K", "3", "--reps", "3", "--seed", "4", "--out", path.to_str().unwrap(),
            "--plot", svg.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(std::fs::read_to_string(&svg).unwrap().contains("</svg>"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch("config");
    let cfg = dir.join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"env": {"kind": "held", "losses": [0.5, 0.0]}, "alg": {"name": "fixed-arm", "arm": 1}, "T": 20, "K": 2}"#,
    )
    .unwrap();
    let out = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().nth(20).unwrap().starts_with("20,0,fixed-arm-1"));
    let out = run(&["run", "--config", cfg.to_str().unwrap(), "--arm", "0", "-T", "10"]);
    assert!(stdout(&out).lines().nth(10).unwrap().starts_with("10,5,fixed-arm-0"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_input_exits_nonzero() {
    assert!(!run(&["run", "--alg", "nope", "--env", "switching", "--gamma", "2", "-T", "5", "-K", "2"]).status.success());
    assert!(!run(&["run", "--alg", "prod", "--env", "drifting", "-T", "5", "-K", "2"]).status.success());
    assert!(!run(&["validate", "--suite", "nope"]).status.success());
}

#[test]
fn adversary_then_run_on_its_output() {
    let dir = scratch("adv");
    let seq = dir.join("seq.json");
    let out = run(&[
        "adversary", "--kind", "switching", "--target-alg", "uniform", "--mc-runs", "50",
        "-T", "400", "--gamma", "2", "--out", seq.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sidecar = dir.join("seq.json.diagnostics.json");
    let diag: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(sidecar).unwrap()).unwrap();
    assert_eq!(diag["kind"], "switching");
    assert!(diag["params"]["gamma"].as_u64().unwrap() <= 2);

    let out = run(&["run", "--alg", "prod", "--env-file", seq.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 401);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn fullinfo_adversaries() {
    let dir = scratch("full");
    let seq = dir.join("v.json");
    let out = run(&[
        "adversary", "--kind", "fullinfo-variance", "-K", "3", "-T", "200", "--gamma", "3",
        "--variance", "5", "--out", seq.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&[
        "adversary", "--kind", "fullinfo-gamma", "-K", "3", "-T", "200", "--gamma", "3",
        "--out", seq.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(!run(&["adversary", "--kind", "drifting", "-T", "100", "--out", seq.to_str().unwrap()]).status.success());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweep_and_plot() {
    let dir = scratch("sweep");
    let cfg = dir.join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"envs": [{"kind": "switching", "gamma": 2, "gap": 0.5}], "algs": [{"name": "gd-fixed"}, {"name": "uniform"}], "T": [50, 100], "K": 2}"#,
    )
    .unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--reps", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 5);

    let csv = dir.join("t.csv");
    let svg = dir.join("t.svg");
    assert!(run(&["run", "--alg", "uniform", "--env", "held", "--losses", "0.5,1", "-T", "40", "--reps", "3", "--out", csv.to_str().unwrap()]).status.success());
    assert!(run(&["plot", "--input", csv.to_str().unwrap(), "--out", svg.to_str().unwrap()]).status.success());
    assert!(std::fs::read_to_string(svg).unwrap().contains("uniform"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn validate_single_suite() {
    let out = run(&["validate", "--suite", "lemma1-conditions"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("PASS lemma1-conditions"));
    assert!(text.contains("1/1 suites passed"));
}

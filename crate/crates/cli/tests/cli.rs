use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wiretap() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wiretap"));
    c.env_remove("WIRETAP_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    wiretap().args(args).output().expect("spawn wiretap")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, m: usize, n1: usize, eaves: &[usize], trials: u64) -> String {
    let path = dir.join(format!("cfg-{m}-{n1}.json"));
    let body = serde_json::json!({
        "antennas": { "m": m, "n1": n1, "eavesdroppers": eaves },
        "trials": trials,
        "seed": 7,
    });
    fs::write(&path, body.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn sdof_examples() {
    for (m, n1, neve, want) in [
        ("4", "2", "3", "2/3"),
        ("2", "2", "5", "0"),
        ("5", "2", "2,2,1", "1"),
    ] {
        let o = run(&["sdof", "--m", m, "--n1", n1, "--neve", neve]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).split('\t').next(), Some(want));
    }
}

#[test]
fn sdof_json_has_exact_value() {
    let o = run(&[
        "sdof", "--m", "4", "--n1", "2", "--neve", "3", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n_max"], 3);
    assert!((v["decimal"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(
        run(&["sdof", "--m", "0", "--n1", "2", "--neve", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["sdof", "--m", "4", "--n1", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["converse", "--lemma", "nope"]).status.code(), Some(2));
    assert_eq!(
        run(&["ais", "--p", "1000000", "--m", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["simulate", "--config", "/nonexistent/cfg.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn empty_sweep_prints_comparison_header_only() {
    let o = run(&["tables", "--sweep", "0,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let comparison = text.split("# comparison.csv\n").nth(1).unwrap();
    assert_eq!(comparison.lines().filter(|l| !l.is_empty()).count(), 1);
    assert_eq!(run(&["tables", "--sweep", "1,2"]).status.code(), Some(2));
}

#[test]
fn tables_to_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let o = run(&["tables", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let comparison = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(comparison.contains("2/3"));
    assert!(out.join("achievability.csv").exists() && out.join("networks.csv").exists());
}

#[test]
fn simulate_passes_and_handles_zero_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 4, 2, &[3], 20);
    let o = run(&["simulate", "--config", &cfg]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(
        run(&["simulate", "--config", &cfg, "--trials", "0"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"antennas":{"m":4,"n1":2,"eavesdroppers":[3]},"bogus":1}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["simulate", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn converse_joint() {
    let o = run(&[
        "converse", "--lemma", "joint", "--n", "2,1,1", "--m", "4", "--trials", "100",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(
        run(&["converse", "--lemma", "joint", "--n", "2,1", "--m", "4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn ais_small_alphabet() {
    let o = run(&["ais", "--p", "4", "--m", "1", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["aligned"]["alphabet_size"], 3);
}

#[test]
fn out_dir_env_sets_default_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = wiretap()
        .env("WIRETAP_OUT_DIR", dir.path())
        .args(["ais", "--p", "4", "--samples", "5"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(dir.path().join("ais.json").exists());
}

#[test]
fn canonical_output_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 4, 2, &[3], 30);
    let outputs: Vec<_> = ["1", "4", "8"]
        .iter()
        .map(|w| {
            stdout(&run(&[
                "simulate",
                "--config",
                &cfg,
                "--workers",
                w,
                "--canonical",
            ]))
        })
        .collect();
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

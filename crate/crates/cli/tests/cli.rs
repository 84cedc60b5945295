use std::fs;
use std::path::Path;
use std::process::Command;

use moqa::ensemble::{instance_seed, sample_instance, sample_raw_instance};
use moqa::spectra::verify_theorem;
use moqa::{build_hp, Instance, MultiObjective, Normalization, Polynomial, ShiftMode};
use moqa_cli::{auto_p, manifest_path, run_with};
use serde_json::Value;

fn moqa(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("moqa").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn ok_json(args: &[&str]) -> Value {
    let (code, out, err) = moqa(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_matches_library_on_fig_instance() {
    // Seed 2 has p0 around 15; very small gaps push p past the f64 range.
    let seed = 2;
    let report = ok_json(&["verify", "--n", "6", "--gamma", "120", "--seed", "2"]);
    let mo = sample_instance(6, 120.0, seed, 1.0).unwrap();
    let p = auto_p(&mo).unwrap();
    let lib = verify_theorem(&mo, p).unwrap();
    assert_eq!(report, serde_json::to_value(&lib).unwrap());
    assert_eq!(report["same_ground_space"], Value::Bool(true));
    assert_eq!(report["p_used"].as_u64(), Some(p as u64));

    let (code, _, err) = moqa(&["verify", "--n", "6", "--gamma", "120", "--seed", "7"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("overflow"));
}

#[test]
fn verify_agrees_with_library_on_50_instances() {
    for i in 0..50u64 {
        let n = 4 + (i % 5) as usize;
        let gamma = if i % 2 == 0 { 6.0 } else { 120.0 };
        let seed = instance_seed(42, i);
        let p = 1 + (i % 9) as u32;
        let report = ok_json(&[
            "verify",
            "--n",
            &n.to_string(),
            "--gamma",
            &gamma.to_string(),
            "--seed",
            &seed.to_string(),
            "--p",
            &p.to_string(),
        ]);
        let mo = sample_instance(n, gamma, seed, 1.0).unwrap();
        let lib = verify_theorem(&mo, p).unwrap();
        assert_eq!(report, serde_json::to_value(&lib).unwrap(), "instance {i}");
    }
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for f in [&a, &b] {
        assert_eq!(
            moqa(&["gen", "--n", "8", "--seed", "11", "--out", path_str(f)]).0,
            0
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let inst: Instance = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(inst, sample_raw_instance(8, 120.0, 11, 1.0).unwrap());
    assert!(manifest_path(&a).exists());
}

#[test]
fn fig_sweep_has_eight_rows() {
    let (code, out, err) = moqa(&[
        "sweep",
        "--n",
        "6",
        "--gamma",
        "120",
        "--num-instances",
        "1000",
        "--p-min",
        "1",
        "--p-max",
        "8",
    ]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("n,p,epsilon,delta,violation_rate,mean_r,count")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[1], (k + 1).to_string());
        let eps: f64 = row[2].parse().unwrap();
        let delta: f64 = row[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&eps));
        assert!(delta.is_finite() && delta >= 0.0);
        assert_eq!(row[6], "1000");
    }
}

#[test]
fn manifest_rerun_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, extra) in [
        ("sweep", vec!["--p", "1,3"]),
        ("bin", vec!["--p", "2,4", "--bins", "0,0.05,inf"]),
        ("spectrum", vec!["--p", "3"]),
        ("build", vec!["--p", "2", "--basis", "ising"]),
    ] {
        let first = dir.path().join(format!("{cmd}-1.out"));
        let second = dir.path().join(format!("{cmd}-2.out"));
        let mut args = vec![
            cmd,
            "--n",
            "5",
            "--gamma",
            "6",
            "--seed",
            "9",
            "--num-instances",
            "40",
            "--workers",
            "3",
        ];
        args.extend(&extra);
        args.extend(["--out", path_str(&first)]);
        assert_eq!(moqa(&args).0, 0, "{cmd}");

        let manifest = manifest_path(&first);
        let recorded: Value = serde_json::from_slice(&fs::read(&manifest).unwrap()).unwrap();
        assert_eq!(recorded["cmd"], cmd);
        assert_eq!(recorded["seed"], 9);
        assert_eq!(recorded["version"], moqa::VERSION);

        let rerun = [
            cmd,
            "--config",
            path_str(&manifest),
            "--workers",
            "1",
            "--out",
            path_str(&second),
        ];
        assert_eq!(moqa(&rerun).0, 0, "{cmd} rerun");
        assert_eq!(
            fs::read(&first).unwrap(),
            fs::read(&second).unwrap(),
            "{cmd}"
        );
    }
}

#[test]
fn manifest_from_other_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    assert_eq!(moqa(&["gen", "--out", path_str(&out)]).0, 0);
    let (code, _, err) = moqa(&["sweep", "--config", path_str(&manifest_path(&out))]);
    assert_eq!(code, 1);
    assert!(err.contains("gen"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n": 4, "gamma": 6.0, "seed": 3, "p": [2]}"#).unwrap();
    let report = ok_json(&["verify", "--config", path_str(&cfg), "--seed", "4"]);
    let lib = verify_theorem(&sample_instance(4, 6.0, 4, 1.0).unwrap(), 2).unwrap();
    assert_eq!(report, serde_json::to_value(&lib).unwrap());
}

#[test]
fn transform_and_build_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    assert_eq!(
        moqa(&["gen", "--n", "5", "--seed", "21", "--out", path_str(&inst)]).0,
        0
    );

    let mo: MultiObjective =
        serde_json::from_value(ok_json(&["transform", "--input", path_str(&inst)])).unwrap();
    let expected = sample_raw_instance(5, 120.0, 21, 1.0)
        .unwrap()
        .to_multi_objective(ShiftMode::Exact)
        .unwrap();
    assert_eq!(mo, expected);

    let built: Polynomial = serde_json::from_value(ok_json(&[
        "build",
        "--input",
        path_str(&inst),
        "--p",
        "3",
        "--norm",
        "mean",
    ]))
    .unwrap();
    let hp = build_hp(&expected, 3, Normalization::Mean).unwrap();
    assert_eq!(&built, hp.symbolic().unwrap());

    // A transformed problem is accepted as input unchanged.
    let mo_file = dir.path().join("mo.json");
    fs::write(&mo_file, serde_json::to_vec(&expected).unwrap()).unwrap();
    let again: MultiObjective =
        serde_json::from_value(ok_json(&["transform", "--input", path_str(&mo_file)])).unwrap();
    assert_eq!(again.objectives(), expected.objectives());
}

#[test]
fn exit_codes_follow_error_class() {
    assert_eq!(moqa(&["gen", "--format", "csv"]).0, 1);
    assert_eq!(moqa(&["build"]).0, 1);
    assert_eq!(moqa(&["frobnicate"]).0, 1);
    assert_eq!(moqa(&["sweep", "--n", "40"]).0, 2);
    assert_eq!(
        moqa(&["build", "--n", "20", "--p", "8", "--budget", "1000"]).0,
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.json");
    let inst = Instance {
        n: 2,
        gamma: 1.0,
        objective: Polynomial::constant(2, 5.0),
        constraint: None,
        equality: None,
        shift_eta: 1.0,
    };
    fs::write(&flat, serde_json::to_vec(&inst).unwrap()).unwrap();
    let (code, _, err) = moqa(&["verify", "--input", path_str(&flat), "--p", "2"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.starts_with("error:"));
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_moqa");
    let ok = Command::new(bin)
        .args(["gen", "--n", "3"])
        .output()
        .unwrap();
    assert!(ok.status.success());
    serde_json::from_slice::<Instance>(&ok.stdout).unwrap();
    let bad = Command::new(bin)
        .args(["sweep", "--n", "30"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}

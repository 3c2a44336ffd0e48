use std::path::Path;
use std::process::{Command, Output};

fn qldpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qldpc")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_cn_reports_circuit() {
    let out = qldpc(&["verify-cn", "--w", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "16/16 match, gates=2, depth=1");
    let out = qldpc(&["verify-cn", "--w", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("64/64 match"));
}

#[test]
fn invalid_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.json");
    let base = ["design", "--dv", "3", "--dc", "6", "--wch", "3", "--ebno", "2", "--out", s(&spec)];
    let mut args = base.to_vec();
    args.extend(["--w", "1"]);
    assert_eq!(qldpc(&args).status.code(), Some(2));
    assert!(!spec.exists());
    assert_eq!(qldpc(&["verify-cn", "--w", "9"]).status.code(), Some(2));
    let missing = dir.path().join("nothing.alist");
    let csv = dir.path().join("x.csv");
    let out = qldpc(&["simulate", "--code", s(&missing), "--bp", "--ebno-list", "3", "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("code.alist");
    let spec = dir.path().join("spec.json");
    let out = qldpc(&["gencode", "--dv", "3", "--dc", "6", "--n", "240", "--seed", "4", "--out", s(&code)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = qldpc(&[
        "design", "--dv", "3", "--dc", "6", "--w", "3", "--wch", "3", "--ebno", "2.5", "--iters", "6",
        "--grid-points", "24", "--bins", "400", "--out", s(&spec),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = std::fs::read_to_string(dir.path().join("spec.json.trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 7);

    let mut csvs = Vec::new();
    for run in 0..2 {
        let csv = dir.path().join(format!("fer{run}.csv"));
        let out = qldpc(&[
            "simulate", "--code", s(&code), "--spec", s(&spec), "--ebno-list", "2.0,3.0", "--seed", "9",
            "--min-errors", "20", "--max-frames", "400", "--out", s(&csv),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(std::fs::read_to_string(&csv).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert!(csvs[0].starts_with("ebno_db,frames,bit_errors,frame_errors,ber,fer,fer_ci_lo,fer_ci_hi,mean_iters,seconds\n"));
    assert_eq!(csvs[0].lines().count(), 3);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fer0.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 9);
    let inputs = manifest["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 2);
    assert!(inputs.iter().all(|i| i["sha256"].as_str().unwrap().len() == 64));
}

#[test]
fn bp_simulation_runs_from_cli() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("code.alist");
    let csv = dir.path().join("bp.csv");
    assert_eq!(qldpc(&["gencode", "--dv", "3", "--dc", "6", "--n", "120", "--out", s(&code)]).status.code(), Some(0));
    let out = qldpc(&[
        "simulate", "--code", s(&code), "--bp", "--ebno-list", "8", "--max-frames", "50", "--out", s(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "50");
    assert_eq!(row[3], "0");
}

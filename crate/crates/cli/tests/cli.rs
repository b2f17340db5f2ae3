use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use sepcert_core::file::ChannelFile;
use sepcert_core::zoo;
use serde_json::Value;
use tempfile::TempDir;

fn sepcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepcert"))
        .args(args)
        .output()
        .expect("sepcert binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn gen(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    let mut args = vec!["gen", name, "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = sepcert(&args);
    assert_eq!(code(&out), 0, "gen {name}: {}", stderr(&out));
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_reports_completeness() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(&dir, "eq701", &["--mu", "0.45,0.779", "--phi", "0.4"]);
    let out = sepcert(&["verify", s(&file)]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["report"]["is_complete"], true);
    assert!(report["report"]["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn incomplete_family_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(&dir, "projective", &[]);
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    doc["members"].as_array_mut().unwrap().pop();
    std::fs::write(&file, doc.to_string()).unwrap();
    let out = sepcert(&["verify", s(&file)]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["report"]["is_complete"], false);
}

#[test]
fn certify_unique_and_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let fourier = gen(&dir, "fourier", &["--dims", "2,2,2"]);
    let out = sepcert(&["certify", s(&fourier), "--strategy", "all_bipartitions"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["status"], "unique");
    assert_eq!(report["strategy"], "all_bipartitions");
    assert_eq!(report["members"], 11);
    assert_eq!(report["tolerance"]["relative_rank_threshold"], 1e-10);

    let proj = gen(&dir, "projective", &[]);
    let out = sepcert(&["certify", s(&proj), "--strategy", "pairs"]);
    assert_eq!(code(&out), 4);
    let report = json(&out);
    assert_eq!(report["status"], "inconclusive");
    assert_eq!(report["witnesses"][0]["members"], serde_json::json!([1, 2]));
}

#[test]
fn certify_text_report_and_fast_fail() {
    let dir = tempfile::tempdir().unwrap();
    let proj = gen(&dir, "projective", &[]);
    let out = sepcert(&["certify", s(&proj), "--report", "text", "--fast-fail"]);
    assert_eq!(code(&out), 4);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("status: Inconclusive"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("witness")).count(), 1);
}

#[test]
fn enumeration_cap_exits_five() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(&dir, "fourier", &[]);
    let out = sepcert(&["certify", s(&file), "--max-subset", "4"]);
    assert_eq!(code(&out), 5);
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn hunt_finds_alternative_for_projectors() {
    let dir = tempfile::tempdir().unwrap();
    let proj = gen(&dir, "projective", &[]);
    let out = sepcert(&["hunt", s(&proj), "--subset", "1,2", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["found"], true);
    assert_eq!(report["novel"], true);
    assert_eq!(report["subset"], serde_json::json!([1, 2]));
    assert_eq!(report["candidate"]["kind"], "channel");
    assert_eq!(report["candidate"]["members"].as_array().unwrap().len(), 1);
}

#[test]
fn hunt_is_deterministic_and_negative_on_unique_channel() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(&dir, "eq701", &[]);
    let args = ["hunt", s(&file), "--seed", "5", "--restarts", "8"];
    let a = sepcert(&args);
    let b = sepcert(&args);
    assert_eq!(code(&a), 4);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["found"], false);
}

#[test]
fn hunt_rejects_bad_subsets() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(&dir, "eq701", &[]);
    for subset in ["0,1", "1,9", "2"] {
        let out = sepcert(&["hunt", s(&file), "--subset", subset]);
        assert_eq!(code(&out), 2, "subset {subset}");
    }
}

#[test]
fn tight_generator_writes_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(&dir, "tight", &["--n", "2", "--parties", "2", "--dim", "3"]);
    let side = dir.path().join("tight.coefficients.json");
    let coeffs: Value = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
    assert_eq!(coeffs["coefficients"].as_array().unwrap().len(), 5);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(file).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["generator"], "tight");
    assert_eq!(doc["metadata"]["seed"], 1);
}

#[test]
fn every_generator_produces_a_complete_channel() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["eq701", "fourier", "product-unitary", "pauli", "projective", "augment", "tight"] {
        let file = gen(&dir, name, &[]);
        let out = sepcert(&["verify", s(&file)]);
        let expect = if name == "tight" { 3 } else { 0 };
        assert_eq!(code(&out), expect, "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn augment_accepts_a_base_file() {
    let dir = tempfile::tempdir().unwrap();
    let base = gen(&dir, "pauli", &[]);
    let file = gen(&dir, "augment", &["--base", s(&base)]);
    let out = sepcert(&["certify", s(&file)]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["parties"], 4);
}

#[test]
fn choi_writes_ensemble_and_state() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(&dir, "eq701", &[]);
    let ens = dir.path().join("ens.json");
    let state = dir.path().join("state.json");
    let out = sepcert(&["choi", s(&file), "--out", s(&ens), "--state", s(&state)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rho: Value = serde_json::from_str(&std::fs::read_to_string(&state).unwrap()).unwrap();
    assert_eq!(rho["dims"], serde_json::json!([4, 4]));
    assert!((rho["trace"].as_f64().unwrap() - 4.0).abs() < 1e-10);
    let cert = sepcert(&["certify", s(&ens)]);
    assert_eq!(code(&cert), 0);
    assert_eq!(json(&cert)["kind"], "ensemble");
    assert_eq!(code(&sepcert(&["choi", s(&ens), "--out", s(&state)])), 2);
    assert_eq!(code(&sepcert(&["verify", s(&ens)])), 2);
}

#[test]
fn malformed_input_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"format_version\": 1,\n \"kind\": \"channel\",\n \"parties\": [").unwrap();
    let out = sepcert(&["certify", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    let missing = sepcert(&["verify", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn invalid_options_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(&dir, "eq701", &[]);
    assert_eq!(code(&sepcert(&["certify", s(&file), "--tol", "2"])), 2);
    assert_eq!(code(&sepcert(&["gen", "eq701", "--mu", "a,b", "--out", s(&file)])), 2);
    assert_eq!(code(&sepcert(&["gen", "projective", "--dims", "2,2,2", "--out", s(&file)])), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_sepcert"))
        .args(["verify", s(&file)])
        .env("SEPCERT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn half_identity_is_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("half.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let doc = serde_json::json!({
        "format_version": 1,
        "kind": "channel",
        "parties": [{"d_in": 2, "d_out": 2}],
        "members": [{"weight": [h, 0.0], "factors": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]}],
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = sepcert(&["verify", s(&path)]);
    assert_eq!(code(&out), 3);
    let residual = json(&out)["report"]["residual"].as_f64().unwrap();
    assert!((residual - 2f64.sqrt() / 2.0).abs() < 1e-12, "{residual}");
}

#[test]
fn hunt_seed_seven_examples() {
    let dir = tempfile::tempdir().unwrap();
    let proj = gen(&dir, "projective", &[]);
    let out = sepcert(&["hunt", s(&proj), "--subset", "1,2", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["novel"], true);
    let eq701 = gen(&dir, "eq701", &[]);
    for subset in ["1,2", "1,3", "2,3", "1,2,3"] {
        let out = sepcert(&["hunt", s(&eq701), "--subset", subset, "--seed", "7"]);
        assert_eq!(code(&out), 4, "subset {subset}");
    }
    assert_eq!(code(&sepcert(&["hunt", s(&eq701), "--restarts", "0"])), 2);
}

#[test]
fn generated_files_reload_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let half = Complex64::new(0.5, 0.0);
    let cases = [
        ("eq701", zoo::three_kraus_qubit_channel(half, 0.0).unwrap()),
        ("fourier", zoo::fourier_channel(&[2, 2]).unwrap()),
        ("product-unitary", zoo::random_product_unitary_channel(&[2, 2], 3, 1).unwrap()),
        ("pauli", zoo::pauli_example()),
        ("projective", zoo::projective_basis(2, 2).unwrap()),
        ("tight", zoo::tight_example(2, 2, 3, 1).unwrap().0),
    ];
    for (name, expect) in cases {
        let file = gen(&dir, name, &[]);
        let loaded = ChannelFile::load(&file).unwrap().to_family().unwrap();
        assert_eq!(loaded, expect, "{name}");
    }
}

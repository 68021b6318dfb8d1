//! End-to-end checks of the command-line surface: exit-code contract,
//! determinism of report bodies, and the documented error diagnostics.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symtrace"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().arg("--out").arg(dir).args(args).output().expect("spawn symtrace")
}

fn temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("symtrace-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn classify_sym_gradient_reports_all_yes_with_certificate() {
    let dir = temp_dir("classify");
    let out = run_in(&dir, &["classify", "--catalog", "sym_gradient", "--n", "2", "--seed", "7", "--quick"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("elliptic: Yes  cancelling: Yes  strongly_cancelling: Yes  c_elliptic: Yes"));
    assert!(stdout.contains("certificate degree: 2"));
    let report = std::fs::read_to_string(dir.join("sym_gradient.classification.json")).unwrap();
    assert!(report.contains("classification-report/v1"));
    assert!(report.contains("\"seed\": 7"));
}

#[test]
fn classify_laplacian_is_elliptic_non_cancelling() {
    let dir = temp_dir("laplacian");
    let out = run_in(&dir, &["classify", "--catalog", "laplacian", "--n", "3", "--seed", "3", "--quick"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("elliptic: Yes  cancelling: No"));
}

#[test]
fn malformed_spec_file_exits_2_with_diagnostic() {
    let dir = temp_dir("badspec");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"schema\": \"nope\"").unwrap();
    let out = run_in(&dir, &["classify", "--spec", bad.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.json"), "{stderr}");
}

#[test]
fn classification_reports_are_deterministic_and_append_only() {
    let dir = temp_dir("determinism");
    for _ in 0..2 {
        let out = run_in(&dir, &["classify", "--catalog", "gradient", "--n", "2", "--seed", "11", "--quick"]);
        assert!(out.status.success());
    }
    let first = std::fs::read(dir.join("gradient.classification.json")).unwrap();
    let second = std::fs::read(dir.join("gradient.classification.2.json")).unwrap();
    assert_eq!(first, second, "same config and seed must give byte-identical bodies");
}

#[test]
fn certificate_roundtrip_and_wirtinger_not_found() {
    let dir = temp_dir("cert");
    let out = run_in(&dir, &["certificate", "--catalog", "gradient", "--n", "2", "--seed", "5"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("certificate degree 1"), "{stdout}");
    assert!(dir.join("gradient.certificate.json").exists());

    let out = run_in(&dir, &["certificate", "--catalog", "wirtinger", "--n", "2", "--dmax", "6", "--seed", "5"]);
    assert!(out.status.success(), "not-found is still a completed run");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("not-found"), "{stdout}");
}

#[test]
fn emitted_spec_reloads_identically() {
    let dir = temp_dir("emitspec");
    let out = run_in(
        &dir,
        &["classify", "--catalog", "wirtinger", "--n", "2", "--seed", "2", "--quick", "--emit-spec"],
    );
    assert!(out.status.success());
    let spec_path = dir.join("wirtinger.operator.json");
    let out = run_in(&dir, &["classify", "--spec", spec_path.to_str().unwrap(), "--seed", "2", "--quick"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("cancelling: No"));
}

#[test]
fn fractal_generates_profile_and_rejects_bad_alpha() {
    let dir = temp_dir("fractal");
    let out = run_in(&dir, &["fractal", "--alpha", "0.6309", "--n", "1", "--level", "8", "--seed", "1", "--binary"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("atoms: 256"), "{stdout}");
    assert!(stdout.contains("ahlfors profile"));
    assert!(dir.join("cantor_a0.6309_n1_l8.json").exists());
    assert!(dir.join("cantor_a0.6309_n1_l8.msr").exists());

    let out = run_in(&dir, &["fractal", "--alpha", "2.5", "--n", "2", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_rejects_inadmissible_theta_with_quoted_range() {
    let dir = temp_dir("theta");
    let out = run_in(
        &dir,
        &[
            "verify", "multiplicative", "--catalog", "sym_gradient", "--n", "2", "--s", "0.95",
            "--theta", "0.9", "--seed", "1", "--resolution", "64", "--members", "2",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("19/21"), "range must be quoted exactly: {stderr}");
}

#[test]
fn verify_blowup_noncancelling_rejects_cancelling_operator() {
    let dir = temp_dir("nowitness");
    let out = run_in(
        &dir,
        &[
            "verify", "blowup-noncancelling", "--catalog", "sym_gradient", "--n", "2", "--s",
            "0.5", "--resolution", "64", "--levels", "3", "--seed", "2",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cancelling"), "{stderr}");
}

#[test]
fn demo_strict_discontinuity_prints_the_gap() {
    let dir = temp_dir("demo");
    let out = run_in(&dir, &["demo", "strict-discontinuity"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("interior trace of the strict limit: 0.5"));
    let csv = std::fs::read_to_string(dir.join("strict_discontinuity.csv")).unwrap();
    // every ramp has boundary trace exactly 1
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",1"), "{line}");
    }
}

#[test]
fn unknown_demo_exits_2() {
    let dir = temp_dir("unknowndemo");
    let out = run_in(&dir, &["demo", "strict-discontinuity", "--seed", "1"]);
    assert!(out.status.success());
    let out = bin().args(["demo", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

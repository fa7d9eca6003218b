//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one pass/fail line (run with `--nocapture` to see the margins live).

use std::process::Command;
use std::time::{Duration, Instant};

use dsar_core::verify::run_suite;

const SEED: u64 = 20260811;

/// Run the named suites, print per-check margins and one summary line, and
/// enforce the criterion's runtime budget.
fn run_criterion(tag: &str, suites: &[&str], budget: Duration) {
    let start = Instant::now();
    let mut all = true;
    for suite in suites {
        let reports = run_suite(suite, SEED).expect("suite must run");
        for report in &reports {
            for c in &report.checks {
                println!(
                    "  [{}] {} {}: {:.3e} {} {:.3e}",
                    report.suite,
                    if c.passed { "pass" } else { "FAIL" },
                    c.name,
                    c.observed,
                    c.op,
                    c.threshold
                );
                all &= c.passed;
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE {tag}: {} ({elapsed:.2?} of {budget:.0?} budget)",
        if all { "PASS" } else { "FAIL" }
    );
    assert!(all, "criterion {tag} failed");
    assert!(
        elapsed <= budget,
        "criterion {tag} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

#[test]
fn acceptance_01_derivative_identities() {
    run_criterion(
        "1 derivative identities at 1e-10 over 1000 samples per trajectory",
        &["identities"],
        Duration::from_secs(5),
    );
}

#[test]
fn acceptance_02_jacobian_oracle() {
    run_criterion(
        "2 closed-form right-projection determinant vs FD Jacobian",
        &["jacobian"],
        Duration::from_secs(10),
    );
}

#[test]
fn acceptance_03_forward_oracle_equivalence() {
    run_criterion(
        "3 windowed-transform oracle vs start-stop model, rel L2 < 1e-2",
        &["oracle"],
        Duration::from_secs(120),
    );
}

#[test]
fn acceptance_04_linear_path_artifact() {
    run_criterion(
        "4 linear-path mirror artifact and left-looking suppression",
        &["imaging-linear"],
        Duration::from_secs(300),
    );
}

#[test]
fn acceptance_05_circular_sigma() {
    run_criterion(
        "5 FD rank-drop locus matches the cubic; gradient margin positive",
        &["sigma"],
        Duration::from_secs(30),
    );
}

#[test]
fn acceptance_06_classification() {
    run_criterion(
        "6 fold/blowdown/cusp classification, zero misclassifications",
        &["classification"],
        Duration::from_secs(60),
    );
}

#[test]
fn acceptance_07_injectivity() {
    run_criterion(
        "7 injectivity inside the sufficient region plus stored counterexample",
        &["injectivity"],
        Duration::from_secs(10),
    );
}

#[test]
fn acceptance_08_circular_artifact_geometry() {
    run_criterion(
        "8 fiber partners differ in range; masked circular image artifact-free",
        &["fiber", "imaging-circular"],
        Duration::from_secs(300),
    );
}

#[test]
fn acceptance_09_determinism() {
    // The verify runner must produce identical reports for the same seed
    // regardless of thread count.
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out_dir = dir.path().join(format!("t{threads}"));
        let out = Command::new(env!("CARGO_BIN_EXE_dsar"))
            .args(["verify", "identities", "--seed", "42", "--threads", threads, "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let report = std::fs::read(out_dir.join("verify-identities.json")).unwrap();
        // Console check lines, excluding the line naming the output path.
        let stdout = String::from_utf8(out.stdout).unwrap();
        let lines: Vec<&str> = stdout
            .lines()
            .filter(|l| !l.contains("report written"))
            .collect();
        outputs.push((report, lines.join("\n")));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "JSON reports differ across thread counts");
    assert_eq!(outputs[0].1, outputs[1].1, "console reports differ across thread counts");
    println!("ACCEPTANCE 9 determinism across thread counts: PASS ({:.2?})", start.elapsed());
}

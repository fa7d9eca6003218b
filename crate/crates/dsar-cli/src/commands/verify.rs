//! `dsar verify`: run seeded invariant suites and report margins.

use std::path::Path;

use crate::commands::ensure_dir;
use crate::CliError;

pub fn run(suite: &str, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let reports = dsar_core::verify::run_suite(suite, seed)?;

    for report in &reports {
        for c in &report.checks {
            println!(
                "[{}] {} {}: {:.6e} {} {:.6e} ({})",
                report.suite,
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.observed,
                c.op,
                c.threshold,
                c.detail
            );
        }
        println!(
            "[{}] suite {}",
            report.suite,
            if report.passed { "PASS" } else { "FAIL" }
        );
    }

    if let Some(dir) = out {
        ensure_dir(dir)?;
        let path = dir.join(format!("verify-{suite}.json"));
        let body = serde_json::to_string_pretty(&reports)
            .map_err(|e| CliError::Io(format!("report serialization: {e}")))?;
        std::fs::write(&path, body + "\n").map_err(|e| CliError::Io(e.to_string()))?;
        println!("verify: report written to {}", path.display());
    }

    if reports.iter().all(|r| r.passed) {
        println!("verify: PASS ({} suite(s), seed {seed})", reports.len());
        Ok(())
    } else {
        println!("verify: FAIL (seed {seed})");
        Err(CliError::Check("one or more verification checks failed".to_string()))
    }
}

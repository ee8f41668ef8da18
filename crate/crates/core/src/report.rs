//! Persisting experiment reports and kernel heat maps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::{ExperimentReport, OutputFormat};
use crate::kernel::KernelMatrix;

const CSV_HEADER: &str =
    "num_qubits,num_cosets,trials,mean_variance,std_dev_variance,mean_expectation,theory_exact,theory_asymptotic,theory_limit";

/// Pretty JSON with a trailing newline.
pub fn report_json(report: &ExperimentReport) -> Result<String> {
    check_nonempty(report)?;
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// One row per `(N, m)` aggregate.
pub fn report_csv(report: &ExperimentReport) -> Result<String> {
    check_nonempty(report)?;
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for a in &report.aggregates {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            a.num_qubits,
            a.num_cosets,
            a.trials,
            a.mean_variance,
            a.std_dev_variance,
            a.mean_expectation,
            a.theory_exact,
            a.theory_asymptotic,
            a.theory_limit
        )
        .unwrap();
    }
    Ok(s)
}

fn check_nonempty(report: &ExperimentReport) -> Result<()> {
    if report.trials.is_empty() || report.aggregates.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn export_report(report: &ExperimentReport, path: &Path, format: OutputFormat) -> Result<()> {
    let contents = match format {
        OutputFormat::Json => report_json(report)?,
        OutputFormat::Csv => report_csv(report)?,
    };
    write(path, &contents)
}

/// Reads a JSON report written by [`export_report`].
pub fn import_report(path: &Path) -> Result<ExperimentReport> {
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: ExperimentReport = serde_json::from_str(&s)?;
    check_nonempty(&report)?;
    Ok(report)
}

pub fn export_heatmap(kernel: &KernelMatrix, path: &Path) -> Result<()> {
    write(path, &kernel.heatmap_csv())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_experiment, ExperimentConfig, Surface};

    fn small_report() -> ExperimentReport {
        let cfg = ExperimentConfig {
            qubits: "2..3".parse().unwrap(),
            cosets: vec![2],
            trials: 3,
            seed: 8,
            surface: Surface::Full,
            ..Default::default()
        };
        run_experiment(&cfg).unwrap().report
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let report = small_report();
        export_report(&report, &path, OutputFormat::Json).unwrap();
        assert_eq!(import_report(&path).unwrap(), report);
    }

    #[test]
    fn exports_are_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        export_report(&small_report(), &a, OutputFormat::Csv).unwrap();
        export_report(&small_report(), &b, OutputFormat::Csv).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        let text = fs::read_to_string(&a).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(CSV_HEADER));
    }

    #[test]
    fn empty_report_is_refused_and_no_file_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.json");
        let mut report = small_report();
        report.trials.clear();
        assert!(matches!(export_report(&report, &path, OutputFormat::Json), Err(Error::EmptyReport)));
        assert!(!path.exists());
    }

    #[test]
    fn io_errors_carry_path() {
        let err = export_report(&small_report(), Path::new("/nonexistent/dir/r.json"), OutputFormat::Json).unwrap_err();
        assert_eq!(err.kind(), "io");
        assert!(err.to_string().contains("/nonexistent/dir/r.json"));
    }
}

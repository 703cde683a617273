use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::runner::AggregateResult;

pub const CSV_HEADER: &str = "k,samples_used,mean_opt_err,mean_feas_err,violation_pct";

/// CSV text with 17 significant digits per float.
pub fn render_csv(result: &AggregateResult) -> String {
    let mut out = String::with_capacity(64 * (result.k.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..result.k.len() {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e}",
            result.k[i],
            result.samples_used[i],
            result.mean_optimality_error[i],
            result.mean_feasibility_error[i],
            100.0 * result.mean_violation_fraction[i],
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_csv(result: &AggregateResult, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(path, render_csv(result)).map_err(|e| HarnessError::io(path, e))
}

/// `run.csv` echoes its config to `run.csv.config.json`.
pub fn config_echo_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

pub fn write_config_echo(config: &ExperimentConfig, csv_path: &Path) -> Result<PathBuf> {
    let path = config_echo_path(csv_path);
    let mut text = config.to_json();
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_header_and_rows() {
        let result = AggregateResult {
            k: vec![0, 10],
            samples_used: vec![0, 60],
            mean_optimality_error: vec![1.0, 0.25],
            mean_feasibility_error: vec![0.5, 0.0],
            mean_violation_fraction: vec![1.0, 0.125],
            mean_ergodic_gap: None,
            trial_count: 1,
            failed_trials: vec![],
            trials: vec![],
        };
        let csv = render_csv(&result);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(
            lines[2],
            "10,60,2.5000000000000000e-1,0.0000000000000000e0,1.2500000000000000e1"
        );
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn echo_sits_next_to_the_csv() {
        assert_eq!(
            config_echo_path(Path::new("a/b.csv")),
            PathBuf::from("a/b.csv.config.json")
        );
    }
}

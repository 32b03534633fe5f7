//! Command-line harness for the formation-control library: scenario
//! execution with CSV/TOML artifacts, the verification suite driver, and
//! plot-data extraction.

pub mod config;
pub mod csvlog;
pub mod plot;
pub mod summary;

use config::ConfigFile;
use lff3d::{SimError, VerifyConfig, VerifyReport};
use std::path::{Path, PathBuf};

/// Named example scenarios compiled into the binary. The TOML sources live
/// under `presets/v1/` and ship with the crate.
pub const PRESETS: &[(&str, &str)] = &[
    ("hold", include_str!("../presets/v1/hold.toml")),
    ("three_stage", include_str!("../presets/v1/three_stage.toml")),
    ("three_stage_lag", include_str!("../presets/v1/three_stage_lag.toml")),
    ("abrupt_stop", include_str!("../presets/v1/abrupt_stop.toml")),
    ("lemniscate", include_str!("../presets/v1/lemniscate.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(#[from] lff3d::Error),
    #[error("{message} (partial log written to {log_path})")]
    Aborted { message: String, log_path: PathBuf },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot read log: {0}")]
    Log(#[from] csvlog::LogReadError),
    #[error(transparent)]
    Plot(#[from] plot::PlotError),
    #[error("unknown preset {0:?}; available: {}", preset_list())]
    UnknownPreset(String),
}

fn preset_list() -> String {
    PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Paths written by a successful simulate run.
#[derive(Debug)]
pub struct RunArtifacts {
    pub log_path: PathBuf,
    pub summary_path: PathBuf,
    pub config_path: PathBuf,
}

/// Parses a scenario config, runs it, and writes `log.csv`,
/// `summary.toml`, and the canonical `config.toml` echo into `out_dir`.
///
/// A runtime singularity still flushes the partial log and the config echo
/// before returning the error.
pub fn simulate_to_dir(config_text: &str, out_dir: &Path) -> Result<RunArtifacts, CliError> {
    let cfg = ConfigFile::parse(config_text)?;
    let scenario = cfg.to_scenario()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;
    let log_path = out_dir.join("log.csv");
    let summary_path = out_dir.join("summary.toml");
    let config_path = out_dir.join("config.toml");
    write_file(&config_path, &cfg.canonical())?;

    let log = match lff3d::run_scenario(&scenario) {
        Ok(log) => log,
        Err(SimError::FollowerSingularity { follower, tick, source, partial }) => {
            write_file(&log_path, &csvlog::render(&partial))?;
            return Err(CliError::Aborted {
                message: format!(
                    "follower {} hit a singular state at tick {tick}: {source}",
                    follower + 1
                ),
                log_path,
            });
        }
        Err(SimError::InvalidConfig(e)) => return Err(CliError::Invalid(e)),
    };

    let csv = csvlog::render(&log);
    write_file(&log_path, &csv)?;
    let bounds: Vec<Vec<usize>> =
        (0..log.follower_count).map(|i| cfg.stage_bounds(i)).collect();
    let summary = summary::summarize(&log, &csv, &bounds)?;
    write_file(&summary_path, &summary.to_toml())?;
    Ok(RunArtifacts { log_path, summary_path, config_path })
}

/// Runs `simulate` for a config file or a named preset.
pub fn simulate_command(
    config_path: Option<&Path>,
    preset_name: Option<&str>,
    out_dir: &Path,
) -> Result<RunArtifacts, CliError> {
    let text = match (config_path, preset_name) {
        (Some(path), None) => read_file(path)?,
        (None, Some(name)) => {
            preset(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?.to_string()
        }
        _ => {
            return Err(CliError::Invalid(lff3d::Error::InvalidParameter {
                what: "arguments",
                why: "pass exactly one of --config or --preset".to_string(),
            }))
        }
    };
    simulate_to_dir(&text, out_dir)
}

/// Runs the verification suite and renders one line per check.
pub fn verify_command(tol_scale: f64, seed: u64, quick: bool) -> (VerifyReport, String) {
    let mut config = VerifyConfig { tol_scale, seed, ..VerifyConfig::default() };
    if quick {
        config.state_samples = 500;
        config.qp_samples = 100;
    }
    let report = lff3d::run_verification(&config);
    let mut out = String::new();
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{status} {:<24} worst {:>10.3e}  tol {:>10.3e}  ({} samples)\n",
            check.name, check.worst, check.tolerance, check.samples
        ));
    }
    let verdict = if report.all_passed() { "all checks passed" } else { "CHECKS FAILED" };
    out.push_str(&format!("{verdict}\n"));
    (report, out)
}

/// Reads a tick log (plus the sibling `config.toml` when present, for
/// unsafe-region shading) and writes the plot panels into `out_dir`.
pub fn plotdata_command(log_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = read_file(log_path)?;
    let parsed = csvlog::ParsedLog::parse(&text)?;
    let config = log_path
        .parent()
        .map(|dir| dir.join("config.toml"))
        .filter(|p| p.is_file())
        .and_then(|p| std::fs::read_to_string(p).ok())
        .and_then(|t| ConfigFile::parse(&t).ok());
    std::fs::create_dir_all(out_dir)
        .map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;
    Ok(plot::write_plot_data(&parsed, config.as_ref(), out_dir)?)
}

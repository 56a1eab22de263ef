//! Global flags and the TOML config file. The file has one optional table per
//! subcommand with the same keys as its long flags (`n_ref` for `--n-ref`);
//! values given on the command line replace those from the file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Base seed for every Monte Carlo stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the number of CPUs); results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file with default values for the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Global settings after merging flags with the config file.
#[derive(Debug, Clone)]
pub struct Global {
    pub out: Option<PathBuf>,
    pub format: Format,
    /// `None` when neither the flag nor the file sets it.
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl GlobalArgs {
    pub fn merge(&self, file: &FileConfig) -> Global {
        Global {
            out: self.out.clone().or_else(|| file.out.clone()),
            format: self.format.or(file.format).unwrap_or_default(),
            seed: self.seed.or(file.seed),
            threads: self.threads.or(file.threads),
        }
    }
}

impl Global {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn install_thread_pool(&self) -> Result<(), CliError> {
        if let Some(k) = self.threads {
            if k == 0 {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub bounds: crate::bounds_cmd::BoundsArgs,
    pub validity: crate::validity_cmd::ValidityArgs,
    pub estimate: crate::estimate_cmd::EstimateArgs,
    pub validate: crate::validate_cmd::ValidateArgs,
    pub report: crate::report_cmd::ReportArgs,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Command-line value if given, else the file value.
pub fn pick<T>(cli: Option<T>, file: Option<T>) -> Option<T> {
    cli.or(file)
}

/// Command-line list if non-empty, else the file list.
pub fn pick_list<T>(cli: Vec<T>, file: Vec<T>) -> Vec<T> {
    if cli.is_empty() {
        file
    } else {
        cli
    }
}

pub fn require_nonempty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        Err(CliError::Usage(format!("--{name} must list at least one value")))
    } else {
        Ok(())
    }
}

pub fn check_hurst(values: &[f64]) -> Result<(), CliError> {
    for &h in values {
        if !(h > 0.0 && h <= 1.0) {
            return Err(CliError::Usage(format!("h = {h} is outside (0, 1]")));
        }
    }
    Ok(())
}

pub fn check_min(name: &str, values: &[u64], min: u64) -> Result<(), CliError> {
    for &v in values {
        if v < min {
            return Err(CliError::Usage(format!("{name} = {v} must be at least {min}")));
        }
    }
    Ok(())
}

pub fn check_positive(name: &str, values: &[f64]) -> Result<(), CliError> {
    for &v in values {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("{name} = {v} must be positive")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_are_defaults() {
        let file: FileConfig = toml::from_str("seed = 9\nformat = \"json\"\n[bounds]\nh = [0.25]\n").unwrap();
        let g = GlobalArgs { seed: Some(3), ..Default::default() }.merge(&file);
        assert_eq!(g.seed(), 3);
        assert_eq!(g.format, Format::Json);
        assert_eq!(file.bounds.h, vec![0.25]);
        assert!(toml::from_str::<FileConfig>("sed = 1").is_err());
    }
}

use clap::Args;
use serde::{Deserialize, Serialize};

use fbm_extremes::output::{fmt_f64, CsvTable};
use fbm_extremes_validation::{run_criteria, CriterionReport, Suite, ValidationConfig};

use crate::config::{check_positive, pick, pick_list, Global};
use crate::emit;
use crate::CliError;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateArgs {
    /// Suites to run (closed_form, sampling, monte_carlo, determinism); all by default.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub suite: Vec<Suite>,
    /// Multiplies every Monte Carlo sample count.
    #[arg(long)]
    pub scale: Option<f64>,
}

impl ValidateArgs {
    pub fn merge(self, file: Self) -> Self {
        Self { suite: pick_list(self.suite, file.suite), scale: pick(self.scale, file.scale) }
    }
}

/// One row per measurement: `id,suite,criterion_passed,role,name,value,target,lower,upper,passed`.
fn report_table(reports: &[CriterionReport]) -> Result<CsvTable, CliError> {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut t = CsvTable::new([
        "id",
        "suite",
        "criterion_passed",
        "role",
        "name",
        "value",
        "target",
        "lower",
        "upper",
        "passed",
    ]);
    for r in reports {
        let tagged = r
            .measurements
            .iter()
            .map(|m| ("measurement", m))
            .chain(r.diagnostics.iter().map(|m| ("diagnostic", m)));
        for (role, m) in tagged {
            t.push(vec![
                r.id.to_string(),
                r.suite.to_string(),
                r.passed.to_string(),
                role.into(),
                m.name.clone(),
                fmt_f64(m.value),
                opt(m.target),
                opt(m.lower),
                opt(m.upper),
                m.passed.to_string(),
            ])?;
        }
    }
    Ok(t)
}

pub fn run(global: &Global, args: ValidateArgs) -> Result<(), CliError> {
    let defaults = ValidationConfig::default();
    let cfg = ValidationConfig {
        seed: global.seed.unwrap_or(defaults.seed),
        scale: args.scale.unwrap_or(defaults.scale),
    };
    check_positive("scale", &[cfg.scale])?;
    let resolved = ValidateArgs {
        suite: if args.suite.is_empty() { Suite::ALL.to_vec() } else { args.suite },
        scale: Some(cfg.scale),
    };
    let meta = emit::meta("validate", global, cfg.seed, &resolved)?;
    let reports = run_criteria(&cfg, Some(&resolved.suite));
    for r in &reports {
        eprintln!("{}", r.detail());
    }
    emit::emit(global, &meta, &report_table(&reports)?, &reports)?;
    let failed: Vec<u32> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CriteriaFailed(failed))
    }
}

use clap::Args;
use serde::{Deserialize, Serialize};

use fbm_extremes::bounds::{alpha_star, validity_region, ValidityRegion, REPORTED_INTERVAL_H001_A16};
use fbm_extremes::output::{fmt_f64, CsvTable};
use fbm_extremes::HurstParam;

use crate::config::{check_hurst, check_positive, pick, pick_list, Global};
use crate::emit;
use crate::CliError;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidityArgs {
    /// Hurst parameters, each below 1/2.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub h: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub alpha: Vec<f64>,
    /// Report only the critical alpha when no grid is given.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub alpha_star: bool,
    /// Bisection tolerance for the critical alpha.
    #[arg(long)]
    pub tol: Option<f64>,
}

const DEFAULT_TOL: f64 = 1e-10;

impl ValidityArgs {
    pub fn merge(self, file: Self) -> Self {
        Self {
            h: pick_list(self.h, file.h),
            alpha: pick_list(self.alpha, file.alpha),
            alpha_star: self.alpha_star || file.alpha_star,
            tol: pick(self.tol, file.tol),
        }
    }

    fn resolve(mut self) -> Result<Self, CliError> {
        let tol = *self.tol.get_or_insert(DEFAULT_TOL);
        check_positive("tol", &[tol])?;
        let grid_given = !self.h.is_empty() || !self.alpha.is_empty();
        if !grid_given && !self.alpha_star {
            return Err(CliError::Usage("give --h and --alpha, or --alpha-star".into()));
        }
        if grid_given {
            if self.h.is_empty() || self.alpha.is_empty() {
                return Err(CliError::Usage("--h and --alpha must both list at least one value".into()));
            }
            check_hurst(&self.h)?;
            if let Some(h) = self.h.iter().find(|&&h| h >= 0.5) {
                return Err(CliError::Usage(format!("h = {h} must be below 1/2")));
            }
            check_positive("alpha", &self.alpha)?;
        }
        Ok(self)
    }
}

/// The interval stated in the literature for this point, where one exists.
fn reported_interval(r: &ValidityRegion) -> String {
    if (r.h - 0.01).abs() < 1e-12 && r.alpha == 16.0 {
        let (a, b) = REPORTED_INTERVAL_H001_A16;
        format!("{a}-{b}")
    } else {
        String::new()
    }
}

#[derive(Serialize)]
struct Results {
    alpha_star: f64,
    regions: Vec<ValidityRegion>,
}

pub fn run(global: &Global, args: ValidityArgs) -> Result<(), CliError> {
    let args = args.resolve()?;
    let meta = emit::meta("validity", global, global.seed(), &args)?;
    let a_star = alpha_star(args.tol.expect("set in resolve"))?;
    let mut regions = Vec::new();
    for &h in &args.h {
        for &alpha in &args.alpha {
            regions.push(validity_region(HurstParam::new(h)?, alpha)?);
        }
    }
    let table = if regions.is_empty() {
        let mut t = CsvTable::new(["alpha_star"]);
        t.push(vec![fmt_f64(a_star)])?;
        t
    } else {
        let mut t = CsvTable::new([
            "h",
            "alpha",
            "n_lower",
            "n_upper",
            "feasible_first",
            "feasible_last",
            "feasible_count",
            "alpha_star",
            "reported_interval",
        ]);
        for r in &regions {
            let (first, last) = r.feasible.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
            t.push(vec![
                fmt_f64(r.h),
                fmt_f64(r.alpha),
                fmt_f64(r.n_lower),
                fmt_f64(r.n_upper),
                first,
                last,
                r.feasible_count().to_string(),
                fmt_f64(a_star),
                reported_interval(r),
            ])?;
        }
        t
    };
    emit::emit(global, &meta, &table, &Results { alpha_star: a_star, regions })
}

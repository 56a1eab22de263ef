use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use fbm_extremes::bounds::{
    delta_lower, delta_upper, delta_upper_old, mh_lower, mh_upper, mn_upper, pickands_from_mh, pickands_ours,
    pickands_shao,
};
use fbm_extremes::output::{fmt_f64, CsvTable};
use fbm_extremes::HurstParam;

use crate::config::{check_hurst, check_min, check_positive, pick, pick_list, Global};
use crate::emit;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "kebab-case")]
pub enum Series {
    /// Pickands constant bounds against h.
    Pickands,
    /// Gap and grid-maximum bounds against n at fixed h.
    BoundsVsN,
    /// Bounds against h at fixed n.
    BoundsVsH,
    /// Monte Carlo points with 95% error bars from an `estimate` CSV.
    Mc,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportArgs {
    #[arg(value_enum)]
    pub series: Option<Series>,
    /// Fixed h for bounds-vs-n.
    #[arg(long)]
    pub h: Option<f64>,
    /// Grid sizes for bounds-vs-n (default 2, 4, ..., 2^20), or the single n for bounds-vs-h.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub n: Vec<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub h_min: Option<f64>,
    #[arg(long)]
    pub h_max: Option<f64>,
    #[arg(long)]
    pub h_step: Option<f64>,
    /// CSV written by `estimate` (mc series).
    #[arg(long)]
    pub input: Option<PathBuf>,
}

const DEFAULT_H: f64 = 0.25;
const DEFAULT_ALPHA: f64 = 2.0;
const DEFAULT_N_FOR_H: u64 = 1024;
/// Two-sided 95% normal quantile.
const Z_975: f64 = 1.959_963_984_540_054;

impl ReportArgs {
    pub fn merge(self, file: Self) -> Self {
        Self {
            series: pick(self.series, file.series),
            h: pick(self.h, file.h),
            n: pick_list(self.n, file.n),
            alpha: pick(self.alpha, file.alpha),
            h_min: pick(self.h_min, file.h_min),
            h_max: pick(self.h_max, file.h_max),
            h_step: pick(self.h_step, file.h_step),
            input: pick(self.input, file.input),
        }
    }

    fn resolve(mut self) -> Result<Self, CliError> {
        let series = self.series.ok_or_else(|| CliError::Usage("a series name is required".into()))?;
        match series {
            Series::Pickands | Series::BoundsVsH => {
                let lo = *self.h_min.get_or_insert(0.05);
                let hi = *self.h_max.get_or_insert(0.5);
                let step = *self.h_step.get_or_insert(0.05);
                check_hurst(&[lo, hi])?;
                check_positive("h-step", &[step])?;
                if lo > hi {
                    return Err(CliError::Usage(format!("h-min = {lo} exceeds h-max = {hi}")));
                }
            }
            Series::BoundsVsN => check_hurst(&[*self.h.get_or_insert(DEFAULT_H)])?,
            Series::Mc => {
                if self.input.is_none() {
                    return Err(CliError::Usage("the mc series needs --input".into()));
                }
            }
        }
        match series {
            Series::BoundsVsN => {
                if self.n.is_empty() {
                    self.n = (1..=20).map(|k| 1u64 << k).collect();
                }
                check_min("n", &self.n, 2)?;
                check_positive("alpha", &[*self.alpha.get_or_insert(DEFAULT_ALPHA)])?;
            }
            Series::BoundsVsH => {
                if self.n.is_empty() {
                    self.n = vec![DEFAULT_N_FOR_H];
                }
                if self.n.len() != 1 {
                    return Err(CliError::Usage("bounds-vs-h takes a single --n".into()));
                }
                check_min("n", &self.n, 2)?;
                check_positive("alpha", &[*self.alpha.get_or_insert(DEFAULT_ALPHA)])?;
            }
            Series::Pickands | Series::Mc => {}
        }
        Ok(self)
    }

    /// `h_min, h_min + step, ...` up to `h_max`, rounded to 12 decimals.
    fn h_grid(&self) -> Vec<f64> {
        let (lo, hi, step) = (self.h_min.unwrap(), self.h_max.unwrap(), self.h_step.unwrap());
        let count = ((hi - lo) / step + 1e-9).floor() as u64 + 1;
        (0..count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect()
    }
}

fn pickands(args: &ReportArgs) -> Result<CsvTable, CliError> {
    let mut t = CsvTable::new(["h", "improved", "shao", "from_mh", "ratio"]);
    for hv in args.h_grid() {
        let h = HurstParam::new(hv)?;
        let (ours, shao) = (pickands_ours(h), pickands_shao(h));
        let from_mh = pickands_from_mh(h, mh_upper(h).value).unwrap_or(f64::NAN);
        t.push(vec![fmt_f64(hv), fmt_f64(ours), fmt_f64(shao), fmt_f64(from_mh), fmt_f64(ours / shao)])?;
    }
    Ok(t)
}

fn bounds_vs_n(args: &ReportArgs) -> Result<CsvTable, CliError> {
    let h = HurstParam::new(args.h.unwrap())?;
    let alpha = args.alpha.unwrap();
    let mut t = CsvTable::new([
        "n",
        "upper_thm1",
        "upper_thm1_valid",
        "upper_old",
        "upper_old_valid",
        "lower_thm1",
        "mn_upper",
    ]);
    for &n in &args.n {
        let up = delta_upper(h, n, alpha)?;
        let old = delta_upper_old(h, n);
        t.push(vec![
            n.to_string(),
            fmt_f64(up.value),
            up.valid.to_string(),
            fmt_f64(old.value),
            old.valid.to_string(),
            fmt_f64(delta_lower(h, n)?.value),
            fmt_f64(mn_upper(h, n)?.value),
        ])?;
    }
    Ok(t)
}

fn bounds_vs_h(args: &ReportArgs) -> Result<CsvTable, CliError> {
    let n = args.n[0];
    let alpha = args.alpha.unwrap();
    let mut t = CsvTable::new([
        "h",
        "upper_thm1",
        "upper_thm1_valid",
        "upper_old",
        "upper_old_valid",
        "lower_thm1",
        "mn_upper",
        "mh_lower",
        "mh_upper",
    ]);
    for hv in args.h_grid() {
        let h = HurstParam::new(hv)?;
        let up = delta_upper(h, n, alpha)?;
        let old = delta_upper_old(h, n);
        t.push(vec![
            fmt_f64(hv),
            fmt_f64(up.value),
            up.valid.to_string(),
            fmt_f64(old.value),
            old.valid.to_string(),
            fmt_f64(delta_lower(h, n)?.value),
            fmt_f64(mn_upper(h, n)?.value),
            fmt_f64(mh_lower(h)),
            fmt_f64(mh_upper(h).value),
        ])?;
    }
    Ok(t)
}

#[derive(Debug, Deserialize)]
struct EstimateRecord {
    h: Option<f64>,
    n: u64,
    estimator: String,
    mean: f64,
    std_err: f64,
}

/// `h,estimator,x,y,y_err` with `x = n` and `y_err` the 95% half-width.
fn mc(args: &ReportArgs) -> Result<CsvTable, CliError> {
    let path = args.input.as_ref().unwrap();
    let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes.as_slice());
    let mut t = CsvTable::new(["h", "estimator", "x", "y", "y_err"]);
    for rec in reader.deserialize::<EstimateRecord>() {
        let r = rec.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        t.push(vec![
            r.h.map(fmt_f64).unwrap_or_default(),
            r.estimator,
            r.n.to_string(),
            fmt_f64(r.mean),
            fmt_f64(Z_975 * r.std_err),
        ])?;
    }
    if t.is_empty() {
        return Err(CliError::Usage(format!("{} has no estimate rows", path.display())));
    }
    Ok(t)
}

pub fn run(global: &Global, args: ReportArgs) -> Result<(), CliError> {
    let args = args.resolve()?;
    let meta = emit::meta("report", global, global.seed(), &args)?;
    let table = match args.series.unwrap() {
        Series::Pickands => pickands(&args)?,
        Series::BoundsVsN => bounds_vs_n(&args)?,
        Series::BoundsVsH => bounds_vs_h(&args)?,
        Series::Mc => mc(&args)?,
    };
    emit::emit(global, &meta, &table, &json_records(&table))
}

/// Table rows as JSON objects keyed by column; numeric and boolean cells are typed.
fn json_records(table: &CsvTable) -> Vec<serde_json::Map<String, serde_json::Value>> {
    use serde_json::Value;
    let cell = |s: &str| match s {
        "" => Value::Null,
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => match s.parse::<f64>() {
            Ok(x) if x.is_finite() => serde_json::json!(x),
            _ => Value::String(s.into()),
        },
    };
    table
        .rows()
        .iter()
        .map(|r| table.header().iter().cloned().zip(r.iter().map(|s| cell(s))).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_h_grid() {
        let a = ReportArgs { series: Some(Series::Pickands), ..Default::default() }.resolve().unwrap();
        let g = a.h_grid();
        assert_eq!(g.len(), 10);
        assert_eq!(g[2], 0.15);
        assert_eq!(g[9], 0.5);
    }
}

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use fbm_extremes::bounds::{
    delta_f_exp, delta_f_pow, delta_lower, delta_upper, delta_upper_lerch, delta_upper_old, mh_lower_report,
    mh_upper, mn_upper, pickands_from_mh_report, pickands_ours_report, pickands_shao_report, BoundKind,
    BoundReport, GapSetup,
};
use fbm_extremes::output::{bounds_table, BoundRow};
use fbm_extremes::HurstParam;

use crate::config::{check_hurst, check_min, check_positive, pick, pick_list, require_nonempty, Global};
use crate::emit;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `f(x) = exp(a x)`.
    Exp,
    /// `f(x) = x^p`.
    Pow,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsArgs {
    /// Hurst parameters.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub h: Vec<f64>,
    /// Grid sizes (needed by the gap and grid-maximum bounds).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub n: Vec<u64>,
    /// Refinement exponents (needed by upper_thm1, upper_thm1_lerch, delta_f).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub alpha: Vec<f64>,
    /// Bound kinds; defaults to every kind whose inputs are given, except delta_f.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub kind: Vec<BoundKind>,
    /// Relative tail tolerance of the exact series (upper_thm1_lerch).
    #[arg(long)]
    pub series_tol: Option<f64>,
    /// Functional for delta_f, evaluated with the gap replaced by upper_thm1.
    #[arg(long, value_enum)]
    pub functional: Option<Functional>,
    /// `a` for exp, `p` for pow.
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Value used in place of the unknown continuous maximum (default: mh_upper).
    #[arg(long)]
    pub mh_surrogate: Option<f64>,
}

const DEFAULT_SERIES_TOL: f64 = 1e-12;

fn needs_n(kind: BoundKind) -> bool {
    matches!(
        kind,
        BoundKind::GapUpperPrior
            | BoundKind::GapUpper
            | BoundKind::GapUpperSeries
            | BoundKind::GapLower
            | BoundKind::MnUpper
            | BoundKind::FunctionalGap
    )
}

fn needs_alpha(kind: BoundKind) -> bool {
    matches!(kind, BoundKind::GapUpper | BoundKind::GapUpperSeries | BoundKind::FunctionalGap)
}

impl BoundsArgs {
    pub fn merge(self, file: Self) -> Self {
        Self {
            h: pick_list(self.h, file.h),
            n: pick_list(self.n, file.n),
            alpha: pick_list(self.alpha, file.alpha),
            kind: pick_list(self.kind, file.kind),
            series_tol: pick(self.series_tol, file.series_tol),
            functional: pick(self.functional, file.functional),
            exponent: pick(self.exponent, file.exponent),
            mh_surrogate: pick(self.mh_surrogate, file.mh_surrogate),
        }
    }

    /// Fills defaults and checks every precondition before any bound is evaluated.
    fn resolve(mut self) -> Result<Self, CliError> {
        require_nonempty("h", &self.h)?;
        check_hurst(&self.h)?;
        if self.kind.is_empty() {
            self.kind = BoundKind::ALL
                .into_iter()
                .filter(|&k| k != BoundKind::FunctionalGap)
                .filter(|&k| !needs_n(k) || !self.n.is_empty())
                .filter(|&k| !needs_alpha(k) || !self.alpha.is_empty())
                .collect();
        }
        let mut seen = Vec::new();
        self.kind.retain(|k| {
            let new = !seen.contains(k);
            seen.push(*k);
            new
        });
        if self.kind.iter().any(|&k| needs_n(k)) {
            require_nonempty("n", &self.n)?;
            check_min("n", &self.n, 1)?;
        }
        if self.kind.contains(&BoundKind::GapLower) {
            check_min("n (lower_thm1)", &self.n, 2)?;
        }
        if self.kind.iter().any(|&k| needs_alpha(k)) {
            require_nonempty("alpha", &self.alpha)?;
            check_positive("alpha", &self.alpha)?;
        }
        if self.kind.contains(&BoundKind::GapUpperSeries) {
            let tol = *self.series_tol.get_or_insert(DEFAULT_SERIES_TOL);
            check_positive("series-tol", &[tol])?;
        }
        if self.kind.contains(&BoundKind::FunctionalGap) {
            let f = self
                .functional
                .ok_or_else(|| CliError::Usage("delta_f needs --functional exp|pow".into()))?;
            let e = self
                .exponent
                .ok_or_else(|| CliError::Usage("delta_f needs --exponent".into()))?;
            match f {
                Functional::Exp => check_positive("exponent", &[e])?,
                Functional::Pow if e < 1.0 => {
                    return Err(CliError::Usage(format!("exponent = {e} must be at least 1 for pow")))
                }
                Functional::Pow => {}
            }
            if let Some(s) = self.mh_surrogate {
                check_positive("mh-surrogate", &[s])?;
            }
        }
        Ok(self)
    }
}

/// A row whose bound could not be evaluated at this point; the reason is kept as a warning.
fn not_evaluated(kind: BoundKind, reason: String) -> BoundReport {
    BoundReport::new(kind, f64::NAN, vec![]).with_warning(reason)
}

fn functional_gap(args: &BoundsArgs, h: HurstParam, n: u64, alpha: f64) -> Result<BoundReport, CliError> {
    let delta = delta_upper(h, n, alpha)?;
    if !delta.valid {
        return Ok(not_evaluated(
            BoundKind::FunctionalGap,
            format!("gap bound invalid here: {}", delta.failed_conditions().join(";")),
        ));
    }
    let setup = GapSetup {
        h,
        n,
        delta: delta.value,
        mh_surrogate: args.mh_surrogate.unwrap_or_else(|| mh_upper(h).value),
    };
    let exponent = args.exponent.expect("checked in resolve");
    let r = match args.functional.expect("checked in resolve") {
        Functional::Exp => delta_f_exp(&setup, exponent),
        Functional::Pow => delta_f_pow(&setup, exponent),
    };
    Ok(r.unwrap_or_else(|e| not_evaluated(BoundKind::FunctionalGap, e.to_string())))
}

fn evaluate(args: &BoundsArgs) -> Result<Vec<BoundRow>, CliError> {
    let mut rows = Vec::new();
    for &hv in &args.h {
        let h = HurstParam::new(hv)?;
        for &kind in &args.kind {
            let report = match kind {
                BoundKind::MhUpper => mh_upper(h),
                BoundKind::MhLower => mh_lower_report(h),
                BoundKind::PickandsImproved => pickands_ours_report(h),
                BoundKind::PickandsShao => pickands_shao_report(h),
                BoundKind::PickandsFromMh => pickands_from_mh_report(h),
                _ => continue,
            };
            rows.push(BoundRow { h: hv, n: None, alpha: None, report });
        }
        for &n in &args.n {
            for &kind in &args.kind {
                let report = match kind {
                    BoundKind::GapUpperPrior => delta_upper_old(h, n),
                    BoundKind::GapLower => delta_lower(h, n)?,
                    BoundKind::MnUpper => mn_upper(h, n)?,
                    _ => continue,
                };
                rows.push(BoundRow { h: hv, n: Some(n), alpha: None, report });
            }
            for &alpha in &args.alpha {
                for &kind in &args.kind {
                    let report = match kind {
                        BoundKind::GapUpper => delta_upper(h, n, alpha)?,
                        BoundKind::GapUpperSeries => {
                            delta_upper_lerch(h, n, alpha, args.series_tol.expect("set in resolve"))?
                        }
                        BoundKind::FunctionalGap => functional_gap(args, h, n, alpha)?,
                        _ => continue,
                    };
                    rows.push(BoundRow { h: hv, n: Some(n), alpha: Some(alpha), report });
                }
            }
        }
    }
    Ok(rows)
}

pub fn run(global: &Global, args: BoundsArgs) -> Result<(), CliError> {
    let args = args.resolve()?;
    let meta = emit::meta("bounds", global, global.seed(), &args)?;
    let rows = evaluate(&args)?;
    emit::emit(global, &meta, &bounds_table(&rows), &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(h: &[f64], n: &[u64], alpha: &[f64], kind: &[BoundKind]) -> BoundsArgs {
        BoundsArgs { h: h.into(), n: n.into(), alpha: alpha.into(), kind: kind.into(), ..Default::default() }
    }

    #[test]
    fn default_kinds_follow_inputs() {
        let a = args(&[0.3], &[], &[], &[]).resolve().unwrap();
        assert!(a.kind.iter().all(|&k| !needs_n(k)));
        let a = args(&[0.3], &[16], &[2.0], &[]).resolve().unwrap();
        assert!(a.kind.contains(&BoundKind::GapUpperSeries));
        assert!(!a.kind.contains(&BoundKind::FunctionalGap));
    }

    #[test]
    fn missing_inputs_are_usage_errors() {
        assert!(args(&[], &[16], &[2.0], &[BoundKind::GapUpper]).resolve().is_err());
        assert!(args(&[0.3], &[], &[2.0], &[BoundKind::GapUpper]).resolve().is_err());
        assert!(args(&[0.3], &[1], &[], &[BoundKind::GapLower]).resolve().is_err());
        assert!(args(&[0.3], &[16], &[2.0], &[BoundKind::FunctionalGap]).resolve().is_err());
    }

    #[test]
    fn row_layout() {
        let a = args(&[0.25, 0.3], &[16, 32], &[2.0], &[BoundKind::MhUpper, BoundKind::GapUpper, BoundKind::MnUpper])
            .resolve()
            .unwrap();
        let rows = evaluate(&a).unwrap();
        // Per h: one h-only row, then per n one n-only row and one row per alpha.
        assert_eq!(rows.len(), 2 * (1 + 2 * 2));
        assert_eq!(rows[0].n, None);
        assert_eq!(rows[2].report.kind, BoundKind::GapUpper);
        assert_eq!(rows[2].alpha, Some(2.0));
    }

    #[test]
    fn functional_rows() {
        let mut a = args(&[0.5], &[1024], &[2.0], &[BoundKind::FunctionalGap]);
        a.functional = Some(Functional::Pow);
        a.exponent = Some(2.0);
        a.mh_surrogate = Some((2.0 / std::f64::consts::PI).sqrt());
        let rows = evaluate(&a.resolve().unwrap()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].report.value.is_finite() && rows[0].report.value > 0.0);
    }
}

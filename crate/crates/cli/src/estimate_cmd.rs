use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use fbm_extremes::bounds::IncrementTable;
use fbm_extremes::montecarlo::{
    delta_proxy, empirical_chatterjee, estimate_increment, estimate_max_iid_normals, estimate_mn, McConfig,
    McEstimate,
};
use fbm_extremes::output::{estimates_table, EstimateRow};
use fbm_extremes::sampler::SamplerMethod;
use fbm_extremes::HurstParam;

use crate::config::{check_hurst, check_min, pick, pick_list, require_nonempty, Global};
use crate::emit;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Estimator {
    /// Expected grid maximum.
    Mn,
    /// Coupled maxima over a grid and its m-fold refinement.
    Increment,
    /// Coupled difference between a reference grid and a coarser one.
    DeltaProxy,
    /// Expected maximum of n iid standard normals.
    IidNormals,
    /// Maxima of the fine grid vs the coarse grid held constant on blocks of m points.
    Chatterjee,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateArgs {
    #[arg(value_enum)]
    pub estimator: Option<Estimator>,
    /// Hurst parameters (ignored by iid_normals).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub h: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub n: Vec<u64>,
    /// Refinement factors (increment, chatterjee).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub m: Vec<u64>,
    /// Reference grid sizes (delta_proxy).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub n_ref: Vec<u64>,
    /// Paths per estimate.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub method: Option<SamplerMethod>,
}

const DEFAULT_SAMPLES: u64 = 10_000;

impl EstimateArgs {
    pub fn merge(self, file: Self) -> Self {
        Self {
            estimator: pick(self.estimator, file.estimator),
            h: pick_list(self.h, file.h),
            n: pick_list(self.n, file.n),
            m: pick_list(self.m, file.m),
            n_ref: pick_list(self.n_ref, file.n_ref),
            samples: pick(self.samples, file.samples),
            method: pick(self.method, file.method),
        }
    }

    fn resolve(mut self) -> Result<Self, CliError> {
        let est = self.estimator.ok_or_else(|| CliError::Usage("an estimator name is required".into()))?;
        self.samples.get_or_insert(DEFAULT_SAMPLES);
        self.method.get_or_insert(SamplerMethod::Circulant);
        require_nonempty("n", &self.n)?;
        check_min("n", &self.n, 1)?;
        if est != Estimator::IidNormals {
            require_nonempty("h", &self.h)?;
            check_hurst(&self.h)?;
        }
        match est {
            Estimator::Increment | Estimator::Chatterjee => {
                require_nonempty("m", &self.m)?;
                check_min("m", &self.m, 1)?;
            }
            Estimator::DeltaProxy => {
                require_nonempty("n-ref", &self.n_ref)?;
                for &n in &self.n {
                    for &r in &self.n_ref {
                        if r % n != 0 {
                            return Err(CliError::Usage(format!("n-ref = {r} is not a multiple of n = {n}")));
                        }
                    }
                }
            }
            Estimator::Mn | Estimator::IidNormals => {}
        }
        Ok(self)
    }

    fn config(&self, seed: u64) -> McConfig {
        McConfig::new(self.samples.expect("set in resolve"), seed).with_method(self.method.expect("set in resolve"))
    }
}

#[derive(Serialize)]
struct Record<T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    #[serde(flatten)]
    result: T,
}

fn record<T: Serialize>(h: Option<f64>, result: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(Record { h, result }).map_err(|e| CliError::Runtime(e.to_string()))
}

#[derive(Default)]
struct Output {
    records: Vec<serde_json::Value>,
    rows: Vec<EstimateRow>,
    paths: u64,
}

impl Output {
    fn row(&mut self, h: Option<f64>, n: u64, name: impl Into<String>, e: &McEstimate) {
        self.rows.push(EstimateRow::from_estimate(h, n, name, e));
    }

    /// A derived quantity whose samples are paired differences of `base`.
    fn derived(&mut self, h: f64, n: u64, name: String, mean: f64, std_err: f64, base: &McEstimate) {
        let mut e = *base;
        e.mean = mean;
        e.std_err = std_err;
        self.row(Some(h), n, name, &e);
    }
}

fn evaluate(args: &EstimateArgs, seed: u64) -> Result<Output, CliError> {
    let cfg = args.config(seed);
    let mut out = Output::default();
    let hs: Vec<Option<f64>> = match args.estimator.expect("set in resolve") {
        Estimator::IidNormals => vec![None],
        _ => args.h.iter().map(|&h| Some(h)).collect(),
    };
    for &hv in &hs {
        let h = hv.map(HurstParam::new).transpose()?;
        for &n in &args.n {
            match args.estimator.expect("set in resolve") {
                Estimator::Mn => {
                    let e = estimate_mn(h.expect("h given"), n, &cfg)?;
                    out.row(hv, n, "mn", &e);
                    out.paths += e.n_samples;
                    out.records.push(record(hv, &Mn { n, estimate: e })?);
                }
                Estimator::Increment => {
                    for &m in &args.m {
                        let e = estimate_increment(h.expect("h given"), n, m, &cfg)?;
                        let hv = hv.expect("h given");
                        out.row(Some(hv), n, "mn", &e.coarse);
                        out.row(Some(hv), n * m, "mn", &e.fine);
                        out.derived(hv, n, format!("increment_m{m}"), e.diff_mean, e.diff_std_err, &e.fine);
                        out.paths += e.fine.n_samples;
                        out.records.push(record(Some(hv), &e)?);
                    }
                }
                Estimator::DeltaProxy => {
                    for &n_ref in &args.n_ref {
                        let e = delta_proxy(h.expect("h given"), n, n_ref, &cfg)?;
                        let hv = hv.expect("h given");
                        out.derived(hv, n, format!("delta_proxy_nref{n_ref}"), e.proxy, e.se, &e.fine);
                        out.paths += e.fine.n_samples;
                        out.records.push(record(Some(hv), &e)?);
                    }
                }
                Estimator::IidNormals => {
                    let e = estimate_max_iid_normals(n, &cfg)?;
                    out.row(None, n, "iid_normals", &e.estimate);
                    out.paths += e.estimate.n_samples;
                    out.records.push(record(None, &e)?);
                }
                Estimator::Chatterjee => {
                    for &m in &args.m {
                        let h = h.expect("h given");
                        let size = usize::try_from(n * m)
                            .map_err(|_| CliError::Usage(format!("n·m = {n}·{m} is too large")))?;
                        let dx = IncrementTable::fbm_grid(h, size);
                        let dy = IncrementTable::fbm_coarsened(h, n as usize, m as usize);
                        let e = empirical_chatterjee(&dx, &dy, &cfg)?;
                        let hv = hv.expect("h given");
                        out.derived(hv, n, format!("chatterjee_lhs_m{m}"), e.lhs, e.lhs_se, &e.max_x);
                        out.paths += e.max_x.n_samples;
                        out.records.push(record(Some(hv), &Chatterjee { n, m, check: e })?);
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Mn {
    n: u64,
    #[serde(flatten)]
    estimate: McEstimate,
}

#[derive(Serialize)]
struct Chatterjee {
    n: u64,
    m: u64,
    #[serde(flatten)]
    check: fbm_extremes::montecarlo::ChatterjeeCheck,
}

pub fn run(global: &Global, args: EstimateArgs) -> Result<(), CliError> {
    let args = args.resolve()?;
    let seed = global.seed();
    let meta = emit::meta("estimate", global, seed, &args)?;
    let start = Instant::now();
    let out = evaluate(&args, seed)?;
    let secs = start.elapsed().as_secs_f64();
    eprintln!(
        "fbmx: {} paths in {secs:.3} s ({:.0} paths/s)",
        out.paths,
        out.paths as f64 / secs.max(1e-9)
    );
    emit::emit(global, &meta, &estimates_table(&out.rows), &out.records)
}

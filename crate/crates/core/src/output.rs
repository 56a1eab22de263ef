//! Plain-text serializations of paths, bound sweeps and estimates.
//!
//! Every document starts with a metadata block (tool name, version, resolved
//! config): `#`-prefixed lines in CSV, a `meta` object in JSON. Floats in CSV are
//! written with 17 significant digits so they round-trip exactly. Nothing
//! time-dependent is embedded, so equal inputs give byte-identical documents.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::bounds::BoundReport;
use crate::error::{FbmError, Result};
use crate::montecarlo::McEstimate;
use crate::process::FbmPath;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata embedded in every output document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
}

impl RunMeta {
    pub fn new(command: impl Into<String>, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            tool: TOOL_NAME.into(),
            version: VERSION.into(),
            command: command.into(),
            config: serde_json::to_value(config).map_err(io_err)?,
        })
    }
}

fn io_err(e: impl std::fmt::Display) -> FbmError {
    FbmError::Internal(format!("serialization failed: {e}"))
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// A CSV table with a metadata preamble.
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(FbmError::DimensionMismatch(format!(
                "row has {} fields, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self, meta: &RunMeta) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "# tool: {} {}", meta.tool, meta.version).map_err(io_err)?;
        writeln!(out, "# command: {}", meta.command).map_err(io_err)?;
        let config = serde_json::to_string(&meta.config).map_err(io_err)?;
        writeln!(out, "# config: {config}").map_err(io_err)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(io_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(io_err)?;
        }
        w.into_inner().map_err(io_err)
    }
}

/// `{"meta": …, "results": …}`, pretty-printed with a trailing newline.
pub fn json_document(meta: &RunMeta, results: &impl Serialize) -> Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        meta: &'a RunMeta,
        results: &'a T,
    }
    let mut out = serde_json::to_vec_pretty(&Doc { meta, results }).map_err(io_err)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`, so a
/// failed run never leaves a truncated file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

/// One path as `t,value`.
pub fn path_table(path: &FbmPath) -> CsvTable {
    let mut t = CsvTable::new(["t", "value"]);
    for (x, v) in path.iter() {
        t.rows.push(vec![fmt_f64(x), fmt_f64(v)]);
    }
    t
}

/// Several paths in long format `path_id,t,value`.
pub fn paths_long_table(paths: &[FbmPath]) -> CsvTable {
    let mut t = CsvTable::new(["path_id", "t", "value"]);
    for (id, p) in paths.iter().enumerate() {
        for (x, v) in p.iter() {
            t.rows.push(vec![id.to_string(), fmt_f64(x), fmt_f64(v)]);
        }
    }
    t
}

/// A bound evaluated at one grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub h: f64,
    pub n: Option<u64>,
    pub alpha: Option<f64>,
    pub report: BoundReport,
}

/// `h,n,alpha,kind,value,valid,conditions_failed`; failed conditions joined by `;`.
pub fn bounds_table(rows: &[BoundRow]) -> CsvTable {
    let mut t = CsvTable::new(["h", "n", "alpha", "kind", "value", "valid", "conditions_failed"]);
    for r in rows {
        t.rows.push(vec![
            fmt_f64(r.h),
            r.n.map(|n| n.to_string()).unwrap_or_default(),
            fmt_opt(r.alpha),
            r.report.kind.to_string(),
            fmt_f64(r.report.value),
            r.report.valid.to_string(),
            r.report.failed_conditions().join(";"),
        ]);
    }
    t
}

/// One estimate in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub h: Option<f64>,
    pub n: u64,
    pub estimator: String,
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl EstimateRow {
    pub fn from_estimate(h: Option<f64>, n: u64, estimator: impl Into<String>, e: &McEstimate) -> Self {
        Self {
            h,
            n,
            estimator: estimator.into(),
            mean: e.mean,
            std_err: e.std_err,
            n_samples: e.n_samples,
            seed: e.seed,
        }
    }
}

/// `h,n,estimator,mean,std_err,n_samples,seed`.
pub fn estimates_table(rows: &[EstimateRow]) -> CsvTable {
    let mut t = CsvTable::new(["h", "n", "estimator", "mean", "std_err", "n_samples", "seed"]);
    for r in rows {
        t.rows.push(vec![
            fmt_opt(r.h),
            r.n.to_string(),
            r.estimator.clone(),
            fmt_f64(r.mean),
            fmt_f64(r.std_err),
            r.n_samples.to_string(),
            r.seed.to_string(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::delta_upper;
    use crate::process::{HurstParam, UniformGrid};
    use crate::rng::RandomStream;
    use crate::sampler::{FbmSampler, SamplerMethod};

    fn meta() -> RunMeta {
        RunMeta::new("test", &serde_json::json!({"h": [0.25]})).unwrap()
    }

    #[test]
    fn floats_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn path_csv_layout() {
        let h = HurstParam::new(0.3).unwrap();
        let s = FbmSampler::new(h, UniformGrid::new(4).unwrap(), SamplerMethod::Cholesky).unwrap();
        let p = s.sample(&mut RandomStream::new(1, 0));
        let text = String::from_utf8(path_table(&p).to_bytes(&meta()).unwrap()).unwrap();
        let lines: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], "t,value");
        assert_eq!(lines.len(), 5);
        let last: Vec<f64> = lines[4].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last, vec![1.0, p.values[3]]);

        let long = paths_long_table(&[p.clone(), p]);
        assert_eq!(long.len(), 8);
    }

    #[test]
    fn bounds_csv_quotes_and_meta() {
        let h = HurstParam::new(0.25).unwrap();
        let rows = vec![
            BoundRow { h: 0.25, n: Some(16), alpha: Some(2.0), report: delta_upper(h, 16, 2.0).unwrap() },
            BoundRow { h: 0.25, n: Some(2), alpha: Some(2.0), report: delta_upper(h, 2, 2.0).unwrap() },
        ];
        let bytes = bounds_table(&rows).to_bytes(&meta()).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("# tool: fbm-extremes"));
        assert!(text.contains("# config: {\"h\":[0.25]}"));
        assert!(text.contains("h,n,alpha,kind,value,valid,conditions_failed"));
        assert!(text.contains(",upper_thm1,"));
        assert_eq!(bytes, bounds_table(&rows).to_bytes(&meta()).unwrap());

        let json = String::from_utf8(json_document(&meta(), &rows).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["results"][0]["report"]["valid"], true);
        assert_eq!(v["meta"]["command"], "test");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"a").unwrap();
        write_atomic(&p, b"b").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"b");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn row_length_checked() {
        let mut t = CsvTable::new(["a", "b"]);
        assert!(t.push(vec!["1".into()]).is_err());
        assert!(t.push(vec!["1".into(), "2".into()]).is_ok());
    }
}

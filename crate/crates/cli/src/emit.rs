//! Writes a finished document to `--out` or stdout. Nothing is written before
//! every computation of the command has succeeded.

use std::io::Write;

use serde::Serialize;

use fbm_extremes::output::{json_document, write_atomic, CsvTable, RunMeta};

use crate::config::{Format, Global};
use crate::CliError;

pub fn meta(command: &str, global: &Global, seed: u64, resolved: &impl Serialize) -> Result<RunMeta, CliError> {
    // `out` and `threads` do not affect results and are left out so that reruns
    // that differ only in them produce identical files.
    #[derive(Serialize)]
    struct Echo<'a, T> {
        seed: u64,
        format: Format,
        #[serde(flatten)]
        args: &'a T,
    }
    RunMeta::new(command, &Echo { seed, format: global.format, args: resolved })
        .map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn emit(global: &Global, meta: &RunMeta, table: &CsvTable, json: &impl Serialize) -> Result<(), CliError> {
    let bytes = match global.format {
        Format::Csv => table.to_bytes(meta),
        Format::Json => json_document(meta, json),
    }
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    match &global.out {
        Some(path) => write_atomic(path, &bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| CliError::Runtime(format!("stdout: {e}"))),
    }
}

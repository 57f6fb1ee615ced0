// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV datasets and output sinks.
//!
//! A dataset file has a header row and one instance per row: `d` columns
//! for mean-squared data, `d` features plus a trailing label otherwise.

use std::io::Write;
use std::path::Path;

use newton_unlearn::{Instance, LossKind, LossModel};
use serde::Serialize;

use crate::error::CliError;

/// Reads and validates every row of a dataset CSV against `loss`.
pub fn read_instances(path: &Path, loss: &LossModel) -> Result<Vec<Instance>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    parse_instances(file, loss).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_instances<R: std::io::Read>(reader: R, loss: &LossModel) -> Result<Vec<Instance>, CliError> {
    let d = loss.dimension();
    let supervised = loss.kind() != LossKind::MeanSquared;
    let width = d + usize::from(supervised);
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);

    let header = rdr.headers().map_err(|e| CliError::Input(e.to_string()))?;
    if header.len() != width {
        return Err(CliError::Input(format!(
            "header has {} columns, expected {width}",
            header.len()
        )));
    }
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| CliError::Input(format!("line {line}: {e}")))?;
        let values = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Input(format!("line {line}: `{s}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let z = if supervised {
            Instance::labeled(values[..d].iter().copied(), values[d])
        } else {
            Instance::point(values)
        };
        loss.check_instance(&z)
            .map_err(|e| CliError::Input(format!("line {line}: {e}")))?;
        out.push(z);
    }
    Ok(out)
}

/// Writes `bytes` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Input(format!("cannot write output: {e}"));
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(fail)?;
            }
            std::fs::write(p, bytes).map_err(fail)
        }
        None => std::io::stdout().lock().write_all(bytes).map_err(fail),
    }
}

/// Serializes rows as CSV with a header taken from the row's field names.
/// Floats use the shortest representation that round-trips.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Input(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Input(e.to_string()))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s.into_bytes()
}

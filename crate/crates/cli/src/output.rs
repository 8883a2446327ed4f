//! Tabular output (CSV or JSON) and run-config serialization.
//!
//! CSV follows RFC 4180 with a mandatory header row; floats are printed
//! with 17 significant digits so they parse back bit-exactly. Every run
//! serializes its fully resolved configuration: embedded under `config`
//! for JSON outputs, as a `<out>.run.json` sidecar for CSV.

use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use crate::RowFormat;

/// 17-significant-digit float, empty string for absent table cells.
pub fn cell_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn cell_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes rows of (header, stringified fields) as CSV, or as a JSON
/// document `{config, rows}` keyed by the header names.
pub fn write_table<C: Serialize>(
    out: &Path,
    format: RowFormat,
    config: &C,
    header: &[&str],
    rows: &[Vec<String>],
) -> anyhow::Result<()> {
    match format {
        RowFormat::Csv => {
            let mut w = csv::Writer::from_path(out)
                .with_context(|| format!("creating {}", out.display()))?;
            w.write_record(header)?;
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
            write_run_config(out, config)?;
        }
        RowFormat::Json => {
            let rows_json: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    header
                        .iter()
                        .zip(row)
                        .map(|(k, v)| ((*k).to_string(), serde_json::Value::String(v.clone())))
                        .collect::<serde_json::Map<_, _>>()
                        .into()
                })
                .collect();
            let doc = serde_json::json!({ "config": config, "rows": rows_json });
            std::fs::write(out, serde_json::to_string_pretty(&doc)?)
                .with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(())
}

/// Sidecar `<out>.run.json` holding the resolved configuration.
pub fn write_run_config<C: Serialize>(out: &Path, config: &C) -> anyhow::Result<()> {
    let mut sidecar = out.as_os_str().to_owned();
    sidecar.push(".run.json");
    std::fs::write(&sidecar, serde_json::to_string_pretty(config)?)
        .with_context(|| format!("writing run config next to {}", out.display()))?;
    Ok(())
}

pub fn require_out(cli: &crate::Cli, what: &str) -> anyhow::Result<std::path::PathBuf> {
    cli.out
        .clone()
        .ok_or_else(|| anyhow::anyhow!("{what} needs --out"))
}

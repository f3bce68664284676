//! CSV and JSON writers for command results.

use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Table rows as CSV with a header line, or as a JSON array.
pub fn rows<T: Serialize>(format: Format, rows: &[T]) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut lock);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut lock, rows)?;
            writeln!(lock)?;
        }
    }
    Ok(())
}

/// A single record: a one-row CSV table, or a JSON object.
pub fn record<T: Serialize>(format: Format, value: &T) -> anyhow::Result<()> {
    match format {
        Format::Csv => rows(format, std::slice::from_ref(value)),
        Format::Json => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, value)?;
            writeln!(lock)?;
            Ok(())
        }
    }
}

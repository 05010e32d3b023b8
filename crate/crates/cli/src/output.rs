use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    /// One JSON object per line.
    Json,
}

pub fn render<T: Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
            for row in rows {
                w.serialize(row).map_err(|e| Failure::Validation(format!("csv output: {e}")))?;
            }
            w.flush().map_err(|e| Failure::Validation(format!("csv output: {e}")))?;
        }
        Format::Json => {
            for row in rows {
                serde_json::to_writer(&mut buf, row).map_err(|e| Failure::Validation(format!("json output: {e}")))?;
                buf.push(b'\n');
            }
        }
    }
    Ok(buf)
}

pub fn emit<T: Serialize>(rows: &[T], format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let bytes = render(rows, format)?;
    let written = match out {
        Some(path) => File::create(path).and_then(|mut f| f.write_all(&bytes)),
        None => io::stdout().lock().write_all(&bytes),
    };
    written.map_err(|e| Failure::Validation(format!("cannot write output: {e}")))
}

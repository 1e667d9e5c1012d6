use std::io::{self, Write};

use serde::Serialize;

use crate::args::Format;
use crate::Failure;

/// Writes `rows` to stdout: CSV with a header row, or a pretty JSON array.
pub fn emit<T: Serialize>(format: Format, rows: &[T]) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    write_rows(format, rows, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_rows<T: Serialize, W: Write>(
    format: Format,
    rows: &[T],
    out: W,
) -> Result<(), Failure> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

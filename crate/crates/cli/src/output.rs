use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::args::Format;

/// A row that can be written as CSV or as one JSON object per line.
pub trait Row: Serialize {
    const HEADER: &'static str;
    fn csv(&self) -> String;
}

pub fn write_rows<W: Write, R: Row>(mut w: W, rows: &[R], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{}", R::HEADER)?;
            for r in rows {
                writeln!(w, "{}", r.csv())?;
            }
        }
        Format::Jsonl => {
            for r in rows {
                writeln!(w, "{}", serde_json::to_string(r)?)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Opens `path` for writing; `-` is standard output.
pub fn create(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(Box::new(BufWriter::new(f)))
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
            w.flush()?;
        }
        None => eprintln!("{}", serde_json::to_string(value)?),
    }
    Ok(())
}

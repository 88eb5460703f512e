//! Text codec for six-channel gape frames.
//!
//! File and wire share one line grammar:
//!
//! ```text
//! <timestamp_ms>,<s1>,<s2>,<s3>,<s4>,<s5>,<s6>\n
//! ```
//!
//! Values are millimeters; an empty field or `NaN` marks a missing channel.
//! Files start with the header `ts_ms,s1,s2,s3,s4,s5,s6`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::signal::{clean_records, CleanReport, GapeRecord, RawRow, CHANNELS};

pub const CSV_HEADER: &str = "ts_ms,s1,s2,s3,s4,s5,s6";

/// One protocol line: a timestamp and six optional readings.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMessage {
    pub timestamp_ms: i64,
    pub channels: [Option<f64>; CHANNELS],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("expected 7 comma-separated fields, found {0}")]
    FieldCount(usize),
    #[error("timestamp is not a non-negative integer")]
    Timestamp,
}

impl FrameMessage {
    pub fn parse(line: &str) -> std::result::Result<Self, LineError> {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let mut fields = line.split(',');
        let ts_field = fields.next().unwrap_or("");
        let rest: Vec<&str> = fields.collect();
        if rest.len() != CHANNELS {
            return Err(LineError::FieldCount(rest.len() + 1));
        }
        let timestamp_ms = ts_field
            .trim()
            .parse::<i64>()
            .ok()
            .filter(|&t| t >= 0)
            .ok_or(LineError::Timestamp)?;
        let mut channels = [None; CHANNELS];
        for (slot, field) in channels.iter_mut().zip(rest) {
            *slot = parse_value(field);
        }
        Ok(FrameMessage {
            timestamp_ms,
            channels,
        })
    }

    pub fn present_count(&self) -> usize {
        self.channels.iter().flatten().count()
    }

    /// The protocol line without its trailing newline.
    pub fn to_line(&self) -> String {
        format_line(self.timestamp_ms, &self.channels)
    }

    pub fn to_raw_row(&self, line: usize) -> RawRow {
        RawRow {
            line,
            timestamp_ms: Some(self.timestamp_ms),
            channels: self.channels,
        }
    }
}

impl From<&GapeRecord> for FrameMessage {
    fn from(r: &GapeRecord) -> Self {
        FrameMessage {
            timestamp_ms: r.timestamp_ms(),
            channels: *r.channels(),
        }
    }
}

fn parse_value(field: &str) -> Option<f64> {
    let f = field.trim();
    if f.is_empty() || f.eq_ignore_ascii_case("nan") {
        return None;
    }
    f.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn format_line(timestamp_ms: i64, channels: &[Option<f64>; CHANNELS]) -> String {
    let mut s = timestamp_ms.to_string();
    for c in channels {
        s.push(',');
        if let Some(v) = c {
            // Display for f64 is the shortest string that parses back to the same value
            let _ = write!(s, "{v}");
        }
    }
    s
}

/// Parses one line leniently: anything unusable becomes a row that
/// [`clean_records`] will drop.
pub fn parse_raw_row(line_no: usize, line: &str) -> RawRow {
    FrameMessage::parse(line).map_or_else(|_| RawRow::blank(line_no), |f| f.to_raw_row(line_no))
}

fn looks_like_header(line: &str) -> bool {
    let first = line.split(',').next().unwrap_or("").trim();
    !first.is_empty() && first.parse::<f64>().is_err()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CsvReport {
    pub lines: usize,
    pub header: bool,
    #[serde(flatten)]
    pub clean: CleanReport,
}

/// Reads a gape CSV and cleans it. Malformed lines are dropped and counted;
/// only I/O failures are errors.
pub fn parse_csv<R: BufRead>(mut reader: R) -> Result<(Vec<GapeRecord>, CsvReport)> {
    let mut rows = Vec::new();
    let mut header = false;
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        if buf.last() == Some(&b'\n') {
            buf.pop();
        }
        let Ok(line) = std::str::from_utf8(&buf) else {
            rows.push(RawRow::blank(line_no));
            continue;
        };
        if line_no == 1 && looks_like_header(line) {
            header = true;
            continue;
        }
        rows.push(parse_raw_row(line_no, line));
    }
    let (records, clean) = clean_records(rows);
    Ok((
        records,
        CsvReport {
            lines: line_no,
            header,
            clean,
        },
    ))
}

/// Writes the header and one line per record. Refuses, before writing
/// anything, a record whose six channels are all missing.
pub fn write_csv<W: Write>(mut writer: W, records: &[GapeRecord]) -> Result<()> {
    if records.iter().any(|r| r.present_count() == 0) {
        return Err(Error::EmptyRecord);
    }
    writeln!(writer, "{CSV_HEADER}")?;
    for r in records {
        writeln!(writer, "{}", format_line(r.timestamp_ms(), r.channels()))?;
    }
    writer.flush()?;
    Ok(())
}

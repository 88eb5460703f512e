use std::io::{BufWriter, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use gapewatch_core::codec::FrameMessage;
use gapewatch_core::signal::GapeRecord;

use crate::Result;

/// How fast [`replay`] sends frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pace {
    AsFastAsPossible,
    /// Sleep between frames for their timestamp difference divided by this factor.
    Speedup(f64),
}

/// Sends `records` as protocol lines over one connection, then closes it.
pub fn replay<A: ToSocketAddrs>(addr: A, records: &[GapeRecord], pace: Pace) -> Result<usize> {
    let stream = TcpStream::connect(addr)?;
    let mut w = BufWriter::new(stream);
    let mut prev: Option<i64> = None;
    for r in records {
        if let (Pace::Speedup(k), Some(p)) = (pace, prev) {
            let dt = (r.timestamp_ms() - p).max(0) as f64 / k;
            if dt > 0.0 {
                w.flush()?;
                thread::sleep(Duration::from_secs_f64(dt / 1000.0));
            }
        }
        prev = Some(r.timestamp_ms());
        writeln!(w, "{}", FrameMessage::from(r).to_line())?;
    }
    w.flush()?;
    Ok(records.len())
}

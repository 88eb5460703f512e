//! File-level analysis shared by the subcommands.

use std::fs::File;
use std::io::{self, BufReader};
use std::path::Path;

use anyhow::{Context, Result};
use gapewatch_core::codec::{parse_csv, CsvReport};
use gapewatch_core::detector::{detect_events, Detection, DetectorConfig};
use gapewatch_core::signal::{
    block_mean_downsample, extract_channel, moving_average, ChannelId, GapPolicy, GapeRecord,
    GapeSeries,
};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preprocess {
    pub sample_rate_hz: f64,
    pub smooth: Option<usize>,
    pub downsample: Option<usize>,
    pub gap_policy: GapPolicy,
}

impl Default for Preprocess {
    fn default() -> Self {
        Preprocess {
            sample_rate_hz: 10.0,
            smooth: None,
            downsample: None,
            gap_policy: GapPolicy::Concatenate,
        }
    }
}

pub fn read_records(path: &Path) -> Result<(Vec<GapeRecord>, CsvReport)> {
    if path == Path::new("-") {
        return Ok(parse_csv(io::stdin().lock())?);
    }
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(parse_csv(BufReader::new(f))?)
}

/// Channels to process: the requested one, or every channel with data.
pub fn channels(records: &[GapeRecord], only: Option<ChannelId>) -> Vec<ChannelId> {
    match only {
        Some(c) => vec![c],
        None => ChannelId::all()
            .filter(|&c| records.iter().any(|r| r.channel(c).is_some()))
            .collect(),
    }
}

/// extract → smooth → downsample, in that order.
pub fn prepare(records: &[GapeRecord], channel: ChannelId, pre: &Preprocess) -> Result<GapeSeries> {
    let mut s = extract_channel(records, channel, pre.sample_rate_hz, pre.gap_policy)?;
    if let Some(w) = pre.smooth {
        s = moving_average(&s, w)?;
    }
    if let Some(b) = pre.downsample {
        s = block_mean_downsample(&s, b)?;
    }
    Ok(s)
}

pub fn detect_records(
    records: &[GapeRecord],
    only: Option<ChannelId>,
    pre: &Preprocess,
    config: &DetectorConfig,
) -> Result<Vec<(GapeSeries, Detection)>> {
    channels(records, only)
        .into_iter()
        .map(|c| {
            let s = prepare(records, c, pre).with_context(|| format!("channel {c}"))?;
            let det = detect_events(&s, config).with_context(|| format!("channel {c}"))?;
            Ok((s, det))
        })
        .collect()
}

//! Gape records, per-channel series and the preprocessing chain: cleaning,
//! channel extraction, block-mean downsampling, zero-start normalization and
//! centered moving-average smoothing.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Number of oyster channels in one frame.
pub const CHANNELS: usize = 6;

/// Nominal sensor rate.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 10.0;

/// Default moving-average window (samples).
pub const DEFAULT_SMOOTH_WINDOW: usize = 5;

/// One-based oyster channel, always in `1..=6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ChannelId(u8);

impl ChannelId {
    pub fn new(id: u8) -> Result<Self> {
        if (1..=CHANNELS as u8).contains(&id) {
            Ok(ChannelId(id))
        } else {
            Err(invalid(format!("channel id {id} outside 1..=6")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based slot in a frame.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = ChannelId> {
        (1..=CHANNELS as u8).map(ChannelId)
    }
}

impl TryFrom<u8> for ChannelId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        ChannelId::new(v)
    }
}

impl From<ChannelId> for u8 {
    fn from(c: ChannelId) -> u8 {
        c.0
    }
}

impl std::fmt::Display for ChannelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One timestamped six-channel gape reading in millimeters.
#[derive(Debug, Clone, PartialEq)]
pub struct GapeRecord {
    timestamp_ms: i64,
    channels: [Option<f64>; CHANNELS],
}

impl GapeRecord {
    /// Non-finite channel values are rejected, not silently dropped.
    pub fn new(timestamp_ms: i64, channels: [Option<f64>; CHANNELS]) -> Result<Self> {
        if timestamp_ms < 0 {
            return Err(invalid(format!("negative timestamp {timestamp_ms}")));
        }
        if channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite channel value"));
        }
        Ok(GapeRecord {
            timestamp_ms,
            channels,
        })
    }

    pub fn timestamp_ms(&self) -> i64 {
        self.timestamp_ms
    }

    pub fn channels(&self) -> &[Option<f64>; CHANNELS] {
        &self.channels
    }

    pub fn channel(&self, id: ChannelId) -> Option<f64> {
        self.channels[id.slot()]
    }

    pub fn present_count(&self) -> usize {
        self.channels.iter().flatten().count()
    }
}

/// A row as it arrives from a file or socket, before cleaning.
///
/// `timestamp_ms` is `None` when the row was blank or its timestamp did not
/// parse; channel slots are `None` when empty, `NaN` or unparsable.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub line: usize,
    pub timestamp_ms: Option<i64>,
    pub channels: [Option<f64>; CHANNELS],
}

impl RawRow {
    pub fn blank(line: usize) -> Self {
        RawRow {
            line,
            timestamp_ms: None,
            channels: [None; CHANNELS],
        }
    }
}

impl From<&GapeRecord> for RawRow {
    fn from(r: &GapeRecord) -> Self {
        RawRow {
            line: 0,
            timestamp_ms: Some(r.timestamp_ms),
            channels: r.channels,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CleanReport {
    pub input_rows: usize,
    /// Rows without a valid timestamp or without any parsable channel.
    pub dropped: usize,
    /// Rows discarded because an earlier row had the same timestamp.
    pub duplicates: usize,
    /// Source line numbers of the dropped rows, in input order.
    pub dropped_lines: Vec<usize>,
}

/// Drops unusable rows, sorts by timestamp and keeps the first row seen for
/// each timestamp. Total: never fails.
pub fn clean_records<I>(rows: I) -> (Vec<GapeRecord>, CleanReport)
where
    I: IntoIterator<Item = RawRow>,
{
    let mut report = CleanReport::default();
    let mut kept = Vec::new();
    for row in rows {
        report.input_rows += 1;
        let record = row.timestamp_ms.and_then(|ts| {
            let channels = row.channels.map(|c| c.filter(|v| v.is_finite()));
            let record = GapeRecord::new(ts, channels).ok()?;
            (record.present_count() > 0).then_some(record)
        });
        match record {
            Some(r) => kept.push(r),
            None => {
                report.dropped += 1;
                report.dropped_lines.push(row.line);
            }
        }
    }
    // stable: the first occurrence of a timestamp stays first
    kept.sort_by_key(|r| r.timestamp_ms);
    let before = kept.len();
    kept.dedup_by_key(|r| r.timestamp_ms);
    report.duplicates = before - kept.len();
    (kept, report)
}

/// What to do when a channel is missing between two of its readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapPolicy {
    /// Splice missing stretches out and treat the remainder as uniformly sampled.
    #[default]
    Concatenate,
    ErrorOnGap,
}

/// One channel's uniformly sampled gape trace.
#[derive(Debug, Clone, PartialEq)]
pub struct GapeSeries {
    channel: ChannelId,
    sample_rate_hz: f64,
    start_time_ms: i64,
    values: Vec<f64>,
}

impl GapeSeries {
    pub fn new(
        channel: ChannelId,
        sample_rate_hz: f64,
        start_time_ms: i64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(invalid(format!(
                "sample rate {sample_rate_hz} must be positive"
            )));
        }
        if values.is_empty() {
            return Err(invalid("series must contain at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("series values must be finite"));
        }
        Ok(GapeSeries {
            channel,
            sample_rate_hz,
            start_time_ms,
            values,
        })
    }

    pub fn channel(&self) -> ChannelId {
        self.channel
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn start_time_ms(&self) -> i64 {
        self.start_time_ms
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period_ms(&self) -> f64 {
        1000.0 / self.sample_rate_hz
    }

    /// Implied timestamp of sample `i`; `i == len()` gives the exclusive end.
    pub fn time_at(&self, i: usize) -> i64 {
        sample_time_ms(self.start_time_ms, self.sample_rate_hz, i as u64)
    }

    pub fn end_time_ms(&self) -> i64 {
        self.time_at(self.len())
    }

    fn with_values(&self, values: Vec<f64>) -> GapeSeries {
        GapeSeries {
            values,
            ..self.clone()
        }
    }
}

/// `origin + i·(1000/rate)` rounded to the nearest millisecond.
pub fn sample_time_ms(origin_ms: i64, sample_rate_hz: f64, i: u64) -> i64 {
    origin_ms + (i as f64 * 1000.0 / sample_rate_hz).round() as i64
}

/// Pulls one channel out of cleaned records (assumed sorted by timestamp).
///
/// Under [`GapPolicy::ErrorOnGap`] a gap is either a record where the
/// channel is missing between two present readings, or a timestamp step
/// longer than 1.5 sample periods between consecutive readings.
pub fn extract_channel(
    records: &[GapeRecord],
    channel: ChannelId,
    sample_rate_hz: f64,
    policy: GapPolicy,
) -> Result<GapeSeries> {
    let mut values = Vec::new();
    let mut start = None;
    let mut last_present: Option<i64> = None;
    let mut missing_since_last = false;
    let max_step = 1.5 * 1000.0 / sample_rate_hz;
    for r in records {
        match r.channel(channel) {
            Some(v) => {
                if policy == GapPolicy::ErrorOnGap {
                    if let Some(prev) = last_present {
                        if missing_since_last || (r.timestamp_ms - prev) as f64 > max_step {
                            return Err(Error::GapDetected {
                                channel: channel.get(),
                                before_ms: prev,
                                after_ms: r.timestamp_ms,
                            });
                        }
                    }
                }
                start.get_or_insert(r.timestamp_ms);
                last_present = Some(r.timestamp_ms);
                missing_since_last = false;
                values.push(v);
            }
            None => missing_since_last = last_present.is_some(),
        }
    }
    let Some(start) = start else {
        return Err(Error::EmptyChannel(channel.get()));
    };
    GapeSeries::new(channel, sample_rate_hz, start, values)
}

fn clamped_mean(window: &[f64]) -> f64 {
    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    // rounding can push the mean of near-equal values just outside their range
    mean.clamp(lo, hi)
}

/// Mean of each complete block of `block` samples; the trailing partial
/// block is dropped.
pub fn block_mean_downsample(series: &GapeSeries, block: usize) -> Result<GapeSeries> {
    if block == 0 {
        return Err(invalid("downsampling block must be at least 1"));
    }
    if series.len() < block {
        return Err(invalid(format!(
            "series of {} samples is shorter than one block of {block}",
            series.len()
        )));
    }
    let values = series
        .values
        .chunks_exact(block)
        .map(clamped_mean)
        .collect();
    Ok(GapeSeries {
        channel: series.channel,
        sample_rate_hz: series.sample_rate_hz / block as f64,
        start_time_ms: series.start_time_ms,
        values,
    })
}

/// Subtracts the first sample from every sample.
pub fn normalize_zero_start(series: &GapeSeries) -> GapeSeries {
    let first = series.values[0];
    series.with_values(series.values.iter().map(|v| v - first).collect())
}

/// Centered moving mean. Near the ends the window shrinks symmetrically so
/// that `out[0] == in[0]` and `out[1]` averages the first three samples.
pub fn moving_average(series: &GapeSeries, window: usize) -> Result<GapeSeries> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(invalid(format!(
            "moving-average window {window} must be odd and positive"
        )));
    }
    let n = series.len();
    if window > n {
        return Err(invalid(format!(
            "moving-average window {window} exceeds series length {n}"
        )));
    }
    let half = window / 2;
    let x = &series.values;
    let values = (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            clamped_mean(&x[i - h..=i + h])
        })
        .collect();
    Ok(series.with_values(values))
}

/// Recombines series into frames keyed by sample index: row `i` carries
/// sample `i` of every series long enough to have one. All series must share
/// start time and sample rate, and use distinct channels.
pub fn interleave_series(series: &[GapeSeries]) -> Result<Vec<GapeRecord>> {
    let Some(first) = series.first() else {
        return Ok(Vec::new());
    };
    let mut seen = [false; CHANNELS];
    for s in series {
        if s.start_time_ms != first.start_time_ms || s.sample_rate_hz != first.sample_rate_hz {
            return Err(invalid(
                "interleaved series must share start time and sample rate",
            ));
        }
        if std::mem::replace(&mut seen[s.channel.slot()], true) {
            return Err(invalid(format!("channel {} appears twice", s.channel)));
        }
    }
    let longest = series.iter().map(GapeSeries::len).max().unwrap_or(0);
    (0..longest)
        .map(|i| {
            let mut channels = [None; CHANNELS];
            for s in series {
                channels[s.channel.slot()] = s.values.get(i).copied();
            }
            GapeRecord::new(first.time_at(i), channels)
        })
        .collect()
}

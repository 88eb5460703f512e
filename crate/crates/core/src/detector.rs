//! Tail-anchored windowing, per-window band-power classification and
//! merging of consecutive spawning windows into events.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft::FftPlan;
use crate::signal::{ChannelId, GapeSeries};
use crate::spectral::{self, band_average_power, check_nyquist};
use crate::{map_ordered, Execution};

/// 10 minutes at 10 Hz.
pub const DEFAULT_WINDOW_SAMPLES: usize = 6000;
pub const DEFAULT_BAND_LO_HZ: f64 = 0.3;
pub const DEFAULT_BAND_HI_HZ: f64 = 1.3;
pub const DEFAULT_THRESHOLD: f64 = 0.1;
pub const MIN_WINDOW_SAMPLES: usize = 8;
/// Window sizes below this are not analyzed by the sweep.
pub const MIN_SWEEP_SIZE: usize = 100;
pub const DEFAULT_SWEEP_SIZES: [usize; 6] = [100, 300, 500, 1000, 2000, 6000];

/// Which end of the series the window grid is aligned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Anchor {
    /// Walk backward from the last sample; a short remainder is left at the head.
    #[default]
    Tail,
    /// Walk forward from the first sample, as a live stream does.
    Head,
}

/// How the band statistic is compared with the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdScale {
    /// `band_power >= threshold`.
    #[default]
    Linear,
    /// `10·log10(band_power) >= threshold`.
    Decibel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub window_samples: usize,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub threshold: f64,
    /// A leftover segment at least this fraction of a window is analyzed
    /// zero-padded. 1.0 discards every partial window.
    pub min_partial_fraction: f64,
    /// Step between window starts; `None` means tumbling windows.
    pub hop_samples: Option<usize>,
    pub anchor: Anchor,
    pub threshold_scale: ThresholdScale,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            window_samples: DEFAULT_WINDOW_SAMPLES,
            f_lo_hz: DEFAULT_BAND_LO_HZ,
            f_hi_hz: DEFAULT_BAND_HI_HZ,
            threshold: DEFAULT_THRESHOLD,
            min_partial_fraction: 1.0,
            hop_samples: None,
            anchor: Anchor::Tail,
            threshold_scale: ThresholdScale::Linear,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_samples < MIN_WINDOW_SAMPLES {
            return Err(invalid(format!(
                "window of {} samples is below the minimum of {MIN_WINDOW_SAMPLES}",
                self.window_samples
            )));
        }
        if !(self.f_lo_hz.is_finite() && self.f_hi_hz.is_finite())
            || self.f_lo_hz < 0.0
            || self.f_lo_hz >= self.f_hi_hz
        {
            return Err(invalid(format!(
                "band [{}, {}] Hz must satisfy 0 <= lo < hi",
                self.f_lo_hz, self.f_hi_hz
            )));
        }
        let threshold_ok = match self.threshold_scale {
            ThresholdScale::Linear => self.threshold.is_finite() && self.threshold >= 0.0,
            ThresholdScale::Decibel => self.threshold.is_finite(),
        };
        if !threshold_ok {
            return Err(invalid(format!(
                "threshold {} is not allowed",
                self.threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.min_partial_fraction) {
            return Err(invalid("min_partial_fraction must lie in [0, 1]"));
        }
        if let Some(hop) = self.hop_samples {
            if hop == 0 || hop > self.window_samples {
                return Err(invalid(format!(
                    "hop of {hop} samples must be in 1..={}",
                    self.window_samples
                )));
            }
        }
        Ok(())
    }

    pub fn hop(&self) -> usize {
        self.hop_samples.unwrap_or(self.window_samples)
    }

    /// The threshold rule, `>=` on the configured scale.
    pub fn is_spawning(&self, band_power: f64) -> bool {
        match self.threshold_scale {
            ThresholdScale::Linear => band_power >= self.threshold,
            ThresholdScale::Decibel => {
                band_power > 0.0 && 10.0 * band_power.log10() >= self.threshold
            }
        }
    }

    fn partial_allowed(&self, len: usize) -> bool {
        len > 0
            && len < self.window_samples
            && self.min_partial_fraction < 1.0
            && len as f64 >= self.min_partial_fraction * self.window_samples as f64
    }
}

/// Location of one analysis window inside a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WindowSpan {
    /// Chronological position, 0 = earliest.
    pub index: usize,
    pub start_sample: usize,
    /// Real samples in the window; shorter than the configured size only when `padded`.
    pub len: usize,
    pub padded: bool,
    pub start_time_ms: i64,
    /// Exclusive end: timestamp one sample period after the last sample.
    pub end_time_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segmentation {
    pub windows: Vec<WindowSpan>,
    /// Samples not covered by any window.
    pub discarded_samples: usize,
    pub note: Option<String>,
}

/// Cuts `series` into windows of `config.window_samples`. Windows come back
/// in chronological order whichever end they are anchored to.
pub fn segment_windows(series: &GapeSeries, config: &DetectorConfig) -> Segmentation {
    let len = series.len();
    let w = config.window_samples;
    let hop = config.hop();
    // (start, len, padded)
    let mut raw: Vec<(usize, usize, bool)> = Vec::new();
    match config.anchor {
        Anchor::Tail => {
            let mut end = len;
            while end >= w {
                raw.push((end - w, w, false));
                end -= hop;
            }
            if config.partial_allowed(end) {
                raw.push((0, end, true));
            }
            raw.reverse();
        }
        Anchor::Head => {
            let mut start = 0;
            while start + w <= len {
                raw.push((start, w, false));
                start += hop;
            }
            let rest = len.saturating_sub(start);
            if config.partial_allowed(rest) {
                raw.push((start, rest, true));
            }
        }
    }
    let covered = coverage(&raw, len);
    let note = raw
        .iter()
        .all(|&(_, _, padded)| padded)
        .then(|| format!("no full window: series has {len} samples, window needs {w}"));
    let windows = raw
        .into_iter()
        .enumerate()
        .map(|(index, (start, n, padded))| WindowSpan {
            index,
            start_sample: start,
            len: n,
            padded,
            start_time_ms: series.time_at(start),
            end_time_ms: series.time_at(start + n),
        })
        .collect();
    Segmentation {
        windows,
        discarded_samples: len - covered,
        note,
    }
}

fn coverage(windows: &[(usize, usize, bool)], len: usize) -> usize {
    let mut mask = vec![false; len];
    for &(s, n, _) in windows {
        mask[s..s + n].iter_mut().for_each(|m| *m = true);
    }
    mask.iter().filter(|&&m| m).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowVerdict {
    pub window_index: usize,
    pub start_time_ms: i64,
    pub end_time_ms: i64,
    pub band_power: f64,
    pub is_spawning: bool,
    #[serde(default)]
    pub padded: bool,
}

/// Computes the band statistic of one window and applies the threshold.
/// `samples` must hold exactly `config.window_samples` values; padded
/// partial windows are zero-filled by the caller.
pub fn classify_window(
    samples: &[f64],
    sample_rate_hz: f64,
    span: &WindowSpan,
    config: &DetectorConfig,
) -> Result<WindowVerdict> {
    WindowClassifier::new(config.clone(), sample_rate_hz)?.classify(samples, span)
}

/// [`classify_window`] with the FFT plan built once, for callers that
/// classify many windows of the same length.
#[derive(Debug, Clone)]
pub struct WindowClassifier {
    config: DetectorConfig,
    sample_rate_hz: f64,
    plan: FftPlan,
}

impl WindowClassifier {
    pub fn new(config: DetectorConfig, sample_rate_hz: f64) -> Result<Self> {
        config.validate()?;
        check_nyquist(sample_rate_hz, config.f_hi_hz)?;
        let plan = FftPlan::new(config.window_samples)?;
        Ok(WindowClassifier {
            config,
            sample_rate_hz,
            plan,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn classify(&self, samples: &[f64], span: &WindowSpan) -> Result<WindowVerdict> {
        if samples.len() != self.config.window_samples {
            return Err(Error::WindowLength {
                expected: self.config.window_samples,
                actual: samples.len(),
            });
        }
        let spec = spectral::fft_with_plan(&self.plan, samples, self.sample_rate_hz)?;
        let band = band_average_power(&spec, self.config.f_lo_hz, self.config.f_hi_hz)?;
        Ok(WindowVerdict {
            window_index: span.index,
            start_time_ms: span.start_time_ms,
            end_time_ms: span.end_time_ms,
            band_power: band.mean_power,
            is_spawning: self.config.is_spawning(band.mean_power),
            padded: span.padded,
        })
    }
}

/// A maximal run of consecutive spawning windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpawningEvent {
    pub channel_id: ChannelId,
    pub start_time_ms: i64,
    pub end_time_ms: i64,
    pub peak_band_power: f64,
    pub window_count: usize,
    pub first_window: usize,
    pub last_window: usize,
}

/// Merges maximal runs of `is_spawning` verdicts (consecutive in the given
/// order) into events.
pub fn merge_events(channel: ChannelId, verdicts: &[WindowVerdict]) -> Vec<SpawningEvent> {
    let mut events: Vec<SpawningEvent> = Vec::new();
    let mut open = false;
    for v in verdicts {
        if !v.is_spawning {
            open = false;
            continue;
        }
        match events.last_mut() {
            Some(e) if open => {
                e.end_time_ms = v.end_time_ms;
                e.peak_band_power = e.peak_band_power.max(v.band_power);
                e.window_count += 1;
                e.last_window = v.window_index;
            }
            _ => {
                events.push(SpawningEvent {
                    channel_id: channel,
                    start_time_ms: v.start_time_ms,
                    end_time_ms: v.end_time_ms,
                    peak_band_power: v.band_power,
                    window_count: 1,
                    first_window: v.window_index,
                    last_window: v.window_index,
                });
                open = true;
            }
        }
    }
    events
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub channel_id: ChannelId,
    pub verdicts: Vec<WindowVerdict>,
    pub events: Vec<SpawningEvent>,
    pub discarded_samples: usize,
    pub note: Option<String>,
}

impl Detection {
    pub fn spawning_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_spawning).count()
    }
}

pub fn detect_events(series: &GapeSeries, config: &DetectorConfig) -> Result<Detection> {
    detect_events_with(series, config, Execution::default())
}

/// [`detect_events`] with explicit control over parallelism. The output is
/// identical for both execution modes.
pub fn detect_events_with(
    series: &GapeSeries,
    config: &DetectorConfig,
    exec: Execution,
) -> Result<Detection> {
    let classifier = WindowClassifier::new(config.clone(), series.sample_rate_hz())?;
    let seg = segment_windows(series, config);
    let values = series.values();
    let verdicts = map_ordered(exec, &seg.windows, |span| {
        let slice = &values[span.start_sample..span.start_sample + span.len];
        if span.padded {
            let mut buf = slice.to_vec();
            buf.resize(config.window_samples, 0.0);
            classifier.classify(&buf, span)
        } else {
            classifier.classify(slice, span)
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let events = merge_events(series.channel(), &verdicts);
    Ok(Detection {
        channel_id: series.channel(),
        verdicts,
        events,
        discarded_samples: seg.discarded_samples,
        note: seg.note,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub window_samples: usize,
    pub window_count: usize,
    pub spawning_count: usize,
    pub runtime: Duration,
}

/// Reruns detection once per window size. Sizes under [`MIN_SWEEP_SIZE`]
/// are rejected before any work is done.
pub fn window_size_sweep(
    series: &GapeSeries,
    sizes: &[usize],
    config: &DetectorConfig,
) -> Result<Vec<SweepRow>> {
    if let Some(&bad) = sizes.iter().find(|&&s| s < MIN_SWEEP_SIZE) {
        return Err(invalid(format!(
            "window size {bad} rejected: sizes below {MIN_SWEEP_SIZE} samples are not considered"
        )));
    }
    sizes
        .iter()
        .map(|&size| {
            let cfg = DetectorConfig {
                window_samples: size,
                hop_samples: config.hop_samples.map(|h| h.min(size)),
                ..config.clone()
            };
            let started = Instant::now();
            let det = detect_events(series, &cfg)?;
            Ok(SweepRow {
                window_samples: size,
                window_count: det.verdicts.len(),
                spawning_count: det.spawning_count(),
                runtime: started.elapsed(),
            })
        })
        .collect()
}

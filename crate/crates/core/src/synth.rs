//! Seeded synthetic gape signals with known spawning bursts.
//!
//! A signal is `baseline + slow sinusoidal drift + Σ bursts + white noise`.
//! Each burst is an oscillation whose frequency wanders smoothly within
//! `center ± jitter`, shaped by a raised-cosine envelope that ramps over the
//! first and last 10% of the burst.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::detector::{detect_events_with, DetectorConfig, SpawningEvent};
use crate::error::{invalid, Error, Result};
use crate::signal::{interleave_series, ChannelId, GapeRecord, GapeSeries, CHANNELS};
use crate::{map_ordered, Execution};

pub const BURST_BAND_HZ: (f64, f64) = (0.3, 1.3);
const TAPER_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstSpec {
    pub start_s: f64,
    pub duration_s: f64,
    pub center_freq_hz: f64,
    pub freq_jitter_hz: f64,
    pub amplitude_mm: f64,
}

impl BurstSpec {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.duration_s
    }

    /// Parses `start:duration:freq:amplitude[:jitter]` (seconds, Hz, mm).
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| {
                invalid(format!(
                    "burst '{s}' is not start:duration:freq:amp[:jitter]"
                ))
            })?;
        match parts[..] {
            [start_s, duration_s, center_freq_hz, amplitude_mm] => Ok(BurstSpec {
                start_s,
                duration_s,
                center_freq_hz,
                freq_jitter_hz: 0.0,
                amplitude_mm,
            }),
            [start_s, duration_s, center_freq_hz, amplitude_mm, freq_jitter_hz] => Ok(BurstSpec {
                start_s,
                duration_s,
                center_freq_hz,
                freq_jitter_hz,
                amplitude_mm,
            }),
            _ => Err(invalid(format!(
                "burst '{s}' is not start:duration:freq:amp[:jitter]"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub channel: ChannelId,
    pub start_time_ms: i64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub baseline_mm: f64,
    pub drift_period_s: f64,
    pub drift_amplitude_mm: f64,
    pub noise_sigma_mm: f64,
    pub bursts: Vec<BurstSpec>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 0,
            channel: ChannelId::new(1).expect("channel 1"),
            start_time_ms: 0,
            duration_s: 3600.0,
            sample_rate_hz: 10.0,
            baseline_mm: 0.2,
            drift_period_s: 3600.0,
            drift_amplitude_mm: 0.05,
            noise_sigma_mm: 0.005,
            bursts: Vec::new(),
        }
    }
}

impl SynthSpec {
    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.duration_s,
            self.sample_rate_hz,
            self.baseline_mm,
            self.drift_period_s,
            self.drift_amplitude_mm,
            self.noise_sigma_mm,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(invalid("synth parameters must be finite"));
        }
        if self.sample_rate_hz <= 0.0 || self.duration_s <= 0.0 || self.sample_count() < 1 {
            return Err(invalid(
                "duration × sample rate must give at least one sample",
            ));
        }
        if self.noise_sigma_mm < 0.0 {
            return Err(invalid("noise sigma must be non-negative"));
        }
        if self.drift_period_s <= 0.0 {
            return Err(invalid("drift period must be positive"));
        }
        let nyquist = self.sample_rate_hz / 2.0;
        for b in &self.bursts {
            let ok = b.duration_s > 0.0
                && b.start_s >= 0.0
                && b.end_s() <= self.duration_s
                && b.amplitude_mm > 0.0
                && b.freq_jitter_hz >= 0.0
                && (BURST_BAND_HZ.0..=BURST_BAND_HZ.1).contains(&b.center_freq_hz)
                && b.center_freq_hz - b.freq_jitter_hz > 0.0
                && b.center_freq_hz + b.freq_jitter_hz < nyquist;
            if !ok {
                return Err(invalid(format!(
                    "burst {b:?} is outside the allowed ranges"
                )));
            }
        }
        let mut sorted: Vec<&BurstSpec> = self.bursts.iter().collect();
        sorted.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        if sorted.windows(2).any(|p| p[0].end_s() > p[1].start_s) {
            return Err(invalid("bursts overlap in time"));
        }
        Ok(())
    }
}

/// A burst as it appears in the ground-truth sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthEvent {
    pub channel_id: ChannelId,
    pub start_ms: i64,
    pub end_ms: i64,
}

impl GroundTruthEvent {
    pub fn overlaps(&self, start_ms: i64, end_ms: i64) -> bool {
        self.start_ms < end_ms && start_ms < self.end_ms
    }
}

fn envelope(tau: f64, duration: f64) -> f64 {
    let ramp = TAPER_FRACTION * duration;
    let edge = tau.min(duration - tau);
    if edge >= ramp {
        1.0
    } else {
        0.5 * (1.0 - (PI * edge.max(0.0) / ramp).cos())
    }
}

/// Deterministic in `spec`: the same seed always yields the same samples.
pub fn generate(spec: &SynthSpec) -> Result<(GapeSeries, Vec<GroundTruthEvent>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.sample_count();
    let fs = spec.sample_rate_hz;
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            spec.baseline_mm + spec.drift_amplitude_mm * (2.0 * PI * t / spec.drift_period_s).sin()
        })
        .collect();

    for b in &spec.bursts {
        let phase0 = rng.random_range(0.0..2.0 * PI);
        let mod_phase = rng.random_range(0.0..2.0 * PI);
        let mod_period = rng.random_range(60.0..300.0);
        let first = (b.start_s * fs).ceil() as usize;
        let last = ((b.end_s() * fs).ceil() as usize).min(n);
        for (i, v) in x.iter_mut().enumerate().take(last).skip(first) {
            let tau = i as f64 / fs - b.start_s;
            // phase = 2π∫f, with f(τ) = fc + jitter·sin(2πτ/T + ψ)
            let wander = b.freq_jitter_hz * mod_period / (2.0 * PI)
                * (mod_phase.cos() - (2.0 * PI * tau / mod_period + mod_phase).cos());
            let phase = phase0 + 2.0 * PI * (b.center_freq_hz * tau + wander);
            *v += envelope(tau, b.duration_s) * b.amplitude_mm * phase.sin();
        }
    }

    if spec.noise_sigma_mm > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sigma_mm)
            .map_err(|e| invalid(format!("noise distribution: {e}")))?;
        x.iter_mut().for_each(|v| *v += noise.sample(&mut rng));
    }

    let series = GapeSeries::new(spec.channel, fs, spec.start_time_ms, x)?;
    let truth = spec
        .bursts
        .iter()
        .map(|b| GroundTruthEvent {
            channel_id: spec.channel,
            start_ms: spec.start_time_ms + (b.start_s * 1000.0).round() as i64,
            end_ms: spec.start_time_ms + (b.end_s() * 1000.0).round() as i64,
        })
        .collect();
    Ok((series, truth))
}

/// Ranges used to draw corpus signals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusParams {
    pub start_time_ms: i64,
    /// Signal length in whole detector windows, inclusive range.
    pub windows: (usize, usize),
    pub baseline_mm: (f64, f64),
    pub burst_count: (usize, usize),
    pub burst_duration_s: (f64, f64),
    pub burst_amplitude_mm: (f64, f64),
    pub burst_center_hz: (f64, f64),
    pub burst_jitter_hz: (f64, f64),
    pub detector: DetectorConfig,
    /// Spawning signals need a window at or above `spawn_margin × threshold`.
    pub spawn_margin: f64,
    /// Quiet signals must keep every window at or below `quiet_margin × threshold`.
    pub quiet_margin: f64,
    pub max_attempts: usize,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            start_time_ms: 0,
            windows: (10, 20),
            baseline_mm: (0.15, 0.25),
            burst_count: (1, 2),
            burst_duration_s: (1200.0, 6000.0),
            burst_amplitude_mm: (0.7, 1.0),
            burst_center_hz: (0.4, 1.2),
            burst_jitter_hz: (0.0, 0.05),
            detector: DetectorConfig::default(),
            spawn_margin: 2.0,
            quiet_margin: 0.5,
            max_attempts: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub index: usize,
    pub spawning: bool,
    pub spec: SynthSpec,
    pub series: GapeSeries,
    pub truth: Vec<GroundTruthEvent>,
    /// Generation attempts needed to meet the margins (1 = first try).
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub seed: u64,
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    /// Entries grouped six at a time, one group per six-channel file.
    pub fn file_groups(&self) -> impl Iterator<Item = &[CorpusEntry]> {
        self.entries.chunks(CHANNELS)
    }

    pub fn spawning_count(&self) -> usize {
        self.entries.iter().filter(|e| e.spawning).count()
    }
}

/// Interleaves entries (distinct channels, shared start) into CSV records.
pub fn entries_to_records(entries: &[CorpusEntry]) -> Result<Vec<GapeRecord>> {
    let series: Vec<GapeSeries> = entries.iter().map(|e| e.series.clone()).collect();
    interleave_series(&series)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for signal `index`, retry `attempt` of a corpus.
pub fn derive_seed(corpus_seed: u64, index: usize, attempt: usize) -> u64 {
    splitmix64(splitmix64(corpus_seed ^ splitmix64(index as u64)) ^ attempt as u64)
}

pub fn make_corpus(n_signals: usize, spawning_fraction: f64, seed: u64) -> Result<Corpus> {
    make_corpus_with(
        &CorpusParams::default(),
        n_signals,
        spawning_fraction,
        seed,
        Execution::default(),
    )
}

/// Builds a labeled corpus. Every signal is checked against the detector
/// before it is accepted and regenerated with a perturbed seed otherwise.
pub fn make_corpus_with(
    params: &CorpusParams,
    n_signals: usize,
    spawning_fraction: f64,
    seed: u64,
    exec: Execution,
) -> Result<Corpus> {
    if n_signals == 0 {
        return Err(invalid("corpus needs at least one signal"));
    }
    if !(0.0..=1.0).contains(&spawning_fraction) {
        return Err(invalid("spawning fraction must lie in [0, 1]"));
    }
    params.detector.validate()?;
    let n_spawning = (n_signals as f64 * spawning_fraction).round() as usize;
    let mut labels: Vec<bool> = (0..n_signals).map(|i| i < n_spawning).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let jobs: Vec<(usize, bool)> = labels.into_iter().enumerate().collect();
    let entries = map_ordered(exec, &jobs, |&(index, spawning)| {
        build_entry(params, seed, index, spawning)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Corpus { seed, entries })
}

fn build_entry(
    params: &CorpusParams,
    seed: u64,
    index: usize,
    spawning: bool,
) -> Result<CorpusEntry> {
    let channel = ChannelId::new((index % CHANNELS) as u8 + 1)?;
    for attempt in 0..params.max_attempts {
        let signal_seed = derive_seed(seed, index, attempt);
        let spec = draw_spec(params, signal_seed, channel, spawning);
        let (series, truth) = generate(&spec)?;
        if meets_margins(params, &series, &truth, spawning)? {
            return Ok(CorpusEntry {
                index,
                spawning,
                spec,
                series,
                truth,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::MarginUnattainable {
        attempts: params.max_attempts,
    })
}

fn draw_spec(
    params: &CorpusParams,
    signal_seed: u64,
    channel: ChannelId,
    spawning: bool,
) -> SynthSpec {
    // separate stream from generate()'s, which reseeds from spec.seed
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(signal_seed));
    let window_s = params.detector.window_samples as f64 / SynthSpec::default().sample_rate_hz;
    let windows = rng.random_range(params.windows.0..=params.windows.1);
    let duration_s = windows as f64 * window_s;
    let baseline_mm = rng.random_range(params.baseline_mm.0..=params.baseline_mm.1);
    let mut bursts = Vec::new();
    if spawning {
        let count = rng
            .random_range(params.burst_count.0..=params.burst_count.1)
            .max(1);
        let slot = duration_s / count as f64;
        for i in 0..count {
            let max_len = params.burst_duration_s.1.min(slot);
            let min_len = params.burst_duration_s.0.min(max_len);
            let len = rng.random_range(min_len..=max_len);
            let offset = rng.random_range(0.0..=(slot - len));
            bursts.push(BurstSpec {
                start_s: i as f64 * slot + offset,
                duration_s: len,
                center_freq_hz: rng
                    .random_range(params.burst_center_hz.0..=params.burst_center_hz.1),
                freq_jitter_hz: rng
                    .random_range(params.burst_jitter_hz.0..=params.burst_jitter_hz.1),
                amplitude_mm: rng
                    .random_range(params.burst_amplitude_mm.0..=params.burst_amplitude_mm.1),
            });
        }
    }
    SynthSpec {
        seed: signal_seed,
        channel,
        start_time_ms: params.start_time_ms,
        duration_s,
        baseline_mm,
        bursts,
        ..SynthSpec::default()
    }
}

fn meets_margins(
    params: &CorpusParams,
    series: &GapeSeries,
    truth: &[GroundTruthEvent],
    spawning: bool,
) -> Result<bool> {
    let det = detect_events_with(series, &params.detector, Execution::Sequential)?;
    let threshold = params.detector.threshold;
    if !spawning {
        return Ok(det
            .verdicts
            .iter()
            .all(|v| v.band_power <= params.quiet_margin * threshold));
    }
    let strong_window_in_each_burst = truth.iter().all(|t| {
        det.verdicts.iter().any(|v| {
            v.start_time_ms >= t.start_ms
                && v.end_time_ms <= t.end_ms
                && v.band_power >= params.spawn_margin * threshold
        })
    });
    Ok(strong_window_in_each_burst && events_match_truth(&det.events, truth))
}

/// Every event intersects some true burst and every burst intersects some event.
pub fn events_match_truth(events: &[SpawningEvent], truth: &[GroundTruthEvent]) -> bool {
    events.iter().all(|e| {
        truth
            .iter()
            .any(|t| t.overlaps(e.start_time_ms, e.end_time_ms))
    }) && truth.iter().all(|t| {
        events
            .iter()
            .any(|e| t.overlaps(e.start_time_ms, e.end_time_ms))
    })
}

pub const TRUTH_HEADER: &str = "channel,start_ms,end_ms";

pub fn write_truth_csv<W: Write>(mut w: W, events: &[GroundTruthEvent]) -> Result<()> {
    writeln!(w, "{TRUTH_HEADER}")?;
    for e in events {
        writeln!(w, "{},{},{}", e.channel_id, e.start_ms, e.end_ms)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth_csv<R: BufRead>(r: R) -> Result<Vec<GroundTruthEvent>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == TRUTH_HEADER) {
            continue;
        }
        let bad = || invalid(format!("truth line {}: '{line}'", i + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(bad());
        }
        let channel: u8 = f[0].parse().map_err(|_| bad())?;
        out.push(GroundTruthEvent {
            channel_id: ChannelId::new(channel)?,
            start_ms: f[1].parse().map_err(|_| bad())?,
            end_ms: f[2].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use gapewatch_core::codec::{write_csv, CsvReport};
use gapewatch_core::detector::{
    segment_windows, window_size_sweep, DetectorConfig, SpawningEvent, WindowVerdict,
};
use gapewatch_core::signal::{normalize_zero_start, ChannelId, GapPolicy};
use gapewatch_core::spectral::{fft, periodogram_psd, single_sided_spectrum, to_db_display};
use gapewatch_core::synth::{
    entries_to_records, generate, make_corpus, write_truth_csv, BurstSpec, SynthSpec,
};
use gapewatch_core::Error as CoreError;
use gapewatch_ingest::{
    alerts_from_verdicts, replay as send_records, AlertSink, FanoutSink, JsonlSink, Pace, Server,
    ServerConfig,
};
use serde::Serialize;

use crate::args::{
    check_smooth, parse_channel, parse_sizes, DetectorArgs, Format, InputArgs, OptCount,
};
use crate::output::{create, write_json, write_rows, Row};
use crate::pipeline::{self, Preprocess};

fn preprocess_of(input: &InputArgs) -> Result<Preprocess> {
    check_smooth(input.smooth)?;
    Ok(Preprocess {
        sample_rate_hz: input.rate,
        smooth: input.smooth.0,
        downsample: input.downsample.0,
        gap_policy: if input.strict_gaps {
            GapPolicy::ErrorOnGap
        } else {
            GapPolicy::Concatenate
        },
    })
}

#[derive(Serialize)]
struct SampleRow {
    channel_id: ChannelId,
    index: usize,
    timestamp_ms: i64,
    value_mm: f64,
}

impl Row for SampleRow {
    const HEADER: &'static str = "channel_id,index,timestamp_ms,value_mm";
    fn csv(&self) -> String {
        format!(
            "{},{},{},{}",
            self.channel_id, self.index, self.timestamp_ms, self.value_mm
        )
    }
}

pub fn preprocess(input: &InputArgs, normalize: bool, format: Format, out: &Path) -> Result<()> {
    let pre = preprocess_of(input)?;
    let (records, csv) = pipeline::read_records(&input.input)?;
    let mut rows = Vec::new();
    for c in pipeline::channels(&records, input.channel) {
        let mut s = pipeline::prepare(&records, c, &pre).with_context(|| format!("channel {c}"))?;
        if normalize {
            s = normalize_zero_start(&s);
        }
        rows.extend(s.values().iter().enumerate().map(|(i, &v)| SampleRow {
            channel_id: c,
            index: i,
            timestamp_ms: s.time_at(i),
            value_mm: v,
        }));
    }
    write_rows(create(out)?, &rows, format)?;
    write_json(
        None,
        &serde_json::json!({ "command": "preprocess", "csv": csv, "preprocess": pre, "normalize": normalize }),
    )
}

#[derive(Serialize)]
struct SpectrumRow {
    freq_hz: f64,
    amplitude: f64,
    psd: f64,
    psd_db: f64,
}

impl Row for SpectrumRow {
    const HEADER: &'static str = "freq_hz,amplitude,psd,psd_db";
    fn csv(&self) -> String {
        format!(
            "{},{},{},{}",
            self.freq_hz, self.amplitude, self.psd, self.psd_db
        )
    }
}

pub fn spectrum(
    input: &InputArgs,
    detector: &DetectorArgs,
    window_index: Option<usize>,
    format: Format,
    out: &Path,
) -> Result<()> {
    let pre = preprocess_of(input)?;
    let config = detector.config()?;
    let (records, _) = pipeline::read_records(&input.input)?;
    let channel = input
        .channel
        .or_else(|| pipeline::channels(&records, None).first().copied())
        .context("input has no channel data")?;
    let series = pipeline::prepare(&records, channel, &pre)?;
    let windows = segment_windows(&series, &config).windows;
    let count = windows.len();
    let index = match window_index {
        Some(i) => i,
        None => count
            .checked_sub(1)
            .ok_or(CoreError::WindowOutOfRange { index: 0, count })?,
    };
    let span = windows
        .get(index)
        .ok_or(CoreError::WindowOutOfRange { index, count })
        .with_context(|| format!("valid window indices are 0..{count}"))?;
    let mut samples = series.values()[span.start_sample..span.start_sample + span.len].to_vec();
    samples.resize(config.window_samples, 0.0);
    let spec = fft(&samples, series.sample_rate_hz())?;
    let ss = single_sided_spectrum(&spec);
    let psd = periodogram_psd(&spec);
    let rows: Vec<SpectrumRow> = (0..ss.len())
        .map(|k| SpectrumRow {
            freq_hz: ss.freqs_hz[k],
            amplitude: ss.amplitudes[k],
            psd: psd[k],
            psd_db: to_db_display(psd[k]),
        })
        .collect();
    write_rows(create(out)?, &rows, format)
}

#[derive(Serialize)]
struct EventRow<'a>(&'a SpawningEvent);

impl Row for EventRow<'_> {
    const HEADER: &'static str =
        "channel_id,start_time_ms,end_time_ms,peak_band_power,window_count,first_window,last_window";
    fn csv(&self) -> String {
        let e = self.0;
        format!(
            "{},{},{},{},{},{},{}",
            e.channel_id,
            e.start_time_ms,
            e.end_time_ms,
            e.peak_band_power,
            e.window_count,
            e.first_window,
            e.last_window
        )
    }
}

#[derive(Serialize)]
struct VerdictRow<'a> {
    channel_id: ChannelId,
    #[serde(flatten)]
    verdict: &'a WindowVerdict,
}

impl Row for VerdictRow<'_> {
    const HEADER: &'static str =
        "channel_id,window_index,start_time_ms,end_time_ms,band_power,is_spawning,padded";
    fn csv(&self) -> String {
        let v = self.verdict;
        format!(
            "{},{},{},{},{},{},{}",
            self.channel_id,
            v.window_index,
            v.start_time_ms,
            v.end_time_ms,
            v.band_power,
            v.is_spawning,
            v.padded
        )
    }
}

#[derive(Serialize)]
struct ChannelSummary {
    channel_id: ChannelId,
    samples: usize,
    sample_rate_hz: f64,
    windows: usize,
    spawning_windows: usize,
    events: usize,
    discarded_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

/// Echo of what a command did; byte-identical across runs unless timing is requested.
#[derive(Serialize)]
struct RunReport<'a> {
    command: &'static str,
    input: String,
    csv: &'a CsvReport,
    preprocess: &'a Preprocess,
    config: &'a DetectorConfig,
    channels: Vec<ChannelSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

pub struct DetectOpts {
    pub input: InputArgs,
    pub detector: DetectorArgs,
    pub format: Format,
    pub out: PathBuf,
    pub verdicts: Option<PathBuf>,
    pub alerts: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub timing: bool,
}

pub fn detect(o: &DetectOpts) -> Result<()> {
    let started = Instant::now();
    let pre = preprocess_of(&o.input)?;
    let config = o.detector.config()?;
    let (records, csv) = pipeline::read_records(&o.input.input)?;
    let results = pipeline::detect_records(&records, o.input.channel, &pre, &config)?;

    let events: Vec<EventRow> = results
        .iter()
        .flat_map(|(_, d)| d.events.iter().map(EventRow))
        .collect();
    write_rows(create(&o.out)?, &events, o.format)?;

    if let Some(path) = &o.verdicts {
        let rows: Vec<VerdictRow> = results
            .iter()
            .flat_map(|(_, d)| {
                d.verdicts.iter().map(|v| VerdictRow {
                    channel_id: d.channel_id,
                    verdict: v,
                })
            })
            .collect();
        write_rows(create(path)?, &rows, o.format)?;
    }
    if let Some(path) = &o.alerts {
        let mut w = create(path)?;
        for (_, d) in &results {
            for a in alerts_from_verdicts(d.channel_id, &d.verdicts) {
                writeln!(w, "{}", a.to_json_line())?;
            }
        }
        w.flush()?;
    }

    let report = RunReport {
        command: "detect",
        input: o.input.input.display().to_string(),
        csv: &csv,
        preprocess: &pre,
        config: &config,
        channels: results
            .iter()
            .map(|(s, d)| ChannelSummary {
                channel_id: d.channel_id,
                samples: s.len(),
                sample_rate_hz: s.sample_rate_hz(),
                windows: d.verdicts.len(),
                spawning_windows: d.spawning_count(),
                events: d.events.len(),
                discarded_samples: d.discarded_samples,
                note: d.note.clone(),
            })
            .collect(),
        elapsed_ms: o.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
    };
    write_json(o.report.as_deref(), &report)
}

#[derive(Serialize)]
struct SweepOut {
    channel_id: ChannelId,
    window_samples: usize,
    window_count: usize,
    spawning_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<f64>,
}

impl Row for SweepOut {
    const HEADER: &'static str = "channel_id,window_samples,window_count,spawning_count";
    fn csv(&self) -> String {
        let mut s = format!(
            "{},{},{},{}",
            self.channel_id, self.window_samples, self.window_count, self.spawning_count
        );
        if let Some(ms) = self.runtime_ms {
            s.push_str(&format!(",{ms:.3}"));
        }
        s
    }
}

pub fn sweep(
    input: &InputArgs,
    detector: &DetectorArgs,
    sizes: &str,
    format: Format,
    out: &Path,
    timing: bool,
) -> Result<()> {
    let pre = preprocess_of(input)?;
    let config = detector.config()?;
    let sizes = parse_sizes(sizes)?;
    let (records, _) = pipeline::read_records(&input.input)?;
    let mut rows = Vec::new();
    for c in pipeline::channels(&records, input.channel) {
        let s = pipeline::prepare(&records, c, &pre)?;
        for r in window_size_sweep(&s, &sizes, &config)? {
            rows.push(SweepOut {
                channel_id: c,
                window_samples: r.window_samples,
                window_count: r.window_count,
                spawning_count: r.spawning_count,
                runtime_ms: timing.then_some(r.runtime.as_secs_f64() * 1e3),
            });
        }
    }
    let mut w = create(out)?;
    if timing && format == Format::Csv {
        writeln!(w, "{},runtime_ms", SweepOut::HEADER)?;
        for r in &rows {
            writeln!(w, "{}", r.csv())?;
        }
        w.flush()?;
        return Ok(());
    }
    write_rows(w, &rows, format)
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Random seed; identical seeds give identical files.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Signal length in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub duration: f64,
    /// Sampling rate in Hz.
    #[arg(long, default_value_t = 10.0)]
    pub rate: f64,
    /// Resting gape in mm.
    #[arg(long, default_value_t = 0.2)]
    pub baseline: f64,
    /// Amplitude of the slow baseline drift in mm.
    #[arg(long, default_value_t = 0.05)]
    pub drift_amp: f64,
    /// Period of the baseline drift in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub drift_period: f64,
    /// Standard deviation of the white measurement noise in mm.
    #[arg(long, default_value_t = 0.005)]
    pub noise: f64,
    /// Burst as start_s:duration_s:freq_hz:amplitude_mm[:jitter_hz]; repeatable.
    #[arg(long = "burst")]
    pub bursts: Vec<String>,
    /// Channel the signal is written to.
    #[arg(long, value_parser = parse_channel, default_value = "1")]
    pub channel: ChannelId,
    /// Timestamp of the first sample.
    #[arg(long, default_value_t = 0)]
    pub start_ms: i64,
    /// Output CSV for a single signal.
    #[arg(long, required_unless_present = "corpus")]
    pub out: Option<PathBuf>,
    /// Ground-truth sidecar; default is `<out>.truth.csv`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Generate a labeled corpus of this many signals instead.
    #[arg(long, requires = "out_dir")]
    pub corpus: Option<usize>,
    /// Fraction of corpus signals that contain a burst.
    #[arg(long, default_value_t = 0.5)]
    pub spawning_fraction: f64,
    /// Directory for corpus files (six signals per file).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".truth.csv");
    PathBuf::from(s)
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    if let Some(n) = a.corpus {
        return synth_corpus(
            n,
            a.spawning_fraction,
            a.seed,
            a.out_dir.as_deref().expect("clap requires out_dir"),
        );
    }
    let out = a.out.as_deref().expect("clap requires out");
    let bursts = a
        .bursts
        .iter()
        .map(|b| BurstSpec::parse(b))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = SynthSpec {
        seed: a.seed,
        channel: a.channel,
        start_time_ms: a.start_ms,
        duration_s: a.duration,
        sample_rate_hz: a.rate,
        baseline_mm: a.baseline,
        drift_period_s: a.drift_period,
        drift_amplitude_mm: a.drift_amp,
        noise_sigma_mm: a.noise,
        bursts,
    };
    let (series, truth) = generate(&spec)?;
    let records = gapewatch_core::signal::interleave_series(std::slice::from_ref(&series))?;
    write_csv(create(out)?, &records)?;
    let truth_path = a.truth.clone().unwrap_or_else(|| sidecar_path(out));
    write_truth_csv(create(&truth_path)?, &truth)?;
    write_json(
        None,
        &serde_json::json!({
            "command": "synth",
            "seed": spec.seed,
            "spec": spec,
            "samples": series.len(),
            "out": out.display().to_string(),
            "truth": truth_path.display().to_string(),
        }),
    )
}

fn synth_corpus(n: usize, fraction: f64, seed: u64, dir: &Path) -> Result<()> {
    let corpus = make_corpus(n, fraction, seed)?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut labels = create(&dir.join("labels.csv"))?;
    writeln!(labels, "file,channel,index,spawning,seed,attempts")?;
    for (i, group) in corpus.file_groups().enumerate() {
        let name = format!("corpus_{i:03}.csv");
        let path = dir.join(&name);
        write_csv(create(&path)?, &entries_to_records(group)?)?;
        let truth: Vec<_> = group.iter().flat_map(|e| e.truth.iter().cloned()).collect();
        write_truth_csv(create(&sidecar_path(&path))?, &truth)?;
        for e in group {
            writeln!(
                labels,
                "{name},{},{},{},{},{}",
                e.spec.channel, e.index, e.spawning, e.spec.seed, e.attempts
            )?;
        }
    }
    labels.flush()?;
    write_json(
        None,
        &serde_json::json!({
            "command": "synth",
            "corpus_seed": seed,
            "signals": n,
            "spawning": corpus.spawning_count(),
            "out_dir": dir.display().to_string(),
        }),
    )
}

pub fn serve(
    listen: &str,
    alerts: Option<&Path>,
    echo: bool,
    rate: f64,
    exit_after: Option<usize>,
    detector: &DetectorArgs,
) -> Result<()> {
    let config = ServerConfig {
        detector: detector.config()?,
        sample_rate_hz: rate,
        max_connections: exit_after,
    };
    let server = Server::bind(listen, config)?;
    let mut sinks: Vec<Arc<dyn AlertSink>> = Vec::new();
    if let Some(path) = alerts {
        let f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("cannot open alert file {}", path.display()))?;
        sinks.push(Arc::new(JsonlSink::new(f)));
    }
    if alerts.is_none() || echo {
        sinks.push(Arc::new(JsonlSink::new(io::stdout())));
    }
    eprintln!("listening on {}", server.local_addr()?);
    let stats = server.run(Arc::new(FanoutSink::new(sinks)))?;
    write_json(
        None,
        &serde_json::json!({ "command": "serve", "stats": stats }),
    )
}

pub fn replay(connect: &str, input: &Path, speed: OptCount) -> Result<()> {
    let (records, _) = pipeline::read_records(input)?;
    let pace = match speed.0 {
        None => Pace::AsFastAsPossible,
        Some(k) => Pace::Speedup(k as f64),
    };
    if records.is_empty() {
        bail!("{} has no usable records", input.display());
    }
    let sent = send_records(connect, &records, pace)?;
    write_json(
        None,
        &serde_json::json!({ "command": "replay", "frames": sent }),
    )
}

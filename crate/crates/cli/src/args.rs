use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use gapewatch_core::detector::{Anchor, DetectorConfig, ThresholdScale};
use gapewatch_core::signal::{ChannelId, DEFAULT_SAMPLE_RATE_HZ};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    Csv,
    Jsonl,
}

/// `off` or a positive integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OptCount(pub Option<usize>);

impl std::str::FromStr for OptCount {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("off") {
            return Ok(OptCount(None));
        }
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(|n| OptCount(Some(n)))
            .ok_or_else(|| format!("expected 'off' or a positive integer, got '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band(pub f64, pub f64);

impl std::str::FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("band must look like lo:hi, got '{s}'"))?;
        let lo = lo
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("band low edge: {e}"))?;
        let hi = hi
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("band high edge: {e}"))?;
        Ok(Band(lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnchorArg {
    Tail,
    Head,
}

/// Detector settings shared by detect, spectrum, sweep and serve.
#[derive(Debug, Clone, Args)]
pub struct DetectorArgs {
    /// Window length in samples.
    #[arg(long, env = "GAPEWATCH_WINDOW", default_value_t = 6000)]
    pub window: usize,
    /// Detection band in Hz, as lo:hi.
    #[arg(long, env = "GAPEWATCH_BAND", default_value = "0.3:1.3")]
    pub band: Band,
    /// Band-power threshold; a window at or above it is spawning.
    #[arg(long, env = "GAPEWATCH_THRESHOLD", default_value_t = 0.1)]
    pub threshold: f64,
    /// Compare the linear band power, or its decibel value, with the threshold.
    #[arg(long, value_enum, default_value = "linear")]
    pub threshold_scale: ScaleArg,
    /// Step between windows in samples, or off for tumbling windows.
    #[arg(long, default_value = "off")]
    pub hop: OptCount,
    /// Analyze a leftover partial window, zero-padded, when it is at least
    /// this fraction of a window. 1 discards partial windows.
    #[arg(long, default_value_t = 1.0)]
    pub min_partial: f64,
    /// Align the window grid to the end (tail) or start (head) of the series.
    #[arg(long, value_enum, default_value = "tail")]
    pub anchor: AnchorArg,
}

impl DetectorArgs {
    pub fn config(&self) -> Result<DetectorConfig> {
        let cfg = DetectorConfig {
            window_samples: self.window,
            f_lo_hz: self.band.0,
            f_hi_hz: self.band.1,
            threshold: self.threshold,
            min_partial_fraction: self.min_partial,
            hop_samples: self.hop.0,
            anchor: match self.anchor {
                AnchorArg::Tail => Anchor::Tail,
                AnchorArg::Head => Anchor::Head,
            },
            threshold_scale: match self.threshold_scale {
                ScaleArg::Linear => ThresholdScale::Linear,
                ScaleArg::Db => ThresholdScale::Decibel,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Input file and the preprocessing applied before analysis.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Gape CSV (`ts_ms,s1,...,s6`); `-` reads standard input.
    #[arg(long)]
    pub input: PathBuf,
    /// Only process this channel (1-6); default is every channel present.
    #[arg(long, value_parser = parse_channel)]
    pub channel: Option<ChannelId>,
    /// Sampling rate of the input in Hz.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE_HZ)]
    pub rate: f64,
    /// Centered moving-average window (odd), or off.
    #[arg(long, default_value = "off")]
    pub smooth: OptCount,
    /// Block-mean downsampling factor, or off.
    #[arg(long, default_value = "off")]
    pub downsample: OptCount,
    /// Fail instead of splicing when a channel has gaps.
    #[arg(long)]
    pub strict_gaps: bool,
}

pub fn parse_channel(s: &str) -> std::result::Result<ChannelId, String> {
    let n: u8 = s
        .parse()
        .map_err(|_| format!("channel must be 1-6, got '{s}'"))?;
    ChannelId::new(n).map_err(|e| e.to_string())
}

pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .with_context(|| format!("bad window size '{p}'"))
        })
        .collect()
}

pub fn check_smooth(smooth: OptCount) -> Result<()> {
    if let Some(n) = smooth.0 {
        if n % 2 == 0 {
            bail!("--smooth needs an odd window, got {n}");
        }
    }
    Ok(())
}

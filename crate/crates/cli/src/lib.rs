//! `gapewatch` command line: preprocess, spectrum, detect, sweep, synth,
//! serve and replay.

pub mod args;
mod cmd;
pub mod output;
pub mod pipeline;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use args::{DetectorArgs, Format, InputArgs, OptCount};

#[derive(Debug, Parser)]
#[command(name = "gapewatch", version, about = "Oyster gape spawning detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean, extract and smooth/downsample/normalize channels; emit plot data.
    Preprocess {
        #[command(flatten)]
        input: InputArgs,
        /// Subtract each channel's first value.
        #[arg(long)]
        normalize: bool,
        /// Machine output format.
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Output path; `-` is standard output.
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Single-sided spectrum of one window of one channel.
    Spectrum {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Chronological window index; default is the last window.
        #[arg(long)]
        window_index: Option<usize>,
        /// Machine output format.
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Output path; `-` is standard output.
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// Detect spawning events.
    Detect {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Machine output format.
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Where to write events.
        #[arg(long, default_value = "-")]
        out: PathBuf,
        /// Also write every window verdict here.
        #[arg(long)]
        verdicts: Option<PathBuf>,
        /// Write the started/ended alerts the live server would emit.
        #[arg(long)]
        alerts: Option<PathBuf>,
        /// Write the run report here instead of standard error.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include wall-clock timing in the report (makes it non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Count spawning windows for several window sizes.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Comma-separated window sizes (each at least 100).
        #[arg(long, default_value = "100,300,500,1000,2000,6000")]
        sizes: String,
        /// Machine output format.
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Output path; `-` is standard output.
        #[arg(long, default_value = "-")]
        out: PathBuf,
        /// Add a runtime column.
        #[arg(long)]
        timing: bool,
    },
    /// Generate a synthetic gape file (or a labeled corpus) with ground truth.
    Synth(cmd::SynthArgs),
    /// Run the line-protocol ingest server.
    Serve {
        /// Address to listen on.
        #[arg(long, env = "GAPEWATCH_LISTEN", default_value = "127.0.0.1:7878")]
        listen: String,
        /// Append alerts to this file (JSON lines).
        #[arg(long, env = "GAPEWATCH_ALERTS")]
        alerts: Option<PathBuf>,
        /// Also print alerts on standard output when --alerts is given.
        #[arg(long)]
        echo: bool,
        /// Sampling rate of incoming frames in Hz.
        #[arg(long, default_value_t = 10.0)]
        rate: f64,
        /// Exit after this many client connections have closed.
        #[arg(long)]
        exit_after: Option<usize>,
        #[command(flatten)]
        detector: DetectorArgs,
    },
    /// Send a gape CSV to a running server.
    Replay {
        /// Server address, as host:port.
        #[arg(long)]
        connect: String,
        /// Gape CSV to send.
        #[arg(long)]
        input: PathBuf,
        /// Playback speed factor relative to the timestamps, or off for as fast as possible.
        #[arg(long, default_value = "off")]
        speed: OptCount,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess {
            input,
            normalize,
            format,
            out,
        } => cmd::preprocess(&input, normalize, format, &out),
        Command::Spectrum {
            input,
            detector,
            window_index,
            format,
            out,
        } => cmd::spectrum(&input, &detector, window_index, format, &out),
        Command::Detect {
            input,
            detector,
            format,
            out,
            verdicts,
            alerts,
            report,
            timing,
        } => cmd::detect(&cmd::DetectOpts {
            input,
            detector,
            format,
            out,
            verdicts,
            alerts,
            report,
            timing,
        }),
        Command::Sweep {
            input,
            detector,
            sizes,
            format,
            out,
            timing,
        } => cmd::sweep(&input, &detector, &sizes, format, &out, timing),
        Command::Synth(a) => cmd::synth(&a),
        Command::Serve {
            listen,
            alerts,
            echo,
            rate,
            exit_after,
            detector,
        } => cmd::serve(
            &listen,
            alerts.as_deref(),
            echo,
            rate,
            exit_after,
            &detector,
        ),
        Command::Replay {
            connect,
            input,
            speed,
        } => cmd::replay(&connect, &input, speed),
    }
}

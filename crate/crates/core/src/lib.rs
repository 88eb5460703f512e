//! Oyster valve-gape analysis: preprocessing, exact-length FFT spectra and
//! band-power spawning detection.
//!
//! The pipeline is
//! `codec::parse_csv` → [`signal::extract_channel`] → optional smoothing →
//! [`detector::detect_events`], which cuts the series into tail-anchored
//! 6000-sample windows (10 minutes at 10 Hz), computes the mean single-sided
//! periodogram PSD over 0.3–1.3 Hz for each window, flags windows at or
//! above the threshold and merges consecutive flagged windows into events.
//!
//! With the default `parallel` feature, per-window classification, window
//! size sweeps and corpus generation run on the rayon pool. Results are
//! identical in either mode; see [`Execution`].

pub mod codec;
pub mod detector;
mod error;
pub mod fft;
pub mod signal;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};

/// How data-parallel loops are executed.
///
/// `Parallel` silently degrades to `Sequential` when the crate is built
/// without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `items` preserving order, in parallel when requested.
pub(crate) fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

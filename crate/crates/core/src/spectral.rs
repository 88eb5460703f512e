//! Two-sided and single-sided amplitude spectra, single-sided periodogram
//! PSD and the band-average power statistic used for detection.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fft::{self, FftPlan};

/// Floor substituted for non-positive powers when rendering decibels.
pub const DB_DISPLAY_FLOOR: f64 = -120.0;

/// Relative slack when deciding whether a bin sits exactly on a band edge.
const EDGE_EPS: f64 = 1e-9;

/// Complex DFT bins `X[k]`, `k = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    bins: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl ComplexSpectrum {
    pub fn new(bins: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if bins.is_empty() {
            return Err(invalid("spectrum must have at least one bin"));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(invalid(format!(
                "sample rate {sample_rate_hz} must be positive"
            )));
        }
        if bins.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("spectrum bins must be finite"));
        }
        Ok(ComplexSpectrum {
            bins,
            sample_rate_hz,
        })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn n(&self) -> usize {
        self.bins.len()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Bin spacing `Fs/N`.
    pub fn resolution_hz(&self) -> f64 {
        self.sample_rate_hz / self.n() as f64
    }

    pub fn freq_of(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate_hz / self.n() as f64
    }

    /// Number of non-negative-frequency bins, `floor(N/2) + 1`.
    pub fn one_sided_len(&self) -> usize {
        self.n() / 2 + 1
    }

    /// Single-sided doubling factor for bin `k` (DC and, for even N, Nyquist are not doubled).
    fn side_factor(&self, k: usize) -> f64 {
        let n = self.n();
        if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            1.0
        } else {
            2.0
        }
    }
}

/// Reference transform by direct summation (length ≤ [`fft::NAIVE_DFT_MAX_LEN`]).
pub fn dft_naive(signal: &[f64], sample_rate_hz: f64) -> Result<ComplexSpectrum> {
    ComplexSpectrum::new(fft::dft_naive(signal)?, sample_rate_hz)
}

pub fn fft(signal: &[f64], sample_rate_hz: f64) -> Result<ComplexSpectrum> {
    ComplexSpectrum::new(fft::fft_real(signal)?, sample_rate_hz)
}

/// Same as [`fft`] but reuses a prebuilt plan.
pub fn fft_with_plan(
    plan: &FftPlan,
    signal: &[f64],
    sample_rate_hz: f64,
) -> Result<ComplexSpectrum> {
    if plan.len() != signal.len() {
        return Err(Error::WindowLength {
            expected: plan.len(),
            actual: signal.len(),
        });
    }
    ComplexSpectrum::new(plan.forward_real(signal), sample_rate_hz)
}

/// `P2[k] = |X[k]| / N`.
pub fn two_sided_spectrum(spec: &ComplexSpectrum) -> Vec<f64> {
    let n = spec.n() as f64;
    spec.bins.iter().map(|z| z.norm() / n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSidedSpectrum {
    pub freqs_hz: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub n: usize,
    pub sample_rate_hz: f64,
}

impl SingleSidedSpectrum {
    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }
}

/// Folds P2 onto non-negative frequencies: interior bins doubled.
pub fn single_sided_spectrum(spec: &ComplexSpectrum) -> SingleSidedSpectrum {
    let p2 = two_sided_spectrum(spec);
    let len = spec.one_sided_len();
    SingleSidedSpectrum {
        freqs_hz: (0..len).map(|k| spec.freq_of(k)).collect(),
        amplitudes: (0..len).map(|k| spec.side_factor(k) * p2[k]).collect(),
        n: spec.n(),
        sample_rate_hz: spec.sample_rate_hz,
    }
}

/// Single-sided periodogram, `Pxx[k] = c_k·|X[k]|² / (Fs·N)` with `c_k` = 1 at
/// DC and Nyquist, 2 elsewhere. Units are signal² per Hz.
pub fn periodogram_psd(spec: &ComplexSpectrum) -> Vec<f64> {
    let denom = spec.sample_rate_hz * spec.n() as f64;
    (0..spec.one_sided_len())
        .map(|k| spec.side_factor(k) * spec.bins[k].norm_sqr() / denom)
        .collect()
}

/// Indices `k` with `f_lo ≤ k·Fs/N ≤ f_hi`, edges inclusive.
pub fn band_bins(
    n: usize,
    sample_rate_hz: f64,
    f_lo_hz: f64,
    f_hi_hz: f64,
) -> Result<RangeInclusive<usize>> {
    if !(f_lo_hz.is_finite() && f_hi_hz.is_finite()) || f_lo_hz < 0.0 || f_lo_hz >= f_hi_hz {
        return Err(invalid(format!(
            "band [{f_lo_hz}, {f_hi_hz}] Hz must satisfy 0 <= lo < hi"
        )));
    }
    check_nyquist(sample_rate_hz, f_hi_hz)?;
    let per_bin = n as f64 / sample_rate_hz;
    let lo = (f_lo_hz * per_bin * (1.0 - EDGE_EPS)).ceil() as usize;
    let hi = ((f_hi_hz * per_bin * (1.0 + EDGE_EPS)).floor() as usize).min(n / 2);
    if lo > hi {
        return Err(Error::EmptyBand { f_lo_hz, f_hi_hz });
    }
    Ok(lo..=hi)
}

/// Fails unless `sample_rate_hz ≥ 2·f_hi_hz`.
pub fn check_nyquist(sample_rate_hz: f64, f_hi_hz: f64) -> Result<()> {
    if f_hi_hz > sample_rate_hz / 2.0 {
        return Err(Error::NyquistViolation {
            f_hi_hz,
            sample_rate_hz,
            min_rate_hz: 2.0 * f_hi_hz,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandPower {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub bin_count: usize,
    pub mean_power: f64,
}

/// Mean single-sided periodogram PSD over the inclusive band.
pub fn band_average_power(spec: &ComplexSpectrum, f_lo_hz: f64, f_hi_hz: f64) -> Result<BandPower> {
    let bins = band_bins(spec.n(), spec.sample_rate_hz, f_lo_hz, f_hi_hz)?;
    let denom = spec.sample_rate_hz * spec.n() as f64;
    let bin_count = bins.clone().count();
    let total: f64 = bins
        .map(|k| spec.side_factor(k) * spec.bins[k].norm_sqr() / denom)
        .sum();
    Ok(BandPower {
        f_lo_hz,
        f_hi_hz,
        bin_count,
        mean_power: total / bin_count as f64,
    })
}

/// `10·log10(power)` for strictly positive power.
pub fn to_db(power: f64) -> Result<f64> {
    if power.is_nan() || power <= 0.0 || !power.is_finite() {
        return Err(invalid(format!(
            "decibels need a positive power, got {power}"
        )));
    }
    Ok(10.0 * power.log10())
}

/// Display variant of [`to_db`] that maps non-positive power to [`DB_DISPLAY_FLOOR`].
pub fn to_db_display(power: f64) -> f64 {
    to_db(power).map_or(DB_DISPLAY_FLOOR, |db| db.max(DB_DISPLAY_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(a: f64, f: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a * (2.0 * PI * f * i as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn two_sided_of_dc() {
        let spec = ComplexSpectrum::new(
            vec![Complex64::new(4.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into()],
            10.0,
        )
        .unwrap();
        assert_eq!(two_sided_spectrum(&spec), vec![1.0, 0.0, 0.0, 0.0]);
        let zero = fft(&[0.0; 16], 10.0).unwrap();
        assert!(two_sided_spectrum(&zero).iter().all(|&p| p == 0.0));
    }

    #[test]
    fn exact_bin_sinusoid() {
        let spec = fft(&sine(1.0, 0.8, 10.0, 6000), 10.0).unwrap();
        assert!((spec.bins()[480].norm() - 3000.0).abs() < 1e-6);
        let p2 = two_sided_spectrum(&spec);
        assert!((p2[480] - 0.5).abs() < 1e-9);
        assert!((p2[6000 - 480] - 0.5).abs() < 1e-9);
        let others = spec
            .bins()
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 480 && *k != 5520)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        assert!(others < 1e-6, "leak {others}");
    }

    #[test]
    fn single_sided_shape() {
        let spec = fft(&sine(0.2, 0.8, 10.0, 6000), 10.0).unwrap();
        let ss = single_sided_spectrum(&spec);
        assert_eq!(ss.len(), 3001);
        assert!((ss.freqs_hz[1] - 10.0 / 6000.0).abs() < 1e-15);
        assert_eq!(*ss.freqs_hz.last().unwrap(), 5.0);
        assert!((ss.amplitudes[480] - 0.2).abs() < 1e-9);

        let c = single_sided_spectrum(&fft(&[0.7; 9], 10.0).unwrap());
        assert_eq!(c.len(), 5);
        assert!((c.amplitudes[0] - 0.7).abs() < 1e-12);
        assert!(c.amplitudes[1..].iter().all(|&a| a < 1e-12));
    }

    #[test]
    fn default_band_bin_count() {
        let bins = band_bins(6000, 10.0, 0.3, 1.3).unwrap();
        assert_eq!(bins, 180..=780);
    }

    #[test]
    fn band_power_closed_form() {
        let spec = fft(&sine(0.2, 0.8, 10.0, 6000), 10.0).unwrap();
        let psd = periodogram_psd(&spec);
        // A²N/(2Fs) = 0.04·6000/20
        assert!((psd[480] - 12.0).abs() < 1e-6);
        let bp = band_average_power(&spec, 0.3, 1.3).unwrap();
        assert_eq!(bp.bin_count, 601);
        assert!((bp.mean_power - 12.0 / 601.0).abs() < 1e-9);
    }

    #[test]
    fn band_errors() {
        let spec = fft(&[0.0; 6000], 10.0).unwrap();
        assert_eq!(band_average_power(&spec, 0.3, 1.3).unwrap().mean_power, 0.0);
        assert!(matches!(
            band_average_power(&spec, 0.3, 5.1),
            Err(Error::NyquistViolation { .. })
        ));
        // resolution is 1/600 Hz; this band falls strictly between bins 1 and 2
        assert!(matches!(
            band_average_power(&spec, 0.0017, 0.0033),
            Err(Error::EmptyBand { .. })
        ));
        assert!(band_average_power(&spec, 1.3, 0.3).is_err());
        let slow = fft(&[0.0; 100], 1.0).unwrap();
        assert_eq!(
            band_average_power(&slow, 0.3, 1.3),
            Err(Error::NyquistViolation {
                f_hi_hz: 1.3,
                sample_rate_hz: 1.0,
                min_rate_hz: 2.6
            })
        );
    }

    #[test]
    fn nyquist_bin_not_doubled() {
        let spec = fft(&[1.0, -1.0, 1.0, -1.0], 4.0).unwrap();
        let psd = periodogram_psd(&spec);
        // |X[2]|² / (Fs·N) = 16 / 16
        assert!((psd[2] - 1.0).abs() < 1e-12);
        let ss = single_sided_spectrum(&spec);
        assert!((ss.amplitudes[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decibels() {
        assert_eq!(to_db(1.0).unwrap(), 0.0);
        assert_eq!(to_db(100.0).unwrap(), 20.0);
        assert!((to_db(0.019967).unwrap() + 17.0).abs() < 0.01);
        assert!(to_db(0.0).is_err());
        assert!(to_db(-1.0).is_err());
        assert_eq!(to_db_display(0.0), DB_DISPLAY_FLOOR);
    }
}

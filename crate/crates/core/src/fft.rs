//! Exact-length forward DFT.
//!
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform.
//! Every other length goes through Bluestein's chirp-z reduction onto a
//! power-of-two circular convolution, so the output always has exactly `n`
//! bins and a resolution of `Fs/n`. No zero padding reaches the caller.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Largest length accepted by [`dft_naive`].
pub const NAIVE_DFT_MAX_LEN: usize = 8192;

/// Precomputed twiddles for one transform length. Immutable and `Sync`, so
/// one plan can be shared by every window of a series.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Radix2(Radix2),
    Bluestein(Box<Bluestein>),
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("transform length must be at least 1"));
        }
        let kind = if n.is_power_of_two() {
            Kind::Radix2(Radix2::new(n))
        } else {
            Kind::Bluestein(Box::new(Bluestein::new(n)))
        };
        Ok(FftPlan { n, kind })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_radix2(&self) -> bool {
        matches!(self.kind, Kind::Radix2(_))
    }

    /// In-place forward transform, `X[k] = Σ x[j]·e^(−2πi·jk/n)`.
    ///
    /// # Panics
    /// If `buf.len()` differs from the plan length.
    pub fn process(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "buffer length does not match plan");
        match &self.kind {
            Kind::Radix2(r) => r.forward(buf),
            Kind::Bluestein(b) => b.forward(buf),
        }
    }

    pub fn forward_real(&self, signal: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.process(&mut buf);
        buf
    }
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    // e^(−2πi·k/n) for k < n/2
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        Radix2 { n, twiddles }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = self.n;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for chunk in buf.chunks_exact_mut(size) {
                let (lo, hi) = chunk.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = *b * self.twiddles[k * stride];
                    *b = *a - t;
                    *a += t;
                }
            }
            size *= 2;
        }
    }

    fn inverse_unscaled(&self, buf: &mut [Complex64]) {
        buf.iter_mut().for_each(|z| *z = z.conj());
        self.forward(buf);
        buf.iter_mut().for_each(|z| *z = z.conj());
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    n: usize,
    // w[k] = e^(−iπ·k²/n)
    chirp: Vec<Complex64>,
    // FFT of the conjugate chirp laid out for circular convolution, pre-scaled by 1/m
    kernel: Vec<Complex64>,
    inner: Radix2,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let two_n = 2 * n as u128;
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                // reduce k² mod 2n before scaling to keep the angle exact
                let r = (k as u128 * k as u128) % two_n;
                Complex64::from_polar(1.0, -PI * r as f64 / n as f64)
            })
            .collect();
        let inner = Radix2::new(m);
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        let scale = 1.0 / m as f64;
        kernel.iter_mut().for_each(|z| *z *= scale);
        Bluestein {
            n,
            chirp,
            kernel,
            inner,
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let m = self.kernel.len();
        let mut work = vec![Complex64::new(0.0, 0.0); m];
        for ((w, x), c) in work.iter_mut().zip(buf.iter()).zip(&self.chirp) {
            *w = x * c;
        }
        self.inner.forward(&mut work);
        work.iter_mut().zip(&self.kernel).for_each(|(w, k)| *w *= k);
        self.inner.inverse_unscaled(&mut work);
        for ((out, w), c) in buf.iter_mut().zip(&work[..self.n]).zip(&self.chirp) {
            *out = w * c;
        }
    }
}

/// Forward transform of a real signal of any length ≥ 1.
pub fn fft_real(signal: &[f64]) -> Result<Vec<Complex64>> {
    Ok(FftPlan::new(signal.len())?.forward_real(signal))
}

/// Direct O(n²) summation of the DFT. Used as a reference for [`FftPlan`].
pub fn dft_naive(signal: &[f64]) -> Result<Vec<Complex64>> {
    let n = signal.len();
    if n == 0 {
        return Err(invalid("transform length must be at least 1"));
    }
    if n > NAIVE_DFT_MAX_LEN {
        return Err(invalid(format!(
            "direct DFT limited to {NAIVE_DFT_MAX_LEN} samples, got {n}"
        )));
    }
    let roots: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
        .collect();
    Ok((0..n)
        .map(|k| {
            signal
                .iter()
                .enumerate()
                .map(|(j, &x)| roots[(j * k) % n] * x)
                .sum()
        })
        .collect())
}

//! One period of a uniformly sampled real signal and its polar Fourier form.
//!
//! Sample `n` of an `N`-sample signal sits at `x_n = 2πn/N`. The polar form
//! writes the signal as
//!
//! ```text
//! f(x_n) = dc + Σ_{k=1}^{N/2-1} m_k cos(k x_n + θ_k) + nyquist·cos(π n)
//! ```
//!
//! so a unit cosine has modulus 1 (`m_k = 2|X_k|/N` for the raw transform
//! sum `X_k`). The Nyquist bin is carried as a signed real.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let wrapped = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// One period of a real periodic signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
}

impl Signal {
    /// Wraps `values` as a signal. Requires an even length of at least 4 and
    /// finite samples.
    pub fn from_samples(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 4 {
            return Err(Error::TooShort(n));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::OddLength(n));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Signal { samples: values })
    }

    /// Samples `f` at `x_n = 2πn/N` for `n = 0..N`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_samples((0..n).map(|i| f(sample_position(i, n))).collect())
    }

    /// The all-zero signal of length `n`.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_samples(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; a valid signal has at least four samples.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Highest analyzable frequency, `N/2 - 1`.
    pub fn k_max(&self) -> usize {
        self.len() / 2 - 1
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Root mean square of the samples.
    pub fn rms(&self) -> f64 {
        rms_of(&self.samples)
    }

    /// Root mean square of the sample-wise difference `self - other`.
    pub fn rms_diff(&self, other: &Signal) -> Result<f64> {
        self.check_len(other)?;
        let sum: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((sum / self.len() as f64).sqrt())
    }

    /// Delays the signal by `shift` samples: `out[n] = self[(n - shift) mod N]`,
    /// i.e. a translation by `x0 = 2π·shift/N`.
    pub fn circular_shift(&self, shift: i64) -> Signal {
        let n = self.len();
        let j = shift.rem_euclid(n as i64) as usize;
        let mut out = Vec::with_capacity(n);
        out.extend_from_slice(&self.samples[n - j..]);
        out.extend_from_slice(&self.samples[..n - j]);
        Signal { samples: out }
    }

    pub fn scale(&self, factor: f64) -> Signal {
        Signal {
            samples: self.samples.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.check_len(other)?;
        Ok(Signal {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.check_len(other)?;
        Ok(Signal {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
        })
    }

    /// Adds a constant to every sample.
    pub fn offset(&self, value: f64) -> Signal {
        Signal {
            samples: self.samples.iter().map(|v| v + value).collect(),
        }
    }

    /// Removes the content of the Nyquist bin `N/2`.
    pub fn without_nyquist(&self) -> Signal {
        let nyquist = nyquist_amplitude(&self.samples);
        Signal {
            samples: self
                .samples
                .iter()
                .enumerate()
                .map(|(i, v)| v - nyquist * alternating(i))
                .collect(),
        }
    }

    fn check_len(&self, other: &Signal) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }
}

/// `x_n = 2πn/N`.
pub fn sample_position(n: usize, len: usize) -> f64 {
    TAU * n as f64 / len as f64
}

pub(crate) fn rms_of(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

fn alternating(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn nyquist_amplitude(samples: &[f64]) -> f64 {
    samples.iter().enumerate().map(|(i, v)| v * alternating(i)).sum::<f64>() / samples.len() as f64
}

/// A modulus/phase pair. The modulus is non-negative and the phase lies in
/// `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Polar {
    pub modulus: f64,
    pub phase: f64,
}

impl Polar {
    pub fn new(modulus: f64, phase: f64) -> Self {
        Polar { modulus, phase }
    }

    /// Canonical form of a signed amplitude: negative values become a
    /// positive modulus with the phase advanced by π.
    pub fn from_signed(amplitude: f64, phase: f64) -> Self {
        if amplitude < 0.0 {
            Polar::new(-amplitude, wrap_phase(phase + std::f64::consts::PI))
        } else {
            Polar::new(amplitude, wrap_phase(phase))
        }
    }

    /// Modulus and phase of `2X/N` for a raw transform sum `X`.
    fn from_bin(x: Complex64, len: usize) -> Self {
        Polar::new(2.0 * x.norm() / len as f64, wrap_phase(x.arg()))
    }
}

/// Polar Fourier representation of a [`Signal`].
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPolar {
    pub dc: f64,
    /// Bins `k = 1..=K`, stored at index `k - 1`.
    pub bins: Vec<Polar>,
    /// Signed amplitude of the Nyquist bin.
    pub nyquist: f64,
}

impl FourierPolar {
    /// Bin `k` (1-based); `None` outside `1..=bins.len()`.
    pub fn bin(&self, k: usize) -> Option<Polar> {
        k.checked_sub(1).and_then(|i| self.bins.get(i)).copied()
    }
}

/// Polar discrete Fourier analysis of `s`.
///
/// Bins whose modulus is below `1e-12·rms(s)` get phase 0.
pub fn dft_polar(s: &Signal) -> FourierPolar {
    let n = s.len();
    let mut buf: Vec<Complex64> = s.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let floor = 1e-12 * s.rms();
    let bins = buf[1..n / 2]
        .iter()
        .map(|&x| {
            let mut p = Polar::from_bin(x, n);
            if p.modulus <= floor {
                p.phase = 0.0;
            }
            p
        })
        .collect();
    FourierPolar {
        dc: buf[0].re / n as f64,
        bins,
        nyquist: buf[n / 2].re / n as f64,
    }
}

/// Inverse of [`dft_polar`] onto an `n`-sample grid.
pub fn synth_polar(fp: &FourierPolar, n: usize) -> Result<Signal> {
    if fp.bins.len() >= n / 2 {
        return Err(Error::BinOverflow { bin: fp.bins.len(), n });
    }
    let tw = Twiddles::new(n);
    let mut out: Vec<f64> = (0..n).map(|i| fp.dc + fp.nyquist * alternating(i)).collect();
    for (idx, bin) in fp.bins.iter().enumerate() {
        if bin.modulus != 0.0 {
            tw.accumulate_cosine(&mut out, idx + 1, bin.phase, bin.modulus);
        }
    }
    Signal::from_samples(out)
}

/// Delays `s` by an arbitrary `x0` through its trigonometric interpolant.
/// For `x0 = 2πj/N` this agrees with [`Signal::circular_shift`].
pub fn fractional_shift(s: &Signal, x0: f64) -> Signal {
    let n = s.len();
    let mut fp = dft_polar(s);
    for (i, bin) in fp.bins.iter_mut().enumerate() {
        bin.phase -= (i + 1) as f64 * x0;
    }
    fp.nyquist *= (0.5 * n as f64 * x0).cos();
    synth_polar(&fp, n).expect("bins come from a signal of the same length")
}

/// Exact cosine/sine tables on the `N`-point grid. Arguments are reduced
/// modulo `N` before lookup so high harmonics do not lose precision.
#[derive(Debug, Clone)]
pub(crate) struct Twiddles {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Twiddles {
    pub(crate) fn new(n: usize) -> Self {
        let (cos, sin) = (0..n)
            .map(|i| {
                let x = sample_position(i, n);
                (x.cos(), x.sin())
            })
            .unzip();
        Twiddles { cos, sin }
    }

    pub(crate) fn len(&self) -> usize {
        self.cos.len()
    }

    /// `out[n] += amplitude·cos(freq·x_n + phase)` for every sample.
    pub(crate) fn accumulate_cosine(&self, out: &mut [f64], freq: usize, phase: f64, amplitude: f64) {
        let n = self.len();
        let (c, s) = (amplitude * phase.cos(), amplitude * phase.sin());
        let step = freq % n;
        let mut idx = 0;
        for v in out.iter_mut() {
            *v += c * self.cos[idx] - s * self.sin[idx];
            idx += step;
            if idx >= n {
                idx -= n;
            }
        }
    }

    /// Raw transform sum `X_k = Σ x_n e^{-2πikn/N}` for a single bin.
    pub(crate) fn project(&self, values: &[f64], k: usize) -> Complex64 {
        let n = self.len();
        let step = k % n;
        let mut idx = 0;
        let (mut re, mut im) = (0.0, 0.0);
        for &v in values {
            re += v * self.cos[idx];
            im -= v * self.sin[idx];
            idx += step;
            if idx >= n {
                idx -= n;
            }
        }
        Complex64::new(re, im)
    }

    /// Polar modulus/phase of bin `k` of `values`.
    pub(crate) fn polar_bin(&self, values: &[f64], k: usize) -> Polar {
        Polar::from_bin(self.project(values, k), self.len())
    }
}

//! Basis functions described by their harmonic series
//! `S(x) = Σ s_m cos(m x + φ_m)`.
//!
//! Any periodic function with a nonzero fundamental can serve as a basis. The
//! transform works with the normalized form `S'(x) = S(x - φ_1) / s_1`, whose
//! fundamental is a unit, zero-phase cosine.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::signal::{dft_polar, wrap_phase, Signal, Twiddles};

/// One harmonic of a basis: `amplitude·cos(index·x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub index: usize,
    pub amplitude: f64,
    pub phase: f64,
}

impl Harmonic {
    pub fn new(index: usize, amplitude: f64, phase: f64) -> Self {
        Harmonic {
            index,
            amplitude,
            phase,
        }
    }
}

impl From<(usize, f64, f64)> for Harmonic {
    fn from((index, amplitude, phase): (usize, f64, f64)) -> Self {
        Harmonic::new(index, amplitude, phase)
    }
}

/// How a scaled basis instance is evaluated on the sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderMode {
    /// Harmonics at or above the Nyquist bin are dropped. This is the only
    /// mode with exact one-pass reconstruction.
    #[default]
    BandLimited,
    /// Every stored harmonic is evaluated pointwise and aliases freely.
    Sampled,
}

impl RenderMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RenderMode::BandLimited => "band_limited",
            RenderMode::Sampled => "sampled",
        }
    }
}

impl fmt::Display for RenderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RenderMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "band_limited" | "band-limited" => Ok(RenderMode::BandLimited),
            "sampled" => Ok(RenderMode::Sampled),
            other => Err(format!("unknown mode {other:?} (expected band-limited or sampled)")),
        }
    }
}

/// A periodic basis function held as a finite harmonic list.
///
/// Harmonics are sorted by index, unique, have positive amplitude and phases
/// in `[0, 2π)`. The fundamental (`index == 1`) is always present.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    harmonics: Vec<Harmonic>,
    name: Option<String>,
}

impl Basis {
    /// Builds a canonical basis from arbitrary harmonic entries.
    ///
    /// Negative amplitudes are folded into the phase, zero amplitudes are
    /// dropped and phases are wrapped.
    pub fn from_harmonics<H: Into<Harmonic>>(entries: impl IntoIterator<Item = H>) -> Result<Self> {
        let mut harmonics: Vec<Harmonic> = Vec::new();
        for h in entries.into_iter().map(Into::into) {
            if h.index == 0 {
                return Err(Error::InvalidHarmonic("harmonic index must be at least 1".into()));
            }
            if !h.amplitude.is_finite() || !h.phase.is_finite() {
                return Err(Error::InvalidHarmonic(format!(
                    "harmonic {} has a non-finite amplitude or phase",
                    h.index
                )));
            }
            harmonics.push(h);
        }
        harmonics.sort_by_key(|h| h.index);
        if let Some(w) = harmonics.windows(2).find(|w| w[0].index == w[1].index) {
            return Err(Error::DuplicateHarmonic(w[0].index));
        }
        let harmonics: Vec<Harmonic> = harmonics
            .into_iter()
            .filter(|h| h.amplitude != 0.0)
            .map(|h| {
                let (amplitude, phase) = if h.amplitude < 0.0 {
                    (-h.amplitude, h.phase + PI)
                } else {
                    (h.amplitude, h.phase)
                };
                Harmonic::new(h.index, amplitude, wrap_phase(phase))
            })
            .collect();
        if harmonics.first().map(|h| h.index) != Some(1) {
            return Err(Error::NoFundamental);
        }
        Ok(Basis { harmonics, name: None })
    }

    /// Basis taken from the Fourier content of one sampled period. The mean
    /// and the Nyquist bin are discarded.
    pub fn from_signal(s: &Signal) -> Result<Self> {
        let fp = dft_polar(s);
        let fundamental = fp.bin(1).map(|b| b.modulus).unwrap_or(0.0);
        if fundamental <= 1e-9 * s.rms() {
            return Err(Error::NoFundamental);
        }
        let floor = 1e-12 * fundamental;
        let entries = fp
            .bins
            .iter()
            .enumerate()
            .filter(|(_, b)| b.modulus >= floor)
            .map(|(i, b)| Harmonic::new(i + 1, b.modulus, b.phase));
        Basis::from_harmonics(entries)
    }

    /// Ideal series of a named waveform, truncated at `max_harmonic`.
    pub fn builtin(kind: BuiltinBasis, max_harmonic: usize) -> Result<Self> {
        if max_harmonic < 1 {
            return Err(Error::BadHarmonicCount);
        }
        let entries = (1..=max_harmonic).filter_map(|m| kind.harmonic(m));
        Ok(Basis::from_harmonics(entries)?.with_name(kind.name()))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// The name, or "custom" for unnamed bases.
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("custom")
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn fundamental(&self) -> Harmonic {
        self.harmonics[0]
    }

    /// Rescales and shifts the basis so that its fundamental becomes
    /// `cos(x)`.
    pub fn normalize(&self) -> NormalizedBasis {
        let Harmonic {
            amplitude: s1,
            phase: theta1,
            ..
        } = self.fundamental();
        let harmonics = self
            .harmonics
            .iter()
            .map(|h| {
                if h.index == 1 {
                    Harmonic::new(1, 1.0, 0.0)
                } else {
                    Harmonic::new(h.index, h.amplitude / s1, wrap_phase(h.phase - h.index as f64 * theta1))
                }
            })
            .collect();
        NormalizedBasis {
            harmonics,
            origin: Origin {
                amplitude: s1,
                phase: theta1,
            },
            name: self.name.clone(),
        }
    }

    /// Energy of the harmonics above the fundamental relative to the
    /// fundamental, and the resulting convergence class.
    pub fn convergence_report(&self) -> ConvergenceReport {
        let s1 = self.fundamental().amplitude;
        let ratio = self.harmonics[1..].iter().map(|h| (h.amplitude / s1).powi(2)).sum();
        ConvergenceReport::from_ratio(ratio)
    }

    /// Evaluates the raw basis at `amplitude·S(k x + phi)`.
    pub fn evaluate(&self, k: usize, phi: f64, amplitude: f64, n: usize, mode: RenderMode) -> Result<Signal> {
        render_harmonics(&self.harmonics, k, phi, amplitude, n, mode)
    }
}

/// The amplitude and phase of the raw fundamental removed by normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Origin {
    pub amplitude: f64,
    pub phase: f64,
}

impl Origin {
    pub const IDENTITY: Origin = Origin {
        amplitude: 1.0,
        phase: 0.0,
    };
}

/// A basis whose fundamental is exactly `cos(x)`. Harmonic amplitudes are the
/// ratios `s_m/s_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedBasis {
    harmonics: Vec<Harmonic>,
    origin: Origin,
    name: Option<String>,
}

impl NormalizedBasis {
    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("custom")
    }

    /// The normalized harmonics viewed as a plain basis. Normalizing it again
    /// yields the same harmonics with the identity origin.
    pub fn as_basis(&self) -> Basis {
        Basis {
            harmonics: self.harmonics.clone(),
            name: self.name.clone(),
        }
    }

    /// Undoes the normalization.
    pub fn denormalize(&self) -> Basis {
        let Origin {
            amplitude: s1,
            phase: theta1,
        } = self.origin;
        let harmonics = self
            .harmonics
            .iter()
            .map(|h| Harmonic::new(h.index, h.amplitude * s1, wrap_phase(h.phase + h.index as f64 * theta1)))
            .collect();
        Basis {
            harmonics,
            name: self.name.clone(),
        }
    }

    pub fn convergence_report(&self) -> ConvergenceReport {
        self.as_basis().convergence_report()
    }

    /// Samples `amplitude·S'(k x + phi)` on an `n`-point grid.
    pub fn render(&self, k: usize, phi: f64, amplitude: f64, n: usize, mode: RenderMode) -> Result<Signal> {
        render_harmonics(&self.harmonics, k, phi, amplitude, n, mode)
    }

    /// Adds `amplitude·S'(k x + phi)` into `out`. `k` must already be in
    /// range.
    pub(crate) fn accumulate(
        &self,
        tw: &Twiddles,
        out: &mut [f64],
        k: usize,
        phi: f64,
        amplitude: f64,
        mode: RenderMode,
    ) {
        accumulate_harmonics(&self.harmonics, tw, out, k, phi, amplitude, mode);
    }
}

fn check_frequency(k: usize, n: usize) -> Result<()> {
    if k < 1 || k >= n / 2 {
        return Err(Error::FrequencyOutOfRange { k, n });
    }
    Ok(())
}

fn render_harmonics(
    harmonics: &[Harmonic],
    k: usize,
    phi: f64,
    amplitude: f64,
    n: usize,
    mode: RenderMode,
) -> Result<Signal> {
    check_frequency(k, n)?;
    let tw = Twiddles::new(n);
    let mut out = vec![0.0; n];
    accumulate_harmonics(harmonics, &tw, &mut out, k, phi, amplitude, mode);
    Signal::from_samples(out)
}

fn accumulate_harmonics(
    harmonics: &[Harmonic],
    tw: &Twiddles,
    out: &mut [f64],
    k: usize,
    phi: f64,
    amplitude: f64,
    mode: RenderMode,
) {
    let half = tw.len() / 2;
    for h in harmonics {
        let freq = h.index * k;
        if mode == RenderMode::BandLimited && freq >= half {
            // harmonics are sorted, nothing further survives
            break;
        }
        let phase = h.index as f64 * phi + h.phase;
        tw.accumulate_cosine(out, freq, phase, amplitude * h.amplitude);
    }
}

/// Convergence class of a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    /// A single harmonic: the ordinary Fourier case.
    Orthogonal,
    /// The fundamental carries more energy than all other harmonics together.
    Converging,
    NotConverging,
}

impl fmt::Display for Convergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convergence::Orthogonal => "Orthogonal",
            Convergence::Converging => "Converging",
            Convergence::NotConverging => "NotConverging",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// `Σ_{m≥2} (s_m/s_1)²`.
    pub ratio: f64,
    pub classification: Convergence,
}

impl ConvergenceReport {
    pub fn from_ratio(ratio: f64) -> Self {
        let classification = if ratio == 0.0 {
            Convergence::Orthogonal
        } else if ratio < 1.0 {
            Convergence::Converging
        } else {
            Convergence::NotConverging
        };
        ConvergenceReport { ratio, classification }
    }
}

/// Named waveforms with closed-form harmonic series.
///
/// The series are the standard sine-series forms (square and sawtooth with a
/// rising zero crossing at the origin, triangle rising through the origin)
/// written in the cosine convention, so every fundamental has phase `3π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinBasis {
    /// `(4/π) Σ_{m odd} sin(m x)/m`, levels ±1.
    Square,
    /// `(2/π) Σ_m (-1)^{m+1} sin(m x)/m`, i.e. `x/π` on `(-π, π)`.
    Sawtooth,
    /// `(8/π²) Σ_{m odd} (-1)^{(m-1)/2} sin(m x)/m²`, peak ±1.
    Triangle,
    Cosine,
}

impl BuiltinBasis {
    pub const ALL: [BuiltinBasis; 4] = [
        BuiltinBasis::Square,
        BuiltinBasis::Sawtooth,
        BuiltinBasis::Triangle,
        BuiltinBasis::Cosine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinBasis::Square => "square",
            BuiltinBasis::Sawtooth => "sawtooth",
            BuiltinBasis::Triangle => "triangle",
            BuiltinBasis::Cosine => "cosine",
        }
    }

    fn harmonic(self, m: usize) -> Option<Harmonic> {
        let mf = m as f64;
        // sin(mx) = cos(mx - π/2); a negative sine coefficient adds π
        let sine = |amplitude: f64, negative: bool| {
            let phase = if negative { FRAC_PI_2 } else { 3.0 * FRAC_PI_2 };
            Some(Harmonic::new(m, amplitude, phase))
        };
        match self {
            BuiltinBasis::Square if m % 2 == 1 => sine(4.0 / (PI * mf), false),
            BuiltinBasis::Sawtooth => sine(2.0 / (PI * mf), m.is_multiple_of(2)),
            BuiltinBasis::Triangle if m % 2 == 1 => sine(8.0 / (PI * PI * mf * mf), (m / 2) % 2 == 1),
            BuiltinBasis::Cosine if m == 1 => Some(Harmonic::new(1, 1.0, 0.0)),
            _ => None,
        }
    }
}

impl FromStr for BuiltinBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuiltinBasis::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

impl fmt::Display for BuiltinBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

//! Generalized filters and the system properties built on the transform.
//!
//! A generalized filter analyzes its input in a basis, multiplies the moduli
//! by a real transfer function and resynthesizes. Such systems are
//! homogeneous and time invariant for any basis, but only satisfy
//! superposition when the basis is orthogonal (or the gains are all one).

use std::f64::consts::PI;

use crate::basis::{NormalizedBasis, RenderMode};
use crate::error::{Error, Result};
use crate::signal::{fractional_shift, wrap_phase, Polar, Signal};
use crate::transform::{analyze, synthesize, PolarSpectrum};

/// Real gains applied to spectrum moduli. `gains[k - 1]` is `G(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    gains: Vec<f64>,
    dc_gain: f64,
}

impl TransferFunction {
    pub fn new(gains: Vec<f64>, dc_gain: f64) -> Result<Self> {
        if let Some(i) = gains.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGain(i + 1));
        }
        if !dc_gain.is_finite() {
            return Err(Error::NonFiniteGain(0));
        }
        Ok(TransferFunction { gains, dc_gain })
    }

    /// Unit gain everywhere.
    pub fn allpass(k_max: usize) -> Self {
        TransferFunction {
            gains: vec![1.0; k_max],
            dc_gain: 1.0,
        }
    }

    /// Passes the mean and frequencies `1..=cutoff`.
    pub fn lowpass(k_max: usize, cutoff: usize) -> Self {
        TransferFunction {
            gains: (1..=k_max).map(|k| if k <= cutoff { 1.0 } else { 0.0 }).collect(),
            dc_gain: 1.0,
        }
    }

    /// Passes frequencies above `cutoff`; the complement of [`Self::lowpass`].
    pub fn highpass(k_max: usize, cutoff: usize) -> Self {
        TransferFunction {
            gains: (1..=k_max).map(|k| if k > cutoff { 1.0 } else { 0.0 }).collect(),
            dc_gain: 0.0,
        }
    }

    /// Passes only the listed frequencies; the mean is removed.
    pub fn keep(k_max: usize, bins: &[usize]) -> Self {
        TransferFunction {
            gains: (1..=k_max).map(|k| if bins.contains(&k) { 1.0 } else { 0.0 }).collect(),
            dc_gain: 0.0,
        }
    }

    /// Parses `allpass`, `lowpass:K`, `highpass:K` or `keep:k1,k2,...` for a
    /// spectrum with `k_max` bins.
    pub fn from_shorthand(spec: &str, k_max: usize) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse transfer function {spec:?}"));
        let (kind, arg) = match spec.split_once(':') {
            Some((kind, arg)) => (kind.trim(), Some(arg.trim())),
            None => (spec.trim(), None),
        };
        let cutoff = || -> Result<usize> { arg.ok_or_else(bad)?.parse().map_err(|_| bad()) };
        match kind {
            "allpass" if arg.is_none() => Ok(Self::allpass(k_max)),
            "lowpass" => Ok(Self::lowpass(k_max, cutoff()?)),
            "highpass" => Ok(Self::highpass(k_max, cutoff()?)),
            "keep" => {
                let bins = arg
                    .ok_or_else(bad)?
                    .split(',')
                    .map(|k| k.trim().parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::keep(k_max, &bins))
            }
            _ => Err(bad()),
        }
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn dc_gain(&self) -> f64 {
        self.dc_gain
    }

    /// Applies the gains to a spectrum. Negative gains flip the phase by π.
    pub fn apply(&self, ps: &PolarSpectrum) -> Result<PolarSpectrum> {
        if self.gains.len() < ps.k_max() {
            return Err(Error::GainLengthMismatch {
                gains: self.gains.len(),
                bins: ps.k_max(),
            });
        }
        let entries = ps
            .entries
            .iter()
            .zip(&self.gains)
            .map(|(e, &g)| {
                let modulus = g.abs() * e.modulus;
                if modulus == 0.0 {
                    Polar::default()
                } else if g < 0.0 {
                    Polar::new(modulus, wrap_phase(e.phase + PI))
                } else {
                    Polar::new(modulus, e.phase)
                }
            })
            .collect();
        Ok(PolarSpectrum {
            dc: ps.dc * self.dc_gain,
            entries,
            basis_label: ps.basis_label.clone(),
            mode: ps.mode,
        })
    }
}

/// Analysis in `nb`, modulus weighting by `g`, resynthesis.
pub fn apply_filter(f: &Signal, nb: &NormalizedBasis, g: &TransferFunction, mode: RenderMode) -> Result<Signal> {
    let ps = g.apply(&analyze(f, nb, mode))?;
    synthesize(&ps, nb, f.len(), mode)
}

/// Distance between filtering a delayed input and delaying the filtered
/// output.
pub fn time_invariance_gap(
    f: &Signal,
    shift: i64,
    nb: &NormalizedBasis,
    g: &TransferFunction,
    mode: RenderMode,
) -> Result<f64> {
    let delayed_in = apply_filter(&f.circular_shift(shift), nb, g, mode)?;
    let delayed_out = apply_filter(f, nb, g, mode)?.circular_shift(shift);
    delayed_in.rms_diff(&delayed_out)
}

/// Distance between filtering `α·f` and scaling the filtered `f` by `α`.
pub fn homogeneity_gap(
    f: &Signal,
    alpha: f64,
    nb: &NormalizedBasis,
    g: &TransferFunction,
    mode: RenderMode,
) -> Result<f64> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "homogeneity scale must be positive, got {alpha}"
        )));
    }
    let scaled_in = apply_filter(&f.scale(alpha), nb, g, mode)?;
    let scaled_out = apply_filter(f, nb, g, mode)?.scale(alpha);
    scaled_in.rms_diff(&scaled_out)
}

/// Distance between filtering a sum and summing the filtered parts.
pub fn superposition_gap(
    f1: &Signal,
    f2: &Signal,
    nb: &NormalizedBasis,
    g: &TransferFunction,
    mode: RenderMode,
) -> Result<f64> {
    let of_sum = apply_filter(&f1.add(f2)?, nb, g, mode)?;
    let sum_of = apply_filter(f1, nb, g, mode)?.add(&apply_filter(f2, nb, g, mode)?)?;
    of_sum.rms_diff(&sum_of)
}

/// Convolution defined through the spectra: moduli multiply, phases add,
/// means multiply, and the product spectrum is resynthesized in `nb`.
///
/// In the cosine basis this equals `(2/N)` times the circular convolution of
/// the zero-mean parts, plus the product of the means.
pub fn convolve(f: &Signal, g: &Signal, nb: &NormalizedBasis, mode: RenderMode) -> Result<Signal> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch {
            left: f.len(),
            right: g.len(),
        });
    }
    let pf = analyze(f, nb, mode);
    let pg = analyze(g, nb, mode);
    let entries = pf
        .entries
        .iter()
        .zip(&pg.entries)
        .map(|(a, b)| {
            let modulus = a.modulus * b.modulus;
            if modulus == 0.0 {
                Polar::default()
            } else {
                Polar::new(modulus, wrap_phase(a.phase + b.phase))
            }
        })
        .collect();
    let product = PolarSpectrum {
        dc: pf.dc * pg.dc,
        entries,
        basis_label: pf.basis_label.clone(),
        mode,
    };
    synthesize(&product, nb, f.len(), mode)
}

/// Outcome of testing whether an input keeps its shape through a filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenReport {
    pub is_eigenfunction: bool,
    /// Modulus of the fitted eigenvalue.
    pub eigen_modulus: f64,
    /// Fitted delay `x0 ∈ [0, 2π)`; the output is compared against
    /// `eigen_modulus·candidate(x - x0)`.
    pub eigen_phase: f64,
    /// Rms distance between the output and the fitted scaled, delayed input.
    pub residual_rms: f64,
}

/// Relative residual below which a candidate counts as an eigenfunction.
pub const EIGEN_TOLERANCE: f64 = 1e-6;

/// Filters `candidate` and fits a scale and delay from the lowest nonzero
/// component of its own spectrum to the output.
pub fn eigen_check(
    candidate: &Signal,
    nb: &NormalizedBasis,
    g: &TransferFunction,
    mode: RenderMode,
) -> Result<EigenReport> {
    let scale = candidate.rms();
    if scale == 0.0 {
        return Err(Error::ZeroCandidate);
    }
    let input = analyze(candidate, nb, mode);
    let output_spectrum = g.apply(&input)?;
    let output = synthesize(&output_spectrum, nb, candidate.len(), mode)?;
    let refit = analyze(&output, nb, mode);

    let floor = 1e-9 * input.max_modulus();
    let lowest = input
        .entries
        .iter()
        .enumerate()
        .find(|(_, e)| e.modulus > floor && e.modulus > 0.0);
    let (modulus, delay) = match lowest {
        Some((i, e_in)) => {
            let k = (i + 1) as f64;
            let e_out = refit.entries[i];
            let delay = wrap_phase(e_in.phase - e_out.phase) / k;
            (e_out.modulus / e_in.modulus, delay)
        }
        None => (output.mean() / candidate.mean(), 0.0),
    };
    let fitted = fractional_shift(candidate, delay).scale(modulus);
    let residual_rms = output.rms_diff(&fitted)?;
    Ok(EigenReport {
        is_eigenfunction: residual_rms < EIGEN_TOLERANCE * scale,
        eigen_modulus: modulus,
        eigen_phase: delay,
        residual_rms,
    })
}

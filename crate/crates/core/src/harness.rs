//! Reconstruction, wavelet comparison and separation experiments.
//!
//! The [`scenarios`] module pins the parameters of each experiment so that
//! runs are bit-reproducible.

use crate::basis::{Basis, RenderMode};
use crate::error::{Error, Result};
pub use crate::haar::haar_reconstruct;
use crate::signal::Signal;
use crate::transform::{analyze, synthesize, PolarSpectrum};

/// Relative modulus above which a spectrum entry counts as a component.
pub const COMPONENT_FLOOR: f64 = 1e-9;

/// Reconstruction error as a function of truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub orders: Vec<usize>,
    pub rms_errors: Vec<f64>,
    pub mode: RenderMode,
    pub basis_label: String,
    pub n: usize,
}

/// Analyzes `f` once and records the rms error of the synthesis truncated
/// at each order.
pub fn reconstruct_experiment(
    f: &Signal,
    b: &Basis,
    orders: &[usize],
    mode: RenderMode,
) -> Result<ReconstructionReport> {
    let k_max = f.k_max();
    if let Some(&o) = orders.iter().find(|&&o| o > k_max) {
        return Err(Error::BadOrders(format!("order {o} exceeds K_max = {k_max}")));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadOrders("orders must be strictly ascending".into()));
    }
    let nb = b.normalize();
    let ps = analyze(f, &nb, mode);
    let rms_errors = orders
        .iter()
        .map(|&o| synthesize(&ps.truncated(o), &nb, f.len(), mode)?.rms_diff(f))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReconstructionReport {
        orders: orders.to_vec(),
        rms_errors,
        mode,
        basis_label: b.label().to_string(),
        n: f.len(),
    })
}

/// A reconstruction from a limited number of spectrum components.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReconstruction {
    pub signal: Signal,
    /// Frequencies of the components used, ascending.
    pub frequencies: Vec<usize>,
    pub rms_error: f64,
    pub spectrum: PolarSpectrum,
}

/// Synthesizes `f` from the mean and its `count` lowest-frequency nonzero
/// components (fewer if the spectrum has fewer).
pub fn component_reconstruct(f: &Signal, b: &Basis, count: usize, mode: RenderMode) -> Result<ComponentReconstruction> {
    let nb = b.normalize();
    let ps = analyze(f, &nb, mode);
    let frequencies: Vec<usize> = ps
        .nonzero_frequencies(COMPONENT_FLOOR)
        .into_iter()
        .take(count)
        .collect();
    let mut kept = ps.band(1, 0, true);
    for &k in &frequencies {
        kept.entries[k - 1] = ps.entries[k - 1];
    }
    let signal = synthesize(&kept, &nb, f.len(), mode)?;
    let rms_error = signal.rms_diff(f)?;
    Ok(ComponentReconstruction {
        signal,
        frequencies,
        rms_error,
        spectrum: ps,
    })
}

/// Generic-basis reconstruction set against a best-term Haar reconstruction
/// of the same signal.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarComparison {
    pub gdt: ComponentReconstruction,
    pub haar_signal: Signal,
    pub haar_rms: f64,
    pub haar_coefficients: usize,
    /// Nonzero components with frequency at most 55 in the full spectrum.
    pub components_up_to_55: usize,
}

pub fn haar_comparison(
    f: &Signal,
    b: &Basis,
    components: usize,
    haar_coefficients: usize,
    mode: RenderMode,
) -> Result<HaarComparison> {
    let gdt = component_reconstruct(f, b, components, mode)?;
    let haar_signal = haar_reconstruct(f, haar_coefficients)?;
    let haar_rms = haar_signal.rms_diff(f)?;
    let components_up_to_55 = gdt
        .spectrum
        .nonzero_frequencies(COMPONENT_FLOOR)
        .into_iter()
        .filter(|&k| k <= 55)
        .count();
    Ok(HaarComparison {
        gdt,
        haar_signal,
        haar_rms,
        haar_coefficients,
        components_up_to_55,
    })
}

/// Split of a signal into its low components and everything above them.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    /// Mean plus components `1..=cutoff`.
    pub kept: Signal,
    /// Components above the cutoff.
    pub residual: Signal,
    /// Rms distance between `kept` and the reference, when one was given.
    pub kept_rms_error_vs_reference: Option<f64>,
    pub spectrum: PolarSpectrum,
}

/// Separates `f_noisy` at `cutoff` in the basis `b`.
pub fn noise_separation(
    f_noisy: &Signal,
    b: &Basis,
    cutoff: usize,
    mode: RenderMode,
    reference: Option<&Signal>,
) -> Result<SeparationReport> {
    let k_max = f_noisy.k_max();
    if cutoff < 1 || cutoff > k_max {
        return Err(Error::BadCutoff { cutoff, k_max });
    }
    let nb = b.normalize();
    let ps = analyze(f_noisy, &nb, mode);
    let n = f_noisy.len();
    let kept = synthesize(&ps.band(1, cutoff, true), &nb, n, mode)?;
    let residual = synthesize(&ps.band(cutoff + 1, k_max, false), &nb, n, mode)?;
    let kept_rms_error_vs_reference = reference.map(|r| kept.rms_diff(r)).transpose()?;
    Ok(SeparationReport {
        kept,
        residual,
        kept_rms_error_vs_reference,
        spectrum: ps,
    })
}

/// Frozen experiment parameters.
pub mod scenarios {
    use std::f64::consts::TAU;

    use crate::basis::{Basis, BuiltinBasis, RenderMode};
    use crate::signal::Signal;

    /// Harmonic count of the built-in bases used by the experiments.
    pub const BUILTIN_HARMONICS: usize = 99;

    /// Order sweep: grid length, orders, a generic converging basis and a
    /// smooth periodic test function.
    pub const SWEEP_N: usize = 128;
    pub const SWEEP_ORDERS: [usize; 3] = [10, 30, SWEEP_N / 2 - 1];

    pub fn sweep_basis() -> Basis {
        Basis::from_harmonics([
            (1, 1.0, 0.0),
            (2, 0.5, 1.3),
            (3, 0.35, 0.4),
            (5, 0.2, 2.2),
            (7, 0.1, 5.0),
        ])
        .expect("fixed basis has a fundamental")
        .with_name("generic")
    }

    pub fn sweep_signal() -> Signal {
        Signal::from_fn(SWEEP_N, |x| {
            x.sin().exp() + 0.5 * (3.0 * x + 1.0).cos() - 0.3 * (7.0 * x).sin()
        })
        .expect("finite samples")
        .without_nyquist()
    }

    /// Sinusoid rebuilt from square waves and from Haar wavelets.
    pub const SINE_N: usize = 128;
    pub const SQUARE_COMPONENTS: usize = 21;
    pub const HAAR_COEFFICIENTS: usize = 32;

    pub fn sine(n: usize) -> Signal {
        Signal::from_fn(n, f64::sin).expect("finite samples")
    }

    pub fn square() -> Basis {
        Basis::builtin(BuiltinBasis::Square, BUILTIN_HARMONICS).expect("valid harmonic count")
    }

    /// Square wave plus high-band noise.
    pub const SEPARATION_N: usize = 128;
    /// Integer-sample delay of the clean square wave.
    pub const SEPARATION_DELAY: i64 = 11;
    /// Noise: `0.3·cos(k x + p)` for each `(k, p)`.
    pub const SEPARATION_NOISE: [(usize, f64); 4] = [(9, 0.4), (17, 1.9), (26, 3.3), (40, 5.1)];
    pub const SEPARATION_NOISE_AMPLITUDE: f64 = 0.3;
    /// Acceptance bound on `rms(kept - clean) / rms(clean)`. A brute-force
    /// run of this exact scenario gives 2.6e-15; the bound leaves room for
    /// platform rounding only.
    pub const SEPARATION_THRESHOLD: f64 = 1e-9;

    /// Superposition counterexample: two quadrature unit cosines at `k = 1`
    /// through a keep-`k = 1` filter in the square basis.
    pub const SUPERPOSITION_N: usize = 64;
    pub const SUPERPOSITION_PHASE: f64 = 0.3;

    pub fn superposition_pair() -> (Signal, Signal) {
        let f1 = Signal::from_fn(SUPERPOSITION_N, |x| (x + SUPERPOSITION_PHASE).cos());
        let f2 = Signal::from_fn(SUPERPOSITION_N, |x| {
            (x + SUPERPOSITION_PHASE + std::f64::consts::FRAC_PI_2).cos()
        });
        (f1.expect("finite samples"), f2.expect("finite samples"))
    }

    /// Grid length of the aliasing demonstration.
    pub const ALIASING_N: usize = 16;

    /// Returns `(clean, noisy)`.
    pub fn separation_signals() -> (Signal, Signal) {
        let n = SEPARATION_N;
        let phase = -TAU * SEPARATION_DELAY as f64 / n as f64;
        let clean = square()
            .normalize()
            .render(1, phase, 1.0, n, RenderMode::BandLimited)
            .expect("k = 1 is in range");
        let noise = Signal::from_fn(n, |x| {
            SEPARATION_NOISE
                .iter()
                .map(|&(k, p)| SEPARATION_NOISE_AMPLITUDE * (k as f64 * x + p).cos())
                .sum()
        })
        .expect("finite samples");
        let noisy = clean.add(&noise).expect("same length");
        (clean, noisy)
    }
}

//! The generic discrete transform.
//!
//! Analysis peels the signal one integer frequency at a time. At step `k` the
//! Fourier bin `k` of the current residual gives `(M_k, Φ_k)` directly,
//! because the normalized basis has a unit zero-phase cosine fundamental; the
//! rendered term `M_k·S'(k x + Φ_k)` is then subtracted. In band-limited mode
//! that term only touches bins `≥ k`, so bin `k` is final after its step and
//! one pass reconstructs the signal exactly (apart from the Nyquist bin, which
//! is never consumed).
//!
//! Synthesis is the sum `dc + Σ_k M_k·S'(k x + Φ_k)`.

use crate::basis::{NormalizedBasis, Origin, RenderMode};
use crate::error::{Error, Result};
use crate::signal::{rms_of, wrap_phase, Polar, Signal, Twiddles};

/// Moduli below this fraction of the largest modulus carry phase 0.
const PHASE_FLOOR: f64 = 1e-12;

/// Modulus/phase pairs for frequencies `1..=K_max` plus the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSpectrum {
    pub dc: f64,
    /// Entry for frequency `k` is stored at index `k - 1`.
    pub entries: Vec<Polar>,
    pub basis_label: Option<String>,
    pub mode: RenderMode,
}

impl PolarSpectrum {
    pub fn new(dc: f64, entries: Vec<Polar>, mode: RenderMode) -> Self {
        PolarSpectrum {
            dc,
            entries,
            basis_label: None,
            mode,
        }
    }

    pub fn k_max(&self) -> usize {
        self.entries.len()
    }

    /// Entry for frequency `k` (1-based).
    pub fn entry(&self, k: usize) -> Option<Polar> {
        k.checked_sub(1).and_then(|i| self.entries.get(i)).copied()
    }

    pub fn max_modulus(&self) -> f64 {
        self.entries.iter().map(|e| e.modulus).fold(0.0, f64::max)
    }

    /// Keeps the mean when `keep_dc` and only the entries with `lo <= k <= hi`;
    /// everything else is zeroed. `K_max` is unchanged.
    pub fn band(&self, lo: usize, hi: usize, keep_dc: bool) -> PolarSpectrum {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let k = i + 1;
                if (lo..=hi).contains(&k) {
                    *e
                } else {
                    Polar::default()
                }
            })
            .collect();
        PolarSpectrum {
            dc: if keep_dc { self.dc } else { 0.0 },
            entries,
            basis_label: self.basis_label.clone(),
            mode: self.mode,
        }
    }

    /// The mean and entries `1..=order`.
    pub fn truncated(&self, order: usize) -> PolarSpectrum {
        self.band(1, order, true)
    }

    /// Frequencies whose modulus exceeds `rel·max_modulus`.
    pub fn nonzero_frequencies(&self, rel: f64) -> Vec<usize> {
        let floor = rel * self.max_modulus();
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.modulus > floor)
            .map(|(i, _)| i + 1)
            .collect()
    }

    fn canonicalize_phases(&mut self) {
        let floor = PHASE_FLOOR * self.max_modulus();
        for e in &mut self.entries {
            if e.modulus < floor || e.modulus == 0.0 {
                e.phase = 0.0;
            }
        }
    }
}

/// Residual norms recorded during analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualProfile {
    /// `norms[0]` is the rms of the signal minus its mean; `norms[n]` the rms
    /// of the residual after the first `n` components were removed.
    pub norms: Vec<f64>,
}

impl ResidualProfile {
    /// Steps `n` with `norms[n] > norms[n-1] + tol`.
    pub fn increasing_steps(&self, tol: f64) -> Vec<usize> {
        self.norms
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] > w[0] + tol)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.increasing_steps(tol).is_empty()
    }
}

/// Spectrum together with what analysis left behind.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub spectrum: PolarSpectrum,
    /// Input minus mean minus every rendered component.
    pub residual: Signal,
}

/// Peels `f` in increasing frequency order, calling `on_step(k, residual)`
/// after each subtraction.
fn peel(
    f: &Signal,
    nb: &NormalizedBasis,
    mode: RenderMode,
    mut on_step: impl FnMut(usize, &[f64]),
) -> (PolarSpectrum, Vec<f64>) {
    let n = f.len();
    let tw = Twiddles::new(n);
    let dc = f.mean();
    let mut residual: Vec<f64> = f.samples().iter().map(|v| v - dc).collect();
    let k_max = f.k_max();
    let mut entries = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let p = tw.polar_bin(&residual, k);
        if p.modulus != 0.0 {
            nb.accumulate(&tw, &mut residual, k, p.phase, -p.modulus, mode);
        }
        entries.push(p);
        on_step(k, &residual);
    }
    let mut spectrum = PolarSpectrum {
        dc,
        entries,
        basis_label: nb.name().map(str::to_owned),
        mode,
    };
    spectrum.canonicalize_phases();
    (spectrum, residual)
}

/// Forward transform of `f` in the basis `nb`.
pub fn analyze(f: &Signal, nb: &NormalizedBasis, mode: RenderMode) -> PolarSpectrum {
    peel(f, nb, mode, |_, _| {}).0
}

/// Forward transform that also returns the final residual.
pub fn analyze_with_residual(f: &Signal, nb: &NormalizedBasis, mode: RenderMode) -> Analysis {
    let (spectrum, residual) = peel(f, nb, mode, |_, _| {});
    Analysis {
        spectrum,
        residual: Signal::from_samples(residual).expect("residual keeps the input length"),
    }
}

/// Rms of the residual before and after every analysis step.
pub fn residual_profile(f: &Signal, nb: &NormalizedBasis, mode: RenderMode) -> ResidualProfile {
    let dc = f.mean();
    let centered: Vec<f64> = f.samples().iter().map(|v| v - dc).collect();
    let mut norms = Vec::with_capacity(f.k_max() + 1);
    norms.push(rms_of(&centered));
    peel(f, nb, mode, |_, r| norms.push(rms_of(r)));
    ResidualProfile { norms }
}

/// Inverse transform onto an `n`-sample grid.
pub fn synthesize(ps: &PolarSpectrum, nb: &NormalizedBasis, n: usize, mode: RenderMode) -> Result<Signal> {
    if n < 4 || !n.is_multiple_of(2) {
        // let the signal constructor report the length problem
        Signal::from_samples(vec![0.0; n])?;
    }
    if ps.k_max() >= n / 2 {
        return Err(Error::BinOverflow { bin: ps.k_max(), n });
    }
    let tw = Twiddles::new(n);
    let mut out = vec![ps.dc; n];
    for (i, e) in ps.entries.iter().enumerate() {
        if e.modulus != 0.0 {
            nb.accumulate(&tw, &mut out, i + 1, e.phase, e.modulus, mode);
        }
    }
    Signal::from_samples(out)
}

/// Re-expresses a spectrum computed in the normalized basis in terms of the
/// raw basis it came from: `M_k·S'(k x + Φ_k) = (M_k/s_1)·S(k x + Φ_k - ϑ_1)`.
pub fn rescale_to_raw(ps: &PolarSpectrum, origin: Origin) -> PolarSpectrum {
    let mut out = PolarSpectrum {
        dc: ps.dc,
        entries: ps
            .entries
            .iter()
            .map(|e| Polar::new(e.modulus / origin.amplitude, wrap_phase(e.phase - origin.phase)))
            .collect(),
        basis_label: ps.basis_label.clone(),
        mode: ps.mode,
    };
    out.canonicalize_phases();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{Basis, BuiltinBasis};
    use crate::signal::dft_polar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::{PI, TAU};

    fn phase_dist(a: f64, b: f64) -> f64 {
        let d = wrap_phase(a - b);
        d.min(TAU - d)
    }

    fn square(h: usize) -> NormalizedBasis {
        Basis::builtin(BuiltinBasis::Square, h).unwrap().normalize()
    }

    fn cosine() -> NormalizedBasis {
        Basis::builtin(BuiltinBasis::Cosine, 1).unwrap().normalize()
    }

    fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Signal {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        Signal::from_samples(v).unwrap().without_nyquist()
    }

    /// Oracle: the same recursion carried out on complex Fourier bins only,
    /// with no time-domain signals. Each basis harmonic `m` of the component at
    /// frequency `k` lands in bin `m·k` as `M r_m e^{i(mΦ + ψ_m)}`.
    fn bookkeeping_peel(f: &Signal, nb: &NormalizedBasis) -> Vec<Polar> {
        use rustfft::num_complex::Complex64;
        let n = f.len();
        let fp = dft_polar(f);
        let mut bins: Vec<Complex64> = std::iter::once(Complex64::new(0.0, 0.0))
            .chain(fp.bins.iter().map(|b| Complex64::from_polar(b.modulus, b.phase)))
            .collect();
        let mut out = Vec::new();
        for k in 1..n / 2 {
            let (m_k, phi_k) = bins[k].to_polar();
            out.push(Polar::new(m_k, wrap_phase(phi_k)));
            for h in nb.harmonics() {
                let freq = h.index * k;
                if freq >= n / 2 {
                    break;
                }
                bins[freq] -= Complex64::from_polar(m_k * h.amplitude, h.index as f64 * phi_k + h.phase);
            }
        }
        out
    }

    #[test]
    fn cosine_basis_reduces_to_dft() {
        let f = Signal::from_fn(16, |x| 3.0 * (2.0 * x + 0.7).cos()).unwrap();
        let ps = analyze(&f, &cosine(), RenderMode::BandLimited);
        assert!(ps.dc.abs() < 1e-15);
        assert_eq!(ps.k_max(), 7);
        let e2 = ps.entry(2).unwrap();
        assert!((e2.modulus - 3.0).abs() < 1e-12 && (e2.phase - 0.7).abs() < 1e-12);
        for k in [1, 3, 4, 5, 6, 7] {
            assert!(ps.entry(k).unwrap().modulus < 1e-12);
            assert_eq!(ps.entry(k).unwrap().phase, 0.0);
        }
    }

    #[test]
    fn self_analysis_gives_a_single_entry() {
        let nb = square(99);
        let f = nb.render(3, 1.0, 2.0, 64, RenderMode::BandLimited).unwrap();
        let ps = analyze(&f, &nb, RenderMode::BandLimited);
        for (i, e) in ps.entries.iter().enumerate() {
            if i + 1 == 3 {
                assert!((e.modulus - 2.0).abs() < 1e-12);
                assert!((e.phase - 1.0).abs() < 1e-12);
            } else {
                assert!(e.modulus < 1e-12, "k={}", i + 1);
            }
        }
    }

    #[test]
    fn cosine_in_square_basis_matches_bookkeeping_oracle() {
        let nb = square(99);
        let f = Signal::from_fn(16, f64::cos).unwrap();
        let ps = analyze(&f, &nb, RenderMode::BandLimited);
        let e1 = ps.entry(1).unwrap();
        assert!((e1.modulus - 1.0).abs() < 1e-12 && phase_dist(e1.phase, 0.0) < 1e-12);
        // S' = cos x - cos 3x/3 + ..., so the residual at bin 3 is +cos(3x)/3
        let e3 = ps.entry(3).unwrap();
        assert!((e3.modulus - 1.0 / 3.0).abs() < 1e-12 && phase_dist(e3.phase, 0.0) < 1e-12);

        let oracle = bookkeeping_peel(&f, &nb);
        for (a, b) in ps.entries.iter().zip(&oracle) {
            assert!((a.modulus - b.modulus).abs() < 1e-12);
            if b.modulus > 1e-9 {
                assert!(phase_dist(a.phase, b.phase) < 1e-10);
            }
        }
    }

    #[test]
    fn bookkeeping_oracle_agrees_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [BuiltinBasis::Square, BuiltinBasis::Sawtooth, BuiltinBasis::Triangle] {
            let nb = Basis::builtin(kind, 99).unwrap().normalize();
            for _ in 0..5 {
                let f = random_signal(&mut rng, 64);
                let ps = analyze(&f, &nb, RenderMode::BandLimited);
                let oracle = bookkeeping_peel(&f, &nb);
                let scale = ps.max_modulus();
                for (a, b) in ps.entries.iter().zip(&oracle) {
                    assert!((a.modulus - b.modulus).abs() < 1e-12 * scale.max(1.0));
                }
            }
        }
    }

    #[test]
    fn round_trip_and_synthesis_edges() {
        let nb = square(99);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_signal(&mut rng, 64);
        let ps = analyze(&f, &nb, RenderMode::BandLimited);
        let g = synthesize(&ps, &nb, 64, RenderMode::BandLimited).unwrap();
        assert!(g.rms_diff(&f).unwrap() < 1e-9 * f.rms());

        let flat = synthesize(
            &PolarSpectrum::new(4.0, vec![], RenderMode::BandLimited),
            &nb,
            8,
            RenderMode::BandLimited,
        )
        .unwrap();
        assert!(flat.samples().iter().all(|&v| v == 4.0));

        let one = PolarSpectrum::new(0.0, vec![Polar::new(1.0, 0.0)], RenderMode::BandLimited);
        let s = synthesize(&one, &nb, 64, RenderMode::BandLimited).unwrap();
        let r = nb.render(1, 0.0, 1.0, 64, RenderMode::BandLimited).unwrap();
        assert!(s.rms_diff(&r).unwrap() < 1e-15);

        let wide = PolarSpectrum::new(0.0, vec![Polar::default(); 4], RenderMode::BandLimited);
        assert!(matches!(
            synthesize(&wide, &nb, 8, RenderMode::BandLimited),
            Err(Error::BinOverflow { .. })
        ));
    }

    #[test]
    fn nyquist_content_stays_in_the_residual() {
        let nb = square(99);
        let f = Signal::from_fn(16, |x| x.cos() + 0.25 * (8.0 * x).cos()).unwrap();
        let a = analyze_with_residual(&f, &nb, RenderMode::BandLimited);
        let expected = Signal::from_fn(16, |x| 0.25 * (8.0 * x).cos()).unwrap();
        assert!(a.residual.rms_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn constant_input_is_all_dc() {
        let f = Signal::from_samples(vec![2.0; 16]).unwrap();
        let ps = analyze(&f, &square(9), RenderMode::BandLimited);
        assert_eq!(ps.dc, 2.0);
        assert!(ps.entries.iter().all(|e| e.modulus < 1e-15 && e.phase == 0.0));
    }

    #[test]
    fn rescale_cases() {
        let ps = PolarSpectrum::new(1.0, vec![Polar::new(4.0, 0.3)], RenderMode::BandLimited);
        assert_eq!(rescale_to_raw(&ps, Origin::IDENTITY), ps);
        let half = rescale_to_raw(
            &ps,
            Origin {
                amplitude: 2.0,
                phase: 0.0,
            },
        );
        assert_eq!(half.entry(1).unwrap().modulus, 2.0);
    }

    /// Pointwise oracle: `M'·S(3x + Φ')` sampled from the raw series must equal
    /// `M·S'(3x + Φ)` sampled from the normalized one.
    #[test]
    fn rescaled_spectrum_reproduces_the_signal_in_the_raw_basis() {
        let raw = Basis::from_harmonics([(1, 1.0, 0.5), (3, 0.4, 2.0), (4, 0.2, 0.1)]).unwrap();
        let nb = raw.normalize();
        let entries = vec![Polar::default(), Polar::default(), Polar::new(1.0, 0.0)];
        let ps = PolarSpectrum::new(0.0, entries, RenderMode::Sampled);
        let rescaled = rescale_to_raw(&ps, nb.origin());
        let e = rescaled.entry(3).unwrap();
        let lhs = raw.evaluate(3, e.phase, e.modulus, 64, RenderMode::Sampled).unwrap();
        let rhs = nb.render(3, 0.0, 1.0, 64, RenderMode::Sampled).unwrap();
        assert!(lhs.rms_diff(&rhs).unwrap() < 1e-13);

        // and for a whole analyzed spectrum with a scaled basis
        let raw = Basis::from_harmonics([(1, 2.5, 1.2), (2, 0.7, 0.4), (5, 0.3, 3.0)]).unwrap();
        let nb = raw.normalize();
        let f = Signal::from_fn(32, |x| (x.sin() * 2.0).exp())
            .unwrap()
            .without_nyquist();
        let ps = analyze(&f, &nb, RenderMode::BandLimited);
        let rescaled = rescale_to_raw(&ps, nb.origin());
        let mut sum = vec![rescaled.dc; 32];
        for (i, e) in rescaled.entries.iter().enumerate() {
            let term = raw
                .evaluate(i + 1, e.phase, e.modulus, 32, RenderMode::BandLimited)
                .unwrap();
            sum.iter_mut().zip(term.samples()).for_each(|(a, b)| *a += b);
        }
        let g = Signal::from_samples(sum).unwrap();
        assert!(g.rms_diff(&f).unwrap() < 1e-9 * f.rms());
    }

    #[test]
    fn profile_of_cosine_in_square_basis() {
        let f = Signal::from_fn(64, f64::cos).unwrap();
        let p = residual_profile(&f, &square(99), RenderMode::BandLimited);
        assert_eq!(p.norms.len(), 32);
        assert!(p.is_non_increasing(1e-15));
        assert!(*p.norms.last().unwrap() < 1e-12);
    }

    #[test]
    fn profile_follows_parseval_for_the_cosine_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_signal(&mut rng, 32);
        let p = residual_profile(&f, &cosine(), RenderMode::BandLimited);
        let ps = analyze(&f, &cosine(), RenderMode::BandLimited);
        for n in 1..p.norms.len() {
            let m = ps.entry(n).unwrap().modulus;
            let expected = p.norms[n - 1].powi(2) - 0.5 * m * m;
            assert!((p.norms[n].powi(2) - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn diverging_basis_increases_the_residual() {
        let nb = Basis::from_harmonics([(1, 1.0, 0.0), (2, 2.0, 0.0)])
            .unwrap()
            .normalize();
        let f = Signal::from_fn(32, f64::cos).unwrap();
        let p = residual_profile(&f, &nb, RenderMode::BandLimited);
        assert!(!p.increasing_steps(1e-12).is_empty());
    }

    /// A converging basis does not guarantee a monotone residual: when bin 3
    /// already holds energy aligned with the basis harmonic, removing a small
    /// fundamental adds more at bin 3 than it takes away at bin 1.
    #[test]
    fn converging_basis_can_still_increase_the_residual() {
        let nb = square(99);
        let f = Signal::from_fn(64, |x| 0.1 * x.cos() + (3.0 * x).cos()).unwrap();
        let p = residual_profile(&f, &nb, RenderMode::BandLimited);
        // removed 0.1²/2 at bin 1, bin 3 grows from 1 to 1 + 0.1/3
        assert!(p.norms[1] > p.norms[0]);
    }

    #[test]
    fn finalization_order() {
        let nb = square(99);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_signal(&mut rng, 32);
        let tw = Twiddles::new(32);
        let before = tw.polar_bin(&f.offset(-f.mean()).into_samples(), 2);
        let mut snapshots = Vec::new();
        peel(&f, &nb, RenderMode::BandLimited, |_, r| snapshots.push(r.to_vec()));
        for (step, r) in snapshots.iter().enumerate() {
            let k = step + 1;
            for j in 1..=k {
                assert!(tw.polar_bin(r, j).modulus < 1e-12, "bin {j} after step {k}");
            }
        }
        // step 1 of the square basis touches only odd multiples of 1, not bin 2
        let after1 = tw.polar_bin(&snapshots[0], 2);
        assert!((after1.modulus - before.modulus).abs() < 1e-12);
    }

    #[test]
    fn negative_scaling_flips_phases() {
        let nb = square(99);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = random_signal(&mut rng, 32);
        let a = analyze(&f, &nb, RenderMode::BandLimited);
        let b = analyze(&f.scale(-1.5), &nb, RenderMode::BandLimited);
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert!((1.5 * x.modulus - y.modulus).abs() < 1e-12);
            if x.modulus > 1e-9 {
                assert!(phase_dist(x.phase + PI, y.phase) < 1e-9);
            }
        }
    }

    #[test]
    fn band_and_truncation() {
        let ps = PolarSpectrum::new(
            1.0,
            (1..=5).map(|k| Polar::new(k as f64, 0.1)).collect(),
            RenderMode::BandLimited,
        );
        let t = ps.truncated(2);
        assert_eq!(t.dc, 1.0);
        assert_eq!(t.entries.iter().filter(|e| e.modulus > 0.0).count(), 2);
        let hi = ps.band(3, 5, false);
        assert_eq!(hi.dc, 0.0);
        assert_eq!(hi.entry(1).unwrap(), Polar::default());
        assert_eq!(hi.entry(4).unwrap().modulus, 4.0);
        assert_eq!(ps.nonzero_frequencies(1e-9), vec![1, 2, 3, 4, 5]);
    }
}

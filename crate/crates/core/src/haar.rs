//! Orthonormal Haar wavelet transform on power-of-two lengths.
//!
//! Coefficient layout after [`forward`]: index 0 is the scaling coefficient,
//! then detail coefficients from the coarsest level (1 value) to the finest
//! (`N/2` values).

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::signal::Signal;

fn check_len(n: usize) -> Result<()> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Full-depth decomposition.
pub fn forward(samples: &[f64]) -> Result<Vec<f64>> {
    check_len(samples.len())?;
    let mut out = samples.to_vec();
    let mut scratch = vec![0.0; samples.len()];
    let mut len = samples.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (out[2 * i], out[2 * i + 1]);
            scratch[i] = (a + b) * FRAC_1_SQRT_2;
            scratch[half + i] = (a - b) * FRAC_1_SQRT_2;
        }
        out[..len].copy_from_slice(&scratch[..len]);
        len = half;
    }
    Ok(out)
}

/// Inverse of [`forward`].
pub fn inverse(coeffs: &[f64]) -> Result<Vec<f64>> {
    check_len(coeffs.len())?;
    let mut out = coeffs.to_vec();
    let mut scratch = vec![0.0; coeffs.len()];
    let mut len = 1;
    while len < coeffs.len() {
        for i in 0..len {
            let (a, d) = (out[i], out[len + i]);
            scratch[2 * i] = (a + d) * FRAC_1_SQRT_2;
            scratch[2 * i + 1] = (a - d) * FRAC_1_SQRT_2;
        }
        len *= 2;
        out[..len].copy_from_slice(&scratch[..len]);
    }
    Ok(out)
}

/// Best `count`-term Haar approximation: keeps the largest-magnitude
/// coefficients (the scaling coefficient included), zeroes the rest and
/// inverts. Ties go to the lower coefficient index.
pub fn haar_reconstruct(f: &Signal, count: usize) -> Result<Signal> {
    let n = f.len();
    check_len(n)?;
    if count < 1 || count > n {
        return Err(Error::BadCount { count, n });
    }
    let coeffs = forward(f.samples())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| coeffs[b].abs().total_cmp(&coeffs[a].abs()));
    let mut kept = vec![0.0; n];
    for &i in &order[..count] {
        kept[i] = coeffs[i];
    }
    Signal::from_samples(inverse(&kept)?)
}

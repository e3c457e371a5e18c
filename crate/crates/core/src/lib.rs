//! Generic discrete transform: analysis and resynthesis of periodic sampled
//! signals in modulus/phase form over an arbitrary, generally nonorthogonal,
//! single-function basis.

pub mod basis;
pub mod error;
pub mod haar;
pub mod harness;
pub mod io;
pub mod signal;
pub mod systems;
pub mod transform;

pub use basis::{Basis, BuiltinBasis, Convergence, ConvergenceReport, Harmonic, NormalizedBasis, Origin, RenderMode};
pub use error::{Error, Result};
pub use harness::{haar_reconstruct, noise_separation, reconstruct_experiment, ReconstructionReport, SeparationReport};
pub use signal::{dft_polar, synth_polar, FourierPolar, Polar, Signal};
pub use systems::{
    apply_filter, convolve, eigen_check, homogeneity_gap, superposition_gap, time_invariance_gap, EigenReport,
    TransferFunction,
};
pub use transform::{
    analyze, analyze_with_residual, rescale_to_raw, residual_profile, synthesize, Analysis, PolarSpectrum,
    ResidualProfile,
};

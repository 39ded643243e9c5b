//! Spectral substrate: lattice bookkeeping, transforms between collocation grids
//! and Fourier coefficients, differentiation, dealiasing and pointwise products.
//!
//! Conventions (fixed once, everything else is normalized against them):
//!
//! * domain [0, 2π]^d, n collocation points per axis at x_j = 2πj/n;
//! * coefficients are those of the trigonometric interpolant,
//!   g(x) = Σ_k ĝ(k) e^{ik·x}, so `forward` divides the raw DFT by n^d;
//! * ‖f‖²_{L²} := Σ_k |f̂(k)|² and the matching grid quadrature is
//!   (n^{-d} Σ_x |g(x)|²)^{1/2} (Parseval holds with no 2π factors);
//! * the unpaired Nyquist mode k_axis = -n/2 is zeroed on construction;
//! * all reductions run in a fixed traversal order so results are independent
//!   of the rayon worker count.

mod fft;
mod field;
mod lattice;

pub use field::{forward, inverse, pointwise_product, GridField, SpectralField};
pub use lattice::Lattice;

use thiserror::Error;

/// Errors from spectral-substrate operations.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("lattice dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("modes-per-axis must be even and >= 8, got {0}")]
    BadModes(usize),
    #[error("dealias cutoff {cut} exceeds n/2 = {half}")]
    BadDealiasCut { cut: usize, half: usize },
    #[error("grid samples contain non-finite values")]
    NonFiniteSamples,
    #[error("coefficients contain non-finite values")]
    NonFiniteCoefficients,
    #[error("Hermitian symmetry violated: max |f(k) - conj(f(-k))| = {0:.3e}")]
    HermitianViolation(f64),
    #[error("axis {axis} out of range for dimension {d}")]
    AxisOutOfRange { axis: usize, d: usize },
    #[error("lattice mismatch: {0} vs {1}")]
    LatticeMismatch(String, String),
}

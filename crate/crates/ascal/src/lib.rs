//! Pseudo-spectral laboratory for the forced non-diffusive active scalar family
//!
//! ```text
//!     ∂ₜθ + u·∇θ = S,      u = M[θ],      x ∈ [0, 2π]^d
//! ```
//!
//! on the periodic d-torus (d = 2 or 3), where the drift velocity u is produced
//! from the scalar θ by a Fourier-multiplier constitutive law û(k) = M̂(k)·θ̂(k).
//! Built-in law families:
//!
//! * `mg`   — 3D magnetogeostrophic symbol with viscosity ν ≥ 0 (order 1 at ν = 0,
//!   two orders smoothing for ν > 0),
//! * `ipmb` — 2D porous-media/Brinkman symbol with effective viscosity ν ≥ 0
//!   (order 0 at ν = 0),
//! * `sipm` — 2D singular porous-media symbol k₁k^⊥|k|^{β−2} of order β ∈ (0, 1],
//! * `table` — explicit finite k ↦ M̂(k) tables (the empty table is the zero law).
//!
//! The crate provides the spectral substrate (lattices, FFTs, dealiased products),
//! numerical certification of the structural symbol assumptions (divergence-free,
//! order bounds, smoothing order, vanishing-viscosity symbol convergence), Sobolev
//! and Gevrey norms with a spectral analyticity-radius estimator, an RK4 solver
//! with CFL control and resolution guards, a Picard successive-approximation
//! scheme with contraction diagnostics, and scripted experiments (viscosity
//! sweeps, radius decay, diffusive floor, gradient growth).

pub mod config;
pub mod experiments;
pub mod io;
pub mod laws;
pub mod norms;
pub mod solver;
pub mod spectral;

pub use laws::SymbolLaw;
pub use spectral::{GridField, Lattice, SpectralField};

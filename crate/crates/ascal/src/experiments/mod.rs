//! Scripted experiment drivers turning the qualitative wellposedness and
//! convergence statements into measured tables: viscosity sweeps, radius
//! decay tracking, the diffusive radius floor, gradient-growth envelopes and
//! Picard contraction windows.

pub mod fit;
mod growth;
mod picard_exp;
mod radius;
mod sweep;

pub use growth::{fit_growth_envelope, gradient_growth, GrowthReport};
pub use picard_exp::{picard_contraction_experiment, ContractionReport, CONTRACTION_BAR};
pub use radius::{diffusive_floor, radius_decay, DiffusiveFloorReport, RadiusSeries};
pub use sweep::{viscosity_sweep, ErrorNorm, SweepResult};

use crate::solver::{NormsPlan, SimulationState, StepPolicy};

/// The shared ingredients of one experiment member run.
#[derive(Debug, Clone)]
pub struct BaseRun {
    pub state: SimulationState,
    pub policy: StepPolicy,
    pub plan: NormsPlan,
}

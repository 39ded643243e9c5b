//! Time integration of ∂ₜθ + u·∇θ = S (+ optional κΔθ) with the drift
//! produced by a constitutive law each step, plus the Picard approximation
//! scheme for the inviscid system.

pub mod picard;
mod run;
mod state;
mod step;

pub use picard::{advect_frozen, picard, uniform_bound_check, PicardRun};
pub use run::{
    run, DiagRow, DiagnosticSeries, NormsPlan, RunOutcome, RunStatus, DEFAULT_RESOLUTION_GUARD,
};
pub use state::{DtMode, InitialRecipe, ModeSpec, SimulationState, SolverError, StepPolicy};
pub use step::{cfl_dt, diffusion_dt_cap, max_speed, rhs, step, velocity_grids, CFL_VELOCITY_FLOOR};

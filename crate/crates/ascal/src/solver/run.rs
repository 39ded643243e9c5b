//! The outer time-stepping loop: diagnostics at output nodes, resolution
//! guards, and abort statuses carrying the last good state.

use serde::Serialize;

use crate::norms::{
    dyadic_spectrum, estimate_radius, gevrey_norm, homogeneous_sobolev_norm, lp_norm,
    GevreyParams, Lp,
};
use crate::spectral::inverse;

use super::state::{DtMode, SimulationState, SolverError, StepPolicy};
use super::step::{cfl_dt, diffusion_dt_cap, max_speed, step, velocity_grids};

/// Which norms a run records at every output node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormsPlan {
    /// finite L^p exponents beyond the always-present coefficient L²
    pub lp: Vec<f64>,
    /// homogeneous Sobolev exponents
    pub sobolev: Vec<f64>,
    pub gevrey: Vec<GevreyParams>,
    /// Gevrey index for the radius estimator
    pub radius_s: f64,
    /// relative amplitude floor for the radius estimator
    pub radius_floor: f64,
}

impl Default for NormsPlan {
    fn default() -> Self {
        NormsPlan {
            lp: vec![4.0],
            sobolev: vec![],
            gevrey: vec![],
            radius_s: 1.0,
            radius_floor: crate::norms::RADIUS_FLOOR_REL,
        }
    }
}

/// One diagnostics row.
#[derive(Debug, Clone, Serialize)]
pub struct DiagRow {
    pub t: f64,
    /// last accepted step size before this node (0 at t = 0)
    pub dt: f64,
    pub l2: f64,
    pub max_u: f64,
    pub lp: Vec<f64>,
    pub sobolev: Vec<f64>,
    pub gevrey: Vec<f64>,
    pub tau_hat: f64,
    pub tau_valid: bool,
    /// energy fraction in the top dyadic shell (the resolution guard input)
    pub top_shell_frac: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticSeries {
    pub rows: Vec<DiagRow>,
}

impl DiagnosticSeries {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

/// Terminal status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RunStatus {
    Completed,
    /// the Gevrey radius reached the grid scale: the truncated system no
    /// longer represents the PDE
    ResolutionLost { t: f64 },
    NumericalBlowup { t: f64 },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

pub struct RunOutcome {
    pub series: DiagnosticSeries,
    pub status: RunStatus,
    /// final state on completion, last good state on abort
    pub final_state: SimulationState,
}

fn top_shell_fraction(theta: &crate::spectral::SpectralField) -> f64 {
    let lat = theta.lattice();
    let kmax = (lat.dealias_cut() as f64) * (lat.dim() as f64).sqrt();
    let top = kmax.log2().floor() as u32;
    let spec = dyadic_spectrum(theta);
    let total: f64 = spec.iter().map(|&(_, e)| e).sum();
    if total == 0.0 {
        return 0.0;
    }
    spec.iter()
        .filter(|&&(j, _)| j >= top)
        .map(|&(_, e)| e)
        .sum::<f64>()
        / total
}

fn diagnostics_row(
    state: &SimulationState,
    plan: &NormsPlan,
    dt: f64,
) -> Result<DiagRow, SolverError> {
    let grid = inverse(&state.theta)?;
    let u = velocity_grids(state)?;
    let radius = estimate_radius(&state.theta, plan.radius_s, plan.radius_floor);
    let lp = plan
        .lp
        .iter()
        .map(|&p| lp_norm(&grid, Lp::Finite(p)).map_err(|e| SolverError::BadSetup(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DiagRow {
        t: state.t,
        dt,
        l2: state.theta.l2_norm(),
        max_u: max_speed(&u),
        lp,
        sobolev: plan
            .sobolev
            .iter()
            .map(|&s| homogeneous_sobolev_norm(&state.theta, s))
            .collect(),
        gevrey: plan.gevrey.iter().map(|g| gevrey_norm(&state.theta, g).value).collect(),
        tau_hat: radius.tau_hat,
        tau_valid: radius.valid,
        top_shell_frac: top_shell_fraction(&state.theta),
    })
}

/// Integrate to t_end, recording diagnostics at `outputs` evenly spaced nodes.
/// `on_node` fires after each recorded row with the state at that node (for
/// checkpointing or error-series accumulation against a reference run).
pub fn run(
    initial: SimulationState,
    policy: &StepPolicy,
    plan: &NormsPlan,
    mut on_node: impl FnMut(&DiagRow, &SimulationState),
) -> Result<RunOutcome, SolverError> {
    policy.validate()?;
    let mut state = initial;
    let mut rows = Vec::with_capacity(policy.outputs + 1);

    let first = diagnostics_row(&state, plan, 0.0)?;
    on_node(&first, &state);
    let guard_tripped = first.top_shell_frac > policy.resolution_guard;
    rows.push(first);
    if guard_tripped {
        let t = state.t;
        return Ok(RunOutcome {
            series: DiagnosticSeries { rows },
            status: RunStatus::ResolutionLost { t },
            final_state: state,
        });
    }

    let node_dt = policy.t_end / policy.outputs as f64;
    for node in 1..=policy.outputs {
        let t_node = node as f64 * node_dt;
        let mut last_dt = 0.0;
        while state.t < t_node - 1e-12 * policy.t_end {
            let mut dt = match policy.dt_mode {
                DtMode::Fixed(dt) => {
                    if state.kappa > 0.0 {
                        dt.min(diffusion_dt_cap(&state))
                    } else {
                        dt
                    }
                }
                DtMode::Cfl(c) => cfl_dt(&state, c)?,
            };
            dt = dt.min(t_node - state.t);
            match step(&state, dt) {
                Ok(next) => {
                    state = next;
                    last_dt = dt;
                }
                Err(SolverError::NonFinite { t }) => {
                    return Ok(RunOutcome {
                        series: DiagnosticSeries { rows },
                        status: RunStatus::NumericalBlowup { t },
                        final_state: state,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        let row = diagnostics_row(&state, plan, last_dt)?;
        on_node(&row, &state);
        let lost = row.top_shell_frac > policy.resolution_guard;
        rows.push(row);
        if lost {
            let t = state.t;
            return Ok(RunOutcome {
                series: DiagnosticSeries { rows },
                status: RunStatus::ResolutionLost { t },
                final_state: state,
            });
        }
    }

    Ok(RunOutcome {
        series: DiagnosticSeries { rows },
        status: RunStatus::Completed,
        final_state: state,
    })
}

pub const DEFAULT_RESOLUTION_GUARD: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::SymbolLaw;
    use crate::solver::state::InitialRecipe;
    use crate::spectral::{Lattice, SpectralField};

    fn policy(t_end: f64, outputs: usize) -> StepPolicy {
        // guard disabled: these tests exercise conservation structure on
        // small lattices whose spectra would trip the production default
        StepPolicy {
            dt_mode: DtMode::Cfl(0.5),
            t_end,
            outputs,
            resolution_guard: 1.0,
        }
    }

    #[test]
    fn conservation_on_free_advection() {
        // S = 0, κ = 0: the L² norm is conserved by the dealiased advective form
        let lat = Lattice::new(2, 32).unwrap();
        let theta = InitialRecipe::Gevrey { tau0: 1.2, s: 1.0, seed: 3, amplitude: 0.2 }
            .build(lat)
            .unwrap();
        let st = SimulationState::new(
            theta,
            SymbolLaw::ipmb(0.0).unwrap(),
            SpectralField::zeros(lat),
            0.0,
        )
        .unwrap();
        let out = run(st, &policy(0.25, 5), &NormsPlan::default(), |_, _| {}).unwrap();
        assert!(out.status.is_completed());
        let l0 = out.series.rows[0].l2;
        for row in &out.series.rows {
            assert!((row.l2 - l0).abs() <= 1e-9 * l0, "drift at t = {}", row.t);
        }
    }

    #[test]
    fn energy_balance_with_forcing() {
        // d/dt ½‖θ‖² = ⟨S, θ⟩ for κ = 0: check the discrete residual
        let lat = Lattice::new(2, 32).unwrap();
        let theta = InitialRecipe::Gevrey { tau0: 0.6, s: 1.0, seed: 3, amplitude: 0.5 }
            .build(lat)
            .unwrap();
        let forcing = InitialRecipe::Gevrey { tau0: 0.8, s: 1.0, seed: 19, amplitude: 0.3 }
            .build(lat)
            .unwrap();
        let st =
            SimulationState::new(theta, SymbolLaw::ipmb(0.0).unwrap(), forcing.clone(), 0.0)
                .unwrap();
        let forcing = st.forcing.clone();
        let mut pairing = Vec::new();
        let out = run(st, &policy(0.5, 40), &NormsPlan::default(), |row, state| {
            pairing.push((row.t, row.l2, forcing.inner(&state.theta)));
        })
        .unwrap();
        assert!(out.status.is_completed());
        // composite Simpson for ∫⟨S,θ⟩dt vs Δ(½‖θ‖²) over the whole window
        let h = pairing[1].0 - pairing[0].0;
        let mut integral = 0.0;
        for i in (0..pairing.len() - 1).step_by(2) {
            integral += h / 3.0 * (pairing[i].2 + 4.0 * pairing[i + 1].2 + pairing[i + 2].2);
        }
        let delta = 0.5 * (pairing.last().unwrap().1.powi(2) - pairing[0].1.powi(2));
        let scale = pairing[0].1.powi(2).max(1e-30);
        assert!(
            (delta - integral).abs() <= 1e-6 * scale,
            "energy balance residual {:.3e}",
            (delta - integral).abs() / scale
        );
    }

    #[test]
    fn resolution_guard_detects_underresolved_data() {
        // nearly flat spectrum: the top shell holds far more than the guard
        let lat = Lattice::new(2, 16).unwrap();
        let theta = InitialRecipe::Gevrey { tau0: 0.01, s: 1.0, seed: 5, amplitude: 1.0 }
            .build(lat)
            .unwrap();
        let st = SimulationState::new(
            theta,
            SymbolLaw::ipmb(0.0).unwrap(),
            SpectralField::zeros(lat),
            0.0,
        )
        .unwrap();
        let guard_policy = StepPolicy {
            resolution_guard: DEFAULT_RESOLUTION_GUARD,
            ..policy(1.0, 4)
        };
        let out = run(st, &guard_policy, &NormsPlan::default(), |_, _| {}).unwrap();
        assert!(matches!(out.status, RunStatus::ResolutionLost { .. }));
        assert_eq!(out.series.rows.len(), 1, "tripped at t = 0");
    }

    #[test]
    fn inviscid_gevrey_run_ends_in_resolution_loss_not_blowup() {
        // losing the analyticity radius to the grid scale, not instability,
        // ends the ν = 0 run
        let lat = Lattice::new(2, 32).unwrap();
        let theta = InitialRecipe::Gevrey { tau0: 0.5, s: 1.0, seed: 3, amplitude: 1.0 }
            .build(lat)
            .unwrap();
        let st = SimulationState::new(
            theta,
            SymbolLaw::ipmb(0.0).unwrap(),
            SpectralField::zeros(lat),
            0.0,
        )
        .unwrap();
        let guard_policy = StepPolicy {
            resolution_guard: DEFAULT_RESOLUTION_GUARD,
            ..policy(5.0, 50)
        };
        let out = run(st, &guard_policy, &NormsPlan::default(), |_, _| {}).unwrap();
        assert!(
            matches!(out.status, RunStatus::ResolutionLost { .. }),
            "expected resolution loss, got {:?}",
            out.status
        );
        assert!(out.final_state.theta.is_finite());
    }

    #[test]
    fn zero_law_is_static() {
        let lat = Lattice::new(2, 16).unwrap();
        let theta = InitialRecipe::Gevrey { tau0: 1.0, s: 1.0, seed: 2, amplitude: 1.0 }
            .build(lat)
            .unwrap();
        let st =
            SimulationState::new(theta.clone(), SymbolLaw::zero(2), SpectralField::zeros(lat), 0.0)
                .unwrap();
        let reference = st.theta.clone();
        let out = run(st, &policy(1.0, 4), &NormsPlan::default(), |_, _| {}).unwrap();
        assert!(out.status.is_completed());
        assert!(out.final_state.theta.sub(&reference).max_abs() < 1e-15);
        let taus: Vec<f64> = out.series.rows.iter().map(|r| r.tau_hat).collect();
        for t in &taus {
            assert!((t - taus[0]).abs() < 1e-12, "tau_hat constant in time");
        }
    }
}

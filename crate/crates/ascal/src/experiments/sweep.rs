//! Vanishing-viscosity sweeps: the family at ν > 0 against the ν = 0 member,
//! measured in a Gevrey norm (MG case) or a homogeneous Sobolev norm (IPMB).

use rayon::prelude::*;
use serde::Serialize;

use crate::norms::{gevrey_norm, homogeneous_sobolev_norm, GevreyParams};
use crate::solver::{
    run, DiagnosticSeries, DtMode, RunStatus, SimulationState, SolverError, StepPolicy,
};
use crate::spectral::SpectralField;

use super::BaseRun;

/// Comparison norm for θ^ν − θ⁰.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ErrorNorm {
    /// homogeneous H^s
    Sobolev { s: f64 },
    /// fixed Gevrey weight
    Gevrey { params: GevreyParams },
    /// Gevrey weight with τ = tau_factor · tau_hat(T of the ν = 0 run)
    GevreyAuto { s: f64, r: f64, tau_factor: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub nu_list: Vec<f64>,
    /// common horizon of every member run
    pub t_end: f64,
    /// the ResolutionLost time of the ν = 0 calibration run, when one ran
    pub calibration_t_lost: Option<f64>,
    pub node_times: Vec<f64>,
    /// resolved comparison norm actually used
    pub norm_desc: String,
    /// per ν: ‖θ^ν − θ⁰‖ at each common node (may be shorter on abort)
    pub error_series: Vec<Vec<f64>>,
    pub final_errors: Vec<f64>,
    pub statuses: Vec<RunStatus>,
    pub reference_status: RunStatus,
    /// full diagnostic series of each member run, in nu_list order
    pub member_series: Vec<DiagnosticSeries>,
}

impl SweepResult {
    /// strict decrease of the final errors along the (decreasing) ν list
    pub fn strictly_decreasing(&self) -> bool {
        self.final_errors.windows(2).all(|w| w[1] < w[0])
    }
}

fn diff_norm(norm: &ErrorNorm, f: &SpectralField) -> f64 {
    match norm {
        ErrorNorm::Sobolev { s } => homogeneous_sobolev_norm(f, *s),
        ErrorNorm::Gevrey { params } => gevrey_norm(f, params).value,
        ErrorNorm::GevreyAuto { .. } => unreachable!("resolved before measuring"),
    }
}

/// Run the ν = 0 reference and every member of `nu_list` from the shared
/// initial data, and record the error series against the reference at the
/// common output nodes.
///
/// When `base.policy.t_end` should be calibrated rather than fixed, pass
/// `auto_t_end = true`: the ν = 0 member is first integrated with the policy
/// horizon as a cap and the sweep horizon becomes half its ResolutionLost
/// time (or the cap, if it stays resolved).
///
/// Members share one stepping sequence: a CFL policy is converted to a fixed
/// dt sized from the ν = 0 trajectory's peak speed (with margin). Per-member
/// CFL steps would give each run its own dt sequence, and the resulting
/// O(dt⁴) trajectory gap does not vanish with ν, flooring the error series.
pub fn viscosity_sweep(
    base: &BaseRun,
    nu_list: &[f64],
    norm: ErrorNorm,
    auto_t_end: bool,
) -> Result<SweepResult, SolverError> {
    let zero_state = member_state(base, 0.0)?;
    let mut t_end = base.policy.t_end;
    let mut calibration_t_lost = None;
    let mut peak_speed = 0.0f64;
    let probe = run(zero_state.clone(), &base.policy, &base.plan, |row, _| {
        peak_speed = peak_speed.max(row.max_u);
    })?;
    if auto_t_end {
        if let RunStatus::ResolutionLost { t } = probe.status {
            calibration_t_lost = Some(t);
            t_end = 0.5 * t;
        }
    }
    let dt_mode = match base.policy.dt_mode {
        DtMode::Cfl(c) => {
            let h = zero_state.lattice().spacing();
            DtMode::Fixed(c * h / (1.25 * peak_speed).max(1e-8))
        }
        fixed => fixed,
    };
    let policy = StepPolicy { t_end, dt_mode, ..base.policy };

    // reference trajectory at the common nodes
    let mut reference: Vec<SpectralField> = Vec::with_capacity(policy.outputs + 1);
    let ref_out = run(zero_state, &policy, &base.plan, |_, state| {
        reference.push(state.theta.clone());
    })?;
    let node_times = ref_out.series.times();

    let norm = match norm {
        ErrorNorm::GevreyAuto { s, r, tau_factor } => {
            let tau = tau_factor * ref_out.series.rows.last().expect("nonempty series").tau_hat;
            ErrorNorm::Gevrey {
                params: GevreyParams { s, r, tau },
            }
        }
        other => other,
    };
    let norm_desc = match &norm {
        ErrorNorm::Sobolev { s } => format!("homogeneous H^{s}"),
        ErrorNorm::Gevrey { params } => format!(
            "gevrey(s={}, r={}, tau={:.6})",
            params.s, params.r, params.tau
        ),
        ErrorNorm::GevreyAuto { .. } => unreachable!(),
    };

    let members: Vec<(Vec<f64>, RunStatus, DiagnosticSeries)> = nu_list
        .par_iter()
        .map(|&nu| -> Result<(Vec<f64>, RunStatus, DiagnosticSeries), SolverError> {
            let state = member_state(base, nu)?;
            let mut errors = Vec::with_capacity(reference.len());
            let mut idx = 0usize;
            let out = run(state, &policy, &base.plan, |_, s| {
                if idx < reference.len() {
                    errors.push(diff_norm(&norm, &s.theta.sub(&reference[idx])));
                }
                idx += 1;
            })?;
            Ok((errors, out.status, out.series))
        })
        .collect::<Result<_, _>>()?;

    let mut error_series = Vec::with_capacity(members.len());
    let mut statuses = Vec::with_capacity(members.len());
    let mut final_errors = Vec::with_capacity(members.len());
    let mut member_series = Vec::with_capacity(members.len());
    for (errs, status, series) in members {
        final_errors.push(errs.last().copied().unwrap_or(f64::NAN));
        error_series.push(errs);
        statuses.push(status);
        member_series.push(series);
    }

    Ok(SweepResult {
        nu_list: nu_list.to_vec(),
        t_end,
        calibration_t_lost,
        node_times,
        norm_desc,
        error_series,
        final_errors,
        statuses,
        reference_status: ref_out.status,
        member_series,
    })
}

fn member_state(base: &BaseRun, nu: f64) -> Result<SimulationState, SolverError> {
    let law = base.state.law.with_param(nu)?;
    SimulationState::new(
        base.state.theta.clone(),
        law,
        base.state.forcing.clone(),
        base.state.kappa,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::BaseRun;
    use crate::laws::SymbolLaw;
    use crate::solver::{DtMode, InitialRecipe, NormsPlan};
    use crate::spectral::Lattice;

    fn small_base() -> BaseRun {
        let lat = Lattice::new(2, 32).unwrap();
        let theta = InitialRecipe::Gevrey { tau0: 1.0, s: 1.0, seed: 12, amplitude: 0.5 }
            .build(lat)
            .unwrap();
        BaseRun {
            state: SimulationState::new(
                theta,
                SymbolLaw::ipmb(0.0).unwrap(),
                SpectralField::zeros(lat),
                0.0,
            )
            .unwrap(),
            policy: StepPolicy {
                dt_mode: DtMode::Cfl(0.5),
                t_end: 0.25,
                outputs: 5,
                resolution_guard: 1.0,
            },
            plan: NormsPlan::default(),
        }
    }

    #[test]
    fn sweep_errors_decrease_and_self_comparison_is_zero() {
        let base = small_base();
        let nus = [0.2, 0.1, 0.05, 0.025, 0.0];
        let result =
            viscosity_sweep(&base, &nus, ErrorNorm::Sobolev { s: 1.5 }, false).unwrap();
        assert_eq!(result.error_series.len(), 5);
        // ν = 0 member reproduces the reference exactly (determinism)
        assert!(result.final_errors[4] == 0.0);
        for w in result.final_errors[..4].windows(2) {
            assert!(w[1] < w[0], "errors must decrease with ν: {:?}", result.final_errors);
        }
        // repeated ν gives identical series
        let again =
            viscosity_sweep(&base, &[0.1, 0.1], ErrorNorm::Sobolev { s: 1.5 }, false).unwrap();
        assert_eq!(again.error_series[0], again.error_series[1]);
    }

    #[test]
    fn gevrey_auto_resolves_tau_from_reference() {
        let base = small_base();
        let result = viscosity_sweep(
            &base,
            &[0.1],
            ErrorNorm::GevreyAuto { s: 1.0, r: 2.6, tau_factor: 0.5 },
            false,
        )
        .unwrap();
        assert!(result.norm_desc.starts_with("gevrey"));
        assert!(result.final_errors[0].is_finite());
    }
}

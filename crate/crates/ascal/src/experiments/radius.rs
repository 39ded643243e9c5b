//! Gevrey-radius experiments: decay tracking under inviscid dynamics and the
//! large-time floor under thermal diffusion.

use serde::Serialize;

use crate::solver::{run, RunStatus, SimulationState, SolverError};

use super::fit::fit_line;
use super::BaseRun;

#[derive(Debug, Clone, Serialize)]
pub struct RadiusSeries {
    pub times: Vec<f64>,
    pub tau_hat: Vec<f64>,
    pub valid: Vec<bool>,
    pub status: RunStatus,
    /// fitted decay constant ĉ from ln tau_hat ≈ ln τ₀ − ĉ·t (valid nodes)
    pub c_hat: Option<f64>,
    pub fit_r2: Option<f64>,
    /// tau_hat(t) ≥ τ₀·e^{−1.1·ĉ·t} at every valid node
    pub lower_bound_ok: Option<bool>,
    /// minimum of tau_hat over the valid tail half of the run
    pub tail_floor: Option<f64>,
    /// more than 20% of nodes had an invalid estimate
    pub inconclusive: bool,
}

fn collect_series(base: &BaseRun) -> Result<RadiusSeries, SolverError> {
    let out = run(base.state.clone(), &base.policy, &base.plan, |_, _| {})?;
    let times: Vec<f64> = out.series.rows.iter().map(|r| r.t).collect();
    let tau_hat: Vec<f64> = out.series.rows.iter().map(|r| r.tau_hat).collect();
    let valid: Vec<bool> = out.series.rows.iter().map(|r| r.tau_valid).collect();
    let invalid = valid.iter().filter(|v| !**v).count();
    let inconclusive = invalid * 5 > valid.len();

    let tail_floor = {
        let half = times.len() / 2;
        times[half..]
            .iter()
            .zip(&tau_hat[half..])
            .zip(&valid[half..])
            .filter(|&(_, v)| *v)
            .map(|((_, &tau), _)| tau)
            .fold(None, |acc: Option<f64>, tau| {
                Some(acc.map_or(tau, |m: f64| m.min(tau)))
            })
    };

    Ok(RadiusSeries {
        times,
        tau_hat,
        valid,
        status: out.status,
        c_hat: None,
        fit_r2: None,
        lower_bound_ok: None,
        tail_floor,
        inconclusive,
    })
}

/// Track tau_hat(t) on an inviscid (κ = 0) run and fit the exponential decay
/// shape of the radius lower bound: ĉ from ln tau_hat vs t, plus the
/// self-consistency check tau_hat(t) ≥ τ₀e^{−1.1·ĉ·t}.
pub fn radius_decay(base: &BaseRun, tau0: f64) -> Result<RadiusSeries, SolverError> {
    let mut series = collect_series(base)?;
    if series.inconclusive {
        return Ok(series);
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for ((&t, &tau), &ok) in series.times.iter().zip(&series.tau_hat).zip(&series.valid) {
        if ok && tau > 0.0 {
            xs.push(t);
            ys.push(tau.ln());
        }
    }
    if let Some(fit) = fit_line(&xs, &ys) {
        let c_hat = -fit.slope;
        series.c_hat = Some(c_hat);
        series.fit_r2 = Some(fit.r2);
        let ok = series
            .times
            .iter()
            .zip(&series.tau_hat)
            .zip(&series.valid)
            .filter(|&(_, v)| *v)
            .all(|((&t, &tau), _)| tau >= tau0 * (-1.1 * c_hat * t).exp());
        series.lower_bound_ok = Some(ok);
    } else {
        series.inconclusive = true;
    }
    Ok(series)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffusiveFloorReport {
    pub diffusive: RadiusSeries,
    pub control: RadiusSeries,
    /// κ > 0 tail floor strictly above the κ = 0 control's
    pub floor_exceeds_control: Option<bool>,
    /// tail half of the diffusive tau_hat series is nondecreasing (2% slack)
    pub tail_nondecreasing: bool,
}

/// Run the κ > 0 configuration and its κ = 0 control from the same data and
/// compare radius floors over the tail half of the window.
pub fn diffusive_floor(base: &BaseRun) -> Result<DiffusiveFloorReport, SolverError> {
    assert!(base.state.kappa > 0.0, "diffusive_floor needs kappa > 0");
    let diffusive = collect_series(base)?;
    let control_state = SimulationState::new(
        base.state.theta.clone(),
        base.state.law.clone(),
        base.state.forcing.clone(),
        0.0,
    )?;
    let control = collect_series(&BaseRun {
        state: control_state,
        policy: base.policy,
        plan: base.plan.clone(),
    })?;

    let floor_exceeds_control = match (diffusive.tail_floor, control.tail_floor) {
        (Some(a), Some(b)) => Some(a > b),
        _ => None,
    };
    let half = diffusive.times.len() / 2;
    let tail: Vec<f64> = diffusive.tau_hat[half..]
        .iter()
        .zip(&diffusive.valid[half..])
        .filter(|&(_, v)| *v)
        .map(|(&tau, _)| tau)
        .collect();
    let tail_nondecreasing = tail.windows(2).all(|w| w[1] >= w[0] * 0.98);

    Ok(DiffusiveFloorReport {
        diffusive,
        control,
        floor_exceeds_control,
        tail_nondecreasing,
    })
}

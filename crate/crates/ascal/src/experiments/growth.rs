//! Exponential-envelope fitting of the gradient norm ‖∇θ(t)‖_{L^d}.

use serde::Serialize;

use crate::norms::gradient_lp_norm;
use crate::solver::{run, RunStatus, SolverError};

use super::fit::{fit_line, fit_quadratic};
use super::BaseRun;

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub times: Vec<f64>,
    pub grad_norm: Vec<f64>,
    pub status: RunStatus,
    /// envelope constants: grad_norm(t) <= a·e^{b·t} pointwise on the window
    pub a: f64,
    pub b: f64,
    /// curvature of ln y in the quadratic fit (0 for a pure exponential)
    pub curvature: f64,
    /// the series is dominated by a single exponential
    pub pass: bool,
    /// run did not complete: report is advisory only
    pub inconclusive: bool,
}

/// Fit ln y ≈ α + b·t and lift the intercept by the largest positive residual
/// so a·e^{bt} dominates the series pointwise. The single-exponential
/// criterion rejects series whose log has curvature comparable to its spread
/// (e.g. e^{t²} fails, any a·e^{bt} passes); series whose log moves less than
/// 0.05 overall count as flat, i.e. trivially exponential-dominated.
pub fn fit_growth_envelope(times: &[f64], values: &[f64]) -> Option<(f64, f64, f64, bool)> {
    if times.len() < 3 || values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let line = fit_line(times, &logs)?;
    let (_, _, c) = fit_quadratic(times, &logs)?;
    let span = times.last().unwrap() - times[0];
    let spread = logs.iter().cloned().fold(f64::MIN, f64::max)
        - logs.iter().cloned().fold(f64::MAX, f64::min);
    let pass = (c * span * span).abs() <= 0.2 * spread.max(0.05);
    let a = (line.intercept + line.max_residual).exp();
    Some((a, line.slope, c, pass))
}

/// Measure ‖∇θ‖_{L^d} at the output nodes of a run and fit the envelope.
pub fn gradient_growth(base: &BaseRun) -> Result<GrowthReport, SolverError> {
    let d = base.state.lattice().dim() as f64;
    let mut times = Vec::new();
    let mut grad_norm = Vec::new();
    let out = run(base.state.clone(), &base.policy, &base.plan, |row, state| {
        times.push(row.t);
        grad_norm.push(gradient_lp_norm(&state.theta, d).unwrap_or(f64::NAN));
    })?;
    let inconclusive = !out.status.is_completed();
    let (a, b, curvature, pass) = fit_growth_envelope(&times, &grad_norm)
        .unwrap_or((f64::NAN, f64::NAN, f64::NAN, false));
    Ok(GrowthReport {
        times,
        grad_norm,
        status: out.status,
        a,
        b,
        curvature,
        pass: pass && !inconclusive,
        inconclusive,
    })
}

//! Right-hand side assembly, classical RK4, and CFL time-step selection.

use crate::laws::apply_law;
use crate::spectral::{forward, inverse, GridField, SpectralField};

use super::state::{SimulationState, SolverError};

/// Velocity floor in the CFL rule, preventing dt → ∞ on quiescent states.
pub const CFL_VELOCITY_FLOOR: f64 = 1e-8;

/// Drift velocity on the collocation grid, one field per component.
pub fn velocity_grids(state: &SimulationState) -> Result<Vec<GridField>, SolverError> {
    let u = apply_law(&state.law, &state.theta)?;
    u.iter().map(|c| Ok(inverse(c)?)).collect()
}

/// Pointwise maximum of |u| over the grid.
pub fn max_speed(u: &[GridField]) -> f64 {
    let len = u[0].values().len();
    let mut worst = 0.0f64;
    for i in 0..len {
        let sq: f64 = u.iter().map(|c| c.values()[i] * c.values()[i]).sum();
        worst = worst.max(sq);
    }
    worst.sqrt()
}

/// −dealias(Σ_j u_j ∂_j θ) + Ŝ(k) − κ|k|²θ̂(k), mean-zero.
///
/// The nonlinearity uses the advective form: with exactly divergence-free
/// spectral u and a single dealias after the grid product sum, the term is the
/// exact truncated convolution and ⟨u·∇θ, θ⟩ vanishes to rounding.
pub fn rhs(state: &SimulationState) -> Result<SpectralField, SolverError> {
    let lat = state.lattice();
    let d = lat.dim();
    let u = apply_law(&state.law, &state.theta)?;

    let mut advect_grid = GridField::zeros(lat);
    for axis in 0..d {
        let ug = inverse(&u[axis])?;
        let dg = inverse(&state.theta.partial_derivative(axis)?)?;
        for (acc, (a, b)) in advect_grid
            .values_mut()
            .iter_mut()
            .zip(ug.values().iter().zip(dg.values()))
        {
            *acc += a * b;
        }
    }
    let advect = forward(&advect_grid)?.dealias();

    let mut out = state.forcing.clone();
    out.scaled_add(-1.0, &advect);
    if state.kappa > 0.0 {
        for (flat, c) in out.coeffs_mut().iter_mut().enumerate() {
            *c -= state.kappa * lat.k_squared(flat) * state.theta.coeffs()[flat];
        }
    }
    let out = out.project_mean_zero();
    if !out.is_finite() {
        return Err(SolverError::NonFinite { t: state.t });
    }
    Ok(out)
}

/// One classical RK4 step; mean-zero and Hermitian symmetry are re-imposed
/// exactly after the stage sum.
pub fn step(state: &SimulationState, dt: f64) -> Result<SimulationState, SolverError> {
    assert!(dt > 0.0, "dt must be positive");
    let k1 = rhs(state)?;

    let mut s2 = state.theta.clone();
    s2.scaled_add(0.5 * dt, &k1);
    let k2 = rhs(&state.with_theta(state.t + 0.5 * dt, s2))?;

    let mut s3 = state.theta.clone();
    s3.scaled_add(0.5 * dt, &k2);
    let k3 = rhs(&state.with_theta(state.t + 0.5 * dt, s3))?;

    let mut s4 = state.theta.clone();
    s4.scaled_add(dt, &k3);
    let k4 = rhs(&state.with_theta(state.t + dt, s4))?;

    let mut theta = state.theta.clone();
    theta.scaled_add(dt / 6.0, &k1);
    theta.scaled_add(dt / 3.0, &k2);
    theta.scaled_add(dt / 3.0, &k3);
    theta.scaled_add(dt / 6.0, &k4);
    let mut theta = theta.project_mean_zero();
    theta.hermitian_symmetrize();
    if !theta.is_finite() {
        return Err(SolverError::NonFinite { t: state.t + dt });
    }
    Ok(state.with_theta(state.t + dt, theta))
}

/// CFL step dt = c·h/max(‖u‖_{L^∞}, floor), plus the explicit-diffusion
/// stability caps when κ > 0.
pub fn cfl_dt(state: &SimulationState, c_cfl: f64) -> Result<f64, SolverError> {
    let u = velocity_grids(state)?;
    let h = state.lattice().spacing();
    let mut dt = c_cfl * h / max_speed(&u).max(CFL_VELOCITY_FLOOR);
    if state.kappa > 0.0 {
        dt = dt.min(diffusion_dt_cap(state));
    }
    Ok(dt)
}

/// Explicit RK4 stability cap for the κΔ term: both the (n/2)² rule of thumb
/// and the exact limit at the dealiased corner |k|² = d·cut².
pub fn diffusion_dt_cap(state: &SimulationState) -> f64 {
    let lat = state.lattice();
    let half = (lat.modes_per_axis() / 2) as f64;
    let corner = (lat.dim() as f64) * (lat.dealias_cut() as f64).powi(2);
    (2.8 / (state.kappa * half * half)).min(2.785 / (state.kappa * corner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::SymbolLaw;
    use crate::solver::state::InitialRecipe;
    use crate::spectral::Lattice;
    use rustfft::num_complex::Complex64;

    fn gevrey_state(n: usize, law: SymbolLaw, kappa: f64) -> SimulationState {
        let lat = Lattice::new(law.dim(), n).unwrap();
        let theta = InitialRecipe::Gevrey { tau0: 0.5, s: 1.0, seed: 11, amplitude: 1.0 }
            .build(lat)
            .unwrap();
        SimulationState::new(theta, law, crate::spectral::SpectralField::zeros(lat), kappa)
            .unwrap()
    }

    #[test]
    fn rhs_trivial_cases() {
        let lat = Lattice::new(2, 16).unwrap();
        let zero = SpectralField::zeros(lat);
        let st = SimulationState::new(zero.clone(), SymbolLaw::ipmb(0.0).unwrap(), zero, 0.0)
            .unwrap();
        assert_eq!(rhs(&st).unwrap().max_abs(), 0.0);
        // θ = 0, S ≠ 0 → rhs = Ŝ
        let s = SpectralField::from_modes(lat, &[([1, 1, 0], Complex64::new(0.2, 0.1))]);
        let st = SimulationState::new(
            SpectralField::zeros(lat),
            SymbolLaw::ipmb(0.0).unwrap(),
            s.clone(),
            0.0,
        )
        .unwrap();
        let r = rhs(&st).unwrap();
        assert!((r.coeff([1, 1, 0]) - s.coeff([1, 1, 0])).norm() < 1e-15);
    }

    #[test]
    fn advection_is_l2_orthogonal_to_theta() {
        // ⟨u·∇θ, θ⟩ = 0 with divergence-free u: the conservation structure
        let st = gevrey_state(32, SymbolLaw::ipmb(0.0).unwrap(), 0.0);
        let r = rhs(&st).unwrap();
        let ip = r.inner(&st.theta).abs();
        let scale = r.l2_norm() * st.theta.l2_norm();
        assert!(ip <= 1e-11 * scale.max(1e-30), "relative pairing {}", ip / scale);
    }

    #[test]
    fn step_preserves_structure() {
        let st = gevrey_state(32, SymbolLaw::ipmb(0.5).unwrap(), 0.0);
        let next = step(&st, 0.01).unwrap();
        assert_eq!(next.theta.mean_coeff().norm(), 0.0);
        assert_eq!(next.theta.hermitian_asymmetry(), 0.0);
        assert!((next.t - 0.01).abs() < 1e-15);
        // zero state is a fixed point
        let lat = Lattice::new(2, 16).unwrap();
        let zero = SpectralField::zeros(lat);
        let idle = SimulationState::new(zero.clone(), SymbolLaw::ipmb(0.0).unwrap(), zero, 0.0)
            .unwrap();
        let stepped = step(&idle, 0.3).unwrap();
        assert_eq!(stepped.theta.max_abs(), 0.0);
        assert!((stepped.t - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rk4_order_on_nonlinear_run() {
        // global error over fixed T shrinks ~16x when dt halves
        let st = gevrey_state(32, SymbolLaw::ipmb(0.0).unwrap(), 0.0);
        let t_end = 0.2;
        let integrate = |steps: usize| {
            let mut s = st.clone();
            let dt = t_end / steps as f64;
            for _ in 0..steps {
                s = step(&s, dt).unwrap();
            }
            s.theta
        };
        let reference = integrate(64);
        let e1 = integrate(8).sub(&reference).l2_norm();
        let e2 = integrate(16).sub(&reference).l2_norm();
        let ratio = e1 / e2;
        assert!(
            (10.0..28.0).contains(&ratio),
            "RK4 halving ratio {ratio} (e1 = {e1:.3e}, e2 = {e2:.3e})"
        );
    }

    #[test]
    fn heat_decay_matches_per_mode_kernel() {
        // zero law, κ > 0: each mode decays like e^{−κ|k|²t}
        let lat = Lattice::new(2, 16).unwrap();
        let theta = InitialRecipe::Modes(vec![
        crate::solver::state::ModeSpec { k: [1, 0, 0], re: 0.5, im: 0.0 },
            crate::solver::state::ModeSpec { k: [2, 1, 0], re: 0.1, im: 0.2 },
        ])
        .build(lat)
        .unwrap();
        let kappa = 0.8;
        let st = SimulationState::new(theta.clone(), SymbolLaw::zero(2), SpectralField::zeros(lat), kappa)
            .unwrap();
        let mut s = st;
        let dt = 1e-3;
        let steps = 250;
        for _ in 0..steps {
            s = step(&s, dt).unwrap();
        }
        let t = dt * steps as f64;
        for &k in &[[1i64, 0, 0], [2, 1, 0]] {
            let ksq = (k[0] * k[0] + k[1] * k[1]) as f64;
            let want = theta.coeff(k) * (-kappa * ksq * t).exp();
            let got = s.theta.coeff(k);
            assert!((got - want).norm() < 1e-9, "mode {k:?}");
        }
        // Poincaré decay of the norm (smallest |k| = 1)
        assert!(s.theta.l2_norm() <= theta.l2_norm() * (-kappa * t).exp() + 1e-12);
    }

    #[test]
    fn cfl_dt_rules() {
        let lat = Lattice::new(2, 16).unwrap();
        let zero = SpectralField::zeros(lat);
        let idle =
            SimulationState::new(zero.clone(), SymbolLaw::ipmb(0.0).unwrap(), zero, 0.0).unwrap();
        // u = 0 → floor engages
        let dt = cfl_dt(&idle, 0.5).unwrap();
        assert!((dt - 0.5 * lat.spacing() / CFL_VELOCITY_FLOOR).abs() < 1e-6 * dt);
        // doubling θ roughly halves dt for a zero-order law
        let st1 = gevrey_state(32, SymbolLaw::ipmb(0.0).unwrap(), 0.0);
        let mut big = st1.theta.clone();
        big.scale(2.0);
        let st2 = SimulationState::new(
            big,
            st1.law.clone(),
            SpectralField::zeros(st1.lattice()),
            0.0,
        )
        .unwrap();
        let r = cfl_dt(&st1, 0.5).unwrap() / cfl_dt(&st2, 0.5).unwrap();
        assert!((r - 2.0).abs() < 1e-10, "linearity of the law, got {r}");
        // diffusion cap engages for κ > 0
        let hot = SimulationState::new(
            st1.theta.clone(),
            st1.law.clone(),
            SpectralField::zeros(st1.lattice()),
            5.0,
        )
        .unwrap();
        assert!(cfl_dt(&hot, 0.5).unwrap() <= diffusion_dt_cap(&hot) + 1e-18);
    }
}

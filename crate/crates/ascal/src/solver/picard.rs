//! Picard successive approximations for the ν = 0 active scalar system:
//!
//! ```text
//!     ∂ₜθ₁ = S,                 θ₁(0) = θ₀,
//!     ∂ₜθₙ + u_{n−1}·∇θₙ = S,   θₙ(0) = θ₀,   u_{n−1} = M[θ_{n−1}],
//! ```
//!
//! with the frozen velocity trajectory linearly interpolated in time between
//! stored nodes. Differences θ̃ₙ = θₙ − θ_{n−1} contract in H^{s−1} on a short
//! enough window; the measured sup-in-time ratios are the diagnostic.

use crate::laws::{apply_law, SymbolLaw};
use crate::norms::homogeneous_sobolev_norm;
use crate::spectral::{forward, inverse, GridField, SpectralField};

use super::state::SolverError;
use super::step::{max_speed, CFL_VELOCITY_FLOOR};

/// Iterate trajectories sampled at shared time nodes.
#[derive(Debug, Clone)]
pub struct PicardRun {
    pub node_times: Vec<f64>,
    /// iterates[m] holds θ_{m+1} at the nodes
    pub iterates: Vec<Vec<SpectralField>>,
    /// (n, sup_t ‖θ̃ₙ‖_{H^{s−1}} / sup_t ‖θ̃_{n−1}‖_{H^{s−1}}) for n >= 3
    pub contraction_ratios: Vec<(usize, f64)>,
    pub t_window: f64,
    /// Sobolev index s of the contraction norm H^{s−1}
    pub s: f64,
}

impl PicardRun {
    pub fn ratio(&self, n: usize) -> Option<f64> {
        self.contraction_ratios
            .iter()
            .find(|&&(m, _)| m == n)
            .map(|&(_, r)| r)
    }

    pub fn max_ratio(&self) -> f64 {
        self.contraction_ratios
            .iter()
            .map(|&(_, r)| r)
            .fold(0.0, f64::max)
    }
}

/// Advect θ by a frozen velocity trajectory given on the nodes, with RK4
/// substeps and linear-in-time interpolation of the velocity grids. Returns θ
/// at every node. Substep count per interval comes from the CFL rule against
/// the window-wide maximum speed, so it is a pure function of the data.
pub fn advect_frozen(
    theta0: &SpectralField,
    forcing: &SpectralField,
    u_nodes: &[Vec<GridField>],
    node_times: &[f64],
    c_cfl: f64,
) -> Result<Vec<SpectralField>, SolverError> {
    assert_eq!(u_nodes.len(), node_times.len());
    let lat = theta0.lattice();
    let d = lat.dim();
    let speed = u_nodes
        .iter()
        .map(|u| max_speed(u))
        .fold(CFL_VELOCITY_FLOOR, f64::max);
    let dt_cap = c_cfl * lat.spacing() / speed;

    let lerp = |a: &[GridField], b: &[GridField], w: f64| -> Vec<GridField> {
        (0..d)
            .map(|axis| {
                let mut g = a[axis].clone();
                for (x, y) in g.values_mut().iter_mut().zip(b[axis].values()) {
                    *x += w * (*y - *x);
                }
                g
            })
            .collect()
    };

    let rhs = |theta: &SpectralField, u: &[GridField]| -> Result<SpectralField, SolverError> {
        let mut advect = GridField::zeros(lat);
        for axis in 0..d {
            let dg = inverse(&theta.partial_derivative(axis)?)?;
            for (acc, (a, b)) in advect
                .values_mut()
                .iter_mut()
                .zip(u[axis].values().iter().zip(dg.values()))
            {
                *acc += a * b;
            }
        }
        let mut out = forcing.clone();
        out.scaled_add(-1.0, &forward(&advect)?.dealias());
        Ok(out.project_mean_zero())
    };

    let mut out = Vec::with_capacity(node_times.len());
    let mut theta = theta0.clone();
    out.push(theta.clone());
    for i in 1..node_times.len() {
        let (t0, t1) = (node_times[i - 1], node_times[i]);
        let span = t1 - t0;
        let substeps = (span / dt_cap).ceil().max(1.0) as usize;
        let dt = span / substeps as f64;
        for sub in 0..substeps {
            let a = sub as f64 * dt;
            let w = |local: f64| (a + local) / span;
            let u_lo = lerp(&u_nodes[i - 1], &u_nodes[i], w(0.0));
            let u_mid = lerp(&u_nodes[i - 1], &u_nodes[i], w(0.5 * dt));
            let u_hi = lerp(&u_nodes[i - 1], &u_nodes[i], w(dt));

            let k1 = rhs(&theta, &u_lo)?;
            let mut s2 = theta.clone();
            s2.scaled_add(0.5 * dt, &k1);
            let k2 = rhs(&s2, &u_mid)?;
            let mut s3 = theta.clone();
            s3.scaled_add(0.5 * dt, &k2);
            let k3 = rhs(&s3, &u_mid)?;
            let mut s4 = theta.clone();
            s4.scaled_add(dt, &k3);
            let k4 = rhs(&s4, &u_hi)?;

            theta.scaled_add(dt / 6.0, &k1);
            theta.scaled_add(dt / 3.0, &k2);
            theta.scaled_add(dt / 3.0, &k3);
            theta.scaled_add(dt / 6.0, &k4);
            theta = theta.project_mean_zero();
            theta.hermitian_symmetrize();
            if !theta.is_finite() {
                return Err(SolverError::NonFinite { t: t0 + (sub + 1) as f64 * dt });
            }
        }
        out.push(theta.clone());
    }
    Ok(out)
}

/// Run the approximation scheme up to θ_{n_max} on [0, T] with `nodes`
/// intervals. The contraction norm is homogeneous H^{s−1}.
pub fn picard(
    theta0: &SpectralField,
    forcing: &SpectralField,
    law: &SymbolLaw,
    s: f64,
    n_max: usize,
    t_window: f64,
    nodes: usize,
    c_cfl: f64,
) -> Result<PicardRun, SolverError> {
    if n_max < 2 {
        return Err(SolverError::BadSetup("picard needs n_max >= 2".into()));
    }
    if nodes < 8 {
        return Err(SolverError::BadSetup("picard needs >= 8 nodes per window".into()));
    }
    if !(t_window > 0.0) {
        return Err(SolverError::BadSetup("picard window must be positive".into()));
    }
    let mut theta0 = theta0.dealias().project_mean_zero();
    theta0.hermitian_symmetrize();
    let forcing = forcing.dealias().project_mean_zero();

    let node_times: Vec<f64> = (0..=nodes)
        .map(|i| i as f64 * t_window / nodes as f64)
        .collect();

    // θ₁(t) = θ₀ + tS, integrated exactly
    let first: Vec<SpectralField> = node_times
        .iter()
        .map(|&t| {
            let mut f = theta0.clone();
            f.scaled_add(t, &forcing);
            f
        })
        .collect();

    let mut iterates = vec![first];
    for _n in 2..=n_max {
        let prev = iterates.last().expect("at least one iterate");
        let u_nodes: Vec<Vec<GridField>> = prev
            .iter()
            .map(|theta| {
                let u = apply_law(law, theta)?;
                u.iter()
                    .map(|c| Ok(inverse(c)?))
                    .collect::<Result<Vec<_>, SolverError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let next = advect_frozen(&theta0, &forcing, &u_nodes, &node_times, c_cfl)?;
        iterates.push(next);
    }

    let sup_diff = |a: &[SpectralField], b: &[SpectralField]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| homogeneous_sobolev_norm(&x.sub(y), s - 1.0))
            .fold(0.0, f64::max)
    };
    let mut contraction_ratios = Vec::new();
    for n in 3..=n_max {
        let num = sup_diff(&iterates[n - 1], &iterates[n - 2]);
        let den = sup_diff(&iterates[n - 2], &iterates[n - 3]);
        contraction_ratios.push((n, if den > 0.0 { num / den } else { 0.0 }));
    }

    Ok(PicardRun {
        node_times,
        iterates,
        contraction_ratios,
        t_window,
        s,
    })
}

/// True when every iterate satisfies the uniform bound
/// sup_t ‖Λ^s θₙ‖² <= 2‖Λ^s θ₀‖² within 10% slack.
pub fn uniform_bound_check(run: &PicardRun, s: f64) -> bool {
    let initial = homogeneous_sobolev_norm(&run.iterates[0][0], s).powi(2);
    let bound = 2.0 * initial * 1.1;
    run.iterates.iter().all(|traj| {
        traj.iter()
            .map(|f| homogeneous_sobolev_norm(f, s).powi(2))
            .fold(0.0, f64::max)
            <= bound
    })
}

use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laws::{LawError, SymbolLaw};
use crate::spectral::{Lattice, SpectralError, SpectralField};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("non-finite coefficients at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid solver setup: {0}")]
    BadSetup(String),
}

/// Named initial-data generators.
///
/// `Gevrey` draws one phase per retained mode pair from a ChaCha8 stream in a
/// fixed lexicographic traversal, so the field is reproducible bit-for-bit
/// across platforms from the 64-bit seed alone. Amplitudes are
/// amplitude·e^{−τ₀|k|^{1/s}}; support is the dealiased band, mean-zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialRecipe {
    Zero,
    Gevrey { tau0: f64, s: f64, seed: u64, amplitude: f64 },
    Modes(Vec<ModeSpec>),
}

/// One explicit coefficient: the value is mirrored conjugately to -k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub k: [i64; 3],
    pub re: f64,
    pub im: f64,
}

impl InitialRecipe {
    pub fn build(&self, lattice: Lattice) -> Result<SpectralField, SolverError> {
        match self {
            InitialRecipe::Zero => Ok(SpectralField::zeros(lattice)),
            InitialRecipe::Modes(modes) => {
                let cut = lattice.dealias_cut() as i64;
                for m in modes {
                    if m.k == [0, 0, 0] {
                        return Err(SolverError::BadSetup(
                            "mode recipes must be mean-zero: k = 0 not allowed".into(),
                        ));
                    }
                    if (0..lattice.dim()).any(|a| m.k[a].abs() > cut)
                        || (lattice.dim()..3).any(|a| m.k[a] != 0)
                    {
                        return Err(SolverError::BadSetup(format!(
                            "mode k = {:?} outside the dealiased band (cut {})",
                            m.k, cut
                        )));
                    }
                }
                let pairs: Vec<([i64; 3], Complex64)> = modes
                    .iter()
                    .map(|m| (m.k, Complex64::new(m.re, m.im)))
                    .collect();
                Ok(SpectralField::from_modes(lattice, &pairs))
            }
            InitialRecipe::Gevrey { tau0, s, seed, amplitude } => {
                if !(*s >= 1.0 && *tau0 >= 0.0) {
                    return Err(SolverError::BadSetup(
                        "gevrey recipe requires s >= 1 and tau0 >= 0".into(),
                    ));
                }
                Ok(gevrey_field(lattice, *tau0, *s, *seed, *amplitude))
            }
        }
    }
}

/// Random-phase field with deterministic Gevrey amplitudes.
///
/// Phase generation: one u64 per canonical mode (flat index below its
/// conjugate's), mapped to [0, 2π) via the top 53 bits. The traversal order is
/// the flat storage order, which fixes the stream completely.
fn gevrey_field(lattice: Lattice, tau0: f64, s: f64, seed: u64, amplitude: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cut = lattice.dealias_cut() as i64;
    let d = lattice.dim();
    let mut f = SpectralField::zeros(lattice);
    for flat in 0..lattice.len() {
        let k = lattice.wavevector(flat);
        if k == [0, 0, 0] || (0..d).any(|a| k[a].abs() > cut) {
            continue;
        }
        let conj = lattice.conj_index(flat);
        if conj <= flat {
            continue;
        }
        let phi = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU;
        let knorm = lattice.k_squared(flat).sqrt();
        let amp = amplitude * (-tau0 * knorm.powf(1.0 / s)).exp();
        let v = Complex64::from_polar(amp, phi);
        f.coeffs_mut()[flat] = v;
        f.coeffs_mut()[conj] = v.conj();
    }
    f
}

/// Instantaneous solver state; fields are dealiased, Hermitian, mean-zero.
#[derive(Debug, Clone)]
pub struct SimulationState {
    pub t: f64,
    pub theta: SpectralField,
    pub law: SymbolLaw,
    pub forcing: SpectralField,
    pub kappa: f64,
}

impl SimulationState {
    pub fn new(
        theta: SpectralField,
        law: SymbolLaw,
        forcing: SpectralField,
        kappa: f64,
    ) -> Result<Self, SolverError> {
        if theta.lattice() != forcing.lattice() {
            return Err(SolverError::BadSetup(format!(
                "theta lattice {} != forcing lattice {}",
                theta.lattice().describe(),
                forcing.lattice().describe()
            )));
        }
        if law.dim() != theta.lattice().dim() {
            return Err(SolverError::BadSetup(format!(
                "law dimension {} != lattice dimension {}",
                law.dim(),
                theta.lattice().dim()
            )));
        }
        if !(kappa >= 0.0) {
            return Err(SolverError::BadSetup(format!("kappa = {kappa} must be >= 0")));
        }
        let mut theta = theta.dealias().project_mean_zero();
        theta.hermitian_symmetrize();
        let mut forcing = forcing.dealias().project_mean_zero();
        forcing.hermitian_symmetrize();
        if !theta.is_finite() || !forcing.is_finite() {
            return Err(SolverError::NonFinite { t: 0.0 });
        }
        Ok(SimulationState { t: 0.0, theta, law, forcing, kappa })
    }

    pub fn lattice(&self) -> Lattice {
        self.theta.lattice()
    }

    pub fn with_theta(&self, t: f64, theta: SpectralField) -> SimulationState {
        SimulationState {
            t,
            theta,
            law: self.law.clone(),
            forcing: self.forcing.clone(),
            kappa: self.kappa,
        }
    }
}

/// Time-step selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DtMode {
    Fixed(f64),
    Cfl(f64),
}

/// Integration window and guards (the integrator is classical RK4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub dt_mode: DtMode,
    pub t_end: f64,
    /// number of diagnostic output nodes after t = 0
    pub outputs: usize,
    /// halt when the top dyadic shell holds more than this energy fraction
    pub resolution_guard: f64,
}

impl StepPolicy {
    pub fn validate(&self) -> Result<(), SolverError> {
        match self.dt_mode {
            DtMode::Fixed(dt) if !(dt > 0.0) => {
                return Err(SolverError::BadSetup("fixed dt must be > 0".into()))
            }
            DtMode::Cfl(c) if !(c > 0.0 && c <= 1.0) => {
                return Err(SolverError::BadSetup("cfl number must lie in (0, 1]".into()))
            }
            _ => {}
        }
        if !(self.t_end > 0.0) {
            return Err(SolverError::BadSetup("t_end must be > 0".into()));
        }
        if self.outputs == 0 {
            return Err(SolverError::BadSetup("need at least one output node".into()));
        }
        Ok(())
    }
}

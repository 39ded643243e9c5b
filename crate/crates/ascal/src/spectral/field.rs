use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

use super::fft::transform_all_axes;
use super::{Lattice, SpectralError};

/// Real scalar sampled at the n^d collocation points of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    lattice: Lattice,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(lattice: Lattice) -> Self {
        GridField {
            lattice,
            values: vec![0.0; lattice.len()],
        }
    }

    /// Sample a function of the collocation point.
    pub fn from_fn(lattice: Lattice, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..lattice.len()).map(|i| f(lattice.grid_point(i))).collect();
        GridField { lattice, values }
    }

    pub fn from_values(lattice: Lattice, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != lattice.len() {
            return Err(SpectralError::LatticeMismatch(
                lattice.describe(),
                format!("{} samples", values.len()),
            ));
        }
        Ok(GridField { lattice, values })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Truncated Fourier coefficients of a real scalar on the torus.
///
/// Storage is the full complex n^d array in FFT index order. Constructors zero
/// the unpaired Nyquist modes; Hermitian symmetry coeff(-k) = conj(coeff(k))
/// is established by construction and re-enforced by the solver after each
/// step. The mean mode coeff(0) is carried as data — callers that need
/// mean-zero fields project explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: Lattice,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(lattice: Lattice) -> Self {
        SpectralField {
            lattice,
            coeffs: vec![Complex64::default(); lattice.len()],
        }
    }

    /// Build from explicit (k, value) pairs, mirroring each entry to -k so the
    /// field is real. Entries on Nyquist indices or outside the lattice are
    /// rejected by `flat_index` range reduction only in debug builds; callers
    /// validate k ranges (the config layer does).
    pub fn from_modes(lattice: Lattice, modes: &[([i64; 3], Complex64)]) -> Self {
        let mut f = SpectralField::zeros(lattice);
        for &(k, v) in modes {
            if lattice.is_nyquist(k) {
                continue;
            }
            f.coeffs[lattice.flat_index(k)] = v;
            f.coeffs[lattice.flat_index([-k[0], -k[1], -k[2]])] = v.conj();
        }
        f
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.coeffs[self.lattice.flat_index(k)]
    }

    pub fn set_coeff(&mut self, k: [i64; 3], v: Complex64) {
        let idx = self.lattice.flat_index(k);
        self.coeffs[idx] = v;
    }

    /// The mean mode coeff(0): reported, never silently zeroed.
    pub fn mean_coeff(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// ∂/∂x_axis: multiply coeff(k) by i·k_axis (0-based axis).
    pub fn partial_derivative(&self, axis: usize) -> Result<SpectralField, SpectralError> {
        let d = self.lattice.dim();
        if axis >= d {
            return Err(SpectralError::AxisOutOfRange { axis, d });
        }
        let mut out = self.clone();
        for (flat, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.lattice.wavevector(flat);
            *c *= Complex64::new(0.0, k[axis] as f64);
        }
        Ok(out)
    }

    /// Zero every mode with any |k_axis| above the lattice dealias cutoff.
    pub fn dealias(&self) -> SpectralField {
        let cut = self.lattice.dealias_cut() as i64;
        let d = self.lattice.dim();
        let mut out = self.clone();
        for (flat, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.lattice.wavevector(flat);
            if (0..d).any(|a| k[a].abs() > cut) {
                *c = Complex64::default();
            }
        }
        out
    }

    /// Zero the mean mode, leaving everything else unchanged.
    pub fn project_mean_zero(&self) -> SpectralField {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::default();
        out
    }

    /// Replace coeff(k) by the Hermitian average (coeff(k) + conj(coeff(-k)))/2,
    /// making the represented field exactly real.
    pub fn hermitian_symmetrize(&mut self) {
        for flat in 0..self.coeffs.len() {
            let j = self.lattice.conj_index(flat);
            if j < flat {
                continue;
            }
            let avg = 0.5 * (self.coeffs[flat] + self.coeffs[j].conj());
            self.coeffs[flat] = avg;
            self.coeffs[j] = avg.conj();
        }
    }

    /// Worst Hermitian asymmetry max_k |coeff(k) - conj(coeff(-k))|.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for flat in 0..self.coeffs.len() {
            let j = self.lattice.conj_index(flat);
            worst = worst.max((self.coeffs[flat] - self.coeffs[j].conj()).norm());
        }
        worst
    }

    /// Coefficient L² norm (Σ_k |f̂(k)|²)^{1/2}, fixed lexicographic order.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Real part of the L² pairing Σ_k f̂(k) conj(ĝ(k)).
    pub fn inner(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    /// self + c·other, in place.
    pub fn scaled_add(&mut self, c: f64, other: &SpectralField) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in self.coeffs.iter_mut() {
            *a *= c;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.scaled_add(-1.0, other);
        out
    }

    /// Embed the coefficients into a finer lattice with the same wavenumbers
    /// (spectral zero padding). `factor` multiplies n.
    pub fn zero_pad(&self, factor: usize) -> SpectralField {
        let lat = self.lattice;
        let fine =
            Lattice::with_dealias_cut(lat.dim(), lat.modes_per_axis() * factor, lat.dealias_cut())
                .expect("padded lattice parameters are valid by construction");
        let mut out = SpectralField::zeros(fine);
        for (flat, &c) in self.coeffs.iter().enumerate() {
            let k = lat.wavevector(flat);
            if lat.is_nyquist(k) {
                continue;
            }
            out.coeffs[fine.flat_index(k)] = c;
        }
        out
    }

    fn zero_nyquist(&mut self) {
        let half = (self.lattice.modes_per_axis() / 2) as i64;
        let d = self.lattice.dim();
        for (flat, c) in self.coeffs.iter_mut().enumerate() {
            let k = self.lattice.wavevector(flat);
            if (0..d).any(|a| k[a] == half) {
                *c = Complex64::default();
            }
        }
    }
}

/// Coefficients of the trigonometric interpolant of a real grid field.
pub fn forward(g: &GridField) -> Result<SpectralField, SpectralError> {
    if !g.is_finite() {
        return Err(SpectralError::NonFiniteSamples);
    }
    let lat = g.lattice();
    let mut data: Vec<Complex64> = g.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_all_axes(&mut data, lat.dim(), lat.modes_per_axis(), FftDirection::Forward);
    let scale = 1.0 / lat.len() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
    let mut f = SpectralField { lattice: lat, coeffs: data };
    f.zero_nyquist();
    Ok(f)
}

/// Real samples of the interpolant; rejects fields whose Hermitian asymmetry
/// exceeds 1e-10 relative to the largest coefficient.
pub fn inverse(f: &SpectralField) -> Result<GridField, SpectralError> {
    if !f.is_finite() {
        return Err(SpectralError::NonFiniteCoefficients);
    }
    let asym = f.hermitian_asymmetry();
    if asym > 1e-10 * f.max_abs().max(1.0) {
        return Err(SpectralError::HermitianViolation(asym));
    }
    let lat = f.lattice();
    let mut data = f.coeffs().to_vec();
    transform_all_axes(&mut data, lat.dim(), lat.modes_per_axis(), FftDirection::Inverse);
    Ok(GridField {
        lattice: lat,
        values: data.iter().map(|c| c.re).collect(),
    })
}

/// Dealiased product: forward(inverse(a)·inverse(b)), then the 2/3-rule
/// projection. For inputs already supported below the cutoff this equals the
/// exact truncated convolution Σ_{j+k=l} â(j)b̂(k). The mean mode of the
/// product is reported; callers project it when their contract requires.
pub fn pointwise_product(
    a: &SpectralField,
    b: &SpectralField,
) -> Result<SpectralField, SpectralError> {
    if a.lattice() != b.lattice() {
        return Err(SpectralError::LatticeMismatch(
            a.lattice().describe(),
            b.lattice().describe(),
        ));
    }
    let ga = inverse(a)?;
    let gb = inverse(b)?;
    let mut prod = ga;
    for (x, y) in prod.values_mut().iter_mut().zip(gb.values()) {
        *x *= y;
    }
    Ok(forward(&prod)?.dealias())
}

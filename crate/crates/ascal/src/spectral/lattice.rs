use serde::{Deserialize, Serialize};

use super::SpectralError;

/// Uniform Fourier lattice on [0, 2π]^d with n modes per axis.
///
/// Flat storage is row-major over d axes of length n each. Index i on an axis
/// maps to the integer wavenumber k = i for i <= n/2 and k = i - n otherwise,
/// so retained wavenumbers lie in (-n/2, n/2]; the unpaired Nyquist index
/// i = n/2 (k = n/2, alias of -n/2) is zeroed by every constructor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    d: usize,
    n: usize,
    dealias_cut: usize,
}

impl Lattice {
    /// Lattice with the default 2/3-rule dealias cutoff ⌊n/3⌋.
    pub fn new(d: usize, n: usize) -> Result<Self, SpectralError> {
        Self::with_dealias_cut(d, n, n / 3)
    }

    pub fn with_dealias_cut(d: usize, n: usize, dealias_cut: usize) -> Result<Self, SpectralError> {
        if !(2..=3).contains(&d) {
            return Err(SpectralError::BadDimension(d));
        }
        if n < 8 || n % 2 != 0 {
            return Err(SpectralError::BadModes(n));
        }
        if dealias_cut > n / 2 {
            return Err(SpectralError::BadDealiasCut {
                cut: dealias_cut,
                half: n / 2,
            });
        }
        Ok(Lattice { d, n, dealias_cut })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn modes_per_axis(&self) -> usize {
        self.n
    }

    pub fn dealias_cut(&self) -> usize {
        self.dealias_cut
    }

    /// Total number of lattice sites, n^d.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing h = 2π/n.
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Largest |k| over retained (non-Nyquist) modes.
    pub fn max_wavenumber(&self) -> f64 {
        let m = (self.n / 2 - 1) as f64;
        m * (self.d as f64).sqrt()
    }

    /// Wavevector of a flat index; the unused third component is 0 when d = 2.
    #[inline]
    pub fn wavevector(&self, mut flat: usize) -> [i64; 3] {
        let n = self.n;
        let mut k = [0i64; 3];
        for axis in (0..self.d).rev() {
            let i = flat % n;
            flat /= n;
            k[axis] = if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
        }
        k
    }

    /// Flat index of a wavevector (components must lie in (-n/2, n/2]).
    #[inline]
    pub fn flat_index(&self, k: [i64; 3]) -> usize {
        let n = self.n as i64;
        let mut flat = 0usize;
        for axis in 0..self.d {
            let i = k[axis].rem_euclid(n) as usize;
            flat = flat * self.n + i;
        }
        flat
    }

    /// Flat index of -k.
    #[inline]
    pub fn conj_index(&self, flat: usize) -> usize {
        let k = self.wavevector(flat);
        self.flat_index([-k[0], -k[1], -k[2]])
    }

    /// True when any component sits on the unpaired Nyquist index.
    #[inline]
    pub fn is_nyquist(&self, k: [i64; 3]) -> bool {
        let half = (self.n / 2) as i64;
        (0..self.d).any(|a| k[a] == half)
    }

    /// |k|² as f64.
    #[inline]
    pub fn k_squared(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
    }

    /// Collocation point of a flat grid index, x_j = 2πj/n per axis.
    pub fn grid_point(&self, mut flat: usize) -> [f64; 3] {
        let mut x = [0.0f64; 3];
        for axis in (0..self.d).rev() {
            let i = flat % self.n;
            flat /= self.n;
            x[axis] = 2.0 * std::f64::consts::PI * i as f64 / self.n as f64;
        }
        x
    }

    /// Short human-readable description, used in error messages.
    pub fn describe(&self) -> String {
        format!("d={} n={} cut={}", self.d, self.n, self.dealias_cut)
    }
}

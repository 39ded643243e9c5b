//! Checkpoint file format, version 1:
//!
//! ```text
//! magic "ASCL" | u32 version | u32 d | u32 n | f64 t | f64 kappa
//! | u32 family tag (0 mg, 1 ipmb, 2 sipm, 3 table) | f64 parameter
//! | (table only) u32 count, then per entry 3×i64 k and 3×f64 m
//! | n^d coefficients row-major, little-endian f64 pairs (re, im)
//! ```
//!
//! All integers and floats are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::laws::{SymbolLaw, TableLaw};
use crate::solver::SimulationState;
use crate::spectral::{Lattice, SpectralField};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"ASCL";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes; not an ASCL checkpoint")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

fn family_tag(law: &SymbolLaw) -> u32 {
    match law {
        SymbolLaw::Mg { .. } => 0,
        SymbolLaw::Ipmb { .. } => 1,
        SymbolLaw::Sipm { .. } => 2,
        SymbolLaw::Table(_) => 3,
    }
}

pub fn write_checkpoint(path: &Path, state: &SimulationState) -> Result<(), CheckpointError> {
    let mut w = BufWriter::new(File::create(path)?);
    let lat = state.lattice();
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(lat.dim() as u32).to_le_bytes())?;
    w.write_all(&(lat.modes_per_axis() as u32).to_le_bytes())?;
    w.write_all(&state.t.to_le_bytes())?;
    w.write_all(&state.kappa.to_le_bytes())?;
    w.write_all(&family_tag(&state.law).to_le_bytes())?;
    w.write_all(&state.law.param().to_le_bytes())?;
    if let SymbolLaw::Table(table) = &state.law {
        w.write_all(&(table.entries.len() as u32).to_le_bytes())?;
        for (k, m) in &table.entries {
            for v in k {
                w.write_all(&v.to_le_bytes())?;
            }
            for v in m {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    for c in state.theta.coeffs() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Checkpoint header without the coefficient payload.
#[derive(Debug, Clone)]
pub struct CheckpointMeta {
    pub version: u32,
    pub d: usize,
    pub n: usize,
    pub t: f64,
    pub kappa: f64,
    pub law: SymbolLaw,
}

pub fn read_checkpoint(path: &Path) -> Result<(CheckpointMeta, SpectralField), CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let d = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let t = read_f64(&mut r)?;
    let kappa = read_f64(&mut r)?;
    let tag = read_u32(&mut r)?;
    let param = read_f64(&mut r)?;
    let law = match tag {
        0 => SymbolLaw::Mg { nu: param },
        1 => SymbolLaw::Ipmb { nu: param },
        2 => SymbolLaw::Sipm { beta: param },
        3 => {
            let count = read_u32(&mut r)? as usize;
            let mut table = TableLaw { d, entries: Default::default() };
            for _ in 0..count {
                let mut k = [0i64; 3];
                for v in &mut k {
                    *v = read_i64(&mut r)?;
                }
                let mut m = [0.0f64; 3];
                for v in &mut m {
                    *v = read_f64(&mut r)?;
                }
                table.entries.insert(k, m);
            }
            SymbolLaw::Table(table)
        }
        other => return Err(CheckpointError::Corrupt(format!("unknown family tag {other}"))),
    };
    let lattice = Lattice::new(d, n)
        .map_err(|e| CheckpointError::Corrupt(format!("lattice:  {e}")))?;
    let mut field = SpectralField::zeros(lattice);
    for c in field.coeffs_mut() {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        *c = Complex64::new(re, im);
    }
    Ok((CheckpointMeta { version, d, n, t, kappa, law }, field))
}

fn read_u32(r: &mut impl Read) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_i64(r: &mut impl Read) -> Result<i64, CheckpointError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(i64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64, CheckpointError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

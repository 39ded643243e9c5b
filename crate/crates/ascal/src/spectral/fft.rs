//! n-dimensional complex FFT passes built on rustfft.
//!
//! A d-dimensional transform is d axis passes. The innermost axis is contiguous
//! and processed in parallel chunks; outer axes gather each strided line into a
//! scratch buffer, transform it, and scatter back. Every line transform is
//! independent, so results are bit-identical for any rayon worker count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, direction == FftDirection::Forward);
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

/// In-place unnormalized DFT along every axis of a row-major n^d array.
pub fn transform_all_axes(data: &mut [Complex64], d: usize, n: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(d as u32));
    let fft = plan(n, direction);
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        if stride == 1 {
            data.par_chunks_mut(n).for_each(|line| {
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(line, &mut scratch);
            });
        } else {
            let block = stride * n;
            let bases: Vec<usize> = (0..data.len())
                .step_by(block)
                .flat_map(|b| (0..stride).map(move |off| b + off))
                .collect();
            // Lines overlap in memory (strided), so work through raw chunks:
            // grab each line into a local buffer, transform, write back.
            let ptr = SendPtr(data.as_mut_ptr());
            bases.par_iter().for_each(|&base| {
                let ptr = &ptr;
                let mut line = vec![Complex64::default(); n];
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                unsafe {
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = *ptr.0.add(base + j * stride);
                    }
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                unsafe {
                    for (j, v) in line.iter().enumerate() {
                        *ptr.0.add(base + j * stride) = *v;
                    }
                }
            });
        }
    }
}

// Distinct strided lines never alias, so sharing the base pointer across the
// pool is sound as long as `bases` are unique (they are by construction).
struct SendPtr(*mut Complex64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

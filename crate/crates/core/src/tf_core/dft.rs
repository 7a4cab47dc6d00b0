//! Discrete Fourier transforms.
//!
//! [`dft_direct`] is the O(n²) reference; [`FourierPlan`] wraps `rustfft`
//! plans for the fast operator paths.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

/// Unnormalised DFT by direct summation. `inverse` flips the sign of the exponent.
pub fn dft_direct(v: &[C64], inverse: bool) -> Vec<C64> {
    let n = v.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|l| {
            v.iter()
                .enumerate()
                .map(|(q, &x)| {
                    // reduce l*q first so the phase stays exact for large n
                    let r = ((l * q) % n) as f64;
                    x * C64::from_polar(1.0, sign * 2.0 * PI * r / n as f64)
                })
                .sum()
        })
        .collect()
}

/// Forward and inverse plans of a fixed length, applied batch-wise to
/// consecutive chunks of a buffer.
#[derive(Clone)]
pub struct FourierPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FourierPlan {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// In-place forward transform of every length-`len` chunk of `buf`.
    pub fn forward(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    /// In-place unnormalised inverse transform of every chunk of `buf`.
    pub fn inverse(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }
}

impl fmt::Debug for FourierPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierPlan").field("len", &self.len).finish()
    }
}

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tf_core::TFIndex;
use crate::C64;

fn non_empty(h: &[C64]) -> Result<usize> {
    if h.is_empty() {
        return Err(Error::InvalidInput("vector of length 0".into()));
    }
    Ok(h.len())
}

/// Cyclic translation `(T_k h)_q = h_{(k+q) mod n}`.
pub fn translate(h: &[C64], k: usize) -> Result<Vec<C64>> {
    let n = non_empty(h)?;
    let k = k % n;
    Ok((0..n).map(|q| h[(k + q) % n]).collect())
}

/// Modulation `(M_l h)_q = e^{2πi l q/n} h_q`.
pub fn modulate(h: &[C64], l: usize) -> Result<Vec<C64>> {
    let n = non_empty(h)?;
    let l = l % n;
    Ok(h.iter()
        .enumerate()
        .map(|(q, &v)| v * unit_phase((l * q) % n, n))
        .collect())
}

/// Time-frequency shift `π(λ) h = M_l T_k h`.
pub fn tf_shift(h: &[C64], lambda: TFIndex) -> Result<Vec<C64>> {
    let n = non_empty(h)?;
    let (k, l) = (lambda.k % n, lambda.l % n);
    Ok((0..n)
        .map(|q| h[(q + k) % n] * unit_phase((l * q) % n, n))
        .collect())
}

/// `⟨u, v⟩ = Σ u_q conj(v_q)`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm2(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `e^{2πi r/n}` for an already reduced residue `r`.
pub(crate) fn unit_phase(r: usize, n: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)
}

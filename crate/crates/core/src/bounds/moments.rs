//! The moment functions `G_{2m}(z) = z^{-2m} Σ_{s=1}^{m} d₂(2m, s) z^s`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::stirling::StirlingTable;

/// Largest order `2m` for which [`g2m_exact`] is offered.
pub const EXACT_G_MAX_ORDER: usize = 60;

fn check_args(z: f64, m: usize, table: &StirlingTable) -> Result<()> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("G_2m needs z > 0, got {z}")));
    }
    if m == 0 {
        return Err(Error::Domain("G_2m needs m >= 1".into()));
    }
    if 2 * m > table.max_m() {
        return Err(Error::Domain(format!(
            "G_{} needs a Stirling table up to {}, have {}",
            2 * m,
            2 * m,
            table.max_m()
        )));
    }
    Ok(())
}

/// `ln G_{2m}(z)`, summed in the log domain with a compensated sum of the
/// rescaled terms.
pub fn ln_g2m(z: f64, m: usize, table: &StirlingTable) -> Result<f64> {
    check_args(z, m, table)?;
    let ln_z = z.ln();
    let terms: Vec<f64> = (1..=m)
        .map(|s| table.ln(2 * m, s).expect("checked order") + s as f64 * ln_z)
        .collect();
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Neumaier summation of exp(t - peak)
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in &terms {
        let v = (t - peak).exp();
        let next = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - next) + v
        } else {
            (v - next) + sum
        };
        sum = next;
    }
    Ok(-2.0 * m as f64 * ln_z + peak + (sum + comp).ln())
}

/// `G_{2m}(z)`; fails with a numeric error if the value leaves the `f64` range.
pub fn g2m(z: f64, m: usize, table: &StirlingTable) -> Result<f64> {
    let ln = ln_g2m(z, m, table)?;
    if ln > f64::MAX.ln() {
        return Err(Error::Numeric(format!(
            "G_{}({z}) overflows: ln G = {ln:.6}",
            2 * m
        )));
    }
    Ok(ln.exp())
}

/// `G_{2m}(z)` evaluated exactly in rational arithmetic (with `z` taken as
/// the exact rational value of the float), rounded once at the end.
pub fn g2m_exact(z: f64, m: usize, table: &StirlingTable) -> Result<f64> {
    check_args(z, m, table)?;
    if 2 * m > EXACT_G_MAX_ORDER || table.get(2 * m, 1).is_none() {
        return Err(Error::Domain(format!(
            "exact G_2m is limited to 2m <= {EXACT_G_MAX_ORDER}"
        )));
    }
    let zr = BigRational::from_float(z).expect("finite z");
    let mut acc = BigRational::zero();
    let mut zpow = BigRational::one();
    for s in 1..=m {
        zpow *= &zr;
        let d: BigUint = table.get(2 * m, s).expect("exact row");
        acc += BigRational::from_integer(BigInt::from(d)) * &zpow;
    }
    let mut denom = BigRational::one();
    for _ in 0..2 * m {
        denom *= &zr;
    }
    (acc / denom)
        .to_f64()
        .ok_or_else(|| Error::Numeric("exact G_2m not representable".into()))
}

/// `S · G_m(n/S)`, the bound on `E[Tr H^m]` for even `m ≥ 2`.
pub fn moment_bound(n: usize, s: usize, m: usize, table: &StirlingTable) -> Result<f64> {
    Ok(ln_moment_bound(n, s, m, table)?.exp())
}

pub fn ln_moment_bound(n: usize, s: usize, m: usize, table: &StirlingTable) -> Result<f64> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::Domain(format!("moment order must be even and positive, got {m}")));
    }
    if s == 0 || s > n * n {
        return Err(Error::Domain(format!("need 1 <= S <= n², got S = {s}, n = {n}")));
    }
    let z = n as f64 / s as f64;
    Ok((s as f64).ln() + ln_g2m(z, m / 2, table)?)
}

/// `α^m / (4(1−α))`, the closed-form majorant of `G_{2m}(z)` valid whenever `4m/z ≤ α < 1`.
pub fn g_estimate(alpha: f64, m: usize) -> f64 {
    alpha.powi(m as i32) / (4.0 * (1.0 - alpha))
}

//! Basis Pursuit `min ‖x‖₁ s.t. Ψ_g x = y` over complex coefficients.
//!
//! The solver is a first-order primal-dual splitting:
//!
//! ```text
//! z ← z + σ (Ψ x̄ − y)
//! x⁺ ← soft(x − τ Ψ* z, τ)        soft(v, τ) = v · max(1 − τ/|v|, 0)
//! x̄ ← 2x⁺ − x
//! ```
//!
//! with `τσ‖Ψ‖² ≤ 1`, where `‖Ψ‖ = √n` because the Gabor system is a tight
//! frame. Each iteration costs one synthesis and one analysis.
//!
//! Every `polish_every` iterations the current support is tested: the least
//! squares fit on it is accepted as the solution if it reproduces `y` and its
//! dual certificate is strictly below one off the support, which proves it is
//! the unique minimiser.

mod certificate;
mod l0;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::rng::{trial_rng, Role};
use crate::tf_core::{norm2, GaborOperator, SparseCoeffs, SupportSet};
use crate::C64;

pub use certificate::{
    certificate_vector, dual_certificate, dual_certificate_detailed, pseudo_inverse_row_norm,
    CertificateReport, MIN_GRAM_EIGENVALUE,
};
pub use l0::l0_oracle;

/// Strict margin below one required of a certificate during polishing.
const POLISH_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BPConfig {
    pub max_iterations: usize,
    pub primal_step: f64,
    pub dual_step: f64,
    /// Relative residual `‖Ψx − y‖/‖y‖` and relative iterate change at convergence.
    pub convergence_tol: f64,
    /// Relative `ℓ2` error declaring a recovery successful.
    pub recovery_tol: f64,
    /// Iterations between support-polishing attempts; 0 disables polishing.
    pub polish_every: usize,
}

impl BPConfig {
    pub fn for_dimension(n: usize) -> Self {
        let step = 0.99 / (n as f64).sqrt();
        Self {
            max_iterations: 20_000,
            primal_step: step,
            dual_step: step,
            convergence_tol: 1e-9,
            recovery_tol: 1e-5,
            polish_every: 25,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.primal_step > 0.0 && self.dual_step > 0.0) {
            return Err(Error::InvalidInput("step sizes must be positive".into()));
        }
        let product = self.primal_step * self.dual_step * n as f64;
        if product > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "step sizes violate τσ‖Ψ‖² <= 1 (got {product})"
            )));
        }
        if !(self.convergence_tol > 0.0 && self.recovery_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BPResult {
    /// Full coefficient vector of length `n²` in column order.
    pub coefficients: Vec<C64>,
    /// `‖Ψx − y‖₂ / ‖y‖₂` (absolute residual when `y = 0`).
    pub residual: f64,
    pub l1_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The returned point carries a strict dual certificate.
    pub certified: bool,
}

impl BPResult {
    pub fn sparse(&self, n: usize, threshold: f64) -> SparseCoeffs {
        SparseCoeffs::from_dense(&self.coefficients, n, threshold).expect("length n²")
    }
}

/// Initial primal and dual iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct Start {
    pub x: Vec<C64>,
    pub z: Vec<C64>,
}

impl Start {
    pub fn zero(n: usize) -> Self {
        Self {
            x: vec![C64::default(); n * n],
            z: vec![C64::default(); n],
        }
    }

    /// Gaussian-ish random start derived from `(seed, index)`, scaled by `scale`.
    pub fn random(n: usize, seed: u64, index: u64, scale: f64) -> Self {
        let mut rng = trial_rng(seed, index, Role::Initialization);
        let mut draw = |len: usize| -> Vec<C64> {
            (0..len)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * scale)
                .collect()
        };
        let x = draw(n * n);
        let z = draw(n);
        Self { x, z }
    }
}

pub fn basis_pursuit(op: &GaborOperator, y: &[C64], config: &BPConfig) -> Result<BPResult> {
    basis_pursuit_from(op, y, config, Start::zero(op.n()))
}

/// Basis Pursuit from a given starting point.
pub fn basis_pursuit_from(
    op: &GaborOperator,
    y: &[C64],
    config: &BPConfig,
    start: Start,
) -> Result<BPResult> {
    let n = op.n();
    let dim = op.dim();
    check_len(n, y.len())?;
    check_len(dim, start.x.len())?;
    check_len(n, start.z.len())?;
    config.validate(n)?;

    let y_norm = norm2(y);
    if y_norm == 0.0 {
        return Ok(BPResult {
            coefficients: vec![C64::default(); dim],
            residual: 0.0,
            l1_value: 0.0,
            iterations: 0,
            converged: true,
            certified: true,
        });
    }

    let (tau, sigma) = (config.primal_step, config.dual_step);
    let mut ws = op.workspace();
    let Start { mut x, mut z } = start;
    let mut x_bar = x.clone();
    let mut x_new = vec![C64::default(); dim];
    let mut grad = vec![C64::default(); dim];
    let mut psi_x = vec![C64::default(); n];

    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        op.synthesize_into(&x_bar, &mut psi_x, &mut ws);
        for ((zq, pq), yq) in z.iter_mut().zip(&psi_x).zip(y) {
            *zq += (pq - yq) * sigma;
        }
        op.analyze_into(&z, &mut grad, &mut ws);
        let mut change = 0.0;
        let mut x_sq = 0.0;
        for i in 0..dim {
            let v = x[i] - grad[i] * tau;
            let r = v.norm();
            let nx = if r > tau { v * (1.0 - tau / r) } else { C64::default() };
            change += (nx - x[i]).norm_sqr();
            x_sq += nx.norm_sqr();
            x_new[i] = nx;
        }
        for i in 0..dim {
            x_bar[i] = x_new[i] * 2.0 - x[i];
        }
        std::mem::swap(&mut x, &mut x_new);

        if config.polish_every > 0 && iterations % config.polish_every == 0 {
            if let Some(mut done) = polish(op, y, y_norm, &x, config)? {
                done.iterations = iterations;
                return Ok(done);
            }
        }
        if change.sqrt() <= config.convergence_tol * x_sq.sqrt().max(f64::MIN_POSITIVE) {
            op.synthesize_into(&x, &mut psi_x, &mut ws);
            if residual(&psi_x, y, y_norm) <= config.convergence_tol {
                break;
            }
        }
    }
    op.synthesize_into(&x, &mut psi_x, &mut ws);
    let res = residual(&psi_x, y, y_norm);
    Ok(BPResult {
        l1_value: x.iter().map(|v| v.norm()).sum(),
        coefficients: x,
        residual: res,
        iterations,
        converged: res <= config.convergence_tol && iterations < config.max_iterations,
        certified: false,
    })
}

fn residual(psi_x: &[C64], y: &[C64], y_norm: f64) -> f64 {
    psi_x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / y_norm
}

/// Least-squares fit on the support of `x`, accepted only with a strict certificate.
fn polish(
    op: &GaborOperator,
    y: &[C64],
    y_norm: f64,
    x: &[C64],
    config: &BPConfig,
) -> Result<Option<BPResult>> {
    let n = op.n();
    let columns: Vec<usize> = (0..x.len()).filter(|&c| x[c] != C64::default()).collect();
    if columns.is_empty() || columns.len() > n / 2 {
        return Ok(None);
    }
    let support = SupportSet::from_columns(&columns, n)?;
    let (gram, _) = match certificate::invertible_gram(op, &support) {
        Ok(g) => g,
        Err(Error::CertificateUnavailable(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let rhs: Vec<C64> = support
        .indices()
        .iter()
        .map(|&i| crate::tf_core::inner(y, &op.column(i)))
        .collect();
    let values = certificate::solve(&gram, rhs)?;
    if values.iter().any(|v| v.norm() == 0.0) {
        return Ok(None);
    }
    let fit = SparseCoeffs::new(support.clone(), values)?;
    let res = residual(&op.synthesize_sparse(&fit)?, y, y_norm);
    if res > config.convergence_tol {
        return Ok(None);
    }
    let cert = dual_certificate(op, &support, &fit.signs())?;
    if cert.max_offsupport_magnitude >= 1.0 - POLISH_MARGIN {
        return Ok(None);
    }
    Ok(Some(BPResult {
        coefficients: fit.to_dense(),
        residual: res,
        l1_value: fit.l1_norm(),
        iterations: 0,
        converged: true,
        certified: true,
    }))
}

/// `‖x − x_truth‖₂ / ‖x_truth‖₂`; infinite when the truth is zero and `x` is not.
pub fn relative_error(truth: &SparseCoeffs, x: &[C64]) -> Result<f64> {
    let n = truth.n();
    check_len(n * n, x.len())?;
    let mut diff: Vec<C64> = x.to_vec();
    for (idx, v) in truth.support().indices().iter().zip(truth.values()) {
        diff[idx.column(n)] -= v;
    }
    let d = norm2(&diff);
    let t = truth.norm2();
    Ok(if t == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d / t
    })
}

/// True iff the relative `ℓ2` error of the result is at most `tol`.
pub fn verify_recovery(truth: &SparseCoeffs, result: &BPResult, tol: f64) -> Result<bool> {
    Ok(relative_error(truth, &result.coefficients)? <= tol)
}

/// Entries of the result above `tol·‖x_truth‖₂/√S`.
pub fn identified_support(truth: &SparseCoeffs, result: &BPResult, tol: f64) -> SupportSet {
    let s = truth.sparsity().max(1) as f64;
    let threshold = tol * truth.norm2() / s.sqrt();
    result
        .sparse(truth.n(), threshold)
        .support()
        .clone()
}

#[cfg(test)]
mod tests;

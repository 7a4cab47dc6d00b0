use crate::error::{check_len, Error, Result};
use crate::tf_core::{inner, norm2, GaborOperator, SparseCoeffs, SupportSet};
use crate::C64;

use super::certificate::{invertible_gram, solve};

const MAX_N: usize = 8;
const MAX_S: usize = 2;
const FIT_TOL: f64 = 1e-8;

/// Exhaustive `ℓ0` minimisation for tiny instances: tries every support of
/// size `0, 1, …, max_s` in lexicographic column order and returns the first
/// exact least-squares fit (residual at most `1e-8 ‖y‖₂`).
pub fn l0_oracle(op: &GaborOperator, y: &[C64], max_s: usize) -> Result<SparseCoeffs> {
    let n = op.n();
    check_len(n, y.len())?;
    if n > MAX_N || max_s > MAX_S {
        return Err(Error::Resource(format!(
            "l0 enumeration is limited to n <= {MAX_N} and S <= {MAX_S}"
        )));
    }
    let y_norm = norm2(y);
    if y_norm == 0.0 {
        return Ok(SparseCoeffs::zero(n));
    }
    let tol = FIT_TOL * y_norm;
    let dim = n * n;
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for size in 1..=max_s {
        candidates.clear();
        match size {
            1 => candidates.extend((0..dim).map(|c| vec![c])),
            _ => {
                for a in 0..dim {
                    for b in a + 1..dim {
                        candidates.push(vec![a, b]);
                    }
                }
            }
        }
        for cols in &candidates {
            if let Some(fit) = fit_support(op, y, cols, tol)? {
                return Ok(fit);
            }
        }
    }
    Err(Error::NotRepresentable { max_s })
}

fn fit_support(op: &GaborOperator, y: &[C64], cols: &[usize], tol: f64) -> Result<Option<SparseCoeffs>> {
    let support = SupportSet::from_columns(cols, op.n())?;
    let gram = match invertible_gram(op, &support) {
        Ok((g, _)) => g,
        Err(Error::CertificateUnavailable(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let rhs = support
        .indices()
        .iter()
        .map(|&i| inner(y, &op.column(i)))
        .collect();
    let values = solve(&gram, rhs)?;
    let fit = SparseCoeffs::new(support, values)?;
    let y_fit = op.synthesize_sparse(&fit)?;
    let res = y.iter().zip(&y_fit).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    Ok((res <= tol && fit.sparsity() == cols.len()).then_some(fit))
}

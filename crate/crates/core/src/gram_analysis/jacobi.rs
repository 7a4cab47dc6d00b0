//! Cyclic Jacobi eigenvalue iteration.
//!
//! A Hermitian `A = B + iC` is embedded into the real symmetric
//! `[[B, -C], [C, B]]`, whose spectrum is that of `A` with every eigenvalue
//! doubled.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a real symmetric matrix (row-major `dim × dim`), ascending.
/// Sweeps until the off-diagonal Frobenius norm is at most `tol`.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, dim: usize, tol: f64) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), dim * dim);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    s += a[i * dim + j] * a[i * dim + j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi iteration did not reach off-diagonal norm {tol:e} in {MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = a[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * dim + q] - a[p * dim + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- Jᵀ A J with J the rotation in the (p, q) plane
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..dim).map(|i| a[i * dim + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part is
/// used; callers are expected to have validated symmetry.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>, tol: f64) -> Result<Vec<f64>> {
    let s = m.nrows();
    let dim = 2 * s;
    let mut a = vec![0.0; dim * dim];
    for i in 0..s {
        for j in 0..s {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            a[i * dim + j] = z.re;
            a[(i + s) * dim + (j + s)] = z.re;
            a[i * dim + (j + s)] = -z.im;
            a[(i + s) * dim + j] = z.im;
        }
    }
    let doubled = symmetric_eigenvalues(a, dim, tol)?;
    Ok(doubled.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_returned_sorted() {
        let a = vec![3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0];
        assert_eq!(symmetric_eigenvalues(a, 3, 1e-14).unwrap(), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_hermitian_closed_form() {
        let c = C64::new(0.3, -0.4);
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), c, c.conj(), C64::new(1.0, 0.0)]);
        let e = hermitian_eigenvalues(&m, 1e-13).unwrap();
        assert!((e[0] - 0.5).abs() < 1e-12 && (e[1] - 1.5).abs() < 1e-12);
    }
}

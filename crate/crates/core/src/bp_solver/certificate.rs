use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gram_analysis::{extremal_eigenvalues, gram_submatrix, ConditioningReport};
use crate::tf_core::{GaborOperator, SparseCoeffs, SupportSet, TFIndex};
use crate::C64;

/// Smallest Gram eigenvalue accepted as invertible.
pub const MIN_GRAM_EIGENVALUE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `max_{ρ∉Λ} |P_ρ|` for `P = Ψ*Ψ_Λ(Ψ_Λ*Ψ_Λ)^{-1} sgn`.
    pub max_offsupport_magnitude: f64,
    /// `|P_ρ|` for every `ρ ∉ Λ`, in column order, when requested.
    pub per_index: Option<Vec<(TFIndex, f64)>>,
    pub gram_condition: ConditioningReport,
    pub certifies_uniqueness: bool,
}

/// Gram matrix of the support with its conditioning, rejecting singular ones.
pub(crate) fn invertible_gram(
    op: &GaborOperator,
    support: &SupportSet,
) -> Result<(DMatrix<C64>, ConditioningReport)> {
    let gram = gram_submatrix(op, support)?;
    let cond = extremal_eigenvalues(&gram)?;
    if cond.lambda_min <= MIN_GRAM_EIGENVALUE {
        return Err(Error::CertificateUnavailable(format!(
            "Gram matrix of the support is singular (λ_min = {:e})",
            cond.lambda_min
        )));
    }
    Ok((gram.entries().clone(), cond))
}

pub(crate) fn solve(gram: &DMatrix<C64>, rhs: Vec<C64>) -> Result<Vec<C64>> {
    gram.clone()
        .lu()
        .solve(&DVector::from_vec(rhs))
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::CertificateUnavailable("Gram matrix is not invertible".into()))
}

/// The full vector `P = Ψ*Ψ_Λ(Ψ_Λ*Ψ_Λ)^{-1} R_Λ sgn` together with the Gram conditioning.
pub fn certificate_vector(
    op: &GaborOperator,
    support: &SupportSet,
    signs: &[C64],
) -> Result<(Vec<C64>, ConditioningReport)> {
    check_len(support.len(), signs.len())?;
    if let Some(s) = signs.iter().find(|s| (s.norm() - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidInput(format!("sign entry {s} is not unimodular")));
    }
    let (gram, cond) = invertible_gram(op, support)?;
    let v = solve(&gram, signs.to_vec())?;
    let w = op.synthesize_sparse(&SparseCoeffs::new(support.clone(), v)?)?;
    Ok((op.analyze(&w)?, cond))
}

/// Dual certificate for the sign pattern `signs` on `support`. A maximum
/// off-support magnitude below one (with an invertible Gram matrix) proves
/// that every vector with this support and these signs is the unique
/// Basis Pursuit minimiser for its own measurements.
pub fn dual_certificate(
    op: &GaborOperator,
    support: &SupportSet,
    signs: &[C64],
) -> Result<CertificateReport> {
    certificate_report(op, support, signs, false)
}

/// Like [`dual_certificate`] but also lists `|P_ρ|` for every `ρ ∉ Λ`.
pub fn dual_certificate_detailed(
    op: &GaborOperator,
    support: &SupportSet,
    signs: &[C64],
) -> Result<CertificateReport> {
    certificate_report(op, support, signs, true)
}

fn certificate_report(
    op: &GaborOperator,
    support: &SupportSet,
    signs: &[C64],
    detailed: bool,
) -> Result<CertificateReport> {
    let (p, cond) = certificate_vector(op, support, signs)?;
    let n = op.n();
    let mut on_support = vec![false; n * n];
    for c in support.columns() {
        on_support[c] = true;
    }
    let off = p
        .iter()
        .enumerate()
        .filter(|(c, _)| !on_support[*c])
        .map(|(c, z)| (TFIndex::from_column(c, n), z.norm()));
    let (max, per_index) = if detailed {
        let list: Vec<(TFIndex, f64)> = off.collect();
        (list.iter().map(|e| e.1).fold(0.0, f64::max), Some(list))
    } else {
        (off.map(|e| e.1).fold(0.0, f64::max), None)
    };
    Ok(CertificateReport {
        max_offsupport_magnitude: max,
        per_index,
        gram_condition: cond,
        certifies_uniqueness: max < 1.0 && cond.lambda_min > 0.0,
    })
}

/// `‖Ψ_Λ^† ψ_ρ‖₂ = ‖(Ψ_Λ*Ψ_Λ)^{-1} Ψ_Λ* ψ_ρ‖₂` for `ρ ∉ Λ`.
pub fn pseudo_inverse_row_norm(op: &GaborOperator, support: &SupportSet, rho: TFIndex) -> Result<f64> {
    let rho = TFIndex::new(rho.k, rho.l, op.n());
    if support.contains(rho) {
        return Err(Error::InvalidInput(format!("index {rho} lies in the support")));
    }
    let (gram, _) = invertible_gram(op, support)?;
    let psi = op.column(rho);
    let rhs: Vec<C64> = support
        .indices()
        .iter()
        .map(|&i| crate::tf_core::inner(&psi, &op.column(i)))
        .collect();
    let v = solve(&gram, rhs)?;
    Ok(v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

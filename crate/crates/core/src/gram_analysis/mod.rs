//! Coherence, Gram submatrices and their conditioning.

mod jacobi;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, trial_rng, Role};
use crate::stats::{wilson_interval, Z_95};
use crate::tf_core::{dft::FourierPlan, inner, GaborOperator, SupportSet, Window};
use crate::C64;

pub use jacobi::{hermitian_eigenvalues, symmetric_eigenvalues};

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-12;

/// Tolerance for the Hermitian check, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Coherence `μ = max_{λ≠λ'} |⟨ψ_λ, ψ_λ'⟩|`.
///
/// By covariance of the Gabor system it suffices to compare every atom with
/// `g` itself: `⟨g, π(k,l)g⟩ = DFT_l(q ↦ g_q conj(g_{q+k}))`, which costs `n`
/// FFTs of length `n`.
pub fn coherence(op: &GaborOperator) -> Result<f64> {
    let n = op.n();
    if n < 2 {
        return Err(Error::Domain("coherence needs n >= 2".into()));
    }
    let g = op.window().values();
    let plan = FourierPlan::new(n);
    let mut scratch = vec![C64::default(); plan.scratch_len()];
    let mut buf: Vec<C64> = (0..n * n)
        .map(|i| {
            let (k, q) = (i / n, i % n);
            g[q] * g[(q + k) % n].conj()
        })
        .collect();
    plan.forward(&mut buf, &mut scratch);
    Ok(buf
        .iter()
        .skip(1)
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// The Gram matrix `Ψ_Λ*Ψ_Λ` of the atoms indexed by a support set.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSubmatrix {
    entries: DMatrix<C64>,
    support: SupportSet,
}

impl GramSubmatrix {
    /// Wraps an arbitrary square matrix. Hermitian symmetry is checked by
    /// [`extremal_eigenvalues`], not here.
    pub fn from_entries(entries: DMatrix<C64>, support: SupportSet) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() != support.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                got: entries.nrows(),
            });
        }
        Ok(Self { entries, support })
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// `H = Ψ_Λ*Ψ_Λ - I`.
    pub fn deviation(&self) -> DMatrix<C64> {
        let s = self.size();
        &self.entries - DMatrix::<C64>::identity(s, s)
    }
}

/// Entry `(i, j)` is `⟨ψ_{λ_j}, ψ_{λ_i}⟩`.
pub fn gram_submatrix(op: &GaborOperator, support: &SupportSet) -> Result<GramSubmatrix> {
    if support.is_empty() {
        return Err(Error::Domain("Gram submatrix of an empty support".into()));
    }
    crate::error::check_len(op.n(), support.n())?;
    let cols: Vec<Vec<C64>> = support.indices().iter().map(|&i| op.column(i)).collect();
    let s = cols.len();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        m[(i, i)] = C64::new(inner(&cols[i], &cols[i]).re, 0.0);
        for j in i + 1..s {
            let z = inner(&cols[j], &cols[i]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    GramSubmatrix::from_entries(m, support.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditioningReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `‖H‖ = max(|λ_min - 1|, |λ_max - 1|)`.
    pub op_norm_h: f64,
    /// `‖H‖_F`.
    pub frobenius_h: f64,
}

/// Extremal eigenvalues of a Gram submatrix by cyclic Jacobi rotations.
pub fn extremal_eigenvalues(m: &GramSubmatrix) -> Result<ConditioningReport> {
    let a = m.entries();
    let s = m.size();
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..s {
        for j in i..s {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > HERMITIAN_TOL * scale {
                return Err(Error::InvalidInput(format!(
                    "matrix is not Hermitian: entry ({i}, {j}) deviates by {d:e}"
                )));
            }
        }
    }
    let eig = hermitian_eigenvalues(a, JACOBI_TOL * scale)?;
    // Gram matrices are positive semidefinite; only roundoff can go below zero
    let lambda_min = eig[0].max(0.0);
    let lambda_max = eig[s - 1].max(lambda_min);
    Ok(ConditioningReport {
        lambda_min,
        lambda_max,
        op_norm_h: (lambda_min - 1.0).abs().max((lambda_max - 1.0).abs()),
        frobenius_h: m.deviation().norm(),
    })
}

/// Outcome of a Monte-Carlo rate estimate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub trials: usize,
    pub events: usize,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl RateEstimate {
    pub fn from_flags(flags: &[bool]) -> Self {
        let events = flags.iter().filter(|&&f| f).count();
        let trials = flags.len();
        let (wilson_lo, wilson_hi) = wilson_interval(events, trials, Z_95);
        Self {
            trials,
            events,
            rate: if trials == 0 { 0.0 } else { events as f64 / trials as f64 },
            wilson_lo,
            wilson_hi,
        }
    }
}

/// Draws a fresh Steinhaus window and a uniform support for trial `t`.
fn random_gram(n: usize, s: usize, master_seed: u64, t: u64) -> Result<GramSubmatrix> {
    let window = Window::steinhaus(n, derive_seed(master_seed, t, Role::Window))?;
    let support = SupportSet::random(n, s, &mut trial_rng(master_seed, t, Role::Support))?;
    gram_submatrix(&GaborOperator::new(window), &support)
}

fn check_sparsity(n: usize, s: usize) -> Result<()> {
    if n == 0 || s == 0 || s > n * n {
        return Err(Error::Domain(format!("need 1 <= S <= n², got n = {n}, S = {s}")));
    }
    Ok(())
}

/// Fraction of trials with `‖Ψ_Λ*Ψ_Λ - I‖ > δ` over random Steinhaus windows
/// and uniformly drawn supports of size `s`.
pub fn conditioning_failure_rate(
    n: usize,
    s: usize,
    delta: f64,
    trials: usize,
    master_seed: u64,
) -> Result<RateEstimate> {
    check_sparsity(n, s)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let flags = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let gram = random_gram(n, s, master_seed, t)?;
            Ok(extremal_eigenvalues(&gram)?.op_norm_h > delta)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(RateEstimate::from_flags(&flags))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub draws: usize,
    pub mean: f64,
    pub std_err: f64,
}

/// Monte-Carlo estimate of `E[Tr H²] = E‖H‖_F²` over random windows and supports.
pub fn mean_trace_h2(n: usize, s: usize, draws: usize, master_seed: u64) -> Result<MomentEstimate> {
    check_sparsity(n, s)?;
    if draws < 2 {
        return Err(Error::Domain("need at least two draws".into()));
    }
    let samples = (0..draws as u64)
        .into_par_iter()
        .map(|t| Ok(random_gram(n, s, master_seed, t)?.deviation().norm_squared()))
        .collect::<Result<Vec<f64>>>()?;
    let d = draws as f64;
    let mean = samples.iter().sum::<f64>() / d;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d - 1.0);
    Ok(MomentEstimate {
        draws,
        mean,
        std_err: (var / d).sqrt(),
    })
}

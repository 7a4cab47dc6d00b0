use nalgebra::DMatrix;

use crate::bp_solver::{basis_pursuit, BPConfig, BPResult};
use crate::error::{check_len, Result};
use crate::tf_core::{tf_shift, GaborOperator, SparseCoeffs, Window, WindowKind};
use crate::{Error, C64};

/// `Γ = Σ_λ x_λ π(λ)`, an operator on `C^n` with sparse spreading coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOperator {
    coeffs: SparseCoeffs,
}

impl ChannelOperator {
    pub fn new(coeffs: SparseCoeffs) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &SparseCoeffs {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.coeffs.n()
    }

    pub fn apply(&self, h: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n(), h.len())?;
        let mut out = vec![C64::default(); h.len()];
        for (&lambda, &x) in self.coeffs.support().indices().iter().zip(self.coeffs.values()) {
            for (o, v) in out.iter_mut().zip(tf_shift(h, lambda)?) {
                *o += x * v;
            }
        }
        Ok(out)
    }

    /// The `n × n` matrix of `Γ`, column `j` being `Γ e_j`.
    pub fn dense_matrix(&self) -> Result<DMatrix<C64>> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![C64::default(); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            m.set_column(j, &nalgebra::DVector::from_vec(self.apply(&e)?));
            e[j] = C64::default();
        }
        Ok(m)
    }
}

/// Outcome of identifying a channel from its response to one probe.
#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    /// Recovered coefficients with entries below `recovery_tol·max|x|` dropped.
    pub estimate: SparseCoeffs,
    /// Raw solver output; `converged == false` marks a partial result.
    pub result: BPResult,
    pub probe: Window,
}

/// Probes `gamma` with one window and recovers its spreading coefficients
/// from `y = Γg = Ψ_g x` by Basis Pursuit.
pub fn identify_channel(
    gamma: &ChannelOperator,
    window_kind: WindowKind,
    seed: u64,
    config: &BPConfig,
) -> Result<Identification> {
    let n = gamma.n();
    let probe = match window_kind {
        WindowKind::Alltop => Window::alltop(n)?,
        WindowKind::Steinhaus => Window::steinhaus(n, seed)?,
        WindowKind::Custom => {
            return Err(Error::InvalidInput(
                "channel probes are alltop or steinhaus windows".into(),
            ))
        }
    };
    let y = gamma.apply(probe.values())?;
    let op = GaborOperator::new(probe.clone());
    let result = basis_pursuit(&op, &y, config)?;
    let peak = result
        .coefficients
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let estimate = result.sparse(n, config.recovery_tol * peak);
    Ok(Identification {
        estimate,
        result,
        probe,
    })
}

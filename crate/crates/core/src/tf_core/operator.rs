use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::tf_core::dft::FourierPlan;
use crate::tf_core::{tf_shift, SparseCoeffs, TFIndex, Window};
use crate::C64;

/// Default cap on `n` for materialising the dense `n × n²` matrix.
pub const DEFAULT_DENSE_CAP: usize = 64;

/// The Gabor synthesis operator `Ψ_g : C^{n²} → C^n`, `x ↦ Σ_λ x_λ π(λ)g`.
///
/// Full-vector applications run as `n` FFTs of length `n`; the column of
/// `λ = (k, l)` is stored at `k·n + l`.
#[derive(Debug, Clone)]
pub struct GaborOperator {
    window: Window,
    plan: FourierPlan,
}

/// Reusable buffers for the fast operator paths.
#[derive(Debug, Clone)]
pub struct Workspace {
    buf: Vec<C64>,
    scratch: Vec<C64>,
}

impl GaborOperator {
    pub fn new(window: Window) -> Self {
        let plan = FourierPlan::new(window.len());
        Self { window, plan }
    }

    pub fn n(&self) -> usize {
        self.window.len()
    }

    /// Number of columns, `n²`.
    pub fn dim(&self) -> usize {
        self.n() * self.n()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            buf: vec![C64::default(); self.dim()],
            scratch: vec![C64::default(); self.plan.scratch_len()],
        }
    }

    /// `ψ_λ = π(λ)g`.
    pub fn column(&self, lambda: TFIndex) -> Vec<C64> {
        tf_shift(self.window.values(), lambda).expect("window is non-empty")
    }

    /// `y = Ψ_g x` for a full coefficient vector of length `n²`.
    pub fn synthesize(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim(), x.len())?;
        let mut y = vec![C64::default(); self.n()];
        self.synthesize_into(x, &mut y, &mut self.workspace());
        Ok(y)
    }

    /// `y = Ψ_g x` for a sparse vector, in `O(S·n)`.
    pub fn synthesize_sparse(&self, x: &SparseCoeffs) -> Result<Vec<C64>> {
        check_len(self.n(), x.n())?;
        let n = self.n();
        let mut y = vec![C64::default(); n];
        for (idx, &c) in x.support().indices().iter().zip(x.values()) {
            self.add_column(*idx, c, &mut y);
        }
        Ok(y)
    }

    /// `y += c · π(λ)g`.
    pub(crate) fn add_column(&self, lambda: TFIndex, c: C64, y: &mut [C64]) {
        let n = self.n();
        let g = self.window.values();
        for (q, yq) in y.iter_mut().enumerate() {
            let phase = crate::tf_core::shift::unit_phase((lambda.l * q) % n, n);
            *yq += c * phase * g[(q + lambda.k) % n];
        }
    }

    /// `Ψ_g* y`: entry `(k, l)` is `⟨y, π(k,l)g⟩ = DFT_l(q ↦ y_q conj(g_{q+k}))`.
    pub fn analyze(&self, y: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n(), y.len())?;
        let mut out = vec![C64::default(); self.dim()];
        self.analyze_into(y, &mut out, &mut self.workspace());
        Ok(out)
    }

    /// Allocation-free `Ψ_g x` into `y`. Lengths are the caller's responsibility.
    pub fn synthesize_into(&self, x: &[C64], y: &mut [C64], ws: &mut Workspace) {
        let n = self.n();
        debug_assert_eq!(x.len(), n * n);
        debug_assert_eq!(y.len(), n);
        ws.buf.copy_from_slice(x);
        self.plan.inverse(&mut ws.buf, &mut ws.scratch);
        y.fill(C64::default());
        let g = self.window.values();
        for (k, row) in ws.buf.chunks_exact(n).enumerate() {
            // g_{(q+k) mod n} split at the wrap point
            let split = n - k;
            for ((yq, u), gq) in y[..split].iter_mut().zip(&row[..split]).zip(&g[k..]) {
                *yq += gq * u;
            }
            for ((yq, u), gq) in y[split..].iter_mut().zip(&row[split..]).zip(&g[..k]) {
                *yq += gq * u;
            }
        }
    }

    /// Allocation-free `Ψ_g* y` into `out` (length `n²`).
    pub fn analyze_into(&self, y: &[C64], out: &mut [C64], ws: &mut Workspace) {
        let n = self.n();
        debug_assert_eq!(y.len(), n);
        debug_assert_eq!(out.len(), n * n);
        let g = self.window.values();
        for (k, row) in out.chunks_exact_mut(n).enumerate() {
            for (q, o) in row.iter_mut().enumerate() {
                let gi = if q + k < n { q + k } else { q + k - n };
                *o = y[q] * g[gi].conj();
            }
        }
        self.plan.forward(out, &mut ws.scratch);
    }

    /// Materialises `Ψ_g` as an `n × n²` matrix; `n` must not exceed [`DEFAULT_DENSE_CAP`].
    pub fn dense_matrix(&self) -> Result<DMatrix<C64>> {
        self.dense_matrix_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn dense_matrix_with_cap(&self, cap: usize) -> Result<DMatrix<C64>> {
        let n = self.n();
        if n > cap {
            return Err(Error::Resource(format!(
                "dense Gabor matrix requested for n = {n}, cap is {cap}"
            )));
        }
        let mut m = DMatrix::zeros(n, n * n);
        for c in 0..n * n {
            let col = self.column(TFIndex::from_column(c, n));
            m.column_mut(c).copy_from_slice(&col);
        }
        Ok(m)
    }
}

//! Time-frequency shifts on `Z_n`, windows, and the Gabor synthesis operator.
//!
//! Conventions used across the crate:
//!
//! * `(T_k h)_q = h_{(k+q) mod n}` and `(M_l h)_q = e^{2πi l q/n} h_q`;
//!   the time-frequency shift is `π(k, l) = M_l T_k`.
//! * Inner products are linear in the first argument:
//!   `⟨u, v⟩ = Σ_q u_q conj(v_q)`.
//! * The forward DFT is unnormalised, `DFT_l(v) = Σ_q v_q e^{-2πi l q/n}`.
//! * Column `(k, l)` of `Ψ_g` sits at index `k·n + l`.

pub mod dft;
mod index;
mod operator;
mod shift;
mod window;

pub use index::{sign_vector, SparseCoeffs, SupportSet, TFIndex};
pub use operator::{GaborOperator, Workspace, DEFAULT_DENSE_CAP};
pub use shift::{inner, modulate, norm2, tf_shift, translate};
pub use window::{is_prime, Window, WindowKind};

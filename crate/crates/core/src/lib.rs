//! Sparse recovery of time-frequency representations.
//!
//! The crate is organised in five layers:
//!
//! * [`tf_core`]: cyclic translations and modulations on `Z_n`, the Alltop and
//!   Steinhaus windows, and the Gabor synthesis operator `Ψ_g : C^{n²} → C^n`
//!   with dense and FFT-backed application paths.
//! * [`gram_analysis`]: coherence, Gram submatrices `Ψ_Λ*Ψ_Λ`, Jacobi
//!   eigenvalues and Monte-Carlo conditioning experiments.
//! * [`bounds`]: associated Stirling numbers, the moment functions `G_{2m}`
//!   and evaluators for the recovery and conditioning probability bounds.
//! * [`bp_solver`]: Basis Pursuit by primal-dual splitting, dual certificates
//!   and a brute-force `ℓ0` oracle.
//! * [`harness`]: seeded experiments, channel identification, CSV/JSON output
//!   and the command line front end.

pub mod bounds;
pub mod bp_solver;
pub mod error;
pub mod gram_analysis;
pub mod harness;
pub mod rng;
pub mod stats;
pub mod tf_core;

pub use error::{Error, Result};

/// Double precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;

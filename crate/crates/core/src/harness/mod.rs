//! Seeded experiments, channel identification and result persistence.
//!
//! Every experiment is a pure function of its [`ExperimentSpec`]. Trials draw
//! from streams derived from the master seed, the sparsity level and the trial
//! index, so results do not depend on the number of worker threads.

pub mod channel;
pub mod cli;
pub mod experiments;
pub mod io;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bp_solver::BPConfig;
use crate::error::{Error, Result};
use crate::tf_core::{SupportSet, WindowKind};

pub use channel::{identify_channel, ChannelOperator, Identification};
pub use experiments::{
    draw_instance, grid_seed, run_conditioning, run_identification, run_phase_transition,
    run_random_phase, run_trial, tabulate_bounds, BoundsRow, ConditioningRow, IdentifyReport,
    PhaseRow, PhaseTransition, RandomPhaseReport, TrialRecord,
};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "GABORCS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PhaseTransition,
    RandomPhase,
    Conditioning,
    BoundsTable,
    Identify,
    Coherence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Distribution of nonzero coefficient magnitudes; phases are always uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitudes {
    #[default]
    Unit,
    /// Standard complex Gaussian entries.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n: usize,
    pub window_kind: WindowKind,
    pub sparsity_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub solver_config: BPConfig,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub magnitudes: Magnitudes,
    /// Support used by every random-phase trial instead of a fresh draw.
    pub fixed_support: Option<SupportSet>,
    /// Deviation threshold for conditioning experiments and bounds.
    pub delta: f64,
    /// Coherence exponent of the random-phase bound; must exceed 8.
    pub sigma: f64,
    /// Base of the certificate sum in the deterministic bound.
    pub beta: f64,
    /// Largest order searched when minimising the deterministic bound.
    pub m_max: usize,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, n: usize) -> Self {
        Self {
            kind,
            n,
            window_kind: WindowKind::Steinhaus,
            sparsity_grid: Vec::new(),
            trials: 100,
            master_seed: 0,
            solver_config: BPConfig::for_dimension(n.max(1)),
            output_path: None,
            output_format: OutputFormat::Csv,
            magnitudes: Magnitudes::Unit,
            fixed_support: None,
            delta: 0.5,
            sigma: 9.0,
            beta: 0.47,
            m_max: 40,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be >= 1".into()));
        }
        let dim = self.n * self.n;
        if let Some(&s) = self.sparsity_grid.iter().find(|&&s| s > dim) {
            return Err(Error::Domain(format!("sparsity {s} exceeds n² = {dim}")));
        }
        if self.kind == ExperimentKind::RandomPhase && !self.n.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "the random-phase model needs even n, got {}",
                self.n
            )));
        }
        if let Some(support) = &self.fixed_support {
            if support.n() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: support.n(),
                });
            }
        }
        self.solver_config.validate(self.n)
    }
}

/// Caps the global worker pool at `GABORCS_THREADS` when set. Later calls,
/// or calls after the pool is already running, leave it unchanged.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidInput(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

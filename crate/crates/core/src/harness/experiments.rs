use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::{identify_channel, ChannelOperator};
use super::{ExperimentKind, ExperimentSpec, Magnitudes};
use crate::bounds::{
    coherence_guarantee, coherence_sparsity_threshold, conditioning_failure_bound,
    minimize_deterministic_failure_bound, random_phase_failure_bound, recovery_constants,
    stirling_table, table_order_for, StirlingTable,
};
use crate::bp_solver::{basis_pursuit, dual_certificate, relative_error};
use crate::error::{Error, Result};
use crate::gram_analysis::{conditioning_failure_rate, RateEstimate};
use crate::rng::{derive_seed, trial_rng, Role};
use crate::stats::{wilson_interval, Z_95};
use crate::tf_core::{GaborOperator, SparseCoeffs, SupportSet, Window, WindowKind};
use crate::C64;

/// Stirling table order used for the Markov part of the conditioning bound.
const CONDITIONING_TABLE_ORDER: usize = 120;

/// Master seed of the sub-experiment at sparsity `s`.
pub fn grid_seed(master_seed: u64, s: usize) -> u64 {
    derive_seed(master_seed, s as u64, Role::Grid)
}

/// One Basis Pursuit trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    /// Grid seed of the trial's sparsity level; with `trial_index` it fixes every draw.
    pub seed_used: u64,
    #[serde(rename = "S")]
    pub s: usize,
    pub success: bool,
    pub relative_error: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Largest off-support certificate magnitude for the true support and signs.
    pub certificate_max: Option<f64>,
}

/// Window and `s`-sparse coefficients of trial `trial` under `seed`.
pub fn draw_instance(
    n: usize,
    s: usize,
    window_kind: WindowKind,
    magnitudes: Magnitudes,
    fixed_support: Option<&SupportSet>,
    seed: u64,
    trial: u64,
) -> Result<(Window, SparseCoeffs)> {
    let window = match window_kind {
        WindowKind::Alltop => Window::alltop(n)?,
        WindowKind::Steinhaus => Window::steinhaus(n, derive_seed(seed, trial, Role::Window))?,
        WindowKind::Custom => {
            return Err(Error::InvalidInput(
                "experiments draw alltop or steinhaus windows".into(),
            ))
        }
    };
    let support = match fixed_support {
        Some(support) => support.clone(),
        None => SupportSet::random(n, s, &mut trial_rng(seed, trial, Role::Support))?,
    };
    let mut rng = trial_rng(seed, trial, Role::Coefficients);
    let values = (0..support.len())
        .map(|_| match magnitudes {
            Magnitudes::Unit => C64::from_polar(1.0, TAU * rng.random::<f64>()),
            Magnitudes::Gaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        })
        .collect();
    Ok((window, SparseCoeffs::new(support, values)?))
}

/// Draws trial `trial` of sparsity `s` under `seed`, runs Basis Pursuit and
/// checks the recovery. Uses the spec's dimension, window, magnitudes, fixed
/// support and solver settings.
pub fn run_trial(spec: &ExperimentSpec, s: usize, seed: u64, trial: u64) -> Result<TrialRecord> {
    let config = &spec.solver_config;
    let (window, truth) = draw_instance(
        spec.n,
        s,
        spec.window_kind,
        spec.magnitudes,
        spec.fixed_support.as_ref(),
        seed,
        trial,
    )?;
    let op = GaborOperator::new(window);
    let y = op.synthesize_sparse(&truth)?;
    let result = basis_pursuit(&op, &y, config)?;
    let relative_error = relative_error(&truth, &result.coefficients)?;
    let certificate_max = if truth.sparsity() == 0 {
        None
    } else {
        dual_certificate(&op, truth.support(), &truth.signs())
            .ok()
            .map(|c| c.max_offsupport_magnitude)
    };
    Ok(TrialRecord {
        trial_index: trial,
        seed_used: seed,
        s: truth.sparsity(),
        success: relative_error <= config.recovery_tol,
        relative_error,
        residual: result.residual,
        iterations: result.iterations,
        certificate_max,
    })
}

fn run_grid(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    let jobs: Vec<(usize, u64)> = spec
        .sparsity_grid
        .iter()
        .flat_map(|&s| (0..spec.trials as u64).map(move |t| (s, t)))
        .collect();
    let mut records = jobs
        .into_par_iter()
        .map(|(s, t)| run_trial(spec, s, grid_seed(spec.master_seed, s), t))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.s, r.trial_index));
    Ok(records)
}

fn expect_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidInput(format!(
            "expected a {kind:?} spec, got {:?}",
            spec.kind
        )));
    }
    spec.validate()
}

/// Aggregate success of one sparsity level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub n: usize,
    pub window: WindowKind,
    #[serde(rename = "S")]
    pub s: usize,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransition {
    pub rows: Vec<PhaseRow>,
    pub records: Vec<TrialRecord>,
}

/// Success rate of Basis Pursuit for each sparsity in the grid, with unit
/// (or Gaussian) magnitudes, uniform phases, uniform supports and a fresh
/// window per trial.
pub fn run_phase_transition(spec: &ExperimentSpec) -> Result<PhaseTransition> {
    expect_kind(spec, ExperimentKind::PhaseTransition)?;
    let records = run_grid(spec)?;
    let rows = spec
        .sparsity_grid
        .iter()
        .map(|&s| {
            let successes = records
                .iter()
                .filter(|r| r.s == s && r.success)
                .count();
            let (wilson_lo, wilson_hi) = wilson_interval(successes, spec.trials, Z_95);
            PhaseRow {
                n: spec.n,
                window: spec.window_kind,
                s,
                trials: spec.trials,
                successes,
                rate: successes as f64 / spec.trials as f64,
                wilson_lo,
                wilson_hi,
                seed: spec.master_seed,
            }
        })
        .collect();
    Ok(PhaseTransition { rows, records })
}

/// Failure statistics of the random-phase model next to its closed-form bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomPhaseReport {
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub sigma: f64,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// Raw closed-form bound; values above one are vacuous.
    pub bound: f64,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
}

/// Trials with a fixed or uniformly drawn support, unit magnitudes with
/// fresh uniform phases and a fresh Steinhaus window. The grid must hold a
/// single sparsity level, or be empty when a fixed support is given.
pub fn run_random_phase(spec: &ExperimentSpec) -> Result<RandomPhaseReport> {
    expect_kind(spec, ExperimentKind::RandomPhase)?;
    let s = match (&spec.fixed_support, spec.sparsity_grid.as_slice()) {
        (Some(support), []) => support.len(),
        (Some(support), [s]) if *s == support.len() => *s,
        (None, [s]) => *s,
        _ => {
            return Err(Error::InvalidInput(
                "random-phase runs take one sparsity level matching any fixed support".into(),
            ))
        }
    };
    let bound = random_phase_failure_bound(spec.n, s, spec.sigma)?;
    let grid = ExperimentSpec {
        sparsity_grid: vec![s],
        window_kind: WindowKind::Steinhaus,
        magnitudes: Magnitudes::Unit,
        ..spec.clone()
    };
    let records = run_grid(&grid)?;
    let failures = records.iter().filter(|r| !r.success).count();
    let (wilson_lo, wilson_hi) = wilson_interval(failures, spec.trials, Z_95);
    Ok(RandomPhaseReport {
        n: spec.n,
        s,
        sigma: spec.sigma,
        trials: spec.trials,
        failures,
        failure_rate: failures as f64 / spec.trials as f64,
        wilson_lo,
        wilson_hi,
        bound: bound.value,
        seed: spec.master_seed,
        records,
    })
}

/// Monte-Carlo conditioning failure rate with the closed-form bound alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningRow {
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub delta: f64,
    pub trials: usize,
    pub failures: usize,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub bound: f64,
    pub markov_bound: f64,
    pub seed: u64,
}

/// Rate of `‖Ψ_Λ*Ψ_Λ − I‖ > δ` for each nonzero sparsity in the grid.
pub fn run_conditioning(spec: &ExperimentSpec) -> Result<Vec<ConditioningRow>> {
    expect_kind(spec, ExperimentKind::Conditioning)?;
    let table = stirling_table(CONDITIONING_TABLE_ORDER);
    spec.sparsity_grid
        .iter()
        .map(|&s| {
            let RateEstimate {
                events,
                rate,
                wilson_lo,
                wilson_hi,
                ..
            } = conditioning_failure_rate(
                spec.n,
                s,
                spec.delta,
                spec.trials,
                grid_seed(spec.master_seed, s),
            )?;
            let bound = conditioning_failure_bound(spec.n, s, spec.delta, &table)?;
            Ok(ConditioningRow {
                n: spec.n,
                s,
                delta: spec.delta,
                trials: spec.trials,
                failures: events,
                rate,
                wilson_lo,
                wilson_hi,
                bound: bound.value,
                markov_bound: bound.term("markov_min").unwrap_or(f64::NAN),
                seed: spec.master_seed,
            })
        })
        .collect()
}

/// Every bound evaluator at one `(n, S)`. Probabilities are raw values and
/// may exceed one; the matching flag says whether the bound is informative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    /// Largest sparsity with a coherence guarantee for a random window, at `t = 1`.
    pub sparsity_threshold: Option<f64>,
    /// Coherence guarantee at the ideal coherence `1/√n`.
    pub coherence_guarantee: bool,
    pub conditioning_bound: f64,
    pub conditioning_feasible: bool,
    pub random_phase_bound: Option<f64>,
    pub random_phase_feasible: Option<bool>,
    pub deterministic_bound: f64,
    pub deterministic_feasible: bool,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
}

/// One row per nonzero sparsity of the grid.
pub fn tabulate_bounds(spec: &ExperimentSpec) -> Result<Vec<BoundsRow>> {
    expect_kind(spec, ExperimentKind::BoundsTable)?;
    let table = stirling_table(table_order_for(spec.m_max).max(CONDITIONING_TABLE_ORDER));
    let (c1, c2, c3) = recovery_constants();
    let n = spec.n;
    let even = n.is_multiple_of(2);
    spec.sparsity_grid
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let conditioning = conditioning_failure_bound(n, s, spec.delta, &table)?;
            let random_phase = if even && s < n * n {
                Some(random_phase_failure_bound(n, s, spec.sigma)?)
            } else {
                None
            };
            let deterministic = bounds_minimum(n, s, spec, &table)?;
            Ok(BoundsRow {
                n,
                s,
                sparsity_threshold: if even {
                    Some(coherence_sparsity_threshold(n, 1.0)?)
                } else {
                    None
                },
                coherence_guarantee: coherence_guarantee(s, 1.0 / (n as f64).sqrt())?,
                conditioning_bound: conditioning.value,
                conditioning_feasible: conditioning.feasible,
                random_phase_bound: random_phase.as_ref().map(|r| r.value),
                random_phase_feasible: random_phase.as_ref().map(|r| r.value < 1.0),
                deterministic_bound: deterministic.0,
                deterministic_feasible: deterministic.1,
                c1,
                c2,
                c3,
            })
        })
        .collect()
}

fn bounds_minimum(
    n: usize,
    s: usize,
    spec: &ExperimentSpec,
    table: &StirlingTable,
) -> Result<(f64, bool)> {
    let r = minimize_deterministic_failure_bound(n, s, spec.beta, spec.m_max, table)?;
    Ok((r.value, r.feasible && r.value < 1.0))
}

/// Channel identification trials at a single sparsity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyReport {
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub window: WindowKind,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
}

/// Random `S`-sparse channels, each identified from its response to one probe.
pub fn run_identification(spec: &ExperimentSpec) -> Result<IdentifyReport> {
    expect_kind(spec, ExperimentKind::Identify)?;
    let [s] = spec.sparsity_grid.as_slice() else {
        return Err(Error::InvalidInput(
            "identification runs take exactly one sparsity level".into(),
        ));
    };
    let s = *s;
    let seed = grid_seed(spec.master_seed, s);
    let records = (0..spec.trials as u64)
        .into_par_iter()
        .map(|t| {
            // the window drawn here is unused; the probe comes from its own stream
            let (_, truth) = draw_instance(
                spec.n,
                s,
                WindowKind::Steinhaus,
                spec.magnitudes,
                None,
                seed,
                t,
            )?;
            let gamma = ChannelOperator::new(truth.clone());
            let probe_seed = derive_seed(seed, t, Role::Probe);
            let id = identify_channel(&gamma, spec.window_kind, probe_seed, &spec.solver_config)?;
            let err = relative_error(&truth, &id.result.coefficients)?;
            Ok(TrialRecord {
                trial_index: t,
                seed_used: seed,
                s,
                success: err <= spec.solver_config.recovery_tol,
                relative_error: err,
                residual: id.result.residual,
                iterations: id.result.iterations,
                certificate_max: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = records.iter().filter(|r| r.success).count();
    let (wilson_lo, wilson_hi) = wilson_interval(successes, spec.trials, Z_95);
    Ok(IdentifyReport {
        n: spec.n,
        s,
        window: spec.window_kind,
        trials: spec.trials,
        successes,
        rate: successes as f64 / spec.trials as f64,
        wilson_lo,
        wilson_hi,
        seed: spec.master_seed,
        records,
    })
}

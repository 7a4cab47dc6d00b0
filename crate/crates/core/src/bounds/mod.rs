//! Exact combinatorics and closed-form bound evaluators.
//!
//! All logarithms are natural. Probability bounds are returned raw (they can
//! exceed one when vacuous); [`BoundReport::presented`] clamps for display.

mod moments;
mod stirling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use moments::{g2m, g2m_exact, g_estimate, ln_g2m, ln_moment_bound, moment_bound, EXACT_G_MAX_ORDER};
pub use stirling::{stirling_table, StirlingTable, EXACT_LIMIT};

use moments::ln_g2m as lng;
use stirling::log_add;

/// `e²/(4(e−1)) ≈ 1.075`, the constant in the conditioning tail bound.
pub fn conditioning_constant() -> f64 {
    let e = std::f64::consts::E;
    e * e / (4.0 * (e - 1.0))
}

/// `c = ln(e²/(4(e−1))) ≈ 0.0724`.
pub fn conditioning_log_constant() -> f64 {
    conditioning_constant().ln()
}

/// Parameters shared by the bound evaluators. Only the fields an evaluator
/// reads need to be set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub s: usize,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_prime: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub big_m: Option<usize>,
    pub m: Option<usize>,
    pub l: Vec<usize>,
}

fn open_unit(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

impl BoundParams {
    pub fn new(n: usize, s: usize) -> Self {
        Self {
            n,
            s,
            ..Self::default()
        }
    }

    /// Checks every field that is present against its admissible range.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("kappa", self.kappa),
            ("kappa_prime", self.kappa_prime),
            ("beta", self.beta),
        ] {
            if let Some(v) = v {
                open_unit(name, v)?;
            }
        }
        if let Some(sigma) = self.sigma {
            if sigma <= 8.0 {
                return Err(Error::Domain(format!("sigma must exceed 8, got {sigma}")));
            }
        }
        if let Some(big_m) = self.big_m {
            if big_m < 6 {
                return Err(Error::Domain(format!("M must be at least 6, got {big_m}")));
            }
        }
        if self.l.contains(&0) {
            return Err(Error::Domain("every L_t must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    pub name: String,
    pub value: f64,
}

/// An evaluated bound with its additive breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub terms: Vec<BoundTerm>,
    pub params_used: BoundParams,
    pub feasible: bool,
}

impl BoundReport {
    fn new(value: f64, terms: &[(&str, f64)], params_used: BoundParams, feasible: bool) -> Self {
        Self {
            value,
            terms: terms
                .iter()
                .map(|(name, value)| BoundTerm {
                    name: (*name).to_string(),
                    value: *value,
                })
                .collect(),
            params_used,
            feasible,
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    /// The value clamped to `[0, 1]` for presentation as a probability.
    pub fn presented(&self) -> f64 {
        if self.value.is_nan() {
            1.0
        } else {
            self.value.clamp(0.0, 1.0)
        }
    }
}

fn check_sizes(n: usize, s: usize) -> Result<()> {
    if n < 2 || s == 0 || s > n * n {
        return Err(Error::Domain(format!("need n >= 2 and 1 <= S <= n², got n = {n}, S = {s}")));
    }
    Ok(())
}

/// Probability bound for `‖Ψ_Λ*Ψ_Λ − I‖ > δ` with a Steinhaus window:
/// `e²/(4(e−1)) · S · exp(−δ²n/(4eS))`.
///
/// Also reports the Markov bound `min_m δ^{-2m} S G_{2m}(n/S)` over all
/// orders the table supports (`markov_min`, attained at `markov_order = 2m`).
/// `feasible` tells whether the sparsity condition can be met with some
/// failure probability `ε < 1`, i.e. whether the closed form is below one.
pub fn conditioning_failure_bound(n: usize, s: usize, delta: f64, table: &StirlingTable) -> Result<BoundReport> {
    check_sizes(n, s)?;
    open_unit("delta", delta)?;
    let (nf, sf) = (n as f64, s as f64);
    let e = std::f64::consts::E;
    let closed = conditioning_constant() * sf * (-delta * delta * nf / (4.0 * e * sf)).exp();

    let mut best = (f64::INFINITY, 0usize);
    for m in 1..=table.max_m() / 2 {
        let ln_v = -2.0 * m as f64 * delta.ln() + ln_moment_bound(n, s, 2 * m, table)?;
        if ln_v < best.0 {
            best = (ln_v, 2 * m);
        }
    }
    let markov = best.0.exp();
    let params = BoundParams {
        delta: Some(delta),
        ..BoundParams::new(n, s)
    };
    Ok(BoundReport::new(
        closed,
        &[
            ("closed_form", closed),
            ("markov_min", markov),
            ("markov_order", best.1 as f64),
        ],
        params,
        closed < 1.0,
    ))
}

/// Sparsity condition `S ≤ δ²n / (4e(ln(S/ε) + c))` under which the
/// conditioning bound holds with probability at least `1 − ε`.
pub fn conditioning_condition(n: usize, s: usize, delta: f64, epsilon: f64) -> Result<bool> {
    check_sizes(n, s)?;
    open_unit("delta", delta)?;
    open_unit("epsilon", epsilon)?;
    let e = std::f64::consts::E;
    let rhs = delta * delta * n as f64
        / (4.0 * e * ((s as f64 / epsilon).ln() + conditioning_log_constant()));
    Ok(s as f64 <= rhs)
}

/// Worst-case coherence guarantee: Basis Pursuit recovers every `S`-sparse
/// vector when `S < (1 + 1/μ)/2`. For `μ = 1/√n` this reads `S < (√n + 1)/2`.
pub fn coherence_guarantee(s: usize, mu: f64) -> Result<bool> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!("coherence must lie in (0, 1], got {mu}")));
    }
    Ok((s as f64) < (1.0 + 1.0 / mu) / 2.0)
}

/// Largest sparsity with a coherence-based guarantee for the random window:
/// `¼ √(n / (2 ln n + ln 4 + t)) + ½`, holding with probability `1 − e^{−t}`.
pub fn coherence_sparsity_threshold(n: usize, t: f64) -> Result<f64> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Domain(format!("n must be even, got {n}")));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let nf = n as f64;
    Ok(0.25 * (nf / (2.0 * nf.ln() + 4f64.ln() + t)).sqrt() + 0.5)
}

/// Failure probability of Basis Pursuit for random phases on a fixed support
/// with a Steinhaus window:
///
/// ```text
/// 2(n² − S) exp(−n/(8σS ln n)) + C S exp(−n/(16eS)) + 4 n^{−(σ/4 − 2)}
/// ```
pub fn random_phase_failure_bound(n: usize, s: usize, sigma: f64) -> Result<BoundReport> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Domain(format!("n must be even, got {n}")));
    }
    if s == 0 || s >= n * n {
        return Err(Error::Domain(format!("need 1 <= S < n², got S = {s}")));
    }
    if sigma <= 8.0 {
        return Err(Error::Domain(format!("sigma must exceed 8, got {sigma}")));
    }
    let (nf, sf) = (n as f64, s as f64);
    let e = std::f64::consts::E;
    let support = 2.0 * (nf * nf - sf) * (-nf / (8.0 * sigma * sf * nf.ln())).exp();
    let conditioning = conditioning_constant() * sf * (-nf / (16.0 * e * sf)).exp();
    let coherence = 4.0 * nf.powf(-(sigma / 4.0 - 2.0));
    let value = support + conditioning + coherence;
    let params = BoundParams {
        sigma: Some(sigma),
        delta: Some(0.5),
        kappa: Some(0.5),
        kappa_prime: Some(0.5),
        alpha: Some((sigma * nf.ln()).sqrt()),
        ..BoundParams::new(n, s)
    };
    Ok(BoundReport::new(
        value,
        &[
            ("support_term", support),
            ("conditioning_term", conditioning),
            ("coherence_term", coherence),
        ],
        params,
        value < 1.0,
    ))
}

/// `L_t = m/t` rounded to the nearest integer, ties rounded up, `t = 1..m`.
pub fn rounded_l(m: usize) -> Vec<usize> {
    (1..=m).map(|t| (2 * m + t) / (2 * t)).collect()
}

/// `a = Σ_t β^{m/L_t}`.
pub fn certificate_sum(beta: f64, m: usize, l: &[usize]) -> f64 {
    l.iter().map(|&lt| beta.powf(m as f64 / lt as f64)).sum()
}

/// Largest `κ` satisfying `κ/(1−κ) ≤ ((1−a)/(1+a)) S^{−3/2}`, i.e. the equality case.
pub fn equality_kappa(a: f64, s: usize) -> f64 {
    let r = (1.0 - a) / (1.0 + a) * (s as f64).powf(-1.5);
    r / (1.0 + r)
}

fn required<T: Copy>(name: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| Error::InvalidInput(format!("parameter {name} is required")))
}

/// Admissibility of `(m, L, β, κ)` for the deterministic recovery bound:
/// `a = Σ_t β^{m/L_t} < 1` and `κ/(1−κ) ≤ ((1−a)/(1+a)) S^{−3/2}`.
/// The report's value is `a`.
pub fn certificate_conditions(params: &BoundParams) -> Result<BoundReport> {
    params.validate()?;
    let m = required("m", params.m)?;
    let beta = required("beta", params.beta)?;
    let kappa = required("kappa", params.kappa)?;
    if params.s == 0 {
        return Err(Error::Domain("S must be >= 1".into()));
    }
    if params.l.len() != m {
        return Err(Error::InvalidInput(format!(
            "expected {m} values L_t, got {}",
            params.l.len()
        )));
    }
    let a = certificate_sum(beta, m, &params.l);
    let rhs = (1.0 - a) / (1.0 + a) * (params.s as f64).powf(-1.5);
    let lhs = kappa / (1.0 - kappa);
    let feasible = a < 1.0 && lhs <= rhs * (1.0 + 1e-12);
    Ok(BoundReport::new(
        a,
        &[("a", a), ("kappa_ratio", lhs), ("kappa_ratio_max", rhs)],
        params.clone(),
        feasible,
    ))
}

/// Failure probability for deterministic coefficients:
///
/// ```text
/// κ^{−2} S G_{2m}(n/S) + n² β^{−2m} Σ_t G_{2tL_t}(n/S)
/// ```
///
/// Infeasible parameters give `feasible = false` with value 1. The value may
/// be `+∞` when it exceeds the floating-point range.
pub fn deterministic_failure_bound(params: &BoundParams, table: &StirlingTable) -> Result<BoundReport> {
    let cond = certificate_conditions(params)?;
    if !cond.feasible {
        return Ok(BoundReport::new(1.0, &[("a", cond.value)], params.clone(), false));
    }
    check_sizes(params.n, params.s)?;
    let m = required("m", params.m)?;
    let beta = required("beta", params.beta)?;
    let kappa = required("kappa", params.kappa)?;
    let order = params
        .l
        .iter()
        .enumerate()
        .map(|(i, &lt)| (i + 1) * lt)
        .max()
        .unwrap_or(0)
        .max(m);
    if 2 * order > table.max_m() {
        return Err(Error::Domain(format!(
            "need a Stirling table up to {}, have {}",
            2 * order,
            table.max_m()
        )));
    }
    let (ln_frob, ln_off) = ln_deterministic_terms(params.n, params.s, m, beta, kappa, &params.l, table)?;
    let (frob, off) = (ln_frob.exp(), ln_off.exp());
    Ok(BoundReport::new(
        log_add(ln_frob, ln_off).exp(),
        &[("a", cond.value), ("frobenius_term", frob), ("offsupport_term", off)],
        params.clone(),
        true,
    ))
}

fn ln_deterministic_terms(
    n: usize,
    s: usize,
    m: usize,
    beta: f64,
    kappa: f64,
    l: &[usize],
    table: &StirlingTable,
) -> Result<(f64, f64)> {
    let z = n as f64 / s as f64;
    let ln_frob = -2.0 * kappa.ln() + (s as f64).ln() + lng(z, m, table)?;
    let mut ln_sum = f64::NEG_INFINITY;
    for (i, &lt) in l.iter().enumerate() {
        ln_sum = log_add(ln_sum, lng(z, (i + 1) * lt, table)?);
    }
    let ln_off = 2.0 * (n as f64).ln() - 2.0 * m as f64 * beta.ln() + ln_sum;
    Ok((ln_frob, ln_off))
}

/// Stirling table size needed to minimise over `m ≤ m_max` with `L_t = round(m/t)`.
pub fn table_order_for(m_max: usize) -> usize {
    2 * (4 * m_max).div_ceil(3) + 2
}

/// Minimises the deterministic bound over `m = 1..=m_max` with
/// `L_t = round(m/t)` and `κ` at the equality case. Orders with `a ≥ 1` are skipped.
pub fn minimize_deterministic_failure_bound(
    n: usize,
    s: usize,
    beta: f64,
    m_max: usize,
    table: &StirlingTable,
) -> Result<BoundReport> {
    check_sizes(n, s)?;
    open_unit("beta", beta)?;
    let mut best: Option<BoundReport> = None;
    for m in 1..=m_max {
        let l = rounded_l(m);
        let a = certificate_sum(beta, m, &l);
        if a >= 1.0 {
            continue;
        }
        let params = BoundParams {
            beta: Some(beta),
            kappa: Some(equality_kappa(a, s)),
            m: Some(m),
            l,
            ..BoundParams::new(n, s)
        };
        let report = deterministic_failure_bound(&params, table)?;
        if best.as_ref().is_none_or(|b| report.value < b.value) {
            best = Some(report);
        }
    }
    Ok(best.unwrap_or_else(|| {
        BoundReport::new(
            1.0,
            &[],
            BoundParams {
                beta: Some(beta),
                ..BoundParams::new(n, s)
            },
            false,
        )
    }))
}

/// `Q(β, M) = (3M/(16(M+1))) β³e^{−3/2} (1 − ln(M (1 − β³e^{−3/2})^{−1}/2)/M)`.
pub fn q_factor(beta: f64, big_m: usize) -> f64 {
    let mf = big_m as f64;
    let alpha = beta.powi(3) * (-1.5f64).exp();
    3.0 * mf / (16.0 * (mf + 1.0)) * alpha * (1.0 - (mf / (1.0 - alpha) / 2.0).ln() / mf)
}

/// The constants `(C1, C2, C3)` of the sufficient condition
/// `n ≥ max{C1 S ln(n²/ε), C2 S (ln(S⁴/ε) + C3)}` for `β = 0.47`, `a = 0.957`.
pub fn recovery_constants() -> (f64, f64, f64) {
    const BETA: f64 = 0.47;
    const A: f64 = 0.957;
    let c1 = 1.0 / q_factor(BETA, 20);
    let big_m = 21.0;
    let inv_alpha = BETA.powi(-3) * 1.5f64.exp();
    let c2 = 16.0 * (big_m + 1.0) * inv_alpha / (3.0 * big_m * inv_alpha.ln());
    let c3 = (2.0 * (1.0 + A).powi(2) / (1.0 - A).powi(2) / (1.0 - 1.0 / inv_alpha)).ln();
    (c1, c2, c3)
}

/// `P(μ > α/√n) ≤ 2(1−κ')^{−1} n(n−1) exp(−κ'α²/2)` for a Steinhaus window.
pub fn coherence_tail_bound(n: usize, alpha: f64, kappa_prime: f64) -> Result<f64> {
    open_unit("kappa_prime", kappa_prime)?;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let nf = n as f64;
    Ok(2.0 / (1.0 - kappa_prime) * nf * (nf - 1.0) * (-kappa_prime * alpha * alpha / 2.0).exp())
}

/// Bernstein tail `P(|Σ ε_j a_j| ≥ u‖a‖₂) ≤ e^{−κu²}/(1−κ)` for Steinhaus `ε_j`.
pub fn bernstein_tail(u: f64, kappa: f64) -> Result<f64> {
    open_unit("kappa", kappa)?;
    if u.is_nan() || u < 0.0 {
        return Err(Error::Domain(format!("u must be non-negative, got {u}")));
    }
    Ok((-kappa * u * u).exp() / (1.0 - kappa))
}

#[cfg(test)]
mod tests;

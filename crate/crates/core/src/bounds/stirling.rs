//! Associated Stirling numbers of the first kind, `d₂(m, s)`: the number of
//! permutations of `m` elements with exactly `s` cycles, all of length at
//! least two.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Rows up to this order are kept as exact integers.
pub const EXACT_LIMIT: usize = 200;

/// Triangular table of `d₂(m, s)` for `0 ≤ s ≤ ⌊m/2⌋`, `m ≤ max_m`.
///
/// Rows up to [`EXACT_LIMIT`] are exact; logarithms are carried for every row
/// by running the same recursion in the log domain.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    max_m: usize,
    exact: Vec<Vec<BigUint>>,
    ln: Vec<Vec<f64>>,
}

impl StirlingTable {
    /// Builds the table from `d₂(0,0) = 1`, `d₂(m,0) = 0` for `m ≥ 1` and
    /// `d₂(m+1, s) = m (d₂(m, s) + d₂(m−1, s−1))`.
    pub fn new(max_m: usize) -> Self {
        let exact_rows = max_m.min(EXACT_LIMIT);
        let mut exact: Vec<Vec<BigUint>> = Vec::with_capacity(exact_rows + 1);
        exact.push(vec![BigUint::from(1u32)]);
        for m in 0..exact_rows {
            let width = m.div_ceil(2) + 1;
            let row: Vec<BigUint> = (0..width)
                .map(|s| {
                    let a = exact[m].get(s).cloned().unwrap_or_default();
                    let b = match (m, s) {
                        (0, _) | (_, 0) => BigUint::zero(),
                        _ => exact[m - 1].get(s - 1).cloned().unwrap_or_default(),
                    };
                    (a + b) * BigUint::from(m)
                })
                .collect();
            exact.push(row);
        }

        let mut ln = Self::ln_recursive(max_m);
        // exact rows override the recursion with correctly rounded logarithms
        for (m, row) in exact.iter().enumerate() {
            for (s, v) in row.iter().enumerate() {
                ln[m][s] = ln_biguint(v);
            }
        }
        Self { max_m, exact, ln }
    }

    pub fn max_m(&self) -> usize {
        self.max_m
    }

    /// Largest order stored exactly.
    pub fn exact_max_m(&self) -> usize {
        self.exact.len() - 1
    }

    /// `d₂(m, s)` when `m` is within the exact part, `None` otherwise.
    pub fn get(&self, m: usize, s: usize) -> Option<BigUint> {
        let row = self.exact.get(m)?;
        Some(row.get(s).cloned().unwrap_or_default())
    }

    /// `ln d₂(m, s)`, `-∞` for zero entries; `None` beyond `max_m`.
    pub fn ln(&self, m: usize, s: usize) -> Option<f64> {
        let row = self.ln.get(m)?;
        Some(row.get(s).copied().unwrap_or(f64::NEG_INFINITY))
    }

    /// The log-domain recursion alone, without the exact override; used to
    /// check both paths against each other.
    pub fn ln_recursive(max_m: usize) -> Vec<Vec<f64>> {
        let mut ln: Vec<Vec<f64>> = vec![vec![0.0]];
        for m in 0..max_m {
            let width = m.div_ceil(2) + 1;
            let ln_m = (m as f64).ln();
            let row = (0..width)
                .map(|s| {
                    let a = ln[m].get(s).copied().unwrap_or(f64::NEG_INFINITY);
                    let b = if m == 0 || s == 0 {
                        f64::NEG_INFINITY
                    } else {
                        ln[m - 1].get(s - 1).copied().unwrap_or(f64::NEG_INFINITY)
                    };
                    ln_m + log_add(a, b)
                })
                .collect();
            ln.push(row);
        }
        ln
    }
}

pub fn stirling_table(max_m: usize) -> StirlingTable {
    StirlingTable::new(max_m)
}

/// `ln(e^a + e^b)`.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Natural logarithm of a big integer, accurate to double precision.
pub(crate) fn ln_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts permutations of `m` elements by cycle count, keeping only those
    /// without fixed points.
    fn brute_force(m: usize) -> Vec<u64> {
        let mut counts = vec![0u64; m / 2 + 1];
        let mut perm: Vec<usize> = (0..m).collect();
        // Heap's algorithm
        let mut c = vec![0usize; m];
        let mut record = |p: &[usize]| {
            let mut seen = vec![false; p.len()];
            let mut cycles = 0;
            for start in 0..p.len() {
                if seen[start] {
                    continue;
                }
                let mut len = 0;
                let mut j = start;
                while !seen[j] {
                    seen[j] = true;
                    j = p[j];
                    len += 1;
                }
                if len == 1 {
                    return;
                }
                cycles += 1;
            }
            counts[cycles] += 1;
        };
        record(&perm);
        let mut i = 0;
        while i < m {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                record(&perm);
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        counts
    }

    #[test]
    fn matches_permutation_enumeration() {
        let table = stirling_table(8);
        for m in 0..=8 {
            let counts = brute_force(m);
            for (s, &count) in counts.iter().enumerate() {
                assert_eq!(table.get(m, s).unwrap(), BigUint::from(count), "d2({m},{s})");
            }
        }
        assert_eq!(table.get(2, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(table.get(4, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(table.get(4, 1).unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn boundary_conditions() {
        let t = stirling_table(30);
        assert_eq!(t.get(0, 0).unwrap(), BigUint::from(1u32));
        for m in 1..=30 {
            assert!(t.get(m, 0).unwrap().is_zero());
            assert!(t.get(m, m / 2 + 1).unwrap().is_zero());
            assert_eq!(t.ln(m, 0).unwrap(), f64::NEG_INFINITY);
        }
    }

    #[test]
    fn row_sums_are_derangement_numbers() {
        let t = stirling_table(10);
        let mut d = vec![BigUint::from(1u32), BigUint::zero()];
        for m in 2..=10usize {
            let next = (&d[m - 1] + &d[m - 2]) * BigUint::from(m - 1);
            d.push(next);
        }
        for (m, dm) in d.iter().enumerate() {
            let sum: BigUint = (0..=m / 2).map(|s| t.get(m, s).unwrap()).sum();
            assert_eq!(&sum, dm, "m = {m}");
        }
    }

    #[test]
    fn log_recursion_agrees_with_exact_rows() {
        let t = stirling_table(EXACT_LIMIT);
        let rec = StirlingTable::ln_recursive(EXACT_LIMIT);
        for m in [20usize, 100, 199, 200] {
            for (s, r) in rec[m].iter().enumerate().skip(1) {
                let exact = t.ln(m, s).unwrap();
                assert!((r - exact).abs() <= 1e-12 * exact.abs().max(1.0), "({m},{s})");
            }
        }
    }

    #[test]
    fn beyond_exact_limit_uses_logs() {
        let t = stirling_table(EXACT_LIMIT + 10);
        assert!(t.get(EXACT_LIMIT + 1, 3).is_none());
        assert_eq!(t.exact_max_m(), EXACT_LIMIT);
        let v = t.ln(EXACT_LIMIT + 10, 50).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(t.ln(EXACT_LIMIT + 11, 1).is_none());
    }

    #[test]
    fn power_estimate_holds_for_exact_rows() {
        let t = stirling_table(EXACT_LIMIT);
        for m in 1..EXACT_LIMIT {
            for s in 1..=m.div_ceil(2) {
                let d = t.get(m + 1, s).unwrap();
                let bound = BigUint::from(2 * m).pow((m - s) as u32);
                assert!(d <= bound, "({m},{s})");
            }
        }
    }
}

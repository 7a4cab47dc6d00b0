use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tf_core::shift::{norm2, unit_phase};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Alltop,
    Steinhaus,
    Custom,
}

impl std::fmt::Display for WindowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WindowKind::Alltop => "alltop",
            WindowKind::Steinhaus => "steinhaus",
            WindowKind::Custom => "custom",
        })
    }
}

/// A unit-norm window `g ∈ C^n` generating the Gabor system.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    values: Vec<C64>,
    kind: WindowKind,
    seed: Option<u64>,
}

impl Window {
    /// Alltop window `g_q = n^{-1/2} e^{2πi q³/n}`; requires `n` prime and `n ≥ 5`.
    pub fn alltop(n: usize) -> Result<Self> {
        if n < 5 || !is_prime(n as u64) {
            return Err(Error::Domain(format!(
                "Alltop window needs a prime n >= 5, got {n}"
            )));
        }
        let scale = 1.0 / (n as f64).sqrt();
        let nn = n as u128;
        let values = (0..n as u128)
            .map(|q| unit_phase(((q * q % nn) * q % nn) as usize, n) * scale)
            .collect();
        Ok(Self {
            values,
            kind: WindowKind::Alltop,
            seed: None,
        })
    }

    /// Normalised Steinhaus window: `n^{-1/2} e^{iθ_q}` with `θ_q = 2π u_q`,
    /// `u_q` uniform on `[0, 1)` drawn from `ChaCha8Rng::seed_from_u64(seed)`.
    pub fn steinhaus(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("Steinhaus window needs n >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (n as f64).sqrt();
        let values = (0..n)
            .map(|_| C64::from_polar(scale, 2.0 * PI * rng.random::<f64>()))
            .collect();
        Ok(Self {
            values,
            kind: WindowKind::Steinhaus,
            seed: Some(seed),
        })
    }

    /// Arbitrary window, rescaled to unit norm.
    pub fn custom(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("window of length 0".into()));
        }
        let norm = norm2(&values);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput("window must have finite nonzero norm".into()));
        }
        Ok(Self {
            values: values.into_iter().map(|v| v / norm).collect(),
            kind: WindowKind::Custom,
            seed: None,
        })
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alltop_entries() {
        let g = Window::alltop(5).unwrap();
        let s = 1.0 / 5f64.sqrt();
        assert!((g.values()[0] - C64::new(s, 0.0)).norm() < 1e-15);
        for v in g.values() {
            assert!((v.norm() - s).abs() < 1e-15);
        }
        // q = 2: q³ = 8 ≡ 3 (mod 5)
        let expected = C64::from_polar(s, 2.0 * PI * 3.0 / 5.0);
        assert!((g.values()[2] - expected).norm() < 1e-15);
    }

    #[test]
    fn alltop_rejects_bad_sizes() {
        for n in [0, 1, 2, 3, 4, 6, 9, 15, 64] {
            assert!(matches!(Window::alltop(n), Err(Error::Domain(_))), "n = {n}");
        }
        assert!(Window::alltop(7).is_ok());
    }

    #[test]
    fn steinhaus_is_unit_norm_and_unimodular() {
        for n in [1, 2, 7, 64, 1000] {
            let g = Window::steinhaus(n, 99).unwrap();
            let s = 1.0 / (n as f64).sqrt();
            for v in g.values() {
                assert!((v.norm() - s).abs() <= 1e-15);
            }
            assert!((norm2(g.values()) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn steinhaus_is_deterministic() {
        let a = Window::steinhaus(32, 5).unwrap();
        let b = Window::steinhaus(32, 5).unwrap();
        let c = Window::steinhaus(32, 6).unwrap();
        let bits = |w: &Window| {
            w.values()
                .iter()
                .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&c));
        assert_eq!(a.seed(), Some(5));
    }

    #[test]
    fn custom_is_normalised() {
        let g = Window::custom(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        assert!((norm2(g.values()) - 1.0).abs() < 1e-15);
        assert!(Window::custom(vec![C64::default(); 3]).is_err());
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(4_294_967_291));
    }
}

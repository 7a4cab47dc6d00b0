//! Seed derivation for reproducible experiments.
//!
//! Every random draw in an experiment comes from its own `ChaCha8Rng`, seeded
//! by [`derive_seed`]`(master_seed, trial_index, role)`. The derivation is a
//! fixed chain of SplitMix64 finalisers, so adding trials or roles never
//! perturbs the streams of existing ones and results do not depend on the
//! order in which trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a derived stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Window = 1,
    Support = 2,
    Coefficients = 3,
    Initialization = 4,
    Probe = 5,
    /// Per-sparsity sub-streams of an experiment grid.
    Grid = 6,
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master_seed: u64, trial_index: u64, role: Role) -> u64 {
    let r = splitmix64(role as u64);
    let t = splitmix64(trial_index ^ r);
    splitmix64(master_seed ^ t)
}

pub fn trial_rng(master_seed: u64, trial_index: u64, role: Role) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, trial_index, role))
}

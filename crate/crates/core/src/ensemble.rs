//! Deterministic seed splitting for Monte Carlo ensembles.
//!
//! Replica `i` of an experiment seeded with `s` always draws from
//! `ChaCha8Rng::seed_from_u64(splitmix64(s ^ splitmix64(i)))`, and results are
//! collected in replica order, so serial and parallel runs agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ReplicaRng = ChaCha8Rng;

/// One step of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replica_seed(seed: u64, replica: u64) -> u64 {
    splitmix64(seed ^ splitmix64(replica))
}

pub fn replica_rng(seed: u64, replica: u64) -> ReplicaRng {
    ChaCha8Rng::seed_from_u64(replica_seed(seed, replica))
}

/// Runs `f` once per replica and returns the results in replica order.
pub fn run_ensemble<T, F>(seed: u64, n_replicas: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ReplicaRng) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_replicas)
            .into_par_iter()
            .map(|i| f(&mut replica_rng(seed, i as u64)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_replicas).map(|i| f(&mut replica_rng(seed, i as u64))).collect()
    }
}

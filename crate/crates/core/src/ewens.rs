//! Cycle types under the generalized Ewens measure
//! `P[sigma] = prod_k theta_k^{C_k(sigma)} / (n! h_n)`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::replica_rng;
use crate::error::{Error, Result};
use crate::series::{h_coeffs, NormalizingConstants};
use crate::weights::ThetaSequence;

/// Largest size accepted by [`enumerate_types`]; `p(40) = 37338`.
pub const MAX_ENUMERATION_SIZE: usize = 40;

/// Cycle counts `(C_1, ..., C_n)` with `sum_k k C_k = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleType {
    counts: Vec<u32>,
}

impl CycleType {
    /// `counts[k - 1] = C_k`; `n` is inferred and the vector padded or trimmed to it.
    pub fn from_counts(mut counts: Vec<u32>) -> Result<Self> {
        let n: usize = counts.iter().enumerate().map(|(i, &c)| (i + 1) * c as usize).sum();
        if n == 0 {
            return Err(Error::Config("a cycle type needs n >= 1".into()));
        }
        // entries past index n are necessarily zero
        counts.resize(n, 0);
        Ok(Self { counts })
    }

    /// Builds the type from a list of cycle lengths, in any order.
    pub fn from_lengths(lengths: &[usize]) -> Result<Self> {
        let n: usize = lengths.iter().sum();
        if lengths.contains(&0) || n == 0 {
            return Err(Error::Config("cycle lengths must be positive".into()));
        }
        let mut counts = vec![0u32; n];
        for &l in lengths {
            counts[l - 1] += 1;
        }
        Ok(Self { counts })
    }

    /// The type of the identity permutation, `C_1 = n`.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        let mut counts = vec![0u32; n];
        counts[0] = n as u32;
        Self { counts }
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    /// `C_k`, zero for `k > n`.
    pub fn count(&self, k: usize) -> u32 {
        assert!(k >= 1);
        self.counts.get(k - 1).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn num_cycles(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// `(k, C_k)` for every `k` with `C_k > 0`, increasing in `k`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i + 1, c))
    }

    /// `(k, C_k)` pairs with `C_k > 0`, the factor list of `p_n`.
    pub fn factors(&self) -> Vec<(usize, u64)> {
        self.nonzero().map(|(k, c)| (k, c as u64)).collect()
    }

    /// Sparse `{length: count}` view, used for JSON output.
    pub fn sparse(&self) -> BTreeMap<usize, u32> {
        self.nonzero().collect()
    }

    /// A canonical permutation with this type, as an image array on `0..n`:
    /// cycles laid out consecutively in increasing length.
    pub fn to_permutation(&self) -> Vec<usize> {
        let mut perm = Vec::with_capacity(self.n());
        for (k, c) in self.nonzero() {
            for _ in 0..c {
                let start = perm.len();
                for j in 0..k {
                    perm.push(start + (j + 1) % k);
                }
            }
        }
        perm
    }
}

/// Cycle type of a permutation given as an image array.
pub fn cycle_type_of(perm: &[usize]) -> Result<CycleType> {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut lengths = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = *perm
                .get(i)
                .filter(|&&j| j < n)
                .ok_or_else(|| Error::Config("not a permutation".into()))?;
            len += 1;
        }
        if i != start {
            return Err(Error::Config("not a permutation".into()));
        }
        lengths.push(len);
    }
    CycleType::from_lengths(&lengths)
}

/// Sampled cycle type together with the seed that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationSample {
    pub cycle_type: CycleType,
    pub seed: u64,
}

fn ln_factorial(c: u32) -> f64 {
    (2..=c).map(|j| (j as f64).ln()).sum()
}

/// `prod_k theta_k^{C_k}`, accumulated in log space.
pub fn weight(seq: &ThetaSequence, ct: &CycleType) -> f64 {
    ct.nonzero()
        .map(|(k, c)| c as f64 * seq.theta(k).ln())
        .sum::<f64>()
        .exp()
}

/// Probability of the cycle type:
/// `(1/h_n) prod_k (theta_k/k)^{C_k} / C_k!`.
pub fn cycle_type_prob(seq: &ThetaSequence, ct: &CycleType) -> Result<f64> {
    let h = h_coeffs(seq, ct.n())?;
    Ok(cycle_type_prob_with(seq, ct, &h))
}

/// Same as [`cycle_type_prob`] with precomputed normalizing constants.
pub fn cycle_type_prob_with(seq: &ThetaSequence, ct: &CycleType, h: &NormalizingConstants) -> f64 {
    // the r^n factors of theta_k r^k and h_n r^n cancel since sum k C_k = n
    let log_mass: f64 = ct
        .nonzero()
        .map(|(k, c)| c as f64 * (seq.scaled_theta(k) / k as f64).ln() - ln_factorial(c))
        .sum();
    (log_mass - h.scaled_at(ct.n()).ln()).exp()
}

/// All integer partitions of `n` as cycle types (`p(n)` of them).
pub fn enumerate_types(n: usize) -> Result<Vec<CycleType>> {
    if n == 0 {
        return Err(Error::Size("n must be at least 1".into()));
    }
    if n > MAX_ENUMERATION_SIZE {
        return Err(Error::Size(format!(
            "enumeration limited to n <= {MAX_ENUMERATION_SIZE}, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut counts = vec![0u32; n];
    fill_partitions(n, n, &mut counts, &mut out);
    Ok(out)
}

/// Distributes `remaining` among parts of size at most `max_part`.
fn fill_partitions(remaining: usize, max_part: usize, counts: &mut Vec<u32>, out: &mut Vec<CycleType>) {
    if remaining == 0 {
        out.push(CycleType { counts: counts.clone() });
        return;
    }
    if max_part == 0 {
        return;
    }
    let k = max_part;
    for c in (0..=remaining / k).rev() {
        counts[k - 1] = c as u32;
        fill_partitions(remaining - c * k, k - 1, counts, out);
    }
    counts[k - 1] = 0;
}

/// Exact cycle-type sampler at a fixed size `n`.
///
/// With `m` points left, the cycle through the smallest remaining point has
/// length `k` with probability `theta_k h_{m-k} / (m h_m)`, evaluated with the
/// rescaled constants.
#[derive(Debug, Clone)]
pub struct CycleSampler {
    n: usize,
    scaled_theta: Vec<f64>,
    h: NormalizingConstants,
}

impl CycleSampler {
    pub fn new(seq: &ThetaSequence, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("sample size n must be at least 1".into()));
        }
        let h = h_coeffs(seq, n)?;
        if h.scaled().iter().any(|&v| v <= 0.0) {
            return Err(Error::Overflow(format!("h_m underflowed for family {seq}")));
        }
        let scaled_theta = (1..=n).map(|k| seq.scaled_theta(k)).collect();
        let sampler = Self { n, scaled_theta, h };
        #[cfg(debug_assertions)]
        sampler.check_step_masses();
        Ok(sampler)
    }

    #[cfg(debug_assertions)]
    fn check_step_masses(&self) {
        // only a prefix: the full check is quadratic in n
        for m in 1..=self.n.min(256) {
            let total: f64 = (1..=m).map(|k| self.step_prob(m, k)).sum();
            debug_assert!((total - 1.0).abs() < 1e-12, "step mass at m={m} is {total}");
        }
    }

    #[cfg(debug_assertions)]
    fn step_prob(&self, m: usize, k: usize) -> f64 {
        let h = self.h.scaled();
        self.scaled_theta[k - 1] * h[m - k] / (m as f64 * h[m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CycleType {
        let mut counts = vec![0u32; self.n];
        let mut m = self.n;
        while m > 0 {
            let k = self.draw_length(m, rng.gen::<f64>());
            counts[k - 1] += 1;
            m -= k;
        }
        CycleType { counts }
    }

    /// Inverse transform over `k = 1..=m`; ties resolve toward smaller `k`.
    fn draw_length(&self, m: usize, u: f64) -> usize {
        let h = self.h.scaled();
        let target = u * m as f64 * h[m];
        let mut acc = 0.0;
        for k in 1..m {
            acc += self.scaled_theta[k - 1] * h[m - k];
            if target < acc {
                return k;
            }
        }
        m
    }
}

/// One exact draw of the cycle type at size `n`, deterministic in the seed.
pub fn sample_cycle_type(seq: &ThetaSequence, n: usize, rng_seed: u64) -> Result<PermutationSample> {
    let sampler = CycleSampler::new(seq, n)?;
    let mut rng = replica_rng(rng_seed, 0);
    Ok(PermutationSample {
        cycle_type: sampler.sample(&mut rng),
        seed: rng_seed,
    })
}

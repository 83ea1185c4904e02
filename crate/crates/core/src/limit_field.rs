//! The Poisson limit field
//! `F(z) = prod_l (1 - z^l)^{Y_l} = exp(-f(z))`, `f(z) = sum_k X_k z^k / k`,
//! `X_k = sum_{l | k} l Y_l`, with independent `Y_l ~ Poisson(theta_l r^l / l)`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::charpoly::log_product;
use crate::ensemble::{replica_rng, ReplicaRng};
use crate::error::{Error, Result};
use crate::weights::ThetaSequence;

/// Largest truncation depth tried before giving up on a family.
pub const MAX_DEPTH: usize = 1_000_000;

/// Ratio between the requested error and the expected-tail budget.
pub const TAIL_SAFETY: f64 = 10.0;

/// Poisson means at or above this are drawn as a sum of smaller pieces.
const INVERSION_LIMIT: f64 = 30.0;

/// Poisson draw by sequential inversion of the CDF.
///
/// Means `>= 30` are split into equal parts below the limit and the part
/// draws are summed, which is again exactly Poisson.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    debug_assert!(mean >= 0.0 && mean.is_finite());
    if mean == 0.0 {
        return 0;
    }
    if mean >= INVERSION_LIMIT {
        let parts = (mean / (INVERSION_LIMIT / 2.0)).ceil() as u64;
        let piece = mean / parts as f64;
        return (0..parts).map(|_| poisson_inversion(rng, piece)).sum();
    }
    poisson_inversion(rng, mean)
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u >= cdf {
        k += 1;
        p *= mean / k as f64;
        if p == 0.0 {
            break;
        }
        cdf += p;
    }
    k
}

/// One realization of `(Y_1, ..., Y_K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitFieldSample {
    pub y: Vec<u64>,
    /// Truncation depth `K`.
    pub depth: usize,
    /// Target bound on the truncation error of `log F` over `|z| <= delta`.
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
}

impl LimitFieldSample {
    /// Builds a sample from explicit draws (mostly for tests and replay).
    pub fn from_draws(y: Vec<u64>, delta: f64, eps: f64, seed: u64) -> Result<Self> {
        check_delta_eps(delta, eps)?;
        Ok(Self {
            depth: y.len(),
            y,
            eps,
            delta,
            seed,
        })
    }

    fn check(&self, z: Complex64) -> Result<()> {
        if z.norm() <= self.delta {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "|z| = {} outside the sample disk of radius {}",
                z.norm(),
                self.delta
            )))
        }
    }

    /// `Y_l`, zero beyond the truncation depth.
    pub fn y(&self, l: usize) -> u64 {
        assert!(l >= 1);
        self.y.get(l - 1).copied().unwrap_or(0)
    }

    /// `X_1..=X_m` from the truncated draws.
    pub fn x_values(&self, m: usize) -> Vec<u64> {
        let mut x = vec![0u64; m];
        for (i, &yl) in self.y.iter().enumerate() {
            let l = i + 1;
            if yl == 0 || l > m {
                continue;
            }
            for k in (l..=m).step_by(l) {
                x[k - 1] += l as u64 * yl;
            }
        }
        x
    }

    /// `(l, Y_l)` pairs with `Y_l > 0`, the factor list of `F`.
    pub fn factors(&self) -> Vec<(usize, u64)> {
        self.y
            .iter()
            .enumerate()
            .filter(|(_, &y)| y > 0)
            .map(|(i, &y)| (i + 1, y))
            .collect()
    }

    /// `log F(z) = sum_l Y_l log(1 - z^l)`.
    pub fn log_big_f(&self, z: Complex64) -> Result<Complex64> {
        self.check(z)?;
        let factors = self
            .y
            .iter()
            .enumerate()
            .filter(|(_, &y)| y > 0)
            .map(|(i, &y)| (i + 1, y));
        Ok(log_product(factors, z))
    }

    /// `F(z) = prod_{l <= K} (1 - z^l)^{Y_l}` via log accumulation.
    pub fn eval_big_f(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.log_big_f(z)?.exp())
    }

    /// Partial sum `sum_{k <= m_max} X_k z^k / k`.
    pub fn eval_f(&self, z: Complex64, m_max: usize) -> Result<Complex64> {
        self.check(z)?;
        let x = self.x_values(m_max);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zk = Complex64::new(1.0, 0.0);
        for (i, &xk) in x.iter().enumerate() {
            zk *= z;
            if xk > 0 {
                acc += zk * (xk as f64 / (i + 1) as f64);
            }
        }
        Ok(acc)
    }

    /// Certified bound on `|sum_{k > m} X_k z^k / k|` for `|z| <= delta`,
    /// using `X_k <= sum_l l Y_l`.
    pub fn f_tail_bound(&self, m: usize) -> f64 {
        let s: u64 = self.y.iter().enumerate().map(|(i, &y)| (i as u64 + 1) * y).sum();
        let d = self.delta;
        s as f64 * d.powi(m as i32 + 1) / ((m + 1) as f64 * (1.0 - d))
    }

    /// Smallest series depth `m >= K` whose tail bound is below `tol`.
    pub fn series_depth(&self, tol: f64) -> usize {
        let mut m = self.depth.max(1);
        while self.f_tail_bound(m) > tol && m < MAX_DEPTH {
            m += 1;
        }
        m
    }
}

fn check_delta_eps(delta: f64, eps: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// Upper bound on `E sup_{|z| <= delta} |sum_{k > depth} Y_k log(1 - z^k)|`:
/// `sum_{k > depth} (theta_k r^k / k) delta^k / (1 - delta)`.
pub fn expected_tail_bound(seq: &ThetaSequence, delta: f64, depth: usize) -> f64 {
    let prefix = seq.prefix_len();
    let mut tail = 0.0;
    for k in depth + 1..=prefix {
        tail += seq.scaled_theta(k) / k as f64 * delta.powi(k as i32);
    }
    // beyond the prefix theta_k r^k is the tail theta; bound sum_{k>M} d^k/k
    let m = depth.max(prefix);
    let geometric = delta.powi(m as i32 + 1) / ((m + 1) as f64 * (1.0 - delta));
    tail += seq.scaled_theta(m + 1) * geometric;
    tail / (1.0 - delta)
}

/// Precomputed Poisson means and depth for repeated limit-field draws.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    means: Vec<f64>,
    delta: f64,
    eps: f64,
}

impl LimitSampler {
    pub fn new(seq: &ThetaSequence, delta: f64, eps: f64) -> Result<Self> {
        check_delta_eps(delta, eps)?;
        let budget = eps / TAIL_SAFETY;
        let depth = (1..=MAX_DEPTH)
            .find(|&k| expected_tail_bound(seq, delta, k) <= budget)
            .ok_or_else(|| {
                Error::Config(format!(
                    "tail bound for {seq} cannot reach {eps} within depth {MAX_DEPTH}"
                ))
            })?;
        let means = (1..=depth).map(|l| seq.scaled_theta(l) / l as f64).collect();
        Ok(Self { means, delta, eps })
    }

    pub fn depth(&self) -> usize {
        self.means.len()
    }

    /// Poisson mean of `Y_l`.
    pub fn mean(&self, l: usize) -> f64 {
        self.means[l - 1]
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, seed: u64) -> LimitFieldSample {
        let y = self.means.iter().map(|&m| sample_poisson(rng, m)).collect();
        LimitFieldSample {
            y,
            depth: self.depth(),
            eps: self.eps,
            delta: self.delta,
            seed,
        }
    }

    /// Draw for replica `replica` of an ensemble seeded with `seed`.
    pub fn sample_replica(&self, rng: &mut ReplicaRng, seed: u64) -> LimitFieldSample {
        self.sample_with(rng, seed)
    }
}

/// One limit-field sample valid on `|z| <= delta`, deterministic in the seed.
pub fn sample_limit(seq: &ThetaSequence, delta: f64, eps: f64, rng_seed: u64) -> Result<LimitFieldSample> {
    let sampler = LimitSampler::new(seq, delta, eps)?;
    Ok(sampler.sample_with(&mut replica_rng(rng_seed, 0), rng_seed))
}

/// `E[F(z)] = prod_k exp(-theta_k r^k z^k / k) = 1 / G(rz)`.
pub fn mean_limit(seq: &ThetaSequence, z: Complex64) -> Result<Complex64> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("|z| = {} must be < 1", z.norm())));
    }
    Ok(seq.big_g(z * seq.radius())?.inv())
}

/// Centered covariance `E[(f(z) - Ef(z)) conj(f(w) - Ef(w))]
/// = sum_{a,b >= 1} g(r z^a conj(w)^b) / (ab)`, truncated so the neglected
/// part is below `tol`.
pub fn cov_f(seq: &ThetaSequence, z: Complex64, w: Complex64, tol: f64) -> Result<Complex64> {
    let (rz, rw) = (z.norm(), w.norm());
    if rz >= 1.0 || rw >= 1.0 {
        return Err(Error::Domain(format!("|z| = {rz}, |w| = {rw} must both be < 1")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    if z == zero || w == zero {
        return Ok(zero);
    }
    // |g(r u)| <= C |u| / (1 - |u|) with C = sup_k theta_k r^k; |u| <= |z||w|
    let c = seq.max_scaled_theta() / (1.0 - rz * rw);
    let log_sum = |q: f64| -(1.0 - q).ln();
    let tail_terms = |q: f64, other: f64| {
        (1..MAX_DEPTH)
            .find(|&a| c * q.powi(a as i32 + 1) / ((a + 1) as f64 * (1.0 - q)) * log_sum(other) <= tol / 2.0)
            .unwrap_or(MAX_DEPTH)
    };
    let a_max = tail_terms(rz, rw);
    let b_max = tail_terms(rw, rz);

    let r = seq.radius();
    let wbar = w.conj();
    let mut acc = zero;
    let mut za = Complex64::new(1.0, 0.0);
    for a in 1..=a_max {
        za *= z;
        let mut wb = Complex64::new(1.0, 0.0);
        for b in 1..=b_max {
            wb *= wbar;
            acc += seq.g(za * wb * r)? / (a * b) as f64;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn depth_solves_tail_bound() {
        let seq = ThetaSequence::ewens(1.0).unwrap();
        let sampler = LimitSampler::new(&seq, 0.5, 1e-8).unwrap();
        // brute-force tail sum_{k>K} d^k / (k (1-d)), summed far out
        let tail = |k0: usize| {
            (k0 + 1..2000)
                .map(|k| 0.5f64.powi(k as i32) / (k as f64 * 0.5))
                .sum::<f64>()
        };
        let k = sampler.depth();
        assert!(tail(k) <= 1e-9);
        assert!(tail(k - 3) > 1e-9, "depth {k} is far from tight");
        assert_eq!(sampler.mean(1), 1.0);
    }

    #[test]
    fn sample_is_deterministic() {
        let seq = ThetaSequence::custom(vec![2.0, 0.5], 1.5, 1.2).unwrap();
        let a = sample_limit(&seq, 0.7, 1e-6, 99).unwrap();
        let b = sample_limit(&seq, 0.7, 1e-6, 99).unwrap();
        assert_eq!(a, b);
        assert!(expected_tail_bound(&seq, 0.7, a.depth) <= 1e-7);
    }

    #[test]
    fn bad_configuration() {
        let seq = ThetaSequence::ewens(1.0).unwrap();
        assert!(matches!(LimitSampler::new(&seq, 1.0, 1e-8), Err(Error::Config(_))));
        assert!(matches!(LimitSampler::new(&seq, 0.5, 0.0), Err(Error::Config(_))));
        // tail cannot reach eps within the depth cap
        assert!(matches!(
            LimitSampler::new(&seq, 0.999_999, 1e-300),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn y3_mean_for_ewens_two() {
        let sampler = LimitSampler::new(&ThetaSequence::ewens(2.0).unwrap(), 0.5, 1e-8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let draws = 100_000;
        let total: u64 = (0..draws).map(|_| sampler.sample_with(&mut rng, 0).y(3)).sum();
        let mean = total as f64 / draws as f64;
        let se = (2.0f64 / 3.0 / draws as f64).sqrt();
        assert!((mean - 2.0 / 3.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn poisson_large_mean_moments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let lam = 100.0;
        let draws = 50_000;
        let xs: Vec<f64> = (0..draws).map(|_| sample_poisson(&mut rng, lam) as f64).collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        assert!((mean - lam).abs() < 4.0 * (lam / draws as f64).sqrt());
        assert!((var - lam).abs() < 0.05 * lam);
    }

    #[test]
    fn big_f_examples() {
        let s = LimitFieldSample::from_draws(vec![2, 0, 0], 0.9, 1e-8, 0).unwrap();
        assert_eq!(s.eval_big_f(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_relative_eq!(s.eval_big_f(c(0.5, 0.0)).unwrap().re, 0.25, epsilon = 1e-15);
        let empty = LimitFieldSample::from_draws(vec![0; 10], 0.9, 1e-8, 0).unwrap();
        assert_eq!(empty.eval_big_f(c(0.3, -0.7)).unwrap(), c(1.0, 0.0));
        assert!(matches!(s.eval_big_f(c(0.95, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn f_examples() {
        let s = LimitFieldSample::from_draws(vec![1], 0.9, 1e-8, 0).unwrap();
        assert_eq!(s.eval_f(c(0.0, 0.0), 10).unwrap(), c(0.0, 0.0));
        assert_relative_eq!(s.eval_f(c(0.5, 0.0), 100).unwrap().re, 2f64.ln(), epsilon = 1e-15);
        assert!(matches!(s.eval_f(c(0.0, 0.91), 10), Err(Error::Domain(_))));
    }

    #[test]
    fn x_values_divisor_sums() {
        let s = LimitFieldSample::from_draws(vec![1, 2, 0, 1], 0.5, 1e-8, 0).unwrap();
        // X_k = sum_{l | k} l Y_l
        assert_eq!(s.x_values(8), vec![1, 5, 1, 9, 1, 5, 1, 9]);
    }

    #[test]
    fn f_and_big_f_agree() {
        let seq = ThetaSequence::ewens(1.5).unwrap();
        let sampler = LimitSampler::new(&seq, 0.5, 1e-8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let z = c(0.3, 0.0);
        for _ in 0..100 {
            let s = sampler.sample_with(&mut rng, 0);
            let m = s.series_depth(1e-12);
            let f = s.eval_f(z, m).unwrap();
            let log_f = s.log_big_f(z).unwrap();
            assert!((f + log_f).norm() < 1e-6);
            // product form and exp(-f) from the same draws
            assert!(((-f).exp() - s.eval_big_f(z).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn mean_examples() {
        let e1 = ThetaSequence::ewens(1.0).unwrap();
        assert_eq!(mean_limit(&e1, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_relative_eq!(mean_limit(&e1, c(0.5, 0.0)).unwrap().re, 0.5, epsilon = 1e-15);
        let e2 = ThetaSequence::ewens(2.0).unwrap();
        assert_relative_eq!(mean_limit(&e2, c(0.5, 0.0)).unwrap().re, 0.25, epsilon = 1e-15);
        assert!(mean_limit(&e2, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn covariance_closed_form() {
        let e1 = ThetaSequence::ewens(1.0).unwrap();
        assert_eq!(cov_f(&e1, c(0.0, 0.0), c(0.5, 0.0), 1e-12).unwrap(), c(0.0, 0.0));
        assert_eq!(cov_f(&e1, c(0.5, 0.1), c(0.0, 0.0), 1e-12).unwrap(), c(0.0, 0.0));

        // Ewens(1): -sum_{a,b} log(1 - 0.5^{a+b}) / (ab), brute force to depth 200
        let brute: f64 = (1..200)
            .flat_map(|a| (1..200).map(move |b| (a, b)))
            .map(|(a, b)| -(1.0 - 0.5f64.powi(a + b)).ln() / (a * b) as f64)
            .sum();
        let v = cov_f(&e1, c(0.5, 0.0), c(0.5, 0.0), 1e-12).unwrap();
        assert!((v.re - brute).abs() < 1e-11, "{v} vs {brute}");
        assert!(v.im.abs() < 1e-15);

        // variance from the covariance of the X_k directly:
        // sum_{k,h} z^k conj(w)^h / (kh) sum_{l | k, l | h} l theta_l r^l
        let seq = ThetaSequence::custom(vec![2.0, 0.3], 1.1, 1.4).unwrap();
        let (z, w) = (c(0.4, 0.2), c(-0.1, 0.5));
        let mut direct = c(0.0, 0.0);
        for k in 1..=120usize {
            for h in 1..=120usize {
                let s: f64 = (1..=k.min(h))
                    .filter(|l| k % l == 0 && h % l == 0)
                    .map(|l| l as f64 * seq.scaled_theta(l))
                    .sum();
                direct += z.powu(k as u32) * w.conj().powu(h as u32) * (s / (k * h) as f64);
            }
        }
        let v = cov_f(&seq, z, w, 1e-13).unwrap();
        assert!((v - direct).norm() < 1e-11, "{v} vs {direct}");
    }

    #[test]
    fn covariance_is_hermitian() {
        let seq = ThetaSequence::scaled_ewens(2.0, 2.0).unwrap();
        let (z, w) = (c(0.4, 0.3), c(0.2, -0.6));
        let a = cov_f(&seq, z, w, 1e-13).unwrap();
        let b = cov_f(&seq, w, z, 1e-13).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
    }
}

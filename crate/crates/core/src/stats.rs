//! Monte Carlo experiments tying finite-`n` samples to exact oracles and to
//! the Poisson limit field, plus the distribution distances they report.
//!
//! Every experiment draws its replicas through [`run_ensemble`], so reports
//! are reproducible bit for bit from `(seed, n_samples)` whatever the number
//! of worker threads.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::charpoly::eval_charpoly;
use crate::ensemble::{replica_seed, run_ensemble};
use crate::error::{Error, Result};
use crate::ewens::{enumerate_types, CycleSampler, CycleType};
use crate::limit_field::{cov_f, mean_limit, LimitSampler};
use crate::series::{joint_cycle_cf_exact, second_moment_exact, second_moment_limit};
use crate::weights::ThetaSequence;

/// Distance threshold used by the convergence experiments. It comes from the
/// Monte Carlo noise floor at the default ensemble sizes, not from any rate.
pub const DISTANCE_THRESHOLD: f64 = 0.05;

/// Truncation error requested from the limit sampler in experiments.
pub const LIMIT_EPS: f64 = 1e-10;

/// Tolerance for the truncated covariance series.
pub const COV_TOL: f64 = 1e-12;

/// A real or complex estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl Scalar {
    pub fn complex(z: Complex64) -> Self {
        Scalar::Complex { re: z.re, im: z.im }
    }

    pub fn as_complex(&self) -> Complex64 {
        match *self {
            Scalar::Real(x) => Complex64::new(x, 0.0),
            Scalar::Complex { re, im } => Complex64::new(re, im),
        }
    }
}

/// Result of one Monte Carlo estimate against a known target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub experiment: String,
    pub family: String,
    pub n_samples: usize,
    pub estimate: Scalar,
    pub std_error: f64,
    pub target: Scalar,
    /// `|estimate - target| / std_error`; zero when both numerator and
    /// denominator vanish.
    pub z_sigma: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub details: Map<String, Value>,
}

impl McReport {
    fn new(
        experiment: &str,
        seq: &ThetaSequence,
        n_samples: usize,
        estimate: Scalar,
        std_error: f64,
        target: Scalar,
        seed: u64,
    ) -> Self {
        let diff = (estimate.as_complex() - target.as_complex()).norm();
        let z_sigma = if diff == 0.0 { 0.0 } else { diff / std_error };
        Self {
            experiment: experiment.to_string(),
            family: seq.to_string(),
            n_samples,
            estimate,
            std_error,
            target,
            z_sigma,
            seed,
            details: Map::new(),
        }
    }

    fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples < 2 {
        Err(Error::Config(format!("need at least 2 samples, got {n_samples}")))
    } else {
        Ok(())
    }
}

fn check_disk(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("|z| = {} must be < 1", z.norm())))
    }
}

/// Sample mean and its standard error (sample variance / n).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Complex sample mean with standard error `sqrt(E|x - mean|^2 / n)`.
pub fn complex_mean_se(xs: &[Complex64]) -> (Complex64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<Complex64>() / n;
    let var = xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn sort_floats(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_x |F_a(x) - F_b(x)|`,
/// with ties handled by stepping over equal values together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let a = sort_floats(a.to_vec());
    let b = sort_floats(b.to_vec());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i].total_cmp(&b[j]).is_le() { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Poisson probability mass, computed in log space.
pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (2..=k).map(|j| (j as f64).ln()).sum();
    (k as f64 * mean.ln() - mean - ln_fact).exp()
}

/// Total variation between an empirical law (counts over `n` draws) and a
/// reference law given by its mass function. Mass of the reference outside
/// the observed support is included exactly as `1 - sum_observed p`.
pub fn tv_to_reference<K, F>(counts: &HashMap<K, u64>, n: usize, pmf: F) -> f64
where
    F: Fn(&K) -> f64,
{
    let mut abs = 0.0;
    let mut covered = 0.0;
    for (key, &c) in counts {
        let p = pmf(key);
        covered += p;
        abs += (c as f64 / n as f64 - p).abs();
    }
    0.5 * (abs + (1.0 - covered).max(0.0))
}

/// `E[|p_n(z)|^2]` by Monte Carlo against the exact finite-`n` value; the
/// limit `G(r|z|^2) / (G(rz) G(r conj z))` is reported under `details`.
pub fn mc_second_moment(seq: &ThetaSequence, n: usize, z: Complex64, n_samples: usize, seed: u64) -> Result<McReport> {
    check_disk(z)?;
    check_samples(n_samples)?;
    let sampler = CycleSampler::new(seq, n)?;
    let values = run_ensemble(seed, n_samples, |rng| {
        let ct = sampler.sample(rng);
        (eval_charpoly(&ct, z).expect("z checked").log_value.re * 2.0).exp()
    });
    let (estimate, se) = mean_se(&values);
    let target = second_moment_exact(seq, z, n)?;
    let limit = second_moment_limit(seq, z)?;
    Ok(McReport::new(
        "second_moment",
        seq,
        n_samples,
        Scalar::Real(estimate),
        se,
        Scalar::Real(target),
        seed,
    )
    .with("n", n)
    .with("z", vec![z.re, z.im])
    .with("limit_target", limit))
}

/// Finite-`n` cycle counts against the independent Poisson limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub experiment: String,
    pub family: String,
    pub n: usize,
    pub k_max: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// TV distance between the empirical joint law of `(C_1..C_kmax)` and the
    /// product of `Poisson(theta_l r^l / l)`.
    pub joint_tv: f64,
    /// TV distance for each marginal `C_l`, `l = 1..=k_max`.
    pub marginal_tv: Vec<f64>,
    pub poisson_means: Vec<f64>,
    /// Observed support size of the joint law.
    pub support: usize,
    /// `sqrt(support / n_samples)`, the scale of pure sampling noise.
    pub noise_floor: f64,
    pub threshold: f64,
}

pub fn trace_distribution_test(
    seq: &ThetaSequence,
    n: usize,
    k_max: usize,
    n_samples: usize,
    seed: u64,
) -> Result<TraceReport> {
    check_samples(n_samples)?;
    if k_max > n {
        return Err(Error::Precond(format!("k_max = {k_max} exceeds n = {n}")));
    }
    let mut report = TraceReport {
        experiment: "trace_distribution".into(),
        family: seq.to_string(),
        n,
        k_max,
        n_samples,
        seed,
        joint_tv: 0.0,
        marginal_tv: Vec::new(),
        poisson_means: Vec::new(),
        support: 0,
        noise_floor: 0.0,
        threshold: DISTANCE_THRESHOLD,
    };
    if k_max == 0 {
        return Ok(report);
    }
    let sampler = CycleSampler::new(seq, n)?;
    let draws: Vec<Vec<u32>> = run_ensemble(seed, n_samples, |rng| {
        let ct = sampler.sample(rng);
        (1..=k_max).map(|l| ct.count(l)).collect()
    });
    let means: Vec<f64> = (1..=k_max).map(|l| seq.scaled_theta(l) / l as f64).collect();

    let mut joint: HashMap<Vec<u32>, u64> = HashMap::new();
    for d in &draws {
        *joint.entry(d.clone()).or_default() += 1;
    }
    report.joint_tv = tv_to_reference(&joint, n_samples, |x| {
        x.iter().zip(&means).map(|(&c, &m)| poisson_pmf(m, c as u64)).product()
    });
    report.marginal_tv = (0..k_max)
        .map(|l| {
            let mut marg: HashMap<u32, u64> = HashMap::new();
            for d in &draws {
                *marg.entry(d[l]).or_default() += 1;
            }
            tv_to_reference(&marg, n_samples, |&c| poisson_pmf(means[l], c as u64))
        })
        .collect();
    report.support = joint.len();
    report.noise_floor = (joint.len() as f64 / n_samples as f64).sqrt();
    report.poisson_means = means;
    Ok(report)
}

/// Two-sample comparison of `p_n(z)` with the limit field `F(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub experiment: String,
    pub family: String,
    pub n: usize,
    pub z: [f64; 2],
    pub n_samples: usize,
    pub seed: u64,
    pub ks_re: f64,
    pub ks_im: f64,
    pub ks_log_abs: f64,
    /// `1.36 sqrt(2 / n_samples)`, the 95% two-sample KS critical value.
    pub noise_floor: f64,
    pub threshold: f64,
}

impl KsReport {
    pub fn passed(&self) -> bool {
        self.ks_log_abs < self.threshold
    }
}

/// Seed of the limit-field ensemble paired with a finite-`n` ensemble.
fn limit_stream(seed: u64) -> u64 {
    replica_seed(seed, u64::MAX)
}

pub fn charpoly_vs_limit_test(
    seq: &ThetaSequence,
    n: usize,
    z: Complex64,
    n_samples: usize,
    seed: u64,
) -> Result<KsReport> {
    check_disk(z)?;
    check_samples(n_samples)?;
    let sampler = CycleSampler::new(seq, n)?;
    let finite: Vec<Complex64> = run_ensemble(seed, n_samples, |rng| {
        eval_charpoly(&sampler.sample(rng), z).expect("z checked").log_value
    });
    let limit_sampler = LimitSampler::new(seq, z.norm().max(0.5), LIMIT_EPS)?;
    let lseed = limit_stream(seed);
    let limit: Vec<Complex64> = run_ensemble(lseed, n_samples, |rng| {
        limit_sampler
            .sample_with(rng, lseed)
            .log_big_f(z)
            .expect("delta covers z")
    });
    let columns = |logs: &[Complex64]| {
        let vals: Vec<Complex64> = logs.iter().map(|l| l.exp()).collect();
        (
            vals.iter().map(|v| v.re).collect::<Vec<_>>(),
            vals.iter().map(|v| v.im).collect::<Vec<_>>(),
            logs.iter().map(|l| l.re).collect::<Vec<_>>(),
        )
    };
    let (fr, fi, fl) = columns(&finite);
    let (lr, li, ll) = columns(&limit);
    Ok(KsReport {
        experiment: "charpoly_vs_limit".into(),
        family: seq.to_string(),
        n,
        z: [z.re, z.im],
        n_samples,
        seed,
        ks_re: ks_two_sample(&fr, &lr),
        ks_im: ks_two_sample(&fi, &li),
        ks_log_abs: ks_two_sample(&fl, &ll),
        noise_floor: 1.36 * (2.0 / n_samples as f64).sqrt(),
        threshold: DISTANCE_THRESHOLD,
    })
}

/// Centered covariance of `(f(z), f(w))` over limit-field samples against
/// the closed form `sum_{a,b} g(r z^a conj(w)^b) / (ab)`.
pub fn covariance_test(
    seq: &ThetaSequence,
    z: Complex64,
    w: Complex64,
    n_samples: usize,
    seed: u64,
) -> Result<McReport> {
    check_disk(z)?;
    check_disk(w)?;
    check_samples(n_samples)?;
    let delta = z.norm().max(w.norm()).max(0.5);
    let sampler = LimitSampler::new(seq, delta, LIMIT_EPS)?;
    let pairs: Vec<(Complex64, Complex64)> = run_ensemble(seed, n_samples, |rng| {
        let s = sampler.sample_with(rng, seed);
        let m = s.series_depth(LIMIT_EPS);
        (s.eval_f(z, m).expect("in disk"), s.eval_f(w, m).expect("in disk"))
    });
    let n = n_samples as f64;
    let mz = pairs.iter().map(|p| p.0).sum::<Complex64>() / n;
    let mw = pairs.iter().map(|p| p.1).sum::<Complex64>() / n;
    let products: Vec<Complex64> = pairs.iter().map(|(a, b)| (a - mz) * (b - mw).conj()).collect();
    let (mean_prod, se) = complex_mean_se(&products);
    // unbiased centered estimator
    let estimate = mean_prod * (n / (n - 1.0));
    let target = cov_f(seq, z, w, COV_TOL)?;
    Ok(McReport::new(
        "covariance",
        seq,
        n_samples,
        Scalar::complex(estimate),
        se * (n / (n - 1.0)),
        Scalar::complex(target),
        seed,
    )
    .with("z", vec![z.re, z.im])
    .with("w", vec![w.re, w.im]))
}

/// Mean of `F(z)` over limit-field samples against `1 / G(rz)`.
pub fn limit_mean_test(seq: &ThetaSequence, z: Complex64, n_samples: usize, seed: u64) -> Result<McReport> {
    check_disk(z)?;
    check_samples(n_samples)?;
    let sampler = LimitSampler::new(seq, z.norm().max(0.5), LIMIT_EPS)?;
    let values: Vec<Complex64> = run_ensemble(seed, n_samples, |rng| {
        sampler.sample_with(rng, seed).eval_big_f(z).expect("in disk")
    });
    let (estimate, se) = complex_mean_se(&values);
    let target = mean_limit(seq, z)?;
    Ok(McReport::new(
        "limit_mean",
        seq,
        n_samples,
        Scalar::complex(estimate),
        se,
        Scalar::complex(target),
        seed,
    )
    .with("z", vec![z.re, z.im])
    .with("depth", sampler.depth()))
}

/// Unnormalized cycle-type mass `prod_k (theta_k / k)^{C_k} / C_k!`, in the
/// rescaled weights so large `r` does not overflow.
fn type_mass(seq: &ThetaSequence, ct: &CycleType) -> f64 {
    ct.nonzero()
        .map(|(k, c)| {
            let w = seq.scaled_theta(k) / k as f64;
            (1..=c).map(|j| w / j as f64).product::<f64>()
        })
        .product()
}

/// Expectation of `f(cycle type)` at size `n` by summing over all types,
/// normalized by the total mass (no generating functions involved).
pub fn enumerate_expectation<T, F>(seq: &ThetaSequence, n: usize, f: F) -> Result<T>
where
    T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
    F: Fn(&CycleType) -> T,
{
    let mut total = 0.0;
    let mut acc = T::default();
    for ct in enumerate_types(n)? {
        let m = type_mass(seq, &ct);
        total += m;
        acc = acc + f(&ct) * m;
    }
    Ok(acc * (1.0 / total))
}

/// `E[|p_n(z)|^2]` by exhaustive enumeration.
pub fn second_moment_enumerated(seq: &ThetaSequence, z: Complex64, n: usize) -> Result<f64> {
    check_disk(z)?;
    enumerate_expectation(seq, n, |ct| eval_charpoly(ct, z).expect("z checked").value.norm_sqr())
}

/// `E[exp(i sum_m s_m C_m)]` by exhaustive enumeration.
pub fn joint_cf_enumerated(seq: &ThetaSequence, s: &[f64], n: usize) -> Result<Complex64> {
    enumerate_expectation(seq, n, |ct| {
        let phase: f64 = s.iter().enumerate().map(|(i, &sm)| sm * ct.count(i + 1) as f64).sum();
        Complex64::from_polar(1.0, phase)
    })
}

/// Evaluation points of the built-in enumeration grid.
pub fn enumeration_grid() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(-0.3, 0.0),
        Complex64::new(0.3, 0.4),
        Complex64::new(0.0, 0.7),
    ]
}

/// Frequency vectors of the built-in grid: deterministic, in `[-pi, pi)^3`.
pub fn enumeration_frequencies(count: usize) -> Vec<[f64; 3]> {
    use rand::Rng;
    let mut rng = crate::ensemble::replica_rng(0x5eed, 0);
    (0..count)
        .map(|_| {
            let mut s = [0.0; 3];
            for v in s.iter_mut() {
                *v = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            }
            s
        })
        .collect()
}

/// Enumeration-vs-extraction comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationCheck {
    pub experiment: String,
    pub family: String,
    pub n: usize,
    pub points: usize,
    pub max_err_second_moment: f64,
    pub max_err_joint_cf: f64,
    pub max_abs_error: f64,
    pub tolerance: f64,
}

pub const ENUMERATION_TOL: f64 = 1e-10;

pub const MAX_CHECK_SIZE: usize = 12;

impl EnumerationCheck {
    pub fn passed(&self) -> bool {
        self.max_abs_error < self.tolerance
    }
}

/// Compares series extraction with exhaustive enumeration for every size
/// `1..=n`: the second moment on [`enumeration_grid`] and the joint
/// characteristic function of `(C_1, C_2, C_3)` (fewer when the size is
/// smaller) on ten frequency vectors.
pub fn enumerate_check(seq: &ThetaSequence, n: usize) -> Result<EnumerationCheck> {
    if n == 0 || n > MAX_CHECK_SIZE {
        return Err(Error::Size(format!(
            "enumerate-check needs 1 <= n <= {MAX_CHECK_SIZE}, got {n}"
        )));
    }
    let grid = enumeration_grid();
    let freqs = enumeration_frequencies(10);
    let mut points = 0;
    let mut err_m2: f64 = 0.0;
    let mut err_cf: f64 = 0.0;
    for size in 1..=n {
        for &z in &grid {
            let a = second_moment_exact(seq, z, size)?;
            let b = second_moment_enumerated(seq, z, size)?;
            err_m2 = err_m2.max((a - b).abs());
            points += 1;
        }
        for s in &freqs {
            let s = &s[..size.min(3)];
            let a = joint_cycle_cf_exact(seq, s, size)?;
            let b = joint_cf_enumerated(seq, s, size)?;
            err_cf = err_cf.max((a - b).norm());
            points += 1;
        }
    }
    Ok(EnumerationCheck {
        experiment: "enumerate_check".into(),
        family: seq.to_string(),
        n,
        points,
        max_err_second_moment: err_m2,
        max_err_joint_cf: err_cf,
        max_abs_error: err_m2.max(err_cf),
        tolerance: ENUMERATION_TOL,
    })
}

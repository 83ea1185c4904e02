//! Truncated formal power series over `Complex64` and the exact
//! generating-function extractions built on them.
//!
//! All extractions work in the rescaled variable `u = t / r`, where the
//! weights become `theta_k r^k` and the normalizing constants become
//! `h_n r^n`. For log-class families both grow at most polynomially in `n`.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::weights::ThetaSequence;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients `a_0..=a_N` of a series truncated at order `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    /// Builds a series from its coefficients; the order is `coeffs.len() - 1`.
    ///
    /// Panics on an empty coefficient list.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a power series needs at least a constant term");
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![ZERO; order + 1])
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = ONE;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^n`; zero beyond the truncation order is *not*
    /// implied, so asking past the order is an error.
    pub fn coeff(&self, n: usize) -> Result<Complex64> {
        self.coeffs
            .get(n)
            .copied()
            .ok_or_else(|| Error::Index(format!("coefficient {n} beyond truncation order {}", self.order())))
    }

    /// Cauchy product truncated at `min(order_a, order_b)`.
    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        let order = self.order().min(other.order());
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..=order)
            .map(|n| (0..=n).fold(ZERO, |acc, k| acc + a[k] * b[n - k]))
            .collect();
        PowerSeries { coeffs }
    }

    /// `exp(a)` for a series with zero constant term, via
    /// `E_n = (1/n) sum_{k=1}^n k a_k E_{n-k}`.
    pub fn exp(&self) -> Result<PowerSeries> {
        if self.coeffs[0] != ZERO {
            return Err(Error::Precond(format!(
                "exp needs a zero constant term, got {}",
                self.coeffs[0]
            )));
        }
        Ok(PowerSeries {
            coeffs: exp_recursion(&self.coeffs),
        })
    }

    /// `log(a)` for a series with constant term one; inverse of [`Self::exp`].
    pub fn log(&self) -> Result<PowerSeries> {
        if self.coeffs[0] != ONE {
            return Err(Error::Precond(format!(
                "log needs constant term 1, got {}",
                self.coeffs[0]
            )));
        }
        let a = &self.coeffs;
        let n_max = self.order();
        let mut l = vec![ZERO; n_max + 1];
        // n a_n = sum_{k=1}^{n} k l_k a_{n-k}
        for n in 1..=n_max {
            let mut s = a[n] * n as f64;
            for k in 1..n {
                s -= l[k] * (k as f64) * a[n - k];
            }
            l[n] = s / n as f64;
        }
        Ok(PowerSeries { coeffs: l })
    }

    /// Evaluates the truncated polynomial at `z` (Horner).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }
}

impl Mul for &PowerSeries {
    type Output = PowerSeries;

    fn mul(self, rhs: &PowerSeries) -> PowerSeries {
        PowerSeries::mul(self, rhs)
    }
}

fn exp_recursion(a: &[Complex64]) -> Vec<Complex64> {
    let n_max = a.len() - 1;
    let mut e = vec![ZERO; n_max + 1];
    e[0] = ONE;
    for n in 1..=n_max {
        let s = (1..=n).fold(ZERO, |acc, k| acc + a[k] * (k as f64) * e[n - k]);
        e[n] = s / n as f64;
    }
    e
}

/// Normalizing constants `h_n` of the measure, stored rescaled as
/// `hat_h_n = h_n r^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizingConstants {
    radius: f64,
    scaled: Vec<f64>,
}

impl NormalizingConstants {
    /// `hat_h_0..=hat_h_{n_max}`.
    pub fn scaled(&self) -> &[f64] {
        &self.scaled
    }

    pub fn scaled_at(&self, n: usize) -> f64 {
        self.scaled[n]
    }

    pub fn n_max(&self) -> usize {
        self.scaled.len() - 1
    }

    /// `h_n = hat_h_n / r^n`; may over- or underflow for large `n` when `r != 1`.
    pub fn h(&self, n: usize) -> f64 {
        if self.radius == 1.0 {
            self.scaled[n]
        } else {
            (self.scaled[n].ln() - n as f64 * self.radius.ln()).exp()
        }
    }

    /// `(h_0, ..., h_{n_max})`.
    pub fn unscaled(&self) -> Vec<f64> {
        (0..self.scaled.len()).map(|n| self.h(n)).collect()
    }
}

/// Coefficients of `G(t) = sum h_n t^n` through the recursion
/// `h_n = (1/n) sum_{k=1}^n theta_k h_{n-k}`, run in the rescaled variable.
pub fn h_coeffs(seq: &ThetaSequence, n_max: usize) -> Result<NormalizingConstants> {
    let weights: Vec<f64> = (1..=n_max).map(|k| seq.scaled_theta(k)).collect();
    let mut h = vec![0.0; n_max + 1];
    h[0] = 1.0;
    for n in 1..=n_max {
        let mut s = 0.0;
        for k in 1..=n {
            s += weights[k - 1] * h[n - k];
        }
        let v = s / n as f64;
        if !v.is_finite() {
            return Err(Error::Overflow(format!(
                "h_{n} r^{n} left the double range for family {seq}"
            )));
        }
        h[n] = v;
    }
    Ok(NormalizingConstants {
        radius: seq.radius(),
        scaled: h,
    })
}

/// `[u^n] exp(L(u))` for a log-series given by `log_coeffs[k]`, `k = 1..=n`.
fn extract_exp(log_coeffs: Vec<Complex64>, n: usize) -> Complex64 {
    debug_assert_eq!(log_coeffs.len(), n + 1);
    exp_recursion(&log_coeffs)[n]
}

fn check_scaled(h: &NormalizingConstants, n: usize, seq: &ThetaSequence) -> Result<f64> {
    let hn = h.scaled_at(n);
    if hn.is_finite() && hn > 0.0 {
        Ok(hn)
    } else {
        Err(Error::Overflow(format!("h_{n} unusable for family {seq}")))
    }
}

/// Exact `E[|p_n(z)|^2]` as `[t^n] G(t) G(t|z|^2) / (G(tz) G(t conj z))`
/// divided by `h_n`.
///
/// In `u = t/r` the logarithm of the generating function has coefficients
/// `theta_k r^k / k * |1 - z^k|^2`, so the extraction is one series
/// exponential.
pub fn second_moment_exact(seq: &ThetaSequence, z: Complex64, n: usize) -> Result<f64> {
    Ok(second_moment_curve(seq, z, n)?[n])
}

/// `E[|p_m(z)|^2]` for every `m = 0..=n` from a single extraction.
pub fn second_moment_curve(seq: &ThetaSequence, z: Complex64, n: usize) -> Result<Vec<f64>> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("|z| = {} must be < 1", z.norm())));
    }
    let h = h_coeffs(seq, n)?;
    let mut log_coeffs = vec![ZERO; n + 1];
    let mut zk = ONE;
    for (k, c) in log_coeffs.iter_mut().enumerate().skip(1) {
        zk *= z;
        *c = Complex64::new(seq.scaled_theta(k) / k as f64 * (ONE - zk).norm_sqr(), 0.0);
    }
    exp_recursion(&log_coeffs)
        .iter()
        .enumerate()
        .map(|(m, c)| Ok(c.re / check_scaled(&h, m, seq)?))
        .collect()
}

/// Exact `E[exp(i sum_{m<=b} s_m C_m)]` at size `n` from
/// `sum_n h_n E[...] t^n = exp(sum_m theta_m/m (e^{i s_m} - 1) t^m) G(t)`.
pub fn joint_cycle_cf_exact(seq: &ThetaSequence, s: &[f64], n: usize) -> Result<Complex64> {
    if s.len() > n {
        return Err(Error::Precond(format!(
            "{} frequencies given for permutations of size {n}",
            s.len()
        )));
    }
    let h = h_coeffs(seq, n)?;
    let hn = check_scaled(&h, n, seq)?;
    let mut log_coeffs = vec![ZERO; n + 1];
    for (k, c) in log_coeffs.iter_mut().enumerate().skip(1) {
        let base = seq.scaled_theta(k) / k as f64;
        // g(t) term plus the (e^{i s_k} - 1) correction collapse to e^{i s_k}
        *c = match s.get(k - 1) {
            Some(&sk) => Complex64::from_polar(base, sk),
            None => Complex64::new(base, 0.0),
        };
    }
    Ok(extract_exp(log_coeffs, n) / hn)
}

/// Limit of `E[|p_n(z)|^2]`: `G(r|z|^2) / (G(rz) G(r conj z))`.
pub fn second_moment_limit(seq: &ThetaSequence, z: Complex64) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("|z| = {} must be < 1", z.norm())));
    }
    let r = seq.radius();
    let num = seq.big_g(Complex64::new(r * z.norm_sqr(), 0.0))?;
    let den = seq.big_g(z * r)? * seq.big_g(z.conj() * r)?;
    Ok((num / den).re)
}

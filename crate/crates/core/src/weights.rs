//! Weight families `Theta = (theta_k)` and their generating functions
//! `g(z) = sum_k theta_k z^k / k` and `G(z) = exp(g(z))`.
//!
//! Every family carries a parametric tail `theta_k = theta * rho^{-k}` so that
//! `g` has a logarithmic singularity `-gamma log(1 - z/r) + K` at `r = rho`.
//! The triple `(r, gamma, K)` is stored as declared metadata.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `theta_k = theta`.
    Ewens { theta: f64 },
    /// `theta_k = theta * rho^{-k}`.
    ScaledEwens { theta: f64, rho: f64 },
    /// Explicit `theta_1..theta_m`, then `theta_k = tail_theta * tail_rho^{-k}`.
    Custom {
        prefix: Vec<f64>,
        tail_theta: f64,
        tail_rho: f64,
    },
}

/// A validated weight sequence together with its log-class parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSequence {
    family: Family,
    r: f64,
    gamma: f64,
    k_const: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be a positive finite number, got {v}"
        )))
    }
}

impl ThetaSequence {
    pub fn ewens(theta: f64) -> Result<Self> {
        check_positive("theta", theta)?;
        Ok(Self {
            family: Family::Ewens { theta },
            r: 1.0,
            gamma: theta,
            k_const: 0.0,
        })
    }

    pub fn scaled_ewens(theta: f64, rho: f64) -> Result<Self> {
        check_positive("theta", theta)?;
        check_positive("rho", rho)?;
        Ok(Self {
            family: Family::ScaledEwens { theta, rho },
            r: rho,
            gamma: theta,
            k_const: 0.0,
        })
    }

    pub fn custom(prefix: Vec<f64>, tail_theta: f64, tail_rho: f64) -> Result<Self> {
        for (i, &t) in prefix.iter().enumerate() {
            check_positive(&format!("theta_{}", i + 1), t)?;
        }
        check_positive("tail theta", tail_theta)?;
        check_positive("tail rho", tail_rho)?;
        Ok(Self {
            family: Family::Custom {
                prefix,
                tail_theta,
                tail_rho,
            },
            r: tail_rho,
            gamma: tail_theta,
            k_const: 0.0,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Radius of convergence `r` of `g`.
    pub fn radius(&self) -> f64 {
        self.r
    }

    /// Log-class exponent `gamma`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Log-class constant `K`.
    pub fn k_const(&self) -> f64 {
        self.k_const
    }

    fn tail(&self) -> (f64, f64) {
        match &self.family {
            Family::Ewens { theta } => (*theta, 1.0),
            Family::ScaledEwens { theta, rho } => (*theta, *rho),
            Family::Custom {
                tail_theta, tail_rho, ..
            } => (*tail_theta, *tail_rho),
        }
    }

    fn prefix(&self) -> &[f64] {
        match &self.family {
            Family::Custom { prefix, .. } => prefix,
            _ => &[],
        }
    }

    /// `theta_k` for `k >= 1`.
    pub fn theta(&self, k: usize) -> f64 {
        assert!(k >= 1, "theta_k is indexed from k = 1");
        let prefix = self.prefix();
        if k <= prefix.len() {
            return prefix[k - 1];
        }
        let (theta, rho) = self.tail();
        if rho == 1.0 {
            theta
        } else {
            theta * rho.powi(-(k as i32))
        }
    }

    /// `theta_k * r^k`, the weight seen in the rescaled variable `u = t / r`.
    ///
    /// On the parametric tail this equals the tail `theta` exactly, so no
    /// power of `r` is ever formed there.
    pub fn scaled_theta(&self, k: usize) -> f64 {
        assert!(k >= 1, "theta_k is indexed from k = 1");
        let prefix = self.prefix();
        if k <= prefix.len() {
            prefix[k - 1] * self.r.powi(k as i32)
        } else {
            self.tail().0
        }
    }

    /// Upper bound on `theta_k r^k` over all `k`.
    pub fn max_scaled_theta(&self) -> f64 {
        (1..=self.prefix().len())
            .map(|k| self.scaled_theta(k))
            .fold(self.tail().0, f64::max)
    }

    /// Number of explicit prefix weights (zero for the parametric families).
    pub fn prefix_len(&self) -> usize {
        self.prefix().len()
    }

    fn check_domain(&self, z: Complex64) -> Result<()> {
        if z.norm() < self.r {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "|z| = {} must be strictly below the radius r = {}",
                z.norm(),
                self.r
            )))
        }
    }

    /// `g(z) = sum_k theta_k z^k / k` for `|z| < r`, principal-branch log.
    pub fn g(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        let (theta, rho) = self.tail();
        let one = Complex64::new(1.0, 0.0);
        let mut acc = -theta * (one - z / rho).ln();
        // prefix correction: replace the tail terms k <= m by the explicit weights
        let mut zk = one;
        for (i, &t) in self.prefix().iter().enumerate() {
            let k = i + 1;
            zk *= z;
            let tail_k = theta * rho.powi(-(k as i32));
            acc += (t - tail_k) / k as f64 * zk;
        }
        Ok(acc)
    }

    /// `G(z) = exp(g(z))` for `|z| < r`.
    pub fn big_g(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.g(z)?.exp())
    }
}

impl fmt::Display for ThetaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Ewens { theta } => write!(f, "ewens:{theta}"),
            Family::ScaledEwens { theta, rho } => write!(f, "scaled:{theta}:{rho}"),
            Family::Custom {
                prefix,
                tail_theta,
                tail_rho,
            } => {
                let p: Vec<String> = prefix.iter().map(|t| t.to_string()).collect();
                write!(f, "custom:{}|{tail_theta}:{tail_rho}", p.join(","))
            }
        }
    }
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("invalid {what} `{s}`")))
}

impl FromStr for ThetaSequence {
    type Err = Error;

    /// Parses `ewens:THETA`, `scaled:THETA:RHO` or `custom:T1,...,Tk|THETA:RHO`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("family `{s}` has no `kind:` prefix")))?;
        match kind.to_ascii_lowercase().as_str() {
            "ewens" => Self::ewens(parse_num(rest, "theta")?),
            "scaled" => {
                let (t, r) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("expected scaled:THETA:RHO, got `{s}`")))?;
                Self::scaled_ewens(parse_num(t, "theta")?, parse_num(r, "rho")?)
            }
            "custom" => {
                let (prefix, tail) = rest
                    .split_once('|')
                    .ok_or_else(|| Error::Parse(format!("custom family `{s}` needs a `|THETA:RHO` tail")))?;
                let prefix = if prefix.trim().is_empty() {
                    Vec::new()
                } else {
                    prefix
                        .split(',')
                        .map(|t| parse_num(t, "prefix weight"))
                        .collect::<Result<Vec<_>>>()?
                };
                let (t, r) = tail
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("expected tail THETA:RHO, got `{tail}`")))?;
                Self::custom(prefix, parse_num(t, "tail theta")?, parse_num(r, "tail rho")?)
            }
            other => Err(Error::Parse(format!("unknown family kind `{other}`"))),
        }
    }
}

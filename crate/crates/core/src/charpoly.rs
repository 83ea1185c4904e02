//! `p_n(z) = det(1 - zA) = prod_k (1 - z^k)^{C_k}` for a permutation matrix
//! `A` of a given cycle type, its traces and its coefficients in `z`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ewens::CycleType;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPolyEval {
    pub z: Complex64,
    pub value: Complex64,
    /// `sum_k C_k log(1 - z^k)`, principal branch per factor.
    pub log_value: Complex64,
}

fn check_open_disk(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("|z| = {} must be < 1", z.norm())))
    }
}

/// `sum_k c_k log(1 - z^k)` over `(k, c_k)` pairs given in increasing `k`;
/// no domain check.
pub fn log_product<I>(factors: I, z: Complex64) -> Complex64
where
    I: IntoIterator<Item = (usize, u64)>,
{
    let one = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut zk = one;
    let mut k_prev = 0usize;
    for (k, c) in factors {
        zk *= z.powu((k - k_prev) as u32);
        k_prev = k;
        // z^k underflows to zero long before it matters
        if zk == Complex64::new(0.0, 0.0) {
            break;
        }
        acc += (one - zk).ln() * c as f64;
    }
    acc
}

pub fn eval_charpoly(ct: &CycleType, z: Complex64) -> Result<CharPolyEval> {
    check_open_disk(z)?;
    let log_value = log_product(ct.nonzero().map(|(k, c)| (k, c as u64)), z);
    Ok(CharPolyEval {
        z,
        value: log_value.exp(),
        log_value,
    })
}

/// `Tr[A^k] = sum_{l | k, l <= n} l C_l` for `k = 1..=k_max`.
pub fn traces(ct: &CycleType, k_max: usize) -> Vec<u64> {
    (1..=k_max)
        .map(|k| {
            ct.nonzero()
                .filter(|(l, _)| k % l == 0)
                .map(|(l, c)| (l as u64) * c as u64)
                .sum()
        })
        .collect()
}

/// Coefficients `xi_0..=xi_m` of `p_n(z) = sum_k xi_k z^k` from the traces
/// through Newton's identities `k xi_k = -sum_{j=1}^k Tr[A^j] xi_{k-j}`.
///
/// The recursion runs in exact integer arithmetic; it fails with
/// [`Error::Overflow`] once a coefficient leaves `i128`.
pub fn secular_coeffs(ct: &CycleType, m: usize) -> Result<Vec<Complex64>> {
    Ok(secular_coeffs_exact(ct, m)?
        .into_iter()
        .map(|x| Complex64::new(x as f64, 0.0))
        .collect())
}

/// Integer form of [`secular_coeffs`].
pub fn secular_coeffs_exact(ct: &CycleType, m: usize) -> Result<Vec<i128>> {
    let n = ct.n();
    if m > n {
        return Err(Error::Index(format!("coefficient index {m} exceeds degree {n}")));
    }
    let tr: Vec<i128> = traces(ct, m).into_iter().map(i128::from).collect();
    let overflow = || Error::Overflow(format!("secular coefficient beyond i128 for n = {n}"));
    let mut xi = vec![0i128; m + 1];
    xi[0] = 1;
    for k in 1..=m {
        let mut s: i128 = 0;
        for j in 1..=k {
            s = tr[j - 1]
                .checked_mul(xi[k - j])
                .and_then(|t| s.checked_add(t))
                .ok_or_else(overflow)?;
        }
        debug_assert_eq!(s % k as i128, 0);
        xi[k] = -s / k as i128;
    }
    Ok(xi)
}

//! Scalar special functions used by the closed-form expressions.
//!
//! Every polynomial degree is checked against [`crate::MAX_DEGREE`].
//! Combinatorial factors at integer arguments go through [`exact`] so that
//! factorial ratios are formed without floating-point cancellation.

pub mod exact;
mod k16;

pub use k16::{exton_k16, K16Arguments};

use crate::error::{Error, Result};
use crate::MAX_DEGREE;

pub(crate) fn check_degree(n: u32) -> Result<()> {
    if n > MAX_DEGREE {
        Err(Error::DegreeLimit {
            degree: n,
            bound: MAX_DEGREE,
        })
    } else {
        Ok(())
    }
}

fn as_integer(v: f64) -> Option<i64> {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        Some(v as i64)
    } else {
        None
    }
}

/// Physicists' Hermite polynomial `H_n(x)` (`H_0 = 1`, `H_1 = 2x`) via
/// `H_{n+1} = 2x H_n - 2n H_{n-1}`.
pub fn hermite_phys(n: u32, x: f64) -> Result<f64> {
    check_degree(n)?;
    Ok(hermite_unchecked(n, x))
}

pub(crate) fn hermite_unchecked(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Legendre polynomial `P_n(z)` by Bonnet's recurrence. `z` is not restricted
/// to `[-1, 1]`.
pub fn legendre(n: u32, z: f64) -> Result<f64> {
    check_degree(n)?;
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = z;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * z * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Rising factorial `(a)_k = a (a+1) ... (a+k-1)`, `(a)_0 = 1`.
///
/// Integer `a` is evaluated exactly and rounded once.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    match as_integer(a) {
        Some(ai) => {
            let v = exact::pochhammer_int(ai, k);
            exact::signed_ratio_to_f64(&v, &num_bigint::BigUint::from(1u8))
        }
        None => (0..k).map(|i| a + i as f64).product(),
    }
}

/// Generalized binomial `C(x, j)`, a polynomial in `x`.
fn binomial_general(x: f64, j: u32) -> f64 {
    match as_integer(x) {
        Some(xi) => {
            let v = exact::binomial_general_int(xi, j);
            exact::signed_ratio_to_f64(&v, &num_bigint::BigUint::from(1u8))
        }
        None => (0..j).map(|i| x - i as f64).product::<f64>() * exact::inv_factorial(j),
    }
}

/// Jacobi polynomial `P_n^{(alpha, beta)}(z)` from the finite sum
/// `sum_s C(n+alpha, n-s) C(n+beta, s) ((z-1)/2)^s ((z+1)/2)^(n-s)`.
///
/// The binomials are the polynomial extension in their upper argument, so
/// negative integer parameters give the usual limiting polynomial.
pub fn jacobi(n: u32, alpha: f64, beta: f64, z: f64) -> Result<f64> {
    check_degree(n)?;
    let nf = n as f64;
    let lo = (z - 1.0) / 2.0;
    let hi = (z + 1.0) / 2.0;
    let mut acc = 0.0;
    for s in 0..=n {
        let c = binomial_general(nf + alpha, n - s) * binomial_general(nf + beta, s);
        if c != 0.0 {
            acc += c * lo.powi(s as i32) * hi.powi((n - s) as i32);
        }
    }
    Ok(acc)
}

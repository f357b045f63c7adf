//! Exact integer combinatorics, converted to `f64` only at the end.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

/// Factorials are tabulated up to this argument. Generous relative to
/// `MAX_DEGREE` because Pochhammer chains in the K16 series reach `2 * MAX_DEGREE`.
pub(crate) const TABLE_LEN: usize = 2 * crate::MAX_DEGREE as usize + 2;

struct Tables {
    exact: Vec<BigUint>,
    fact: Vec<f64>,
    inv_fact: Vec<f64>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut exact = Vec::with_capacity(TABLE_LEN);
        let mut acc = BigUint::one();
        exact.push(acc.clone());
        for n in 1..TABLE_LEN {
            acc *= n as u64;
            exact.push(acc.clone());
        }
        let fact: Vec<f64> = exact.iter().map(big_to_f64).collect();
        let inv_fact = exact.iter().map(|f| ratio_to_f64(&BigUint::one(), f)).collect();
        Tables {
            exact,
            fact,
            inv_fact,
        }
    })
}

fn big_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

/// Correctly scaled quotient of two big integers. Both operands are shifted so
/// the conversion never overflows even when the parts individually would.
pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (num >> shift_n as usize).to_f64().unwrap();
    let d = (den >> shift_d as usize).to_f64().unwrap();
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

pub(crate) fn signed_ratio_to_f64(num: &BigInt, den: &BigUint) -> f64 {
    let mag = ratio_to_f64(num.magnitude(), den);
    if num.sign() == num_bigint::Sign::Minus {
        -mag
    } else {
        mag
    }
}

/// `n!` as an exact big integer.
pub fn factorial_exact(n: u32) -> BigUint {
    let n = n as usize;
    if n < TABLE_LEN {
        tables().exact[n].clone()
    } else {
        (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
    }
}

/// `n!` rounded once from the exact value.
pub fn factorial(n: u32) -> f64 {
    let n = n as usize;
    if n < TABLE_LEN {
        tables().fact[n]
    } else {
        big_to_f64(&factorial_exact(n as u32))
    }
}

/// `1/n!` rounded once from the exact value.
pub fn inv_factorial(n: u32) -> f64 {
    let n = n as usize;
    if n < TABLE_LEN {
        tables().inv_fact[n]
    } else {
        ratio_to_f64(&BigUint::one(), &factorial_exact(n as u32))
    }
}

/// `sqrt(n_1! n_2! ... )` with the product formed exactly.
pub fn sqrt_factorial_product(ns: &[u32]) -> f64 {
    let prod = ns
        .iter()
        .fold(BigUint::one(), |acc, &n| acc * factorial_exact(n));
    big_to_f64(&prod).sqrt()
}

/// Binomial coefficient `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= (n - i) as u64;
        acc /= (i + 1) as u64;
    }
    acc
}

/// Rising factorial `(a)_k` for integer `a`, exactly.
pub fn pochhammer_int(a: i64, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k as i64 {
        let f = a + i;
        if f == 0 {
            return BigInt::zero();
        }
        acc *= f;
    }
    acc
}

/// Generalized binomial `C(x, j) = x (x-1) ... (x-j+1) / j!` for integer `x`
/// (which may be negative). Always an integer.
pub fn binomial_general_int(x: i64, j: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..j as i64 {
        acc *= x - i;
    }
    acc / BigInt::from(factorial_exact(j))
}

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::exact;
use crate::error::{Error, Result};

/// Arguments of Exton's K16 series
///
/// `K16(a1, a2, a3, a4; b; x, y, z, t) = sum (a1)_{m1+m2} (a2)_{m2+m3} (a3)_{m3+m4} (a4)_{m4+m1}
///     / (b)_{m1+m2+m3+m4} * x^m1 y^m2 z^m3 t^m4 / (m1! m2! m3! m4!)`
///
/// restricted to non-positive integer upper parameters, where the series is a
/// polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K16Arguments {
    alpha: [i64; 4],
    pub beta: f64,
    /// `(x, y, z, t)`.
    pub vars: [f64; 4],
}

impl K16Arguments {
    pub fn new(alpha: [i64; 4], beta: f64, vars: [f64; 4]) -> Result<Self> {
        if let Some(&a) = alpha.iter().find(|&&a| a > 0) {
            return Err(Error::K16Parameter(a));
        }
        let bound = 2 * crate::MAX_DEGREE as i64;
        if let Some(&a) = alpha.iter().find(|&&a| -a > bound) {
            return Err(Error::DegreeLimit {
                degree: (-a) as u32,
                bound: bound as u32,
            });
        }
        Ok(Self { alpha, beta, vars })
    }

    pub fn alpha(&self) -> [i64; 4] {
        self.alpha
    }
}

/// `(beta)_j` as an exact integer when `beta` is integral, `None` otherwise.
fn beta_rising_int(beta: f64, j: u32) -> Option<BigInt> {
    (beta.fract() == 0.0 && beta.abs() < 1e15).then(|| exact::pochhammer_int(beta as i64, j))
}

/// Evaluates the truncated K16 polynomial.
///
/// Terms whose numerator Pochhammer chain vanishes are never generated, so the
/// denominator `(beta)_j` is only inspected for surviving terms; a vanishing
/// one there is reported as [`Error::K16Pole`].
pub fn exton_k16(args: &K16Arguments) -> Result<f64> {
    let [a1, a2, a3, a4] = args.alpha.map(|a| (-a) as u32);
    let [x, y, z, t] = args.vars;
    let beta = args.beta;

    let mut acc = 0.0;
    // (-a)_j vanishes for j > a, which bounds every paired index sum.
    for m1 in 0..=a1.min(a4) {
        for m2 in 0..=(a1 - m1).min(a2) {
            for m3 in 0..=(a2 - m2).min(a3) {
                for m4 in 0..=(a3 - m3).min(a4 - m1) {
                    let total = m1 + m2 + m3 + m4;
                    let num: BigInt = exact::pochhammer_int(-(a1 as i64), m1 + m2)
                        * exact::pochhammer_int(-(a2 as i64), m2 + m3)
                        * exact::pochhammer_int(-(a3 as i64), m3 + m4)
                        * exact::pochhammer_int(-(a4 as i64), m4 + m1);
                    if num.is_zero() {
                        continue;
                    }
                    let fact: BigUint = [m1, m2, m3, m4]
                        .iter()
                        .fold(BigUint::one(), |acc, &m| acc * exact::factorial_exact(m));
                    let coeff = match beta_rising_int(beta, total) {
                        Some(den) => {
                            if den.is_zero() {
                                return Err(Error::K16Pole { beta, index: total });
                            }
                            let den_full = BigInt::from(fact) * den;
                            let mag = exact::ratio_to_f64(num.magnitude(), den_full.magnitude());
                            if num.sign() == den_full.sign() {
                                mag
                            } else {
                                -mag
                            }
                        }
                        None => {
                            let den = super::pochhammer(beta, total);
                            exact::signed_ratio_to_f64(&num, &fact) / den
                        }
                    };
                    acc += coeff
                        * x.powi(m1 as i32)
                        * y.powi(m2 as i32)
                        * z.powi(m3 as i32)
                        * t.powi(m4 as i32);
                }
            }
        }
    }
    Ok(acc)
}

//! Mode spectra, purities and bipartite factorizations.
//!
//! Because the amplitudes obey `k + l + m = N`, each reduced density matrix is
//! already diagonal in the Hermite-function basis: its eigenvalues are the
//! marginal sums of `A^2` along one index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::{mixing_matrix, Angles, Excitation};
use crate::schmidt::SchmidtMatrix;
use crate::specfun::{self, exact};

/// One oscillator against the other two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bipartition {
    #[serde(rename = "A|BC")]
    AvsBC,
    #[serde(rename = "B|AC")]
    BvsAC,
    #[serde(rename = "C|AB")]
    CvsAB,
}

impl Bipartition {
    pub const ALL: [Bipartition; 3] = [Bipartition::AvsBC, Bipartition::BvsAC, Bipartition::CvsAB];

    /// Column of the mixing matrix belonging to the isolated oscillator.
    pub fn column(self) -> usize {
        match self {
            Bipartition::AvsBC => 0,
            Bipartition::BvsAC => 1,
            Bipartition::CvsAB => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bipartition::AvsBC => "A|BC",
            Bipartition::BvsAC => "B|AC",
            Bipartition::CvsAB => "C|AB",
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Bipartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" | "A|BC" | "A-BC" => Ok(Bipartition::AvsBC),
            "B" | "B|AC" | "B-AC" => Ok(Bipartition::BvsAC),
            "C" | "C|AB" | "C-AB" => Ok(Bipartition::CvsAB),
            other => Err(Error::InvalidInput(format!(
                "unknown bipartition '{other}' (expected A, B or C)"
            ))),
        }
    }
}

/// Which oscillator carries the excitation in a single-axis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    N1,
    N2,
    N3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::N1, Axis::N2, Axis::N3];

    /// Row of the mixing matrix feeding this normal coordinate.
    pub fn row(self) -> usize {
        match self {
            Axis::N1 => 0,
            Axis::N2 => 1,
            Axis::N3 => 2,
        }
    }

    /// The excitation with `n` quanta on this axis.
    pub fn excitation(self, n: u32) -> Result<Excitation> {
        match self {
            Axis::N1 => Excitation::new(n, 0, 0),
            Axis::N2 => Excitation::new(0, n, 0),
            Axis::N3 => Excitation::new(0, 0, n),
        }
    }

    /// `Some((axis, n))` when exactly one quantum number is non-zero.
    pub fn of(n: &Excitation) -> Option<(Axis, u32)> {
        let arr = n.as_array();
        let mut nonzero = arr.iter().enumerate().filter(|(_, &v)| v > 0);
        let (i, &v) = nonzero.next()?;
        if nonzero.next().is_some() {
            return None;
        }
        Some((Axis::ALL[i], v))
    }
}

/// Eigenvalues of one reduced density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub bipartition: Bipartition,
    pub values: Vec<f64>,
}

impl ModeSpectrum {
    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    /// `-sum v ln v` with `0 ln 0 = 0`.
    pub fn von_neumann_entropy(&self) -> f64 {
        self.values
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| -v * v.ln())
            .sum()
    }
}

pub fn mode_spectrum(a: &SchmidtMatrix, p: Bipartition) -> ModeSpectrum {
    let n = a.total();
    let values = (0..=n)
        .map(|i| match p {
            Bipartition::AvsBC => (0..=n - i).map(|l| a.get(i, l).powi(2)).sum(),
            Bipartition::BvsAC => (0..=n - i).map(|k| a.get(k, i).powi(2)).sum(),
            Bipartition::CvsAB => (0..=n - i).map(|k| a.get(k, n - k - i).powi(2)).sum(),
        })
        .collect();
    ModeSpectrum {
        bipartition: p,
        values,
    }
}

/// `tr rho^2 = sum v^2`.
pub fn purity(s: &ModeSpectrum) -> f64 {
    s.values.iter().map(|v| v * v).sum()
}

/// Half-width of the window around `s^2 = 1/2` where the Legendre form is
/// replaced by the binomial sum.
pub const LEGENDRE_SINGULAR_WINDOW: f64 = 1e-6;

/// Purity of a single-axis excitation with `n` quanta:
///
/// ```text
/// ((1 - s^2)^2 - s^4)^n  P_n( ((1 - s^2)^2 + s^4) / ((1 - s^2)^2 - s^4) )
/// ```
///
/// where `s` is the mixing-matrix entry in the axis row and the bipartition
/// column. Near `s^2 = 1/2` the equivalent sum
/// `sum_k C(n,k)^2 s^{4k} (1 - s^2)^{2(n-k)}` is used instead.
pub fn closed_form_purity(axis: Axis, p: Bipartition, n: u32, angles: &Angles) -> Result<f64> {
    if n == 0 {
        return Err(Error::NotSingleAxis);
    }
    specfun::check_degree(n)?;
    let s = mixing_matrix(angles).get(axis.row(), p.column());
    let u = s * s;
    let v = 1.0 - u;
    if (u - 0.5).abs() < LEGENDRE_SINGULAR_WINDOW {
        let mut acc = 0.0;
        for k in 0..=n {
            let c = exact::binomial(n, k);
            let c = exact::ratio_to_f64(&c, &num_bigint::BigUint::from(1u8));
            acc += c * c * u.powi(2 * k as i32) * v.powi(2 * (n - k) as i32);
        }
        return Ok(acc);
    }
    // (1 - u)^2 - u^2 == 1 - 2u exactly; the short form avoids cancellation.
    let diff = 1.0 - 2.0 * u;
    let sum = v * v + u * u;
    Ok(diff.powi(n as i32) * specfun::legendre(n, sum / diff)?)
}

/// One Schmidt term: the weight, the index on the isolated oscillator and the
/// normalized partner state on the other two.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTerm {
    pub index: u32,
    pub weight: f64,
    /// `((i, j), amplitude)` on the two-particle product basis. For `A|BC` the
    /// pair is `(l, m)`, for `B|AC` it is `(k, m)`, for `C|AB` it is `(k, l)`.
    pub partner: Vec<((u32, u32), f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteFactorization {
    pub bipartition: Bipartition,
    pub excitation: Excitation,
    pub terms: Vec<SchmidtTerm>,
}

/// Schmidt weights `sqrt(alpha)` below this are dropped; their partner states
/// are undefined. The cut is on the weight, not on `alpha`, so a dropped term
/// carries amplitudes of at most this size.
pub const ZERO_WEIGHT: f64 = 1e-14;

impl BipartiteFactorization {
    /// Gram matrix of the partner states.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let maps: Vec<BTreeMap<(u32, u32), f64>> = self
            .terms
            .iter()
            .map(|t| t.partner.iter().copied().collect())
            .collect();
        maps.iter()
            .map(|a| {
                maps.iter()
                    .map(|b| a.iter().map(|(key, va)| va * b.get(key).unwrap_or(&0.0)).sum())
                    .collect()
            })
            .collect()
    }

    /// `sum weight^2`.
    pub fn weight_norm_sq(&self) -> f64 {
        self.terms.iter().map(|t| t.weight * t.weight).sum()
    }

    /// Reassembles `sum_i w_i |i> (x) |partner_i>` as amplitudes.
    pub fn reconstruct(&self) -> SchmidtMatrix {
        let n = self.excitation.total();
        let entries = self.terms.iter().flat_map(|t| {
            t.partner.iter().map(move |&((i, j), amp)| {
                let (k, l) = match self.bipartition {
                    Bipartition::AvsBC => (t.index, i),
                    Bipartition::BvsAC => (i, t.index),
                    Bipartition::CvsAB => (i, j),
                };
                debug_assert!(k + l <= n);
                (k, l, t.weight * amp)
            })
        });
        SchmidtMatrix::from_entries(self.excitation, entries)
            .expect("partner indices stay inside the triangle")
    }
}

pub fn bipartite_factorization(a: &SchmidtMatrix, p: Bipartition) -> BipartiteFactorization {
    let n = a.total();
    let spectrum = mode_spectrum(a, p);
    let mut terms = Vec::new();
    for (i, &w2) in spectrum.values.iter().enumerate() {
        let weight = w2.sqrt();
        if weight < ZERO_WEIGHT {
            continue;
        }
        let i = i as u32;
        let partner = (0..=n - i)
            .map(|j| {
                let (pair, amp) = match p {
                    Bipartition::AvsBC => ((j, n - i - j), a.get(i, j)),
                    Bipartition::BvsAC => ((j, n - i - j), a.get(j, i)),
                    Bipartition::CvsAB => ((j, n - i - j), a.get(j, n - i - j)),
                };
                (pair, amp / weight)
            })
            .collect();
        terms.push(SchmidtTerm {
            index: i,
            weight,
            partner,
        });
    }
    BipartiteFactorization {
        bipartition: p,
        excitation: a.excitation(),
        terms,
    }
}

/// Two-oscillator amplitudes
/// `A^k = sqrt(k! (N-k)! / (n1! n2!)) (-sin phi)^(n1-k) (cos phi)^(n2-k) P_k^(n1-k, n2-k)(cos 2 phi)`
/// for `k = 0..=n1+n2`.
///
/// The Jacobi series is expanded and multiplied through by the trigonometric
/// prefactor term by term, which leaves only non-negative powers and keeps the
/// expression finite at `sin phi = 0` and `cos phi = 0`.
pub fn jacobi_coefficients(n1: u32, n2: u32, phi: f64) -> Result<Vec<f64>> {
    let total = n1 + n2;
    specfun::check_degree(total)?;
    let (sp, cp) = phi.sin_cos();
    let one = num_bigint::BigUint::from(1u8);
    let mut out = Vec::with_capacity(total as usize + 1);
    for k in 0..=total {
        let mut acc = 0.0;
        for s in k.saturating_sub(n1)..=k.min(n2) {
            let c = exact::binomial(n1, k - s) * exact::binomial(n2, s);
            let c = exact::ratio_to_f64(&c, &one);
            let sign_exp = s + n1 + k; // parity of s + (n1 - k)
            let sign = if sign_exp % 2 == 0 { 1.0 } else { -1.0 };
            let sin_pow = (2 * s + n1) as i32 - k as i32;
            let cos_pow = (k + n2) as i32 - 2 * s as i32;
            acc += sign * c * sp.powi(sin_pow) * cp.powi(cos_pow);
        }
        let norm = exact::sqrt_factorial_product(&[k, total - k])
            / exact::sqrt_factorial_product(&[n1, n2]);
        out.push(norm * acc);
    }
    Ok(out)
}

/// Two-oscillator Schmidt weights `lambda_k = (A^k)^2`.
pub fn makarov_lambda(n1: u32, n2: u32, phi: f64) -> Result<Vec<f64>> {
    Ok(jacobi_coefficients(n1, n2, phi)?
        .into_iter()
        .map(|a| a * a)
        .collect())
}

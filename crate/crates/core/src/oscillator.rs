//! Physical model: mixing angles, the orthogonal mixing matrix, normal
//! coordinates, the normal-frequency to coupling map and energy levels.
//!
//! The normal coordinates are `q = M (mu ∘ x)` with rows of `M` labelled
//! `(a1, a2, a3)`, `(b1, b2, b3)`, `(c1, c2, c3)`. The potential energy
//! `sum_i Sigma_i^2 q_i^2 / 2` pulls back to `x^T K x / 2` with
//!
//! ```text
//! K = M^T diag(Sigma_1^2, Sigma_2^2, Sigma_3^2) M
//! ```
//!
//! which is the orientation reproduced by [`coupling_matrix`]: its diagonal is
//! `(omega_1^2, omega_2^2, omega_3^2)` and its off-diagonal entries are the
//! couplings `J_12, J_13, J_23`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::MAX_DEGREE;

/// Mixing-angle triple in radians.
///
/// `phi` enters `b1 = sin(phi)`; `vphi` enters `b2 = cos(phi) cos(vphi)`.
/// Any finite reals are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Angles {
    pub theta: f64,
    pub vphi: f64,
    pub phi: f64,
}

impl Angles {
    pub const fn new(theta: f64, vphi: f64, phi: f64) -> Self {
        Self { theta, vphi, phi }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta, self.vphi, self.phi]
    }
}

/// Quantum numbers `(n1, n2, n3)` of an eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 3]", into = "[u32; 3]")]
pub struct Excitation {
    n: [u32; 3],
}

impl Excitation {
    pub fn new(n1: u32, n2: u32, n3: u32) -> Result<Self> {
        let total = n1 as u64 + n2 as u64 + n3 as u64;
        if total > MAX_DEGREE as u64 {
            return Err(Error::DegreeLimit {
                degree: total.min(u32::MAX as u64) as u32,
                bound: MAX_DEGREE,
            });
        }
        Ok(Self { n: [n1, n2, n3] })
    }

    pub fn ground() -> Self {
        Self { n: [0; 3] }
    }

    pub fn n1(&self) -> u32 {
        self.n[0]
    }

    pub fn n2(&self) -> u32 {
        self.n[1]
    }

    pub fn n3(&self) -> u32 {
        self.n[2]
    }

    pub fn as_array(&self) -> [u32; 3] {
        self.n
    }

    /// `N = n1 + n2 + n3`.
    pub fn total(&self) -> u32 {
        self.n.iter().sum()
    }

    /// Every excitation with total degree exactly `total`, lexicographic.
    pub fn with_total(total: u32) -> Vec<Self> {
        let mut out = Vec::new();
        for n1 in 0..=total {
            for n2 in 0..=total - n1 {
                out.push(Self {
                    n: [n1, n2, total - n1 - n2],
                });
            }
        }
        out
    }

    /// Every excitation with total degree at most `max_total`.
    pub fn up_to(max_total: u32) -> Vec<Self> {
        (0..=max_total).flat_map(Self::with_total).collect()
    }
}

impl TryFrom<[u32; 3]> for Excitation {
    type Error = Error;

    fn try_from(n: [u32; 3]) -> Result<Self> {
        Self::new(n[0], n[1], n[2])
    }
}

impl From<Excitation> for [u32; 3] {
    fn from(e: Excitation) -> Self {
        e.n
    }
}

/// The 3x3 orthogonal matrix with rows `a`, `b`, `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingMatrix {
    rows: [[f64; 3]; 3],
}

impl MixingMatrix {
    pub fn identity() -> Self {
        Self {
            rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Wraps raw rows without checking orthogonality.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    /// Entry in `row` (0 = a, 1 = b, 2 = c) and `col` (0-based).
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.rows[row][col]
    }

    pub fn a(&self) -> [f64; 3] {
        self.rows[0]
    }

    pub fn b(&self) -> [f64; 3] {
        self.rows[1]
    }

    pub fn c(&self) -> [f64; 3] {
        self.rows[2]
    }

    pub fn apply(&self, x: [f64; 3]) -> [f64; 3] {
        let r = &self.rows;
        [0, 1, 2].map(|i| r[i][0] * x[0] + r[i][1] * x[1] + r[i][2] * x[2])
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self {
            rows: [0, 1, 2].map(|i| [r[0][i], r[1][i], r[2][i]]),
        }
    }

    pub fn det(&self) -> f64 {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// `max |M M^T - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let r = &self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Mixing matrix with the nine trigonometric entries
///
/// ```text
/// a1 = cos θ cos φ            a2 = -sin θ sin ϑ - cos θ cos ϑ sin φ   a3 = cos θ sin φ sin ϑ - sin θ cos ϑ
/// b1 = sin φ                  b2 = cos φ cos ϑ                        b3 = -cos φ sin ϑ
/// c1 = cos φ sin θ            c2 = cos θ sin ϑ - sin θ cos ϑ sin φ    c3 = cos θ cos ϑ + sin θ sin φ sin ϑ
/// ```
///
/// where `ϑ` is `vphi`.
pub fn mixing_matrix(angles: &Angles) -> MixingMatrix {
    let (st, ct) = angles.theta.sin_cos();
    let (sv, cv) = angles.vphi.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    MixingMatrix {
        rows: [
            [ct * cp, -st * sv - ct * cv * sp, ct * sp * sv - st * cv],
            [sp, cp * cv, -cp * sv],
            [cp * st, ct * sv - st * cv * sp, ct * cv + st * sp * sv],
        ],
    }
}

/// Oscillator masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Masses {
    m: [f64; 3],
}

impl Masses {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        let m = [m1, m2, m3];
        if m.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "masses must be positive and finite, got {m:?}"
            )));
        }
        Ok(Self { m })
    }

    pub fn equal() -> Self {
        Self { m: [1.0; 3] }
    }

    /// Geometric mean `(m1 m2 m3)^(1/3)`.
    pub fn mean(&self) -> f64 {
        (self.m[0] * self.m[1] * self.m[2]).cbrt()
    }

    /// `mu_i = sqrt(m_i / m)`; their product is one.
    pub fn scalings(&self) -> [f64; 3] {
        let mean = self.mean();
        self.m.map(|mi| (mi / mean).sqrt())
    }
}

/// `q_i = sum_j M[i][j] mu_j x_j`.
pub fn normal_coordinates(angles: &Angles, masses: &Masses, x: [f64; 3]) -> [f64; 3] {
    let mu = masses.scalings();
    mixing_matrix(angles).apply([mu[0] * x[0], mu[1] * x[1], mu[2] * x[2]])
}

/// Squared normal-mode frequencies `(Sigma_1^2, Sigma_2^2, Sigma_3^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFrequenciesSq {
    s: [f64; 3],
}

impl NormalFrequenciesSq {
    pub fn new(s1: f64, s2: f64, s3: f64) -> Result<Self> {
        let s = [s1, s2, s3];
        if s.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "squared normal frequencies must be positive, got {s:?}"
            )));
        }
        Ok(Self { s })
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.s
    }
}

/// Unit system. Defaults to `hbar = mean_mass = varpi = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScales {
    pub hbar: f64,
    pub mean_mass: f64,
    pub varpi: f64,
}

impl Default for PhysicalScales {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mean_mass: 1.0,
            varpi: 1.0,
        }
    }
}

impl PhysicalScales {
    pub fn new(hbar: f64, mean_mass: f64, varpi: f64) -> Result<Self> {
        if [hbar, mean_mass, varpi]
            .iter()
            .any(|&v| !(v.is_finite() && v > 0.0))
        {
            return Err(Error::InvalidInput(
                "physical scales must be positive".into(),
            ));
        }
        Ok(Self {
            hbar,
            mean_mass,
            varpi,
        })
    }

    /// Scales whose `varpi` is the geometric-mean frequency of `sigma_sq`.
    pub fn for_frequencies(hbar: f64, mean_mass: f64, sigma_sq: &NormalFrequenciesSq) -> Result<Self> {
        Self::new(hbar, mean_mass, frequency_geometry(sigma_sq).varpi)
    }

    /// Oscillator length `sqrt(hbar / (m varpi))` that makes positions dimensionless.
    pub fn oscillator_length(&self) -> f64 {
        (self.hbar / (self.mean_mass * self.varpi)).sqrt()
    }
}

/// Symmetric coupling matrix: diagonal `omega_i^2`, off-diagonal `J_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix {
    k: [[f64; 3]; 3],
}

impl CouplingMatrix {
    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.k
    }

    /// `omega_{i+1}^2`.
    pub fn omega_sq(&self, i: usize) -> f64 {
        self.k[i][i]
    }

    /// `J_{i+1, j+1}`.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.k[i][j]
    }

    /// `D_ij = 2 sqrt(m_i m_j) J_ij`, the bare bilinear couplings.
    pub fn bare_couplings(&self, masses: &Masses) -> [f64; 3] {
        let m = masses.m;
        [(0, 1), (0, 2), (1, 2)].map(|(i, j)| 2.0 * (m[i] * m[j]).sqrt() * self.k[i][j])
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let m = nalgebra::Matrix3::from_fn(|i, j| self.k[i][j]);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2]]
    }
}

/// Squared frequencies `omega_i^2` and couplings `J_ij` as explicit functions of
/// `Sigma^2` and the angles.
pub fn coupling_matrix(sigma_sq: &NormalFrequenciesSq, angles: &Angles) -> CouplingMatrix {
    let [s1, s2, s3] = sigma_sq.s;
    let (st, ct) = angles.theta.sin_cos();
    let (sv, cv) = angles.vphi.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    let (st2, ct2, sv2, cv2, sp2, cp2) = (st * st, ct * ct, sv * sv, cv * cv, sp * sp, cp * cp);
    let s2t = (2.0 * angles.theta).sin();
    let c2t = (2.0 * angles.theta).cos();
    let s2v = (2.0 * angles.vphi).sin();
    let c2v = (2.0 * angles.vphi).cos();
    let s2p = (2.0 * angles.phi).sin();

    let mixed13 = s1 * ct2 + s3 * st2;
    let mixed31 = s3 * ct2 + s1 * st2;
    let cross = (s1 - s3) / 2.0 * s2t * sp * s2v;

    let w1 = mixed13 * cp2 + s2 * sp2;
    let w2 = (s2 * cp2 + mixed13 * sp2) * cv2 + mixed31 * sv2 + cross;
    let w3 = mixed31 * cv2 + (s2 * cp2 + mixed13 * sp2) * sv2 - cross;

    let split = ((s1 - s2) * ct2 + (s3 - s2) * st2) / 2.0;
    let j12 = -split * s2p * cv - (s1 - s3) / 2.0 * s2t * cp * sv;
    let j13 = split * s2p * sv - (s1 - s3) / 2.0 * s2t * cp * cv;
    let j23 = (s1 - s3) / 2.0 * s2t * sp * c2v
        - (((s2 - s3) * ct2 - (s1 - s2) * st2) * cp2 + (s1 - s3) * c2t * sp2) / 2.0 * s2v;

    CouplingMatrix {
        k: [[w1, j12, j13], [j12, w2, j23], [j13, j23, w3]],
    }
}

const DEGENERATE_REL: f64 = 1e-12;

/// Ratios `(2 J12 / (w1^2 - w2^2), 2 J13 / (w1^2 - w3^2), 2 J23 / (w2^2 - w3^2))`
/// written directly in terms of `Sigma^2` and the angles.
pub fn coupling_ratios(sigma_sq: &NormalFrequenciesSq, angles: &Angles) -> Result<[f64; 3]> {
    let k = coupling_matrix(sigma_sq, angles);
    let scale = (0..3).map(|i| k.omega_sq(i).abs()).fold(0.0, f64::max);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if (k.omega_sq(i) - k.omega_sq(j)).abs() < DEGENERATE_REL * scale {
            return Err(Error::DegenerateFrequencies { i: i + 1, j: j + 1 });
        }
    }

    let [s1, s2, s3] = sigma_sq.s;
    let (d12, d23, d31) = (s1 - s2, s2 - s3, s3 - s1);
    let (st, ct) = angles.theta.sin_cos();
    let (sv, cv) = angles.vphi.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    let (st2, ct2, sv2, cv2, sp2, cp2) = (st * st, ct * ct, sv * sv, cv * cv, sp * sp, cp * cp);
    let s2t = (2.0 * angles.theta).sin();
    let c2t = (2.0 * angles.theta).cos();
    let s2v = (2.0 * angles.vphi).sin();
    let c2v = (2.0 * angles.vphi).cos();
    let s2p = (2.0 * angles.phi).sin();

    let r12 = (-d12 * ct2 * s2p * cv + d23 * st2 * s2p * cv + d31 * s2t * cp * sv)
        / (d23 * (sp2 - cp2 * cv2)
            + d31 * (st2 * sv2 - ct2 * cp2 + ct2 * sp2 * cv2 + 0.5 * s2t * sp * s2v));
    let r13 = (d12 * ct2 * s2p * sv - d23 * st2 * s2p * sv + d31 * s2t * cp * cv)
        / (d31 * (st2 * cv2 - ct2 * cp2 + ct2 * sp2 * sv2 - 0.5 * s2t * sp * s2v)
            + d23 * (sp2 - cp2 * sv2));
    let r23 = (d31 * (c2t * sp2 * s2v - s2t * sp * c2v) - d23 * ct2 * cp2 * s2v
        + d12 * st2 * cp2 * s2v)
        / (d23 * cp2 * c2v + d31 * (st2 * c2v - ct2 * sp2 * c2v - s2t * sp * s2v));
    Ok([r12, r13, r23])
}

const DEGENERATE_DENOM_ABS: f64 = 1e-12;

/// Angle-only limit of [`coupling_ratios`] when
/// `Sigma_1^2 - Sigma_2^2 = Sigma_2^2 - Sigma_3^2 -> 0`.
pub fn coupling_ratios_degenerate(angles: &Angles) -> Result<[f64; 3]> {
    let (st, ct) = angles.theta.sin_cos();
    let (sv, cv) = angles.vphi.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    let (st2, ct2, sv2, cv2, sp2, cp2) = (st * st, ct * ct, sv * sv, cv * cv, sp * sp, cp * cp);
    let s2t = (2.0 * angles.theta).sin();
    let c2t = (2.0 * angles.theta).cos();
    let s2v = (2.0 * angles.vphi).sin();
    let c2v = (2.0 * angles.vphi).cos();
    let s2p = (2.0 * angles.phi).sin();

    let n12 = -c2t * s2p * cv - 2.0 * s2t * cp * sv;
    let d12 = sp2 - cp2 * cv2 - 2.0 * st2 * sv2 + 2.0 * ct2 * cp2 - 2.0 * ct2 * sp2 * cv2
        - s2t * sp * s2v;
    let n13 = c2t * s2p * sv - 2.0 * s2t * cp * cv;
    let d13 = -2.0 * st2 * cv2 + 2.0 * ct2 * cp2 - 2.0 * ct2 * sp2 * sv2 + s2t * sp * s2v + sp2
        - cp2 * sv2;
    let n23 = -2.0 * c2t * sp2 * s2v + 2.0 * s2t * sp * c2v - c2t * cp2 * s2v;
    let d23 = cp2 * c2v - 2.0 * st2 * c2v + 2.0 * ct2 * sp2 * c2v + 2.0 * s2t * sp * s2v;

    let checked = |n: f64, d: f64, what: &'static str| {
        if d.abs() < DEGENERATE_DENOM_ABS {
            Err(Error::VanishingDenominator(what))
        } else {
            Ok(n / d)
        }
    };
    Ok([
        checked(n12, d12, "2 J12 / (w1^2 - w2^2) degenerate limit")?,
        checked(n13, d13, "2 J13 / (w1^2 - w3^2) degenerate limit")?,
        checked(n23, d23, "2 J23 / (w2^2 - w3^2) degenerate limit")?,
    ])
}

/// Geometric-mean frequency and the three frequency ratios `Sigma_i / varpi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGeometry {
    pub varpi: f64,
    pub ratios: [f64; 3],
}

pub fn frequency_geometry(sigma_sq: &NormalFrequenciesSq) -> FrequencyGeometry {
    let sigma = sigma_sq.s.map(f64::sqrt);
    let varpi = (sigma[0] * sigma[1] * sigma[2]).cbrt();
    FrequencyGeometry {
        varpi,
        ratios: sigma.map(|s| s / varpi),
    }
}

/// `E = hbar varpi (r1 n1 + r2 n2 + r3 n3 + (r1 + r2 + r3) / 2)` with `r_i = Sigma_i / varpi`.
///
/// `varpi` is derived from `sigma_sq`; only `scales.hbar` is read.
pub fn energy(n: &Excitation, sigma_sq: &NormalFrequenciesSq, scales: &PhysicalScales) -> f64 {
    let geo = frequency_geometry(sigma_sq);
    let r = geo.ratios;
    let [n1, n2, n3] = n.n.map(f64::from);
    scales.hbar * geo.varpi * (r[0] * n1 + r[1] * n2 + r[2] * n3 + (r[0] + r[1] + r[2]) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI};

    fn sq(s: [f64; 3]) -> NormalFrequenciesSq {
        NormalFrequenciesSq::new(s[0], s[1], s[2]).unwrap()
    }

    fn congruence(sigma: [f64; 3], m: &MixingMatrix) -> [[f64; 3]; 3] {
        let r = m.rows();
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|p| r[p][i] * sigma[p] * r[p][j]).sum();
            }
        }
        out
    }

    #[test]
    fn mixing_matrix_examples() {
        let id = mixing_matrix(&Angles::new(0.0, 0.0, 0.0));
        assert_eq!(id, MixingMatrix::identity());

        let m = mixing_matrix(&Angles::new(FRAC_PI_4, 0.0, 0.0));
        let want = [
            [FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2],
            [0.0, 1.0, 0.0],
            [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(m.get(i, j), want[i][j], epsilon = 1e-15);
            }
        }

        let m = mixing_matrix(&Angles::new(FRAC_PI_6, FRAC_PI_6, FRAC_PI_6));
        assert!(m.orthogonality_defect() < 1e-12);
        assert_abs_diff_eq!(m.det(), 1.0, epsilon = 1e-12);
        // a1 = cos^2(pi/6), b1 = sin(pi/6).
        assert_abs_diff_eq!(m.get(0, 0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn normal_coordinate_examples() {
        let eq = Masses::equal();
        let q = normal_coordinates(&Angles::default(), &eq, [1.0, 2.0, 3.0]);
        assert_eq!(q, [1.0, 2.0, 3.0]);

        let m = Masses::new(4.0 * 2.5, 2.5, 0.25 * 2.5).unwrap();
        let q = normal_coordinates(&Angles::default(), &m, [1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(q[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q[2], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(q[0] * q[1] * q[2], 1.0, epsilon = 1e-12);

        let q = normal_coordinates(&Angles::new(FRAC_PI_4, 0.0, 0.0), &eq, [1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(q[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q[2], 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn invalid_masses_and_frequencies() {
        assert!(Masses::new(1.0, 0.0, 1.0).is_err());
        assert!(NormalFrequenciesSq::new(1.0, -1.0, 1.0).is_err());
        assert!(PhysicalScales::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn coupling_matrix_examples() {
        let k = coupling_matrix(&sq([4.0, 4.0, 4.0]), &Angles::new(0.3, -1.1, 2.0));
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 4.0 } else { 0.0 };
                assert_abs_diff_eq!(k.entries()[i][j], want, epsilon = 1e-14);
            }
        }
        let k = coupling_matrix(&sq([1.0, 2.0, 3.0]), &Angles::default());
        assert_eq!(
            *k.entries(),
            [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]
        );
        let k = coupling_matrix(&sq([1.0, 2.0, 3.0]), &Angles::new(FRAC_PI_8, FRAC_PI_8, FRAC_PI_8));
        let ev = k.eigenvalues();
        for (e, w) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*e, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn coupling_matrix_is_transpose_congruence() {
        let angles = Angles::new(0.4, -0.9, 1.3);
        let s = [0.7, 2.2, 1.6];
        let k = coupling_matrix(&sq(s), &angles);
        let c = congruence(s, &mixing_matrix(&angles));
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(k.entries()[i][j], c[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn coupling_ratio_examples() {
        let r = coupling_ratios(&sq([1.0, 2.0, 3.0]), &Angles::default()).unwrap();
        assert_eq!(r.map(f64::abs), [0.0; 3]);

        let r = coupling_ratios(&sq([1.0, 2.0, 3.0]), &Angles::new(FRAC_PI_8, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[2], 0.0, epsilon = 1e-15);

        let angles = Angles::new(FRAC_PI_8, FRAC_PI_8, FRAC_PI_8);
        let r = coupling_ratios(&sq([1.0, 2.0, 3.0]), &angles).unwrap();
        let k = coupling_matrix(&sq([1.0, 2.0, 3.0]), &angles);
        let e = k.entries();
        let q = [
            2.0 * e[0][1] / (e[0][0] - e[1][1]),
            2.0 * e[0][2] / (e[0][0] - e[2][2]),
            2.0 * e[1][2] / (e[1][1] - e[2][2]),
        ];
        for i in 0..3 {
            assert!((r[i] - q[i]).abs() <= 1e-10 * q[i].abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_frequencies_rejected() {
        let err = coupling_ratios(&sq([2.0, 2.0, 2.0]), &Angles::new(0.2, 0.1, 0.3)).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrequencies { .. }));
    }

    #[test]
    fn degenerate_ratio_examples() {
        assert_eq!(
            coupling_ratios_degenerate(&Angles::default()).unwrap().map(f64::abs),
            [0.0; 3]
        );
        let r = coupling_ratios_degenerate(&Angles::new(FRAC_PI_8, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(r[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_denominator_reported() {
        // vphi = pi/4 kills every cos(2 vphi) term of the J23 denominator; phi = 0 kills the rest.
        let err = coupling_ratios_degenerate(&Angles::new(0.3, FRAC_PI_4, 0.0)).unwrap_err();
        assert!(matches!(err, Error::VanishingDenominator(s) if s.contains("J23")));
    }

    #[test]
    fn frequency_geometry_examples() {
        let g = frequency_geometry(&sq([1.0, 1.0, 1.0]));
        assert_eq!(g.varpi, 1.0);
        assert_eq!(g.ratios, [1.0; 3]);
        let g = frequency_geometry(&sq([1.0, 4.0, 16.0]));
        assert_abs_diff_eq!(g.varpi, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.ratios[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.ratios[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.ratios[2], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn energy_examples() {
        let unit = PhysicalScales::default();
        let deg = sq([1.0, 1.0, 1.0]);
        assert_eq!(energy(&Excitation::ground(), &deg, &unit), 1.5);
        assert_eq!(energy(&Excitation::new(1, 1, 1).unwrap(), &deg, &unit), 4.5);
        let e = energy(&Excitation::new(1, 0, 0).unwrap(), &sq([1.0, 4.0, 16.0]), &unit);
        assert_abs_diff_eq!(e, 4.5, epsilon = 1e-14);
    }

    #[test]
    fn energy_permutation_behaviour() {
        let unit = PhysicalScales::default();
        let n = Excitation::new(2, 0, 1).unwrap();
        let perm = Excitation::new(0, 1, 2).unwrap();
        let deg = sq([2.5, 2.5, 2.5]);
        assert_abs_diff_eq!(energy(&n, &deg, &unit), energy(&perm, &deg, &unit), epsilon = 1e-13);
        let gen = sq([1.0, 2.0, 5.0]);
        assert!((energy(&n, &gen, &unit) - energy(&perm, &gen, &unit)).abs() > 1e-3);
        // Simultaneous permutation of n and Sigma^2 preserves E.
        let gen_perm = sq([2.0, 5.0, 1.0]);
        assert_abs_diff_eq!(
            energy(&n, &gen, &unit),
            energy(&perm, &gen_perm, &unit),
            epsilon = 1e-13
        );
    }

    #[test]
    fn excitation_bound() {
        assert!(Excitation::new(5, 5, 5).is_ok());
        assert_eq!(
            Excitation::new(20, 20, 20),
            Err(Error::DegreeLimit {
                degree: 60,
                bound: 40
            })
        );
        assert_eq!(Excitation::up_to(3).len(), 20);
    }

    fn angle() -> impl Strategy<Value = f64> {
        -PI..PI
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn mixing_matrix_is_rotation(t in angle(), v in angle(), p in angle()) {
            let m = mixing_matrix(&Angles::new(t, v, p));
            prop_assert!(m.orthogonality_defect() < 1e-12);
            prop_assert!((m.det() - 1.0).abs() < 1e-12);
            for row in m.rows() {
                let norm: f64 = row.iter().map(|x| x * x).sum();
                prop_assert!((norm - 1.0).abs() < 1e-13);
            }
            prop_assert!(m.transpose().orthogonality_defect() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn coupling_spectrum_is_sigma(
            s in proptest::array::uniform3(0.1f64..10.0),
            t in angle(), v in angle(), p in angle(),
        ) {
            let k = coupling_matrix(&sq(s), &Angles::new(t, v, p));
            let mut want = s;
            want.sort_by(f64::total_cmp);
            for (e, w) in k.eigenvalues().iter().zip(want) {
                prop_assert!((e - w).abs() <= 1e-10 * w);
            }
        }

        #[test]
        fn ratios_match_quotients(
            s in proptest::array::uniform3(0.1f64..10.0),
            t in angle(), v in angle(), p in angle(),
        ) {
            let angles = Angles::new(t, v, p);
            let k = coupling_matrix(&sq(s), &angles);
            let e = k.entries();
            let pairs = [(0, 1), (0, 2), (1, 2)];
            let Ok(r) = coupling_ratios(&sq(s), &angles) else { return Ok(()); };
            for (idx, (i, j)) in pairs.into_iter().enumerate() {
                let d = e[i][i] - e[j][j];
                if d.abs() > 1e-8 {
                    let q = 2.0 * e[i][j] / d;
                    prop_assert!((r[idx] - q).abs() <= 1e-10 * q.abs().max(1.0), "{} vs {}", r[idx], q);
                }
            }
        }

        #[test]
        fn degenerate_limit(t in -PI / 5.0..PI / 5.0, v in -PI / 5.0..PI / 5.0, p in -PI / 5.0..PI / 5.0) {
            let angles = Angles::new(t, v, p);
            let Ok(lim) = coupling_ratios_degenerate(&angles) else { return Ok(()); };
            for eps in [1e-4, 1e-6] {
                let r = coupling_ratios(&sq([1.0 + 2.0 * eps, 1.0 + eps, 1.0]), &angles);
                if let Ok(r) = r {
                    for i in 0..3 {
                        prop_assert!((r[i] - lim[i]).abs() <= 1e-4 * lim[i].abs().max(1.0));
                    }
                }
            }
        }
    }
}

//! Schmidt amplitudes of the tripartite eigenstates.
//!
//! An eigenstate `psi_n(x) = phi_{n1}(q1) phi_{n2}(q2) phi_{n3}(q3)` with
//! `q = M x` expands in the product basis as
//!
//! ```text
//! psi_n = sum_{k+l<=N} A^{k,l} phi_k(x1) phi_l(x2) phi_{N-k-l}(x3)
//! ```
//!
//! where `phi_j` are unit-frequency Hermite functions. Only `m = N - k - l`
//! contributes (total excitation is conserved by an orthogonal mixing), so a
//! [`SchmidtMatrix`] stores the triangle `k + l <= N`.
//!
//! Two routes compute the amplitudes:
//!
//! - [`coefficients_sum`] (canonical): a sum over 3x3 non-negative integer
//!   tables `t` with row sums `(n1, n2, n3)` and column sums `(k, l, m)`,
//!   `A = sqrt(n1! n2! n3! k! l! m!) * sum_t prod M[r][c]^t[r][c] / t[r][c]!`.
//! - [`coefficients_k16`]: the same sum refactored around the four free table
//!   entries into a prefactor times Exton's K16 polynomial. Its arguments are
//!   ratios of mixing-matrix entries, so entries whose denominators vanish, or
//!   with `k + l > n3`, are delegated to the sum route.

use crate::error::Result;
use crate::oscillator::{Excitation, MixingMatrix};
use crate::specfun::{self, exact, K16Arguments};

/// Amplitudes `A^{k,l}` for one eigenstate, `k + l <= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtMatrix {
    excitation: Excitation,
    values: Vec<f64>,
}

fn triangle_len(total: u32) -> usize {
    let n = total as usize + 1;
    n * (n + 1) / 2
}

impl SchmidtMatrix {
    fn zeros(excitation: Excitation) -> Self {
        Self {
            excitation,
            values: vec![0.0; triangle_len(excitation.total())],
        }
    }

    fn offset(&self, k: u32, l: u32) -> usize {
        let n = self.excitation.total() as usize;
        let (k, l) = (k as usize, l as usize);
        k * (n + 1) - k * k.saturating_sub(1) / 2 + l
    }

    pub fn excitation(&self) -> Excitation {
        self.excitation
    }

    pub fn total(&self) -> u32 {
        self.excitation.total()
    }

    /// `A^{k,l}`; zero outside the triangle `k + l <= N`.
    pub fn get(&self, k: u32, l: u32) -> f64 {
        if k + l > self.total() {
            0.0
        } else {
            self.values[self.offset(k, l)]
        }
    }

    fn set(&mut self, k: u32, l: u32, v: f64) {
        let o = self.offset(k, l);
        self.values[o] = v;
    }

    /// `(k, l, m, A^{k,l})` in lexicographic `(k, l)` order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, u32, f64)> + '_ {
        let n = self.total();
        (0..=n).flat_map(move |k| (0..=n - k).map(move |l| (k, l, n - k - l, self.get(k, l))))
    }

    /// Builds a matrix from explicit `(k, l, value)` triples; missing entries are zero.
    pub fn from_entries(
        excitation: Excitation,
        entries: impl IntoIterator<Item = (u32, u32, f64)>,
    ) -> crate::Result<Self> {
        let mut out = Self::zeros(excitation);
        for (k, l, v) in entries {
            if k + l > excitation.total() {
                return Err(crate::Error::InvalidInput(format!(
                    "entry ({k}, {l}) outside k + l <= {}",
                    excitation.total()
                )));
            }
            out.set(k, l, v);
        }
        Ok(out)
    }

    /// `sum A^2`; one for a normalized eigenstate.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.excitation, other.excitation);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `k + l + m == n1 + n2 + n3`.
pub fn selection_rule(n: &Excitation, k: u32, l: u32, m: u32) -> bool {
    k as u64 + l as u64 + m as u64 == n.total() as u64
}

/// `M[r][c]^t / t!` for `t <= total`.
struct PowerTable {
    total: usize,
    data: Vec<f64>,
}

impl PowerTable {
    fn new(m: &MixingMatrix, total: u32) -> Self {
        let total = total as usize;
        let mut data = Vec::with_capacity(9 * (total + 1));
        for r in 0..3 {
            for c in 0..3 {
                let x = m.get(r, c);
                let mut p = 1.0;
                for t in 0..=total {
                    data.push(p * exact::inv_factorial(t as u32));
                    p *= x;
                }
            }
        }
        Self { total, data }
    }

    #[inline]
    fn get(&self, r: usize, c: usize, t: u32) -> f64 {
        self.data[(r * 3 + c) * (self.total + 1) + t as usize]
    }
}

fn sum_entry(n: &Excitation, table: &PowerTable, k: u32, l: u32) -> f64 {
    let [n1, n2, n3] = n.as_array();
    let m = n.total() - k - l;
    let mut acc = 0.0;
    // Free entries: p = t[a][k], q = t[b][k], r = t[a][l], s = t[b][l].
    for p in 0..=k.min(n1) {
        for q in 0..=(k - p).min(n2) {
            let t_ck = k - p - q;
            if t_ck > n3 {
                continue;
            }
            for r in 0..=l.min(n1 - p) {
                for s in 0..=(l - r).min(n2 - q) {
                    let t_cl = l - r - s;
                    if t_ck + t_cl > n3 {
                        continue;
                    }
                    let t_am = n1 - p - r;
                    let t_bm = n2 - q - s;
                    let t_cm = n3 - t_ck - t_cl;
                    acc += table.get(0, 0, p)
                        * table.get(1, 0, q)
                        * table.get(2, 0, t_ck)
                        * table.get(0, 1, r)
                        * table.get(1, 1, s)
                        * table.get(2, 1, t_cl)
                        * table.get(0, 2, t_am)
                        * table.get(1, 2, t_bm)
                        * table.get(2, 2, t_cm);
                }
            }
        }
    }
    acc * exact::sqrt_factorial_product(&[n1, n2, n3, k, l, m])
}

/// Canonical nine-index contingency-table route.
///
/// The excitation bound is enforced when the [`Excitation`] is built, so this
/// never fails.
pub fn coefficients_sum(n: &Excitation, m: &MixingMatrix) -> SchmidtMatrix {
    let total = n.total();
    let table = PowerTable::new(m, total);
    let mut out = SchmidtMatrix::zeros(*n);
    for k in 0..=total {
        for l in 0..=total - k {
            out.set(k, l, sum_entry(n, &table, k, l));
        }
    }
    out
}

/// Below this magnitude a K16 ratio denominator is treated as zero.
pub const K16_DENOMINATOR_FLOOR: f64 = 1e-10;

/// Result of [`coefficients_k16`], including which entries fell back to the sum route.
#[derive(Debug, Clone, PartialEq)]
pub struct K16Coefficients {
    pub matrix: SchmidtMatrix,
    pub fallback: Vec<(u32, u32)>,
}

impl K16Coefficients {
    pub fn fallback_count(&self) -> usize {
        self.fallback.len()
    }

    pub fn is_fallback(&self, k: u32, l: u32) -> bool {
        self.fallback.contains(&(k, l))
    }
}

fn k16_entry(n: &Excitation, mm: &MixingMatrix, k: u32, l: u32) -> Option<f64> {
    let [n1, n2, n3] = n.as_array();
    if k + l > n3 {
        return None;
    }
    let [a1, a2, a3] = mm.a();
    let [b1, b2, b3] = mm.b();
    let [c1, c2, c3] = mm.c();
    let dens = [c2 * a3, c1 * a3, c1 * b3, c2 * b3];
    if dens.iter().any(|d| d.abs() <= K16_DENOMINATOR_FLOOR) {
        return None;
    }
    let rest = n3 - k - l;
    let vars = [
        a2 * c3 / dens[0],
        a1 * c3 / dens[1],
        b1 * c3 / dens[2],
        b2 * c3 / dens[3],
    ];
    let args = K16Arguments::new(
        [-(n1 as i64), -(k as i64), -(n2 as i64), -(l as i64)],
        (rest + 1) as f64,
        vars,
    )
    .ok()?;
    let series = specfun::exton_k16(&args).ok()?;
    let combinatorial = exact::sqrt_factorial_product(&[n1, n2, n3, k, l, n.total() - k - l])
        * exact::inv_factorial(rest)
        * exact::inv_factorial(n1)
        * exact::inv_factorial(k)
        * exact::inv_factorial(n2)
        * exact::inv_factorial(l);
    let powers = a3.powi(n1 as i32)
        * b3.powi(n2 as i32)
        * c1.powi(k as i32)
        * c2.powi(l as i32)
        * c3.powi(rest as i32);
    Some(combinatorial * powers * series)
}

/// K16 closed-form route with transparent per-entry fallback to [`coefficients_sum`].
pub fn coefficients_k16(n: &Excitation, m: &MixingMatrix) -> K16Coefficients {
    let total = n.total();
    let mut out = SchmidtMatrix::zeros(*n);
    let mut fallback = Vec::new();
    let mut table = None;
    for k in 0..=total {
        for l in 0..=total - k {
            let v = match k16_entry(n, m, k, l) {
                Some(v) => v,
                None => {
                    fallback.push((k, l));
                    let t = table.get_or_insert_with(|| PowerTable::new(m, total));
                    sum_entry(n, t, k, l)
                }
            };
            out.set(k, l, v);
        }
    }
    K16Coefficients {
        matrix: out,
        fallback,
    }
}

/// Unit-frequency Hermite function `(2^k k! sqrt(pi))^{-1/2} e^{-x^2/2} H_k(x)`.
pub fn hermite_function(k: u32, x: f64) -> Result<f64> {
    let h = specfun::hermite_phys(k, x)?;
    let norm = (2f64.powi(k as i32) * exact::factorial(k) * std::f64::consts::PI.sqrt()).sqrt();
    Ok((-0.5 * x * x).exp() * h / norm)
}

/// Point value of the eigenstate in dimensionless units
/// (`m varpi / hbar = 1`, `mu_i = 1`).
pub fn wavefunction_eval(n: &Excitation, m: &MixingMatrix, x: [f64; 3]) -> f64 {
    let q = m.apply(x);
    let [n1, n2, n3] = n.as_array();
    let norm = std::f64::consts::PI.powf(-0.75)
        / (2f64.powi(n.total() as i32) * exact::factorial(n1) * exact::factorial(n2) * exact::factorial(n3))
            .sqrt();
    let gauss = (-0.5 * (q[0] * q[0] + q[1] * q[1] + q[2] * q[2])).exp();
    norm * gauss
        * specfun::hermite_unchecked(n1, q[0])
        * specfun::hermite_unchecked(n2, q[1])
        * specfun::hermite_unchecked(n3, q[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::{mixing_matrix, Angles};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn exc(n1: u32, n2: u32, n3: u32) -> Excitation {
        Excitation::new(n1, n2, n3).unwrap()
    }

    /// Brute force over all nine table entries in `0..=N`, checking marginals
    /// explicitly. No reuse of the free-index parametrization.
    fn brute_force(n: &Excitation, m: &MixingMatrix, k: u32, l: u32) -> f64 {
        let total = n.total();
        let cols = [k, l, total - k - l];
        let rows = n.as_array();
        let mut acc = 0.0;
        let mut t = [0u32; 9];
        loop {
            let row_ok = (0..3).all(|r| t[3 * r] + t[3 * r + 1] + t[3 * r + 2] == rows[r]);
            let col_ok = (0..3).all(|c| t[c] + t[3 + c] + t[6 + c] == cols[c]);
            if row_ok && col_ok {
                let mut term = 1.0;
                for r in 0..3 {
                    for c in 0..3 {
                        let e = t[3 * r + c];
                        term *= m.get(r, c).powi(e as i32) / exact::factorial(e);
                    }
                }
                acc += term;
            }
            // odometer
            let mut i = 0;
            loop {
                if i == 9 {
                    let norm = [rows[0], rows[1], rows[2], cols[0], cols[1], cols[2]]
                        .iter()
                        .map(|&v| exact::factorial(v))
                        .product::<f64>()
                        .sqrt();
                    return acc * norm;
                }
                t[i] += 1;
                if t[i] <= total {
                    break;
                }
                t[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn selection_rule_examples() {
        assert!(selection_rule(&exc(0, 0, 1), 0, 0, 1));
        assert!(!selection_rule(&exc(0, 0, 1), 1, 1, 0));
        assert!(selection_rule(&exc(2, 1, 0), 0, 3, 0));
    }

    #[test]
    fn ground_state_is_product() {
        let m = mixing_matrix(&Angles::new(0.3, -0.2, 1.1));
        let a = coefficients_sum(&Excitation::ground(), &m);
        assert_eq!(a.iter().count(), 1);
        assert_eq!(a.get(0, 0), 1.0);
    }

    #[test]
    fn single_excitation_reads_c_row() {
        let angles = Angles::new(0.3, -0.7, 0.45);
        let m = mixing_matrix(&angles);
        let a = coefficients_sum(&exc(0, 0, 1), &m);
        let [c1, c2, c3] = m.c();
        assert_abs_diff_eq!(a.get(1, 0), c1, epsilon = 1e-15);
        assert_abs_diff_eq!(a.get(0, 1), c2, epsilon = 1e-15);
        assert_abs_diff_eq!(a.get(0, 0), c3, epsilon = 1e-15);
    }

    #[test]
    fn identity_mixing_gives_product_state() {
        let a = coefficients_sum(&exc(1, 0, 0), &MixingMatrix::identity());
        for (k, l, _, v) in a.iter() {
            let want = if (k, l) == (1, 0) { 1.0 } else { 0.0 };
            assert_eq!(v, want);
        }
        let n = exc(2, 1, 3);
        let a = coefficients_sum(&n, &MixingMatrix::identity());
        for (k, l, _, v) in a.iter() {
            let want = if (k, l) == (2, 1) { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn sum_route_matches_brute_force() {
        let m = mixing_matrix(&Angles::new(0.37, -0.61, 0.22));
        for n in Excitation::up_to(3) {
            let a = coefficients_sum(&n, &m);
            for (k, l, _, v) in a.iter() {
                assert_abs_diff_eq!(v, brute_force(&n, &m, k, l), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn k16_route_examples() {
        let m = mixing_matrix(&Angles::new(PI / 6.0, PI / 5.0, PI / 7.0));
        let n = exc(0, 0, 2);
        let r = coefficients_k16(&n, &m);
        assert!(r.fallback_count() < 6);
        assert!(r.matrix.max_abs_diff(&coefficients_sum(&n, &m)) < 1e-10);

        let m = mixing_matrix(&Angles::new(0.4, 0.3, 0.2));
        let n = exc(1, 1, 1);
        let r = coefficients_k16(&n, &m);
        assert!(r.matrix.max_abs_diff(&coefficients_sum(&n, &m)) < 1e-10);
        // k + l > n3 always falls back.
        assert!(r.is_fallback(1, 1));
        assert!(!r.is_fallback(0, 0));

        let n = exc(0, 0, 1);
        let r = coefficients_k16(&n, &MixingMatrix::identity());
        assert_eq!(r.fallback_count(), 3);
        assert_eq!(r.matrix.get(0, 0), 1.0);
    }

    #[test]
    fn k16_route_handles_large_n3() {
        let m = mixing_matrix(&Angles::new(0.5, -0.35, 0.6));
        let n = exc(2, 1, 4);
        let r = coefficients_k16(&n, &m);
        let s = coefficients_sum(&n, &m);
        assert!(r.matrix.max_abs_diff(&s) < 1e-10);
        assert!(r.fallback_count() < triangle_len(n.total()));
    }

    #[test]
    fn wavefunction_examples() {
        let g = Excitation::ground();
        let m = mixing_matrix(&Angles::new(0.9, 0.1, -0.4));
        // pi^{-3/4} = 0.4237772...
        assert_abs_diff_eq!(wavefunction_eval(&g, &m, [0.0; 3]), 0.423_777_208, epsilon = 1e-9);
        let p = [0.3, -1.2, 0.5];
        let r2: f64 = p.iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(
            wavefunction_eval(&g, &m, p),
            PI.powf(-0.75) * (-r2 / 2.0).exp(),
            epsilon = 1e-15
        );
        let v = wavefunction_eval(&exc(1, 0, 0), &MixingMatrix::identity(), [1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(v, PI.powf(-0.75) * 2f64.sqrt() * (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.363_500_784, epsilon = 1e-9);
    }

    #[test]
    fn expansion_reproduces_wavefunction() {
        let m = mixing_matrix(&Angles::new(0.42, -0.31, 0.77));
        let pts = [
            [0.1, 0.2, -0.3],
            [1.1, -0.4, 0.0],
            [-0.9, 0.8, 1.3],
            [0.0, 0.0, 0.0],
            [2.0, 0.5, -1.5],
        ];
        for n in Excitation::up_to(2) {
            let a = coefficients_sum(&n, &m);
            for x in pts {
                let recon: f64 = a
                    .iter()
                    .map(|(k, l, mm, v)| {
                        v * hermite_function(k, x[0]).unwrap()
                            * hermite_function(l, x[1]).unwrap()
                            * hermite_function(mm, x[2]).unwrap()
                    })
                    .sum();
                assert_abs_diff_eq!(recon, wavefunction_eval(&n, &m, x), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn from_entries_rejects_outside_triangle() {
        let n = exc(0, 1, 0);
        assert!(SchmidtMatrix::from_entries(n, [(1, 1, 0.5)]).is_err());
        let a = SchmidtMatrix::from_entries(n, [(1, 0, 0.5)]).unwrap();
        assert_eq!(a.get(1, 0), 0.5);
        assert_eq!(a.get(0, 0), 0.0);
    }

    fn small_excitation() -> impl Strategy<Value = Excitation> {
        (0u32..=5, 0u32..=5, 0u32..=5)
            .prop_filter("N <= 5", |(a, b, c)| a + b + c <= 5)
            .prop_map(|(a, b, c)| exc(a, b, c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn completeness(n in small_excitation(), t in -PI..PI, v in -PI..PI, p in -PI..PI) {
            let a = coefficients_sum(&n, &mixing_matrix(&Angles::new(t, v, p)));
            prop_assert!((a.norm_sq() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn routes_agree(
            n in small_excitation(),
            t in -FRAC_PI_4..FRAC_PI_4, v in -FRAC_PI_4..FRAC_PI_4, p in -FRAC_PI_4..FRAC_PI_4,
        ) {
            let m = mixing_matrix(&Angles::new(t, v, p));
            let r = coefficients_k16(&n, &m);
            let s = coefficients_sum(&n, &m);
            prop_assert!(r.matrix.max_abs_diff(&s) < 1e-10);
        }
    }
}

//! Gauss-Hermite quadrature and the overlap integrals built on it.
//!
//! This module is the brute-force oracle for the closed-form amplitudes. It
//! evaluates its own orthonormal Hermite basis and never calls into
//! [`crate::schmidt`] or [`crate::specfun`].

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::oscillator::{Excitation, MixingMatrix};

pub const MAX_ORDER: usize = 128;

/// Extra nodes required beyond the total excitation before an overlap is
/// trusted.
pub const ORDER_MARGIN: usize = 8;

/// Largest `||M M^T - I||_max` accepted by the overlap routines.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;

/// Nodes and weights for `int f(x) e^{-x^2} dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Orthonormal Hermite polynomials `p_0..=p_n` at `x`, orthonormal against
/// `e^{-x^2}`: `p_j = H_j / sqrt(2^j j! sqrt(pi))`.
fn orthonormal_hermite(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(std::f64::consts::PI.powf(-0.25));
    if n >= 1 {
        p.push(std::f64::consts::SQRT_2 * x * p[0]);
    }
    for j in 1..n {
        let jf = j as f64;
        let next = x * (2.0 / (jf + 1.0)).sqrt() * p[j] - (jf / (jf + 1.0)).sqrt() * p[j - 1];
        p.push(next);
    }
    p
}

/// Golub-Welsch nodes from the symmetric tridiagonal Jacobi matrix, each
/// polished by Newton steps on `p_n`; weights are `1 / sum_{j<n} p_j(x)^2`.
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::QuadratureOrder(order));
    }
    let n = order;
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);

    for x in nodes.iter_mut() {
        for _ in 0..4 {
            let p = orthonormal_hermite(n, *x);
            let deriv = (2.0 * n as f64).sqrt() * p[n - 1];
            let step = p[n] / deriv;
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| 1.0 / orthonormal_hermite(n - 1, x).iter().map(|p| p * p).sum::<f64>())
        .collect();

    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// `N + 10` clamped to `[16, 64]`.
pub fn default_order(total: u32) -> usize {
    (total as usize + 10).clamp(16, 64)
}

fn check_rule(rule: &QuadratureRule, total: u32) -> Result<()> {
    let required = total as usize + ORDER_MARGIN;
    if rule.order() < required {
        return Err(Error::QuadratureTooCoarse {
            order: rule.order(),
            degree: total,
            required,
        });
    }
    Ok(())
}

/// Basis values `p_j(x_a)` for `j = 0..=max_degree` at every node, indexed `[j][a]`.
fn basis_table(nodes: &[f64], max_degree: usize) -> Vec<Vec<f64>> {
    let per_node: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&x| orthonormal_hermite(max_degree, x))
        .collect();
    (0..=max_degree)
        .map(|j| per_node.iter().map(|p| p[j]).collect())
        .collect()
}

/// The eigenstate part of the 3D overlap integrand, tabulated on the tensor grid.
///
/// With `q = M x` and `|q| = |x|` the two Gaussians combine to `e^{-|x|^2}`, so
/// the grid carries `w_a w_b w_c p_{n1}(q_1) p_{n2}(q_2) p_{n3}(q_3)` and each
/// overlap is one contraction against `p_k(x_1) p_l(x_2) p_m(x_3)`.
#[derive(Debug, Clone)]
pub struct OverlapGrid {
    excitation: Excitation,
    nodes: Vec<f64>,
    field: Vec<f64>,
}

impl OverlapGrid {
    pub fn new(n: &Excitation, m: &MixingMatrix, rule: &QuadratureRule) -> Result<Self> {
        let defect = m.orthogonality_defect();
        if !(defect <= ORTHOGONALITY_TOLERANCE) {
            return Err(Error::NotOrthogonal(defect));
        }
        check_rule(rule, n.total())?;
        let [n1, n2, n3] = n.as_array().map(|v| v as usize);
        let order = rule.order();
        let mut field = Vec::with_capacity(order * order * order);
        for (a, &x1) in rule.nodes.iter().enumerate() {
            for (b, &x2) in rule.nodes.iter().enumerate() {
                let wab = rule.weights[a] * rule.weights[b];
                for (c, &x3) in rule.nodes.iter().enumerate() {
                    let q = m.apply([x1, x2, x3]);
                    let v = orthonormal_hermite(n1, q[0])[n1]
                        * orthonormal_hermite(n2, q[1])[n2]
                        * orthonormal_hermite(n3, q[2])[n3];
                    field.push(wab * rule.weights[c] * v);
                }
            }
        }
        Ok(Self {
            excitation: *n,
            nodes: rule.nodes.clone(),
            field,
        })
    }

    pub fn excitation(&self) -> Excitation {
        self.excitation
    }

    /// `<psi_n | phi_k phi_l phi_m>`.
    pub fn overlap(&self, k: u32, l: u32, m: u32) -> f64 {
        let top = k.max(l).max(m) as usize;
        let basis = basis_table(&self.nodes, top);
        let (pk, pl, pm) = (&basis[k as usize], &basis[l as usize], &basis[m as usize]);
        let order = self.nodes.len();
        let mut acc = 0.0;
        for a in 0..order {
            let mut acc_a = 0.0;
            for b in 0..order {
                let row = &self.field[(a * order + b) * order..(a * order + b + 1) * order];
                let inner: f64 = row.iter().zip(pm).map(|(f, p)| f * p).sum();
                acc_a += pl[b] * inner;
            }
            acc += pk[a] * acc_a;
        }
        acc
    }
}

/// Overlap of the eigenstate `n` under mixing `M` with the product state
/// `phi_k(x1) phi_l(x2) phi_m(x3)`. `(k, l, m)` violating the selection rule is
/// allowed and integrates to zero.
pub fn coefficient_overlap(
    n: &Excitation,
    m: &MixingMatrix,
    k: u32,
    l: u32,
    mm: u32,
    rule: &QuadratureRule,
) -> Result<f64> {
    Ok(OverlapGrid::new(n, m, rule)?.overlap(k, l, mm))
}

/// Two-oscillator overlap: the eigenstate `(n1, n2)` rotated by `phi`
/// (`q1 = cos phi x1 - sin phi x2`, `q2 = sin phi x1 + cos phi x2`) against
/// `phi_k(x1) phi_{n1+n2-k}(x2)`.
pub fn coefficient_overlap_2d(n1: u32, n2: u32, phi: f64, k: u32, rule: &QuadratureRule) -> Result<f64> {
    let total = n1 + n2;
    if k > total {
        return Err(Error::InvalidInput(format!("k = {k} exceeds n1 + n2 = {total}")));
    }
    check_rule(rule, total)?;
    let (s, c) = phi.sin_cos();
    let (n1, n2, k, l) = (n1 as usize, n2 as usize, k as usize, (total - k) as usize);
    let mut acc = 0.0;
    for (&x1, &w1) in rule.nodes.iter().zip(&rule.weights) {
        let pk = orthonormal_hermite(k, x1)[k];
        let mut inner = 0.0;
        for (&x2, &w2) in rule.nodes.iter().zip(&rule.weights) {
            let q1 = c * x1 - s * x2;
            let q2 = s * x1 + c * x2;
            inner += w2
                * orthonormal_hermite(n1, q1)[n1]
                * orthonormal_hermite(n2, q2)[n2]
                * orthonormal_hermite(l, x2)[l];
        }
        acc += w1 * pk * inner;
    }
    Ok(acc)
}

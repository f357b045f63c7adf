//! Purity surfaces over the `(theta, phi)` plane at fixed `vphi`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{mode_spectrum, Bipartition};
use crate::error::{Error, Result};
use crate::oscillator::{mixing_matrix, Angles, Excitation};
use crate::report::fmt17;
use crate::schmidt::coefficients_sum;

pub const DEFAULT_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRequest {
    pub bipartition: Bipartition,
    pub excitation: Excitation,
    pub vphi: f64,
    pub grid_points: usize,
    pub theta_range: (f64, f64),
    pub phi_range: (f64, f64),
}

impl SurfaceRequest {
    /// Full `[-pi, pi]^2` grid with the default resolution.
    pub fn new(bipartition: Bipartition, excitation: Excitation, vphi: f64) -> Self {
        Self {
            bipartition,
            excitation,
            vphi,
            grid_points: DEFAULT_GRID_POINTS,
            theta_range: (-PI, PI),
            phi_range: (-PI, PI),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::InvalidInput(format!(
                "grid_points must be at least 2, got {}",
                self.grid_points
            )));
        }
        for (name, (lo, hi)) in [("theta", self.theta_range), ("phi", self.phi_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidInput(format!(
                    "{name} range [{lo}, {hi}] is empty or not finite"
                )));
            }
        }
        if !self.vphi.is_finite() {
            return Err(Error::InvalidInput("vphi must be finite".into()));
        }
        Ok(())
    }

    /// `i`-th of `grid_points` equally spaced values; both ends are hit exactly.
    fn axis(&self, (lo, hi): (f64, f64), i: usize) -> f64 {
        let last = self.grid_points - 1;
        if i == last {
            hi
        } else {
            lo + (hi - lo) * i as f64 / last as f64
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.grid_points).map(|i| self.axis(self.theta_range, i)).collect()
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.grid_points).map(|i| self.axis(self.phi_range, i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub request: SurfaceRequest,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Row-major in theta: `values[i * phis.len() + j]` is at `(thetas[i], phis[j])`.
    pub values: Vec<f64>,
}

impl Surface {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.phis.len() + j]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `theta,phi,purity` with a header, theta-major, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 72 + 20);
        out.push_str("theta,phi,purity\n");
        for (i, &t) in self.thetas.iter().enumerate() {
            for (j, &p) in self.phis.iter().enumerate() {
                out.push_str(&fmt17(t));
                out.push(',');
                out.push_str(&fmt17(p));
                out.push(',');
                out.push_str(&fmt17(self.get(i, j)));
                out.push('\n');
            }
        }
        out
    }
}

/// Direct-sum purity at every grid point.
pub fn purity_surface(req: &SurfaceRequest) -> Result<Surface> {
    req.validate()?;
    let thetas = req.thetas();
    let phis = req.phis();
    let values = thetas
        .par_iter()
        .flat_map_iter(|&t| {
            phis.iter().map(move |&p| {
                let m = mixing_matrix(&Angles::new(t, req.vphi, p));
                mode_spectrum(&coefficients_sum(&req.excitation, &m), req.bipartition).purity()
            })
        })
        .collect();
    Ok(Surface {
        request: req.clone(),
        thetas,
        phis,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn req(p: Bipartition, points: usize) -> SurfaceRequest {
        SurfaceRequest {
            grid_points: points,
            ..SurfaceRequest::new(p, Excitation::new(0, 0, 1).unwrap(), 0.3)
        }
    }

    #[test]
    fn grid_hits_endpoints() {
        let r = req(Bipartition::AvsBC, 5);
        assert_eq!(r.thetas(), vec![-PI, -PI / 2.0, 0.0, PI / 2.0, PI]);
    }

    #[test]
    fn validation() {
        assert!(req(Bipartition::AvsBC, 1).validate().is_err());
        let mut r = req(Bipartition::AvsBC, 3);
        r.phi_range = (1.0, 1.0);
        assert!(r.validate().is_err());
    }

    #[test]
    fn single_quantum_a_surface_extremes() {
        let s = purity_surface(&req(Bipartition::AvsBC, 201)).unwrap();
        assert_abs_diff_eq!(s.min(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(s.max(), 1.0, epsilon = 1e-9);
        let n = s.thetas.len();
        for i in 0..n {
            for j in 0..n {
                assert_abs_diff_eq!(s.get(i, j), s.get(n - 1 - i, j), epsilon = 1e-12);
                assert_abs_diff_eq!(s.get(i, j), s.get(i, n - 1 - j), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let s = purity_surface(&req(Bipartition::CvsAB, 3)).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "theta,phi,purity");
        assert_eq!(lines.len(), 10);
        assert!(!csv.contains('\r'));
        let second: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(second[0], -PI);
        assert_eq!(second[1], 0.0);
    }
}

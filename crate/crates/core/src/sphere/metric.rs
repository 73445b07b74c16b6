use std::f64::consts::PI;

use super::grid::PolarGrid;
use crate::error::{Error, Result};

/// Relative tolerance for the smooth-closure condition at the poles.
pub const POLE_TOL: f64 = 1e-6;

/// Nodal samples of an axisymmetric function on a [`PolarGrid`].
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: PolarGrid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &PolarGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values on a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite value at node {i}")));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn constant(grid: &PolarGrid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &PolarGrid, f: F) -> Self {
        Self {
            grid: grid.clone(),
            values: grid.theta().iter().map(|&t| f(t)).collect(),
        }
    }

    /// Even-extension limits at θ = 0 and θ = π.
    pub fn pole_values(&self) -> (f64, f64) {
        let s = self.grid.to_legendre(&self.values);
        (s.eval(1.0), s.eval(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Axisymmetric metric q(θ)² dθ² + p(θ)² dφ² on S².
#[derive(Clone, Debug)]
pub struct AxisymMetric {
    pub grid: PolarGrid,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl AxisymMetric {
    /// Validates positivity and smooth closure at both poles.
    pub fn new(grid: &PolarGrid, q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let m = Self::new_unchecked(grid, q, p)?;
        m.check_pole_regularity(POLE_TOL)?;
        Ok(m)
    }

    pub(crate) fn new_unchecked(grid: &PolarGrid, q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if q.len() != n || p.len() != n {
            return Err(Error::GridMismatch(format!(
                "metric arrays of length {}/{} on a {n}-node grid",
                q.len(),
                p.len()
            )));
        }
        for i in 0..n {
            if !(q[i] > 0.0 && p[i] > 0.0 && q[i].is_finite() && p[i].is_finite()) {
                return Err(Error::Parameter(format!(
                    "metric coefficients must be positive and finite (node {i}: q = {}, p = {})",
                    q[i], p[i]
                )));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            q,
            p,
        })
    }

    /// Round sphere of radius r.
    pub fn round(grid: &PolarGrid, r: f64) -> Self {
        Self {
            grid: grid.clone(),
            q: vec![r; grid.len()],
            p: grid.sin().iter().map(|s| r * s).collect(),
        }
    }

    /// e^{2w} r² g_* in the round coordinates.
    pub fn conformal(grid: &PolarGrid, w: &[f64], r: f64) -> Self {
        let q: Vec<f64> = w.iter().map(|w| r * w.exp()).collect();
        let p = q.iter().zip(grid.sin()).map(|(q, s)| q * s).collect();
        Self {
            grid: grid.clone(),
            q,
            p,
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// p / sin θ, a smooth function of cos θ for pole-regular metrics.
    pub fn p_reduced(&self) -> Vec<f64> {
        self.p
            .iter()
            .zip(self.grid.sin())
            .map(|(p, s)| p / s)
            .collect()
    }

    /// Extrapolated (p'(0) - q(0), p'(π) + q(π)), the closure defects.
    pub fn pole_defects(&self) -> (f64, f64) {
        let pr = self.grid.to_legendre(&self.p_reduced());
        let qs = self.grid.to_legendre(&self.q);
        (pr.eval(1.0) - qs.eval(1.0), pr.eval(-1.0) - qs.eval(-1.0))
    }

    pub fn check_pole_regularity(&self, rel_tol: f64) -> Result<()> {
        let (dn, ds) = self.pole_defects();
        let scale = self.q.iter().fold(0.0f64, |m, q| m.max(*q));
        if !(dn.is_finite() && ds.is_finite()) {
            return Err(Error::PoleRegularity("non-finite pole extrapolation".into()));
        }
        if dn.abs() > rel_tol * scale || ds.abs() > rel_tol * scale {
            return Err(Error::PoleRegularity(format!(
                "closure defects {dn:e} (north), {ds:e} (south) exceed {rel_tol:e}·{scale}"
            )));
        }
        Ok(())
    }

    /// Area element q p at each node (per unit θ and φ, without 2π).
    pub fn area_density(&self) -> Vec<f64> {
        self.q.iter().zip(&self.p).map(|(q, p)| q * p).collect()
    }

    /// Total area 2π Σ w_i q_i p_i.
    pub fn area(&self) -> f64 {
        let w = self.grid.weights();
        2.0 * PI
            * w.iter()
                .zip(self.q.iter().zip(&self.p))
                .map(|(w, (q, p))| w * q * p)
                .sum::<f64>()
    }

    pub fn area_radius(&self) -> f64 {
        (self.area() / (4.0 * PI)).sqrt()
    }

    /// ∫ f dA.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let w = self.grid.weights();
        2.0 * PI
            * (0..self.len())
                .map(|i| w[i] * self.q[i] * self.p[i] * f[i])
                .sum::<f64>()
    }

    /// The metric F² g.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            q: self.q.iter().map(|q| q * factor).collect(),
            p: self.p.iter().map(|p| p * factor).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_area() {
        let g = PolarGrid::new(33).unwrap();
        assert!((AxisymMetric::round(&g, 1.0).area() - 4.0 * PI).abs() < 1e-12);
        assert!((AxisymMetric::round(&g, 3.0).area() - 36.0 * PI).abs() < 1e-11);
    }

    #[test]
    fn pole_regularity_detects_cone() {
        let g = PolarGrid::new(49).unwrap();
        let q = vec![1.0; g.len()];
        let p: Vec<f64> = g.sin().iter().map(|s| 0.9 * s).collect();
        let err = AxisymMetric::new(&g, q, p).unwrap_err();
        assert!(matches!(err, Error::PoleRegularity(_)));
        let oblate: Vec<f64> = g
            .theta()
            .iter()
            .map(|t| (1.0 - 0.1 * t.cos().powi(2)) * t.sin())
            .collect();
        // p'(0) = 0.9 while q(0) = 1: also a cone.
        assert!(AxisymMetric::new(&g, vec![1.0; g.len()], oblate).is_err());
    }

    #[test]
    fn rejects_nonpositive() {
        let g = PolarGrid::new(33).unwrap();
        let mut q = vec![1.0; g.len()];
        q[3] = 0.0;
        assert!(AxisymMetric::new(&g, q, g.sin().to_vec()).is_err());
    }
}

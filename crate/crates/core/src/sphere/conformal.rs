//! Constructive uniformization of axisymmetric metrics.
//!
//! For g = q²dθ² + p²dφ² the isothermal coordinate ξ = ∫ q/p dθ is matched
//! to the Mercator coordinate ln tan(ϑ/2) of the round sphere. Writing
//! x = cos θ, P = p/sin θ, ρ = q/P and h = (ρ − 1)/(1 − x²) (finite at the
//! poles for pole-regular metrics), the matching has the closed form
//!
//!   X = cos ϑ = (x − τ)/(1 − xτ),  τ = tanh(c − H(x)),  H' = h, H(1) = 0,
//!
//! and the conformal factor is e^w = P(x)(1 − xτ) cosh(c − H(x)) / r_o.
//! The free constant c (the boost along the axis) is fixed by sending the
//! equatorial area bisector of g to ϑ = π/2.

use super::grid::{LegendreSeries, PolarGrid};
use super::metric::{AxisymMetric, POLE_TOL};
use crate::error::{Error, Result};
use crate::numerics::bisect;

/// Conformal exponent w on the round coordinates and the area radius r_o;
/// the represented metric is e^{2w} r_o² g_*.
#[derive(Clone, Debug)]
pub struct ConformalData {
    pub grid: PolarGrid,
    pub w: Vec<f64>,
    pub r_o: f64,
}

impl ConformalData {
    /// Accepts w only if e^{2w} r_o² g_* already has area 4π r_o².
    pub fn new(grid: &PolarGrid, w: Vec<f64>, r_o: f64) -> Result<Self> {
        let cd = Self::raw(grid, w, r_o)?;
        let dev = cd.area_defect();
        if dev.abs() > 1e-8 {
            return Err(Error::Parameter(format!(
                "conformal exponent not area-normalized (relative area defect {dev:e})"
            )));
        }
        Ok(cd)
    }

    /// Shifts w by the constant that makes the area exactly 4π r_o².
    pub fn normalized(grid: &PolarGrid, w: Vec<f64>, r_o: f64) -> Result<Self> {
        let mut cd = Self::raw(grid, w, r_o)?;
        let mass: f64 = grid.integrate_x(&cd.w.iter().map(|w| (2.0 * w).exp()).collect::<Vec<_>>());
        let shift = 0.5 * (2.0 / mass).ln();
        cd.w.iter_mut().for_each(|w| *w += shift);
        Ok(cd)
    }

    fn raw(grid: &PolarGrid, w: Vec<f64>, r_o: f64) -> Result<Self> {
        if w.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples of w on a {}-node grid",
                w.len(),
                grid.len()
            )));
        }
        if !(r_o > 0.0) || w.iter().any(|w| !w.is_finite()) {
            return Err(Error::Parameter("invalid conformal data".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            w,
            r_o,
        })
    }

    fn area_defect(&self) -> f64 {
        let mass: f64 = self
            .grid
            .integrate_x(&self.w.iter().map(|w| (2.0 * w).exp()).collect::<Vec<_>>());
        mass / 2.0 - 1.0
    }

    pub fn metric(&self) -> AxisymMetric {
        AxisymMetric::conformal(&self.grid, &self.w, self.r_o)
    }

    pub fn w_series(&self) -> LegendreSeries {
        self.grid.to_legendre(&self.w)
    }
}

/// The colatitude map θ ↦ ϑ realizing the conformal representation.
#[derive(Clone, Debug)]
pub struct IsothermalMap {
    h: LegendreSeries,
    big_h: LegendreSeries,
    c: f64,
}

impl IsothermalMap {
    fn delta(&self, x: f64) -> f64 {
        self.c - self.big_h.eval(x)
    }

    /// x = cos θ ↦ X = cos ϑ.
    pub fn map_x(&self, x: f64) -> f64 {
        let tau = self.delta(x).tanh();
        (x - tau) / (1.0 - x * tau)
    }

    /// dX/dx.
    pub fn map_x_derivative(&self, x: f64) -> f64 {
        let d = self.delta(x);
        let tau = d.tanh();
        let dtau = -self.h.eval(x) / d.cosh().powi(2);
        let den = 1.0 - x * tau;
        ((1.0 - dtau) * den + (x - tau) * (tau + x * dtau)) / (den * den)
    }

    /// Inverse map X ↦ x by bisection (the map is increasing).
    pub fn inverse_x(&self, target: f64) -> Result<f64> {
        if target >= 1.0 {
            return Ok(1.0);
        }
        if target <= -1.0 {
            return Ok(-1.0);
        }
        bisect(|x| self.map_x(x) - target, -1.0, 1.0, 1e-16)
            .ok_or_else(|| Error::Uniformization("isothermal map is not onto".into()))
    }

    /// Pulls e^{2w} r_o² g_* back to the original colatitude.
    pub fn pullback(&self, cd: &ConformalData, grid: &PolarGrid) -> AxisymMetric {
        let ws = cd.w_series();
        let mut q = Vec::with_capacity(grid.len());
        let mut p = Vec::with_capacity(grid.len());
        for &x in grid.x() {
            let big_x = self.map_x(x);
            let sx = (1.0 - big_x * big_x).sqrt();
            let ew = ws.eval(big_x).exp() * cd.r_o;
            // s(x)/s(X) = (1 − xτ) cosh δ
            let d = self.delta(x);
            let ratio = (1.0 - x * d.tanh()) * d.cosh();
            p.push(ew * sx);
            q.push(ew * self.map_x_derivative(x) * ratio);
        }
        AxisymMetric {
            grid: grid.clone(),
            q,
            p,
        }
    }
}

/// Writes m = Φ*(e^{2w} r_o² g_*) with Φ the isothermal map.
pub fn conformal_representation(m: &AxisymMetric) -> Result<(ConformalData, IsothermalMap)> {
    let g = &m.grid;
    let n = g.len();
    let (dn, ds) = m.pole_defects();
    let scale = m.q.iter().fold(0.0f64, |a, b| a.max(*b));
    if dn.abs() > POLE_TOL * scale || ds.abs() > POLE_TOL * scale {
        return Err(Error::Uniformization(format!(
            "pole matching failed: closure defects {dn:e}, {ds:e}"
        )));
    }
    let x = g.x();
    let pr = m.p_reduced();
    let h: Vec<f64> = (0..n)
        .map(|i| (m.q[i] / pr[i] - 1.0) / (1.0 - x[i] * x[i]))
        .collect();
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Uniformization("non-finite isothermal integrand".into()));
    }
    let h_series = g.to_legendre(&h);
    let big_h = h_series.antiderivative_from_north();

    // Equatorial area bisector: cumulative area from the north pole = half.
    let density: Vec<f64> = (0..n).map(|i| m.q[i] * pr[i]).collect();
    let cum = g.to_legendre(&density).antiderivative_from_north();
    let total = -cum.eval(-1.0);
    let x_b = bisect(|xx| -cum.eval(xx) - 0.5 * total, -1.0, 1.0, 1e-16)
        .ok_or_else(|| Error::Uniformization("area bisector not found".into()))?;
    let c = x_b.atanh() + big_h.eval(x_b);
    let map = IsothermalMap {
        h: h_series,
        big_h,
        c,
    };

    let pr_series = g.to_legendre(&pr);
    let r_o = m.area_radius();
    let mut w = Vec::with_capacity(n);
    for &xj in x {
        let xs = map.inverse_x(xj)?;
        let d = map.delta(xs);
        let ew = pr_series.eval(xs) * (1.0 - xs * d.tanh()) * d.cosh() / r_o;
        if !(ew > 0.0 && ew.is_finite()) {
            return Err(Error::Uniformization(format!(
                "conformal factor {ew} at X = {xj}"
            )));
        }
        w.push(ew.ln());
    }
    let cd = ConformalData {
        grid: g.clone(),
        w,
        r_o,
    };
    let defect = cd.area_defect();
    if defect.abs() > 1e-8 {
        return Err(Error::Uniformization(format!(
            "recovered factor misses the area normalization by {defect:e}"
        )));
    }
    Ok((cd, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn round_is_identity() {
        let g = PolarGrid::new(65).unwrap();
        let (cd, _) = conformal_representation(&AxisymMetric::round(&g, 1.7)).unwrap();
        assert!((cd.r_o - 1.7).abs() < 1e-12);
        assert!(cd.w.iter().all(|w| w.abs() < 1e-12));
    }

    #[test]
    fn normalized_area() {
        let g = PolarGrid::new(65).unwrap();
        let w: Vec<f64> = g.theta().iter().map(|t| 0.2 * (2.0 * t).cos()).collect();
        let cd = ConformalData::normalized(&g, w, 1.0).unwrap();
        assert!((cd.metric().area() - 4.0 * PI).abs() < 1e-8 * 4.0 * PI);
    }

    #[test]
    fn symmetric_roundtrip() {
        let g = PolarGrid::new(97).unwrap();
        let w0: Vec<f64> = g.theta().iter().map(|t| 0.2 * (2.0 * t).cos()).collect();
        let cd0 = ConformalData::normalized(&g, w0, 1.0).unwrap();
        let (cd, _) = conformal_representation(&cd0.metric()).unwrap();
        assert!(max_err(&cd.w, &cd0.w) < 1e-5, "{}", max_err(&cd.w, &cd0.w));
        assert!((cd.r_o - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spheroid_pullback_roundtrip() {
        let g = PolarGrid::new(97).unwrap();
        let q: Vec<f64> = g
            .theta()
            .iter()
            .map(|t| (t.cos().powi(2) + 0.81 * t.sin().powi(2)).sqrt())
            .collect();
        let m = AxisymMetric::new(&g, q, g.sin().to_vec()).unwrap();
        let (cd, map) = conformal_representation(&m).unwrap();
        let back = map.pullback(&cd, &g);
        assert!(max_err(&back.q, &m.q) < 1e-5);
        assert!(max_err(&back.p, &m.p) < 1e-5);
    }

    #[test]
    fn asymmetric_pullback_roundtrip() {
        let g = PolarGrid::new(97).unwrap();
        let w0: Vec<f64> = g.theta().iter().map(|t| 0.3 * t.cos()).collect();
        let m = ConformalData::normalized(&g, w0, 1.2).unwrap().metric();
        let (cd, map) = conformal_representation(&m).unwrap();
        let back = map.pullback(&cd, &g);
        assert!(max_err(&back.q, &m.q) < 1e-5);
        assert!(max_err(&back.p, &m.p) < 1e-5);
        // The bisector of the recovered metric sits on the equator.
        let e2w: Vec<f64> = cd.w.iter().map(|w| (2.0 * w).exp()).collect();
        let cum = g.to_legendre(&e2w).antiderivative_from_north();
        assert!((cum.eval(0.0) - cum.eval(-1.0) / 2.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_conical_metric() {
        let g = PolarGrid::new(49).unwrap();
        let m = AxisymMetric::new_unchecked(
            &g,
            vec![1.0; g.len()],
            g.sin().iter().map(|s| 0.8 * s).collect(),
        )
        .unwrap();
        assert!(matches!(
            conformal_representation(&m),
            Err(Error::Uniformization(_))
        ));
    }
}

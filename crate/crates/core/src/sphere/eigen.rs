//! First eigenpair of the stability-type operator −Δ_g + K(g).
//!
//! The quadratic form ∫(|∇φ|² + Kφ²) dA against ∫φ² dA is discretized on
//! the Gauss grid (dA = 2π qP dx, |∇φ|² dA = 2π (1−x²)(P/q) φ_x² dx), which
//! gives a symmetric pencil (A, B) with diagonal positive B. The lowest
//! eigenpair is found by shifted inverse iteration with the shift below
//! min K, a guaranteed lower bound for the discrete spectrum.

use nalgebra::{DMatrix, DVector};

use super::metric::{AxisymMetric, ScalarField};
use super::ops::{gaussian_curvature, laplace_beltrami};
use crate::error::{Error, Result};

/// Relative tolerance on the strong-form residual of the eigenpair.
pub const TOL_EIG: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Positive, ∫u² dA = 1.
    pub u: ScalarField,
    /// ‖(−Δ + K)u − λu‖_∞ / (|λ|·‖u‖_∞ + ‖K‖_∞‖u‖_∞).
    pub residual: f64,
    pub iterations: usize,
}

/// The discretized pencil: stiffness A and diagonal mass B.
pub struct QuadraticForm {
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
}

impl QuadraticForm {
    pub fn assemble(m: &AxisymMetric) -> Result<Self> {
        let g = &m.grid;
        let n = g.len();
        let k = gaussian_curvature(m)?;
        let x = g.x();
        let wx = g.x_weights();
        let pr = m.p_reduced();
        let mut a = DMatrix::<f64>::zeros(n, n);
        // A = Dᵀ diag(c) D + diag(wx K q P), c = wx (1−x²) P/q.
        let c: Vec<f64> = (0..n)
            .map(|i| wx[i] * (1.0 - x[i] * x[i]) * pr[i] / m.q[i])
            .collect();
        let d = DMatrix::from_fn(n, n, |i, j| g.dx_entry(i, j));
        let mut cd = d.clone();
        for i in 0..n {
            for j in 0..n {
                cd[(i, j)] *= c[i];
            }
        }
        a.gemm_tr(1.0, &d, &cd, 0.0);
        let b: Vec<f64> = (0..n).map(|i| wx[i] * m.q[i] * pr[i]).collect();
        for i in 0..n {
            a[(i, i)] += b[i] * k.values[i];
        }
        // Symmetrize away rounding.
        let a = (&a + a.transpose()) * 0.5;
        Ok(Self { a, b })
    }

    /// C = B^{-1/2} A B^{-1/2}.
    pub fn standardized(&self) -> DMatrix<f64> {
        let n = self.b.len();
        let s: Vec<f64> = self.b.iter().map(|b| 1.0 / b.sqrt()).collect();
        DMatrix::from_fn(n, n, |i, j| self.a[(i, j)] * s[i] * s[j])
    }

    /// Rayleigh quotient φᵀAφ / φᵀBφ.
    pub fn rayleigh(&self, phi: &[f64]) -> f64 {
        let v = DVector::from_column_slice(phi);
        let num = v.dot(&(&self.a * &v));
        let den: f64 = phi.iter().zip(&self.b).map(|(p, b)| p * p * b).sum();
        num / den
    }
}

pub fn first_eigenpair(m: &AxisymMetric) -> Result<Eigenpair> {
    let form = QuadraticForm::assemble(m)?;
    let n = form.b.len();
    let k = gaussian_curvature(m)?;
    let kmin = k.min();
    let kmax = k.max_abs();
    let shift = kmin - 0.5 * (kmax.abs() + 1.0 / m.area_radius().powi(2));
    let mut c = form.standardized();
    for i in 0..n {
        c[(i, i)] -= shift;
    }
    let chol = c
        .cholesky()
        .ok_or_else(|| Error::EigenSolve("shifted operator not positive definite".into()))?;

    // Deterministic positive start: y = B^{1/2}·1.
    let sqrt_b: Vec<f64> = form.b.iter().map(|b| b.sqrt()).collect();
    let mut y = DVector::from_column_slice(&sqrt_b);
    y /= y.norm();
    let mut iterations = 0;
    let mut converged = false;
    let mut lam_prev = f64::NAN;
    for it in 0..2000 {
        iterations = it + 1;
        let z = chol.solve(&y);
        // yᵀ(C − σ)⁻¹y with |y| = 1 approximates 1/(λ₁ − σ).
        let lam = shift + 1.0 / y.dot(&z);
        let ynew = &z / z.norm();
        let diff = (&ynew - &y).norm();
        y = ynew;
        if diff < 1e-13 || (diff < 1e-9 && (lam - lam_prev).abs() <= 1e-15 * lam.abs().max(1.0)) {
            converged = true;
            break;
        }
        lam_prev = lam;
    }
    if !converged {
        return Err(Error::EigenSolve(format!(
            "inverse iteration did not converge in {iterations} steps"
        )));
    }

    // Back to nodal values u = B^{-1/2} y, sign fixed by positivity.
    let mut u: Vec<f64> = (0..n).map(|i| y[i] / sqrt_b[i]).collect();
    let sum: f64 = u.iter().sum();
    if sum < 0.0 {
        u.iter_mut().for_each(|v| *v = -*v);
    }
    if let Some(i) = u.iter().position(|v| *v <= 0.0) {
        return Err(Error::SimplicityViolation(format!(
            "eigenfunction non-positive at node {i} (value {:e})",
            u[i]
        )));
    }
    let norm2 = m.integrate(&u.iter().map(|v| v * v).collect::<Vec<_>>());
    let s = 1.0 / norm2.sqrt();
    u.iter_mut().for_each(|v| *v *= s);
    let lambda = form.rayleigh(&u);
    let uf = ScalarField {
        grid: m.grid.clone(),
        values: u,
    };
    let residual = strong_residual(m, &uf, &k, lambda)?;
    if residual > TOL_EIG {
        return Err(Error::EigenSolve(format!(
            "strong-form residual {residual:e} exceeds {TOL_EIG:e}; refine the grid"
        )));
    }
    Ok(Eigenpair {
        lambda,
        u: uf,
        residual,
        iterations,
    })
}

/// Scaled ‖(−Δ + K)u − λu‖_∞.
pub fn strong_residual(
    m: &AxisymMetric,
    u: &ScalarField,
    k: &ScalarField,
    lambda: f64,
) -> Result<f64> {
    let lap = laplace_beltrami(m, u)?;
    let r = (0..m.len())
        .map(|i| (-lap.values[i] + k.values[i] * u.values[i] - lambda * u.values[i]).abs())
        .fold(0.0, f64::max);
    let scale = (lambda.abs() + k.max_abs()) * u.max_abs();
    Ok(r / scale)
}

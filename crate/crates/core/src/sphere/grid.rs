use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;

pub const MIN_NODES: usize = 33;

/// Colatitude grid on (0, π).
///
/// Nodes are the Gauss–Legendre points of x = cos θ, so they cluster toward
/// both poles and never touch them. Axisymmetric fields that are smooth on
/// the sphere are smooth functions of x, so every operator here works in x
/// with spectral (polynomial) differentiation and quadrature.
#[derive(Clone, Debug)]
pub struct PolarGrid {
    inner: Arc<GridData>,
}

#[derive(Debug)]
struct GridData {
    theta: Vec<f64>,
    x: Vec<f64>,
    sin: Vec<f64>,
    /// Gauss weights in x; ∫ f dx ≈ Σ wx_i f_i.
    wx: Vec<f64>,
    /// Weights in θ; ∫ f dθ ≈ Σ w_i f_i for f vanishing like sin θ.
    w: Vec<f64>,
    /// d/dx collocation matrix, row-major.
    dx: Vec<f64>,
    /// P_k(x_i), row-major (i, k).
    legendre: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffScheme {
    LegendreGaussCollocation,
}

impl PolarGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Parameter(format!(
                "polar grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let (x, wx) = gauss_legendre(n);
        let theta: Vec<f64> = x.iter().map(|x| x.acos()).collect();
        let sin: Vec<f64> = x.iter().map(|x| (1.0 - x * x).sqrt()).collect();
        let w: Vec<f64> = wx.iter().zip(&sin).map(|(w, s)| w / s).collect();

        // Barycentric weights of Gauss points: (-1)^i sqrt((1-x_i^2) w_i).
        let bary: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * ((1.0 - x[i] * x[i]) * wx[i]).sqrt()
            })
            .collect();
        let mut dx = vec![0.0; n * n];
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let v = bary[j] / bary[i] / (x[i] - x[j]);
                    dx[i * n + j] = v;
                    diag -= v;
                }
            }
            dx[i * n + i] = diag;
        }

        let mut legendre = vec![0.0; n * n];
        for i in 0..n {
            let z = x[i];
            let mut p0 = 1.0;
            let mut p1 = z;
            legendre[i * n] = 1.0;
            if n > 1 {
                legendre[i * n + 1] = z;
            }
            for k in 2..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                legendre[i * n + k] = p2;
                p0 = p1;
                p1 = p2;
            }
        }

        Ok(Self {
            inner: Arc::new(GridData {
                theta,
                x,
                sin,
                wx,
                w,
                dx,
                legendre,
            }),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.inner.theta
    }

    pub fn x(&self) -> &[f64] {
        &self.inner.x
    }

    pub fn sin(&self) -> &[f64] {
        &self.inner.sin
    }

    pub fn weights(&self) -> &[f64] {
        &self.inner.w
    }

    pub fn x_weights(&self) -> &[f64] {
        &self.inner.wx
    }

    pub fn scheme(&self) -> DiffScheme {
        DiffScheme::LegendreGaussCollocation
    }

    pub fn same_as(&self, other: &PolarGrid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.theta == other.inner.theta
    }

    pub fn check_same(&self, other: &PolarGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{} nodes vs {} nodes",
                self.len(),
                other.len()
            )))
        }
    }

    /// Entry (i, j) of the d/dx collocation matrix.
    pub fn dx_entry(&self, i: usize, j: usize) -> f64 {
        self.inner.dx[i * self.len() + j]
    }

    /// d/dx of nodal values.
    pub fn diff_x(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(f.len(), n);
        let d = &self.inner.dx;
        (0..n)
            .map(|i| {
                let row = &d[i * n..(i + 1) * n];
                row.iter().zip(f).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// d/dθ of nodal values (= −sin θ d/dx).
    pub fn diff_theta(&self, f: &[f64]) -> Vec<f64> {
        self.diff_x(f)
            .iter()
            .zip(self.sin())
            .map(|(d, s)| -s * d)
            .collect()
    }

    /// ∫_{-1}^{1} f dx.
    pub fn integrate_x(&self, f: &[f64]) -> f64 {
        self.inner.wx.iter().zip(f).map(|(w, f)| w * f).sum()
    }

    /// Legendre coefficients of the interpolating polynomial.
    pub fn to_legendre(&self, f: &[f64]) -> LegendreSeries {
        let n = self.len();
        assert_eq!(f.len(), n);
        let p = &self.inner.legendre;
        let wx = &self.inner.wx;
        let mut c = vec![0.0; n];
        for i in 0..n {
            let wf = wx[i] * f[i];
            let row = &p[i * n..(i + 1) * n];
            for k in 0..n {
                c[k] += wf * row[k];
            }
        }
        for (k, ck) in c.iter_mut().enumerate() {
            *ck *= (2 * k + 1) as f64 / 2.0;
        }
        LegendreSeries { coeffs: c }
    }
}

/// A finite Legendre expansion Σ c_k P_k(x).
#[derive(Clone, Debug)]
pub struct LegendreSeries {
    pub coeffs: Vec<f64>,
}

impl LegendreSeries {
    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        let n = c.len();
        if n == 0 {
            return 0.0;
        }
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for k in (1..n).rev() {
            let kf = k as f64;
            // alpha_k = (2k+1)/(k+1) x, beta_{k+1} = -(k+1)/(k+2)
            let alpha = (2.0 * kf + 1.0) / (kf + 1.0) * x;
            let beta = -(kf + 1.0) / (kf + 2.0);
            let b0 = c[k] + alpha * b1 + beta * b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + x * b1 - 0.5 * b2
    }

    /// Antiderivative vanishing at x = 1.
    pub fn antiderivative_from_north(&self) -> LegendreSeries {
        let c = &self.coeffs;
        let n = c.len();
        // ∫ P_k = (P_{k+1} - P_{k-1}) / (2k+1) for k >= 1; ∫ P_0 = P_1.
        let mut out = vec![0.0; n + 1];
        for k in 0..n {
            if k == 0 {
                out[1] += c[0];
            } else {
                let s = c[k] / (2 * k + 1) as f64;
                out[k + 1] += s;
                out[k - 1] -= s;
            }
        }
        let mut series = LegendreSeries { coeffs: out };
        let at_one = series.eval(1.0);
        series.coeffs[0] -= at_one;
        series
    }
}

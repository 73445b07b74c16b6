//! Paths of metrics from Bartnik data to the round sphere.
//!
//! The raw path is the conformal interpolation e^{2(1−t)w} r_o² g_*. The
//! normalized path reparametrizes time by a smoothstep η so the path is
//! still for t ≥ θ_cut, rescales each metric back to area 4π r_o² (a path
//! with tr g′ = 0 preserves area, while the raw conformal path does not),
//! and pulls each slice back by the colatitude map that matches cumulative
//! area with t = 0. The area form 2π q p dθ dφ is then literally constant
//! in t, which is the axisymmetric form of tr_{g(t)} g′(t) = 0.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{bisect, smoothstep, uniform_derivative};
use crate::sphere::{
    first_eigenpair, gaussian_curvature, io, AxisymMetric, ConformalData, Eigenpair, PolarGrid,
};

pub const DEFAULT_THETA_CUT: f64 = 0.75;
pub const MIN_TIME_NODES: usize = 17;
/// Strictness tolerance for λ(t) > κ_target.
pub const LAMBDA_STRICT_TOL: f64 = 1e-10;

fn time_grid(nt: usize) -> Vec<f64> {
    (0..nt).map(|k| k as f64 / (nt - 1) as f64).collect()
}

#[derive(Clone, Debug)]
pub struct RawPath {
    pub conformal: ConformalData,
    pub t: Vec<f64>,
    pub metrics: Vec<AxisymMetric>,
}

/// Samples e^{2(1−t)w} r_o² g_* at N_t equally spaced times.
pub fn conformal_path(cd: &ConformalData, nt: usize) -> Result<RawPath> {
    if nt < 2 {
        return Err(Error::Parameter(format!("need at least 2 time nodes, got {nt}")));
    }
    let t = time_grid(nt);
    let metrics = t
        .iter()
        .map(|&t| {
            let w: Vec<f64> = cd.w.iter().map(|w| (1.0 - t) * w).collect();
            AxisymMetric::conformal(&cd.grid, &w, cd.r_o)
        })
        .collect();
    Ok(RawPath {
        conformal: cd.clone(),
        t,
        metrics,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaVerdict {
    pub pass: bool,
    /// min_k λ(t_k) − κ_target.
    pub margin: f64,
    pub lambda: Vec<f64>,
}

/// Checks λ₁(t_k) > κ_target at every node.
pub fn verify_path_lambda(metrics: &[AxisymMetric], kappa_target: f64) -> Result<LambdaVerdict> {
    let lambda = metrics
        .iter()
        .map(|m| first_eigenpair(m).map(|e| e.lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(verdict(lambda, kappa_target))
}

fn verdict(lambda: Vec<f64>, kappa_target: f64) -> LambdaVerdict {
    let min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let margin = min - kappa_target;
    LambdaVerdict {
        pass: margin > LAMBDA_STRICT_TOL,
        margin,
        lambda,
    }
}

/// Normalized path satisfying g(1) round, g′ = 0 on [θ_cut, 1] and
/// tr_{g(t)} g′(t) = 0.
#[derive(Clone, Debug)]
pub struct MetricPath {
    pub grid: PolarGrid,
    pub r_o: f64,
    pub theta_cut: f64,
    pub t: Vec<f64>,
    /// η(t_k) and the area rescaling c(η) applied to the raw metric.
    pub eta: Vec<f64>,
    pub scale: Vec<f64>,
    /// cos Θ_k(θ_i): the area-matching colatitude map per node.
    pub maps: Vec<Vec<f64>>,
    pub metrics: Vec<AxisymMetric>,
    pub eigen: Vec<Eigenpair>,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
}

pub fn eta(t: f64, theta_cut: f64) -> f64 {
    smoothstep(t / theta_cut)
}

/// Conformal exponent of the normalized slice at reparametrized time η, in
/// round coordinates: (1 − η)w + ½ ln c(η).
fn slice_exponent(cd: &ConformalData, eta: f64) -> (Vec<f64>, f64) {
    let g = &cd.grid;
    let w: Vec<f64> = cd.w.iter().map(|w| (1.0 - eta) * w).collect();
    let mass = g.integrate_x(&w.iter().map(|w| (2.0 * w).exp()).collect::<Vec<_>>());
    let c = 2.0 / mass;
    let half_log = 0.5 * c.ln();
    (w.iter().map(|w| w + half_log).collect(), c)
}

pub fn normalize_path(raw: &RawPath, theta_cut: f64) -> Result<MetricPath> {
    if !(theta_cut > 0.0 && theta_cut < 1.0) {
        return Err(Error::Parameter(format!("theta_cut = {theta_cut} outside (0, 1)")));
    }
    let nt = raw.t.len();
    if nt < MIN_TIME_NODES {
        return Err(Error::Parameter(format!(
            "normalized path needs at least {MIN_TIME_NODES} time nodes, got {nt}"
        )));
    }
    let cd = &raw.conformal;
    let g = &cd.grid;
    let n = g.len();
    let r = cd.r_o;
    let x = g.x();
    let sin = g.sin();

    let etas: Vec<f64> = raw.t.iter().map(|&t| eta(t, theta_cut)).collect();
    if etas.windows(2).any(|e| e[1] < e[0]) || etas[nt - 1] != 1.0 || etas[0] != 0.0 {
        return Err(Error::Parameter("time reparametrization is not monotone onto [0,1]".into()));
    }

    let (phi0, _) = slice_exponent(cd, 0.0);
    let e2phi0: Vec<f64> = phi0.iter().map(|p| (2.0 * p).exp()).collect();
    let cum0 = g.to_legendre(&e2phi0).antiderivative_from_north();
    let target: Vec<f64> = x.iter().map(|&x| -cum0.eval(x)).collect();

    let mut scale: Vec<f64> = Vec::with_capacity(nt);
    let mut maps: Vec<Vec<f64>> = Vec::with_capacity(nt);
    let mut metrics: Vec<AxisymMetric> = Vec::with_capacity(nt);
    for (k, &e) in etas.iter().enumerate() {
        if k > 0 && e == etas[k - 1] {
            scale.push(scale[k - 1]);
            maps.push(maps[k - 1].clone());
            metrics.push(metrics[k - 1].clone());
            continue;
        }
        let (phi, c) = slice_exponent(cd, e);
        let e2phi: Vec<f64> = phi.iter().map(|p| (2.0 * p).exp()).collect();
        let cum = g.to_legendre(&e2phi).antiderivative_from_north();
        let phi_series = g.to_legendre(&phi);
        let mut big_x = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut p = vec![0.0; n];
        for i in 0..n {
            let xi = if k == 0 {
                x[i]
            } else {
                bisect(|z| -cum.eval(z) - target[i], -1.0, 1.0, 1e-16).ok_or_else(|| {
                    Error::Parameter(format!("cumulative area not invertible at node {i}"))
                })?
            };
            big_x[i] = xi;
            let ef = if k == 0 { phi[i].exp() } else { phi_series.eval(xi).exp() };
            let s_big = if k == 0 { sin[i] } else { (1.0 - xi * xi).sqrt() };
            p[i] = r * ef * s_big;
            q[i] = r * e2phi0[i] * sin[i] / (ef * s_big);
        }
        scale.push(c);
        maps.push(big_x);
        metrics.push(AxisymMetric::new(g, q, p)?);
    }

    let mut eigen: Vec<Eigenpair> = Vec::with_capacity(nt);
    for k in 0..nt {
        if k > 0 && etas[k] == etas[k - 1] {
            eigen.push(eigen[k - 1].clone());
        } else {
            eigen.push(first_eigenpair(&metrics[k])?);
        }
    }
    let (kappa, alpha, beta) = constants(&raw.t, &metrics, &eigen, r)?;
    Ok(MetricPath {
        grid: g.clone(),
        r_o: r,
        theta_cut,
        t: raw.t.clone(),
        eta: etas,
        scale,
        maps,
        metrics,
        eigen,
        kappa,
        alpha,
        beta,
    })
}

fn constants(
    t: &[f64],
    metrics: &[AxisymMetric],
    eigen: &[Eigenpair],
    r_o: f64,
) -> Result<(f64, f64, f64)> {
    let kappa = eigen.iter().map(|e| e.lambda).fold(f64::INFINITY, f64::min);
    let n = metrics[0].len();
    let ht = t[1] - t[0];
    let mut g2max: f64 = 0.0;
    for i in 0..n {
        let lq: Vec<f64> = metrics.iter().map(|m| m.q[i].ln()).collect();
        let lp: Vec<f64> = metrics.iter().map(|m| m.p[i].ln()).collect();
        let dq = uniform_derivative(&lq, ht);
        let dp = uniform_derivative(&lp, ht);
        for k in 0..t.len() {
            // |g′|² = (∂_t q²/q²)² + (∂_t p²/p²)².
            g2max = g2max.max(4.0 * dq[k] * dq[k] + 4.0 * dp[k] * dp[k]);
        }
    }
    let mut kmin = f64::INFINITY;
    for m in metrics {
        kmin = kmin.min(gaussian_curvature(m)?.min());
    }
    Ok((kappa, 0.25 * g2max, r_o * r_o * kmin))
}

/// (κ, α, β) of a normalized path.
pub fn path_constants(path: &MetricPath) -> (f64, f64, f64) {
    (path.kappa, path.alpha, path.beta)
}

#[derive(Serialize)]
struct Manifest<'a> {
    r_o: f64,
    theta_cut: f64,
    ntheta: usize,
    t: &'a [f64],
    eta: &'a [f64],
    area_scale: &'a [f64],
    lambda: Vec<f64>,
    kappa: f64,
    alpha: f64,
    beta: f64,
    files: Vec<String>,
}

impl MetricPath {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn lambda(&self) -> Vec<f64> {
        self.eigen.iter().map(|e| e.lambda).collect()
    }

    pub fn verify_lambda(&self, kappa_target: f64) -> LambdaVerdict {
        verdict(self.lambda(), kappa_target)
    }

    /// First node with η = 1; the path is constant from there on.
    pub fn still_from(&self) -> usize {
        self.eta.iter().position(|e| *e == 1.0).unwrap_or(self.len() - 1)
    }

    /// The last metric expressed in exact round coordinates: the stored
    /// map pulls r_o² g_* back to it, so this is the same Riemannian metric.
    pub fn round_frame(&self) -> AxisymMetric {
        AxisymMetric::round(&self.grid, self.r_o)
    }

    /// Per-node metric CSVs plus `manifest.json`.
    pub fn export<P: AsRef<Path>>(&self, dir: P) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.len());
        for (k, m) in self.metrics.iter().enumerate() {
            let name = format!("g_{k:03}.csv");
            io::write_metric(m, dir.join(&name))?;
            files.push(name);
        }
        let man = Manifest {
            r_o: self.r_o,
            theta_cut: self.theta_cut,
            ntheta: self.grid.len(),
            t: &self.t,
            eta: &self.eta,
            area_scale: &self.scale,
            lambda: self.lambda(),
            kappa: self.kappa,
            alpha: self.alpha,
            beta: self.beta,
            files,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&man)?)?;
        Ok(())
    }
}

//! The charged collar γ = A²u(t,·)² dt² + F(t)² g(t), F = (1 + εt²)^{1/2},
//! over a normalized path, with electric field E = Q/(r²vF²) ∂_t.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::uniform_derivative;
use crate::path::MetricPath;
use crate::rotsym::{formula, ProfileSegment, RadialProfile, Segment};
use crate::sphere::{gaussian_curvature, laplace_beltrami, AxisymMetric, ScalarField};
use crate::table;

/// Largest allowed sup-norm jump between successive eigenfunctions,
/// relative to their size.
const COHERENCE_JUMP: f64 = 0.5;

/// Nodes used for the analytic neck profile.
pub const NECK_NODES: usize = 401;

/// Path eigendata with t-derivatives.
#[derive(Clone, Debug)]
pub struct EigenPath {
    pub t: Vec<f64>,
    pub lambda: Vec<f64>,
    /// u[k][i] at t_k, θ_i.
    pub u: Vec<Vec<f64>>,
    pub dlog_u: Vec<Vec<f64>>,
    pub inf_u2: f64,
    pub sup_dlog_u: f64,
    pub max_residual: f64,
}

pub fn eigen_path(path: &MetricPath) -> Result<EigenPath> {
    let nt = path.len();
    let n = path.grid.len();
    let u: Vec<Vec<f64>> = path.eigen.iter().map(|e| e.u.values.clone()).collect();
    for k in 1..nt {
        let scale = u[k].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let jump = u[k].iter().zip(&u[k - 1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if u[k].iter().any(|v| !(*v > 0.0)) || jump > COHERENCE_JUMP * scale {
            return Err(Error::PathCoherence(format!(
                "eigenfunction jumps by {jump:e} between t = {} and t = {}",
                path.t[k - 1],
                path.t[k]
            )));
        }
    }
    let ht = path.t[1] - path.t[0];
    let mut dlog_u = vec![vec![0.0; n]; nt];
    for i in 0..n {
        let l: Vec<f64> = u.iter().map(|u| u[i].ln()).collect();
        for (k, d) in uniform_derivative(&l, ht).into_iter().enumerate() {
            dlog_u[k][i] = d;
        }
    }
    let inf_u2 = u.iter().flatten().map(|v| v * v).fold(f64::INFINITY, f64::min);
    let sup_dlog_u = dlog_u.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    Ok(EigenPath {
        t: path.t.clone(),
        lambda: path.lambda(),
        u,
        dlog_u,
        inf_u2,
        sup_dlog_u,
        max_residual: path.eigen.iter().map(|e| e.residual).fold(0.0, f64::max),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Amplitude {
    pub a: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub inf_u2: f64,
    pub sup_dlog_u: f64,
    /// A² inf u² (κ − Q²/r⁴) − 2 − α − 2 sup|∂_t log u|.
    pub slack: f64,
}

/// A = √(2(2 + α + 2 sup|∂_t log u|)/(inf u² (κ − Q²/r⁴))), twice the
/// minimal admissible A².
pub fn select_amplitude(eig: &EigenPath, kappa: f64, alpha: f64, q_o: f64, r_o: f64) -> Result<Amplitude> {
    let gap = kappa - q_o * q_o / r_o.powi(4);
    if !(gap > 0.0) {
        return Err(Error::Admissibility(format!(
            "κ = {kappa} does not exceed Q²/r⁴ = {}",
            q_o * q_o / r_o.powi(4)
        )));
    }
    let need = 2.0 + alpha + 2.0 * eig.sup_dlog_u;
    let a = (2.0 * need / (eig.inf_u2 * gap)).sqrt();
    let slack = a * a * eig.inf_u2 * gap - need;
    if !(slack > 0.0) {
        return Err(Error::Admissibility(format!("amplitude inequality not strict (slack {slack:e})")));
    }
    Ok(Amplitude { a, kappa, alpha, inf_u2: eig.inf_u2, sup_dlog_u: eig.sup_dlog_u, slack })
}

pub fn neck_factor(eps: f64, t: f64) -> (f64, f64, f64) {
    let f = (1.0 + eps * t * t).sqrt();
    (f, eps * t / f, eps / (f * f * f))
}

/// Charged Hawking mass of a round slice Σ_t: (F r/2)(1 + Q²/(F²r²) − r²F′²/(A²u₁²)).
pub fn neck_hawking(eps: f64, t: f64, r_o: f64, q_o: f64, a: f64, u1: f64) -> f64 {
    let (f, fp, _) = neck_factor(eps, t);
    0.5 * f * r_o * (1.0 + q_o * q_o / (f * f * r_o * r_o) - r_o * r_o * fp * fp / (a * a * u1 * u1))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EpsilonChoice {
    pub eps: f64,
    pub halvings: usize,
    pub m: f64,
    pub mh0: f64,
    pub mh1: f64,
    /// m − m_H(Σ₁), m_H(Σ₁) − m_H(Σ₀), m_H(Σ₁) − |Q|.
    pub conditions: [f64; 3],
}

/// Halves ε from 1/2 until m > m_H(Σ₁) > m_H(Σ₀) and m_H(Σ₁) > |Q|.
pub fn select_epsilon(m: f64, r_o: f64, q_o: f64, a: f64, u1: f64) -> Result<EpsilonChoice> {
    let mh0 = neck_hawking(0.0, 0.0, r_o, q_o, a, u1);
    let mut eps: f64 = 0.5;
    let mut halvings = 0;
    while eps >= 1e-12 {
        let mh1 = neck_hawking(eps, 1.0, r_o, q_o, a, u1);
        let conditions = [m - mh1, mh1 - mh0, mh1 - q_o.abs()];
        if conditions.iter().all(|c| *c > 0.0) {
            return Ok(EpsilonChoice { eps, halvings, m, mh0, mh1, conditions });
        }
        eps *= 0.5;
        halvings += 1;
    }
    Err(Error::EpsilonSearch(format!(
        "no ε ≥ 1e-12 gives m = {m} > m_H(Σ₁) > m_H(Σ₀) = {mh0}"
    )))
}

/// Scalar curvature of v²dt² + F²g at one slice, from the slice operators:
/// 2v⁻¹F⁻²(−Δ_g v + K v) + v⁻²[(−2F′² − 4FF″)/F² − ¼|g′|² + 4 ∂_t log v · F′/F].
pub fn collar_scalar_curvature(
    g: &AxisymMetric,
    v: &[f64],
    dlog_v: &[f64],
    g_dot_sq: &[f64],
    neck: (f64, f64, f64),
) -> Result<Vec<f64>> {
    let (f, fp, fpp) = neck;
    let vf = ScalarField::new(&g.grid, v.to_vec())?;
    let lap = laplace_beltrami(g, &vf)?;
    let k = gaussian_curvature(g)?;
    Ok((0..g.len())
        .map(|i| {
            let vi = v[i];
            2.0 * (-lap.values[i] + k.values[i] * vi) / (vi * f * f)
                + ((-2.0 * fp * fp - 4.0 * f * fpp) / (f * f) - 0.25 * g_dot_sq[i] + 4.0 * dlog_v[i] * fp / f)
                    / (vi * vi)
        })
        .collect())
}

/// |g′|²_g = 4(∂_t log q)² + 4(∂_t log p)² per (t, θ) node.
pub fn path_velocity_sq(path: &MetricPath) -> Vec<Vec<f64>> {
    let nt = path.len();
    let n = path.grid.len();
    let ht = path.t[1] - path.t[0];
    let mut out = vec![vec![0.0; n]; nt];
    for i in 0..n {
        let lq: Vec<f64> = path.metrics.iter().map(|m| m.q[i].ln()).collect();
        let lp: Vec<f64> = path.metrics.iter().map(|m| m.p[i].ln()).collect();
        let dq = uniform_derivative(&lq, ht);
        let dp = uniform_derivative(&lp, ht);
        for k in 0..nt {
            out[k][i] = 4.0 * (dq[k] * dq[k] + dp[k] * dp[k]);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceDiagnostics {
    pub t: f64,
    pub area: f64,
    pub mh_ch: f64,
    pub flux: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Round-slice closed formula, for t ≥ θ_cut.
    pub mh_closed: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CollarBlock {
    pub path: MetricPath,
    pub eigen: EigenPath,
    pub amplitude: Amplitude,
    pub eps: f64,
    pub q_o: f64,
    /// (4π r²)^{-1/2}, the eigenfunction of the round end slice.
    pub u1: f64,
    pub big_f: Vec<(f64, f64, f64)>,
    pub v: Vec<Vec<f64>>,
    pub g_dot_sq: Vec<Vec<f64>>,
    pub margin: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub slices: Vec<SliceDiagnostics>,
    /// max over nodes of |div_γ E| from t-differences.
    pub div_e: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CollarReport {
    pub a: f64,
    pub eps: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub inf_u2: f64,
    pub sup_dlog_u: f64,
    pub amplitude_slack: f64,
    pub epsilon: Option<EpsilonChoice>,
    pub min_margin: f64,
    pub h0_max: f64,
    pub h_min_positive_t: f64,
    pub max_flux_drift: f64,
    pub div_e: f64,
    pub max_eig_residual: f64,
}

/// Pointwise R(γ) − 2|E|² = R(γ) − 2Q²/(r⁴F⁴).
pub fn collar_dec_field(
    path: &MetricPath,
    v: &[Vec<f64>],
    dlog_v: &[Vec<f64>],
    g_dot_sq: &[Vec<f64>],
    big_f: &[(f64, f64, f64)],
    q_o: f64,
) -> Result<Vec<Vec<f64>>> {
    let r4 = path.r_o.powi(4);
    (0..path.len())
        .map(|k| {
            let r = collar_scalar_curvature(&path.metrics[k], &v[k], &dlog_v[k], &g_dot_sq[k], big_f[k])?;
            let e2 = q_o * q_o / (r4 * big_f[k].0.powi(4));
            Ok(r.into_iter().map(|r| r - 2.0 * e2).collect())
        })
        .collect()
}

fn first_nonpositive(path: &MetricPath, margin: &[Vec<f64>]) -> Option<Error> {
    for (k, row) in margin.iter().enumerate() {
        for (i, m) in row.iter().enumerate() {
            if !(*m > 0.0) {
                return Some(Error::CollarDec { t: path.t[k], theta: path.grid.theta()[i], margin: *m });
            }
        }
    }
    None
}

pub fn assemble_collar(path: &MetricPath, eigen: &EigenPath, amplitude: Amplitude, eps: f64, q_o: f64) -> Result<CollarBlock> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Parameter(format!("ε = {eps} outside [0, 1)")));
    }
    let a = amplitude.a;
    let nt = path.len();
    let big_f: Vec<(f64, f64, f64)> = path.t.iter().map(|t| neck_factor(eps, *t)).collect();
    let v: Vec<Vec<f64>> = eigen.u.iter().map(|u| u.iter().map(|u| a * u).collect()).collect();
    let g_dot_sq = path_velocity_sq(path);
    let margin = collar_dec_field(path, &v, &eigen.dlog_u, &g_dot_sq, &big_f, q_o)?;
    if let Some(e) = first_nonpositive(path, &margin) {
        return Err(e);
    }
    let h: Vec<Vec<f64>> = (0..nt)
        .map(|k| {
            let (f, fp, _) = big_f[k];
            v[k].iter().map(|v| 2.0 * fp / (v * f)).collect()
        })
        .collect();
    // div E ∝ ∂_t(√det γ · E^t) = (Q/r²) ∂_t(qp) per θ node.
    let ht = path.t[1] - path.t[0];
    let mut div_e: f64 = 0.0;
    for i in 0..path.grid.len() {
        let dens: Vec<f64> = path.metrics.iter().map(|m| m.q[i] * m.p[i]).collect();
        let d = uniform_derivative(&dens, ht);
        for (k, dk) in d.iter().enumerate() {
            // divide by √det γ / sin θ = v F² q p
            let (f, _, _) = big_f[k];
            let val = q_o / (path.r_o * path.r_o) * dk / (v[k][i] * f * f * dens[k]);
            div_e = div_e.max(val.abs());
        }
    }
    let u1 = 1.0 / (4.0 * PI * path.r_o * path.r_o).sqrt();
    let mut block = CollarBlock {
        path: path.clone(),
        eigen: eigen.clone(),
        amplitude,
        eps,
        q_o,
        u1,
        big_f,
        v,
        g_dot_sq,
        margin,
        h,
        slices: Vec::new(),
        div_e,
    };
    block.slices = (0..nt).map(|k| slice_diagnostics(&block, k)).collect::<Result<_>>()?;
    Ok(block)
}

/// Area, charged Hawking mass, enclosed charge and mean-curvature range of Σ_{t_k}.
pub fn slice_diagnostics(block: &CollarBlock, k: usize) -> Result<SliceDiagnostics> {
    let path = &block.path;
    let g = &path.metrics[k];
    let (f, _, _) = block.big_f[k];
    let area = f * f * g.area();
    let h = &block.h[k];
    let h2_int = f * f * g.integrate(&h.iter().map(|h| h * h).collect::<Vec<_>>());
    let mh_ch = (area / (16.0 * PI)).sqrt() * (1.0 + 4.0 * PI * block.q_o * block.q_o / area - h2_int / (16.0 * PI));
    let e_normal = ScalarField::constant(&path.grid, block.q_o / (path.r_o * path.r_o * f * f));
    let flux = crate::sphere::charge_flux(&g.scaled(f), &e_normal)?;
    let t = path.t[k];
    let mh_closed = (t >= path.theta_cut).then(|| {
        neck_hawking(block.eps, t, path.r_o, block.q_o, block.amplitude.a, block.u1)
    });
    Ok(SliceDiagnostics {
        t,
        area,
        mh_ch,
        flux,
        h_min: h.iter().cloned().fold(f64::INFINITY, f64::min),
        h_max: h.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        mh_closed,
    })
}

impl CollarBlock {
    pub fn min_margin(&self) -> f64 {
        self.margin.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn report(&self, epsilon: Option<EpsilonChoice>) -> CollarReport {
        let h0_max = self.h[0].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let h_min_positive_t = self.h[1..].iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        CollarReport {
            a: self.amplitude.a,
            eps: self.eps,
            kappa: self.path.kappa,
            alpha: self.path.alpha,
            beta: self.path.beta,
            inf_u2: self.eigen.inf_u2,
            sup_dlog_u: self.eigen.sup_dlog_u,
            amplitude_slack: self.amplitude.slack,
            epsilon,
            min_margin: self.min_margin(),
            h0_max,
            h_min_positive_t,
            max_flux_drift: self.slices.iter().map(|s| (s.flux - self.q_o).abs()).fold(0.0, f64::max),
            div_e: self.div_e,
            max_eig_residual: self.eigen.max_residual,
        }
    }

    /// `t,theta,v,q,p,margin,H`, with q, p the slice metric F q, F p.
    pub fn write_collar_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut rows = Vec::new();
        for k in 0..self.path.len() {
            let (f, _, _) = self.big_f[k];
            let m = &self.path.metrics[k];
            for i in 0..m.len() {
                rows.push(vec![
                    self.path.t[k],
                    self.path.grid.theta()[i],
                    self.v[k][i],
                    f * m.q[i],
                    f * m.p[i],
                    self.margin[k][i],
                    self.h[k][i],
                ]);
            }
        }
        table::write_numeric(path, &["t", "theta", "v", "q", "p", "margin", "H"], &rows)
    }

    /// `t,area,mH_CH,flux,Hmin,Hmax`.
    pub fn write_slices_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let rows: Vec<Vec<f64>> = self
            .slices
            .iter()
            .map(|s| vec![s.t, s.area, s.mh_ch, s.flux, s.h_min, s.h_max])
            .collect();
        table::write_numeric(path, &["t", "area", "mH_CH", "flux", "Hmin", "Hmax"], &rows)
    }
}

/// The neck t ∈ [θ_cut, 1] as ds² + f(s)²g_*, s = A u₁ t,
/// f² = r²(1 + ε s²/(A²u₁²)).
pub fn collar_neck_profile(block: &CollarBlock) -> Result<RadialProfile> {
    let path = &block.path;
    let r = path.r_o;
    let still = path.still_from();
    let last = &path.metrics[path.len() - 1];
    for k in still..path.len() {
        if path.metrics[k].q != last.q || path.metrics[k].p != last.p {
            return Err(Error::Neck(format!("path still moving at t = {}", path.t[k])));
        }
    }
    let k = gaussian_curvature(last)?;
    let dev = k.values.iter().map(|k| (k * r * r - 1.0).abs()).fold(0.0, f64::max);
    if dev > 1e-6 {
        return Err(Error::Neck(format!("end slice not round (r²K deviates by {dev:e})")));
    }
    let udev = block.eigen.u[path.len() - 1]
        .iter()
        .map(|u| (u / block.u1 - 1.0).abs())
        .fold(0.0, f64::max);
    if udev > 1e-6 {
        return Err(Error::Neck(format!("end eigenfunction not constant (relative deviation {udev:e})")));
    }
    let au1 = block.amplitude.a * block.u1;
    let c = block.eps / (au1 * au1);
    let (lo, hi) = (au1 * path.theta_cut, au1);
    let s: Vec<f64> = (0..NECK_NODES)
        .map(|i| if i + 1 == NECK_NODES { hi } else { lo + (hi - lo) * i as f64 / (NECK_NODES - 1) as f64 })
        .collect();
    let seg = ProfileSegment::from_fn(Segment::CollarNeck, s, |s| {
        let w = (1.0 + c * s * s).sqrt();
        (r * w, r * c * s / w, r * c / (w * w * w))
    })?;
    RadialProfile::single(2, block.q_o, seg)
}

/// Charged Hawking mass at the outer end of a neck profile.
pub fn neck_end_hawking(neck: &RadialProfile) -> f64 {
    let e = neck.endpoint(crate::rotsym::End::End);
    formula::hawking(neck.q, e.f, e.fp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{conformal_path, normalize_path, DEFAULT_THETA_CUT};
    use crate::sphere::{ConformalData, PolarGrid};

    fn path(a: f64, k: f64, r: f64) -> MetricPath {
        let g = PolarGrid::new(41).unwrap();
        let w = g.theta().iter().map(|t| a * (k * t).cos()).collect();
        let cd = ConformalData::normalized(&g, w, r).unwrap();
        normalize_path(&conformal_path(&cd, 33).unwrap(), DEFAULT_THETA_CUT).unwrap()
    }

    #[test]
    fn round_amplitudes() {
        let p = path(0.0, 1.0, 1.0);
        let e = eigen_path(&p).unwrap();
        assert!(e.sup_dlog_u < 1e-9);
        assert!((e.inf_u2 - 1.0 / (4.0 * PI)).abs() < 1e-12);
        let a = select_amplitude(&e, p.kappa, p.alpha, 0.5, 1.0).unwrap();
        assert!((a.a - (16.0 * PI / 0.75).sqrt()).abs() < 1e-8);
        assert!((a.a - 8.19).abs() < 5e-3);
        assert!(a.a * a.a * e.inf_u2 * 0.75 > 2.0);
        let a0 = select_amplitude(&e, p.kappa, p.alpha, 0.0, 1.0).unwrap();
        assert!((a0.a - (16.0 * PI).sqrt()).abs() < 1e-8);
        assert!(matches!(select_amplitude(&e, 1.0, 0.0, 1.0, 1.0), Err(Error::Admissibility(_))));
    }

    #[test]
    fn epsilon_rules() {
        let u1 = 1.0 / (4.0 * PI).sqrt();
        let a = (16.0 * PI / 0.75).sqrt();
        let c = select_epsilon(0.7, 1.0, 0.5, a, u1).unwrap();
        // Independent evaluation of the slice mass at t = 1.
        let e = c.eps;
        let mh1 = ((1.0 + e).sqrt() / 2.0) * (1.0 + 0.25 / (1.0 + e) - e * e / (a * a * u1 * u1 * (1.0 + e)));
        assert!((mh1 - c.mh1).abs() < 1e-15);
        assert!(0.7 > mh1 && mh1 > 0.625 && mh1 > 0.5);
        let far = select_epsilon(10.0, 1.0, 0.5, a, u1).unwrap();
        assert_eq!(far.eps, 0.5);
        assert!(matches!(select_epsilon(0.625, 1.0, 0.5, a, u1), Err(Error::EpsilonSearch(_))));
    }

    fn build(a: f64, k: f64, q: f64, m: f64) -> (CollarBlock, EpsilonChoice) {
        let p = path(a, k, 1.0);
        let e = eigen_path(&p).unwrap();
        let amp = select_amplitude(&e, p.kappa, p.alpha, q, p.r_o).unwrap();
        let u1 = 1.0 / (4.0 * PI * p.r_o * p.r_o).sqrt();
        let ec = select_epsilon(m, p.r_o, q, amp.a, u1).unwrap();
        (assemble_collar(&p, &e, amp, ec.eps, q).unwrap(), ec)
    }

    #[test]
    fn round_collar() {
        let (b, ec) = build(0.0, 1.0, 0.5, 0.7);
        assert!(b.min_margin() > 0.0);
        let r = b.report(Some(ec));
        assert!(r.h0_max < 1e-10 && r.h_min_positive_t > 0.0);
        assert!(r.max_flux_drift < 1e-9 && r.div_e < 1e-6);
        let s0 = &b.slices[0];
        assert!((s0.mh_ch - 0.625).abs() < 1e-12);
        let s1 = b.slices.last().unwrap();
        assert!((s1.mh_ch - ec.mh1).abs() < 1e-8);
        for s in &b.slices {
            if let Some(c) = s.mh_closed {
                assert!((c - s.mh_ch).abs() < 1e-8);
            }
        }
        // v is constant on every round slice.
        for row in &b.v {
            assert!(row.iter().all(|v| (v - row[0]).abs() < 1e-9 * row[0]));
        }
    }

    #[test]
    fn deformed_collar_bounds() {
        let (b, _) = build(0.2, 2.0, 0.3, 0.9);
        let p = &b.path;
        let amp = b.amplitude;
        let q2 = b.q_o * b.q_o;
        let bracket = amp.a * amp.a * amp.inf_u2 * (p.kappa - q2) - 2.0 - p.alpha - 2.0 * amp.sup_dlog_u;
        for k in 0..p.len() {
            let f = b.big_f[k].0;
            for i in 0..p.grid.len() {
                let u = b.eigen.u[k][i];
                let lower = 2.0 / (u * u * amp.a * amp.a * f * f) * bracket;
                assert!(b.margin[k][i] >= lower * (1.0 - 1e-4), "{k} {i}: {} < {lower}", b.margin[k][i]);
            }
        }
        let t0 = p.metrics[0].clone();
        let cd = ConformalData::normalized(&p.grid, p.grid.theta().iter().map(|t| 0.2 * (2.0 * t).cos()).collect(), 1.0).unwrap();
        let m0 = cd.metric();
        let err = t0.q.iter().zip(&m0.q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn halved_amplitude_fails() {
        let p = path(0.2, 2.0, 1.0);
        let e = eigen_path(&p).unwrap();
        let mut amp = select_amplitude(&e, p.kappa, p.alpha, 0.5, 1.0).unwrap();
        amp.a *= 0.25;
        let err = assemble_collar(&p, &e, amp, 0.5, 0.5).unwrap_err();
        assert!(matches!(err, Error::CollarDec { .. }), "{err}");
    }

    #[test]
    fn neck_profile() {
        let (b, _) = build(0.2, 2.0, 0.5, 0.7);
        let pr = collar_neck_profile(&b).unwrap();
        let au1 = b.amplitude.a * b.u1;
        assert!((pr.start() - au1 * DEFAULT_THETA_CUT).abs() < 1e-14 && pr.end() == au1);
        let e = pr.endpoint(crate::rotsym::End::End);
        let h_profile = 2.0 * e.fp / e.f;
        let h_collar = b.h.last().unwrap()[0];
        assert!((h_profile - h_collar).abs() < 1e-9 * h_collar.max(1.0), "{h_profile} {h_collar}");
        assert!((neck_end_hawking(&pr) - b.slices.last().unwrap().mh_ch).abs() < 1e-8);
        assert!(crate::rotsym::dec_margin(&pr).iter().all(|m| *m > 0.0));
    }
}

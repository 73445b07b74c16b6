//! Certification of an extension from its raw fields alone.
//!
//! Input is what the dump contains: the collar lapse v and slice metrics
//! F·g(t) on the (t, θ) grid, the radial profile jets, and the few scalar
//! parameters (ε, A, θ_cut, RN step and offset) needed to read them.
//! Everything else is recomputed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::config::Tolerances;
use crate::collar::{collar_scalar_curvature, neck_factor};
use crate::numerics::uniform_derivative;
use crate::rotsym::{formula, rn_solve, RNParams, RadialProfile, Segment};
use crate::sphere::{charge_flux, AxisymMetric, ScalarField};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExtensionParams {
    pub m_e: f64,
    pub q_o: f64,
    /// Neck parameter, lapse amplitude and cut time; absent without a collar.
    pub eps: Option<f64>,
    pub amplitude: Option<f64>,
    pub theta_cut: Option<f64>,
    pub rn_h: f64,
    /// Output s minus RN s on the tail.
    pub rn_offset: f64,
}

/// Collar fields at every (t_k, θ_i): lapse and slice metric F(t)·(q, p).
#[derive(Clone, Debug)]
pub struct CollarData {
    pub t: Vec<f64>,
    pub v: Vec<Vec<f64>>,
    pub slices: Vec<AxisymMetric>,
}

#[derive(Clone, Debug)]
pub struct ExtensionData {
    pub params: ExtensionParams,
    pub collar: Option<CollarData>,
    pub profile: RadialProfile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionReport {
    pub region: String,
    pub start: f64,
    pub end: f64,
    pub nodes: usize,
    pub min_margin: f64,
    pub min_h: f64,
    pub max_flux_drift: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PassFlags {
    pub dec: bool,
    pub flux: bool,
    pub minimal_boundary: bool,
    pub mean_convex: bool,
    pub penrose: bool,
    pub rn_tail: bool,
    pub continuity: bool,
    pub area_preserving: bool,
}

impl PassFlags {
    pub fn all(&self) -> bool {
        self.dec
            && self.flux
            && self.minimal_boundary
            && self.mean_convex
            && self.penrose
            && self.rn_tail
            && self.continuity
            && self.area_preserving
    }

    pub fn failed(&self) -> Vec<&'static str> {
        [
            (self.dec, "dec"),
            (self.flux, "flux"),
            (self.minimal_boundary, "minimal_boundary"),
            (self.mean_convex, "mean_convex"),
            (self.penrose, "penrose"),
            (self.rn_tail, "rn_tail"),
            (self.continuity, "continuity"),
            (self.area_preserving, "area_preserving"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, n)| n)
        .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionReport {
    /// ADM mass of the output, the RN parameter of the tail.
    pub m_e: f64,
    pub q_o: f64,
    pub boundary_area: f64,
    /// Charged Hawking mass of the boundary: the lower bound.
    pub mh_boundary: f64,
    pub gap: f64,
    /// √(A/16π) + √(π/A) Q².
    pub penrose_bound: f64,
    /// Minimum over the strictly positive regions (collar, neck, bridge),
    /// or over everything when there are none.
    pub min_margin: f64,
    /// Minimum over the bent RN and RN regions.
    pub min_margin_rn: f64,
    pub max_flux_drift: f64,
    pub h_boundary_max: f64,
    /// min H over the collar slices with t > 0 and the profile past its start.
    pub min_h_positive: f64,
    /// m_H along the tail: min, max and max |m_H − m_e|.
    pub tail_mass_min: f64,
    pub tail_mass_max: f64,
    pub tail_mass_deviation: f64,
    /// max |f − u_RN|, |f′ − u′_RN| and |Q/f² − Q/u²| on the tail.
    pub tail_rn_deviation: f64,
    pub tail_e_deviation: f64,
    /// Collar slices against the profile on t ∈ [θ_cut, 1]: area radius,
    /// mean curvature and charged Hawking mass.
    pub junction_f_error: f64,
    pub junction_h_error: f64,
    pub junction_mass_error: f64,
    /// Node-to-node consistency of the profile jets (Hermite-corrected trapezoid).
    pub profile_c0_residual: f64,
    pub profile_c1_residual: f64,
    /// max |A(Σ_t)/A(Σ_0) − F(t)²| and max |∂_t log(q p)| of g(t).
    pub area_defect: f64,
    pub area_rate: f64,
    pub collar_mh_min: Option<f64>,
    pub collar_mh_max: Option<f64>,
    pub regions: Vec<RegionReport>,
    pub problems: Vec<String>,
    pub flags: PassFlags,
    pub pass: bool,
}

fn fmin(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::INFINITY, f64::min)
}

fn fmax(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn mh_slice(area: f64, q: f64, h2_int: f64) -> f64 {
    (area / (16.0 * PI)).sqrt() * (1.0 + 4.0 * PI * q * q / area - h2_int / (16.0 * PI))
}

struct CollarCheck {
    area0: f64,
    h0_max: f64,
    mh0: f64,
    min_margin: f64,
    min_h: f64,
    flux_drift: f64,
    area_defect: f64,
    area_rate: f64,
    mh: Vec<f64>,
    h_mean: Vec<f64>,
    h_spread: Vec<f64>,
    radius: Vec<f64>,
}

fn check_collar(c: &CollarData, p: &ExtensionParams, problems: &mut Vec<String>) -> Option<CollarCheck> {
    let nt = c.t.len();
    if nt < 3 || c.v.len() != nt || c.slices.len() != nt {
        problems.push("collar needs at least three consistent time rows".into());
        return None;
    }
    let Some(eps) = p.eps else {
        problems.push("collar present but ε missing".into());
        return None;
    };
    let ht = c.t[1] - c.t[0];
    let uniform = c.t.windows(2).all(|w| ((w[1] - w[0]) - ht).abs() < 1e-12);
    if !uniform || c.t[0] != 0.0 {
        problems.push("collar time grid is not uniform from t = 0".into());
        return None;
    }
    let grid = c.slices[0].grid.clone();
    let n = grid.len();
    let q = p.q_o;
    let area0 = c.slices[0].area();
    let r2 = area0 / (4.0 * PI);
    let big_f: Vec<(f64, f64, f64)> = c.t.iter().map(|t| neck_factor(eps, *t)).collect();
    let g: Vec<AxisymMetric> = c.slices.iter().zip(&big_f).map(|(s, f)| s.scaled(1.0 / f.0)).collect();

    let mut dlog_v = vec![vec![0.0; n]; nt];
    let mut gds = vec![vec![0.0; n]; nt];
    let mut area_rate: f64 = 0.0;
    for i in 0..n {
        let lv: Vec<f64> = c.v.iter().map(|v| v[i].ln()).collect();
        let lq: Vec<f64> = g.iter().map(|m| m.q[i].ln()).collect();
        let lp: Vec<f64> = g.iter().map(|m| m.p[i].ln()).collect();
        let (dv, dq, dp) = (uniform_derivative(&lv, ht), uniform_derivative(&lq, ht), uniform_derivative(&lp, ht));
        for k in 0..nt {
            dlog_v[k][i] = dv[k];
            gds[k][i] = 4.0 * (dq[k] * dq[k] + dp[k] * dp[k]);
            area_rate = area_rate.max((dq[k] + dp[k]).abs());
        }
    }

    let dens0 = c.slices[0].area_density();
    let mut out = CollarCheck {
        area0,
        h0_max: 0.0,
        mh0: 0.0,
        min_margin: f64::INFINITY,
        min_h: f64::INFINITY,
        flux_drift: 0.0,
        area_defect: 0.0,
        area_rate,
        mh: Vec::with_capacity(nt),
        h_mean: Vec::with_capacity(nt),
        h_spread: Vec::with_capacity(nt),
        radius: Vec::with_capacity(nt),
    };
    for k in 0..nt {
        let (f, fp, _) = big_f[k];
        let slice = &c.slices[k];
        let dens = slice.area_density();
        // Divergence-free with the boundary flux: E_n √det h is constant in t.
        let e_n: Vec<f64> = (0..n).map(|i| q * dens0[i] / (r2 * dens[i])).collect();
        let r = match collar_scalar_curvature(&g[k], &c.v[k], &dlog_v[k], &gds[k], big_f[k]) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("collar curvature at t = {}: {e}", c.t[k]));
                return None;
            }
        };
        let margin = fmin((0..n).map(|i| r[i] - 2.0 * e_n[i] * e_n[i]));
        out.min_margin = out.min_margin.min(margin);
        let h: Vec<f64> = c.v[k].iter().map(|v| 2.0 * fp / (v * f)).collect();
        if k == 0 {
            out.h0_max = fmax(h.iter().map(|h| h.abs()));
        } else {
            out.min_h = out.min_h.min(fmin(h.iter().cloned()));
        }
        let area = slice.area();
        out.area_defect = out.area_defect.max((area / area0 - f * f).abs());
        let flux = charge_flux(slice, &ScalarField { grid: grid.clone(), values: e_n }).unwrap_or(f64::NAN);
        out.flux_drift = out.flux_drift.max((flux - q).abs());
        let h2 = slice.integrate(&h.iter().map(|h| h * h).collect::<Vec<_>>());
        out.mh.push(mh_slice(area, q, h2));
        let hm = h.iter().sum::<f64>() / n as f64;
        out.h_spread.push(fmax(h.iter().map(|h| (h - hm).abs())));
        out.h_mean.push(hm);
        out.radius.push((area / (4.0 * PI)).sqrt());
    }
    out.mh0 = out.mh[0];
    Some(out)
}

/// Recomputes every diagnostic and flag of an extension.
pub fn verify_extension(data: &ExtensionData, tol: &Tolerances) -> ExtensionReport {
    let p = &data.params;
    let pr = &data.profile;
    let q = p.q_o;
    let mut problems = Vec::new();
    if pr.n != 2 {
        problems.push(format!("profile dimension {} ≠ 2", pr.n));
    }
    if pr.q != q {
        problems.push(format!("profile charge {} differs from Q_o = {q}", pr.q));
    }

    let collar = data.collar.as_ref().and_then(|c| check_collar(c, p, &mut problems));
    if data.collar.is_some() && collar.is_none() {
        problems.push("collar could not be checked".into());
    }

    // Profile regions.
    let mut regions = Vec::new();
    if let Some(cc) = &collar {
        let c = data.collar.as_ref().unwrap();
        regions.push(RegionReport {
            region: "COLLAR".into(),
            start: c.t[0],
            end: c.t[c.t.len() - 1],
            nodes: c.t.len() * c.slices[0].len(),
            min_margin: cc.min_margin,
            min_h: cc.min_h,
            max_flux_drift: cc.flux_drift,
        });
    }
    let start_s = pr.start();
    let profile_only = collar.is_none();
    let mut strict_min = f64::INFINITY;
    let mut rn_min = f64::INFINITY;
    let mut all_min = f64::INFINITY;
    let mut min_h_profile = f64::INFINITY;
    let mut profile_flux = 0.0f64;
    for seg in &pr.segments {
        let margins: Vec<f64> = (0..seg.len()).map(|i| formula::margin(2, q, seg.f[i], seg.fp[i], seg.fpp[i])).collect();
        let m = fmin(margins.iter().cloned());
        all_min = all_min.min(m);
        match seg.tag {
            Segment::CollarNeck | Segment::Bridge => strict_min = strict_min.min(m),
            _ => rn_min = rn_min.min(m),
        }
        // The boundary node of a profile-only extension is the minimal surface.
        let h = fmin((0..seg.len()).filter(|&i| !(profile_only && seg.s[i] == start_s)).map(|i| 2.0 * seg.fp[i] / seg.f[i]));
        min_h_profile = min_h_profile.min(h);
        // (1/4π) ∫ Q/f² over the round sphere of radius f.
        let drift = fmax(seg.f.iter().map(|f| (f * f * formula::e_normal(2, q, *f) - q).abs()));
        profile_flux = profile_flux.max(drift);
        regions.push(RegionReport {
            region: seg.tag.to_string(),
            start: seg.start(),
            end: seg.end(),
            nodes: seg.len(),
            min_margin: m,
            min_h: h,
            max_flux_drift: drift,
        });
    }
    let (min_margin, strict_ok) = match &collar {
        Some(cc) => {
            let m = cc.min_margin.min(strict_min);
            (m, m > 0.0)
        }
        None if strict_min.is_finite() => (strict_min, strict_min > 0.0),
        None => (all_min, true),
    };
    let rn_ok = !(rn_min < -tol.rn_margin);
    let dec = strict_ok && rn_ok;

    // Node-to-node consistency.
    let nodes: Vec<_> = pr.nodes().collect();
    let (mut c0, mut c1) = (0.0f64, 0.0f64);
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b.s - a.s;
        let r0 = b.f - a.f - 0.5 * h * (a.fp + b.fp) - h * h * (a.fpp - b.fpp) / 12.0;
        let r1 = b.fp - a.fp - 0.5 * h * (a.fpp + b.fpp);
        c0 = c0.max(r0.abs() / a.f.max(1.0));
        c1 = c1.max(r1.abs());
    }

    // Tail.
    let tail = pr.segments.last().filter(|s| s.tag == Segment::RnTail);
    let (mut t_min, mut t_max, mut t_dev, mut rn_dev, mut e_dev) = (f64::NAN, f64::NAN, f64::INFINITY, f64::INFINITY, f64::INFINITY);
    if let Some(seg) = tail {
        let mh: Vec<f64> = (0..seg.len()).map(|i| formula::hawking(q, seg.f[i], seg.fp[i])).collect();
        t_min = fmin(mh.iter().cloned());
        t_max = mh.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        t_dev = fmax(mh.iter().map(|m| (m - p.m_e).abs()));
        match RNParams::new(p.m_e, q).and_then(|rp| rn_solve(rp, seg.end() - p.rn_offset + p.rn_h, p.rn_h)) {
            Ok(sol) => {
                let (mut d, mut de) = (0.0f64, 0.0f64);
                for i in 0..seg.len() {
                    let (u, up, _) = sol.eval(seg.s[i] - p.rn_offset);
                    d = d.max((seg.f[i] - u).abs().max((seg.fp[i] - up).abs()));
                    de = de.max((formula::e_normal(2, q, seg.f[i]) - q / (u * u)).abs());
                }
                rn_dev = d;
                e_dev = de;
            }
            Err(e) => problems.push(format!("reference RN solution: {e}")),
        }
    } else {
        problems.push("profile does not end in an RN tail".into());
    }
    let rn_tail = tail.is_some()
        && p.m_e > q.abs()
        && t_dev <= tol.tail
        && rn_dev <= tol.tail
        && e_dev <= tol.tail;

    // Junction between the collar and the profile neck.
    let (mut jf, mut jh, mut jm) = (0.0f64, 0.0f64, 0.0f64);
    let mut junction_ok = true;
    if let (Some(cc), Some(c)) = (&collar, &data.collar) {
        match (p.amplitude, p.theta_cut) {
            (Some(a), Some(cut)) => {
                // (4π r_o²)^{-1/2}, from the boundary area.
                let u1 = 1.0 / cc.area0.sqrt();
                // The collar and the kept part of the neck overlap from t = θ_cut
                // up to where the bridge takes over.
                let neck = pr.segments.first().filter(|s| s.tag == Segment::CollarNeck);
                if neck.is_none_or(|n| (n.start() - a * u1 * cut).abs() > 1e-12 * n.start().max(1.0)) {
                    problems.push("profile does not start with the collar neck at s = A u₁ θ_cut".into());
                    junction_ok = false;
                }
                for (k, &t) in c.t.iter().enumerate() {
                    let s = a * u1 * t;
                    let Some(neck) = neck.filter(|n| t >= cut && s <= n.end()) else {
                        continue;
                    };
                    let (f, fp, _) = neck.eval(s);
                    jf = jf.max((f - cc.radius[k]).abs());
                    jh = jh.max((2.0 * fp / f - cc.h_mean[k]).abs().max(cc.h_spread[k]));
                    jm = jm.max((formula::hawking(q, f, fp) - cc.mh[k]).abs());
                }
            }
            _ => {
                problems.push("collar present but amplitude or θ_cut missing".into());
                junction_ok = false;
            }
        }
    }
    let continuity = junction_ok
        && jf <= tol.continuity
        && jh <= tol.continuity
        && jm <= tol.continuity
        && c0 <= tol.continuity;

    // Boundary.
    let (area, h0, mh0) = match &collar {
        Some(cc) => (cc.area0, cc.h0_max, cc.mh0),
        None => {
            let nd = pr.endpoint(crate::rotsym::End::Start);
            let area = 4.0 * PI * nd.f * nd.f;
            (area, (2.0 * nd.fp / nd.f).abs(), formula::hawking(q, nd.f, nd.fp))
        }
    };
    let penrose_bound = (area / (16.0 * PI)).sqrt() + (PI / area).sqrt() * q * q;
    let min_h_positive = collar.as_ref().map_or(f64::INFINITY, |c| c.min_h).min(min_h_profile);
    let max_flux_drift = collar.as_ref().map_or(0.0, |c| c.flux_drift).max(profile_flux);
    let (area_defect, area_rate) = collar.as_ref().map_or((0.0, 0.0), |c| (c.area_defect, c.area_rate));

    let flags = PassFlags {
        dec,
        flux: max_flux_drift <= tol.flux,
        minimal_boundary: h0 <= tol.minimal,
        mean_convex: min_h_positive > 0.0 && nodes.iter().all(|nd| nd.fp >= 0.0),
        penrose: p.m_e >= penrose_bound - tol.tail,
        rn_tail,
        continuity,
        // Polynomial in t for the area form, so FD rates are O(h²) at worst.
        area_preserving: area_defect <= 1e-10 && area_rate <= 1e-8,
    };
    let pass = flags.all() && problems.is_empty();
    ExtensionReport {
        m_e: p.m_e,
        q_o: q,
        boundary_area: area,
        mh_boundary: mh0,
        gap: p.m_e - mh0,
        penrose_bound,
        min_margin,
        min_margin_rn: rn_min,
        max_flux_drift,
        h_boundary_max: h0,
        min_h_positive,
        tail_mass_min: t_min,
        tail_mass_max: t_max,
        tail_mass_deviation: t_dev,
        tail_rn_deviation: rn_dev,
        tail_e_deviation: e_dev,
        junction_f_error: jf,
        junction_h_error: jh,
        junction_mass_error: jm,
        profile_c0_residual: c0,
        profile_c1_residual: c1,
        area_defect,
        area_rate,
        collar_mh_min: collar.as_ref().map(|c| fmin(c.mh.iter().cloned())),
        collar_mh_max: collar.as_ref().map(|c| c.mh.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        regions,
        problems,
        flags,
        pass,
    }
}

//! Bending a DEC-saturating profile into strict DEC just below a point.
//!
//! With x = s₀ − s and the bump b(s) = a·exp(−(δ/x)²) (b = 0 from s₀ on),
//! the reparametrization σ(s) = s − ∫_s^{s₀} b has σ̇ = 1 + b, σ̈ = −2δ²b/x³,
//! and the bent profile f̃ = f∘σ agrees with f to infinite order at s₀. Its
//! margin is
//!
//!   σ̇² M(σ) + b [2f′δ²/x³ − (2 + b)(n−1)(1 − Q²/f^{2(n−1)})/(2f)],
//!
//! so where M = 0 the sign is that of the bracket, which is positive once
//! δ is small.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::rotsym::{formula, ProfileSegment, RadialProfile, Segment};

/// Nodes per bent interval.
pub const BENT_NODES: usize = 257;

#[derive(Clone, Copy, Debug)]
pub struct BendSpec {
    pub s0: f64,
    /// f̃(s₀ − δ) must stay above this.
    pub alpha_floor: f64,
    /// Allowed negative margin away from the strict window.
    pub tol: f64,
    pub max_halvings: usize,
}

impl BendSpec {
    pub fn new(s0: f64, alpha_floor: f64) -> Self {
        Self { s0, alpha_floor, tol: 1e-10, max_halvings: 60 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bump {
    pub s0: f64,
    pub delta: f64,
    pub a: f64,
}

impl Bump {
    pub fn value(&self, s: f64) -> f64 {
        let x = self.s0 - s;
        if x <= 0.0 {
            0.0
        } else {
            self.a * (-(self.delta / x).powi(2)).exp()
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let x = self.s0 - s;
        if x <= 0.0 {
            0.0
        } else {
            -2.0 * self.delta * self.delta * self.value(s) / (x * x * x)
        }
    }

    /// ∫_s^{s₀} b.
    pub fn tail(&self, s: f64) -> f64 {
        if s >= self.s0 {
            0.0
        } else {
            integrate(|t| self.value(t), s, self.s0, 16)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BendReport {
    pub s0: f64,
    /// 0 when the input was already strict at s₀ and left unchanged.
    pub delta: f64,
    pub a: f64,
    /// σ(s₀ − δ).
    pub k_delta: f64,
    pub halvings: usize,
    /// Minimum margin on [s₀ − δ, s₀ − δ/2].
    pub window_margin: f64,
    pub min_margin: f64,
}

#[derive(Clone, Debug)]
pub struct Bent {
    pub profile: RadialProfile,
    pub report: BendReport,
}

struct Attempt {
    seg: ProfileSegment,
    k_delta: f64,
    window_margin: f64,
    min_margin: f64,
}

fn try_bend<J: Fn(f64) -> Option<(f64, f64, f64)>>(
    pr: &RadialProfile,
    jet: &J,
    spec: &BendSpec,
    bump: &Bump,
    noise: f64,
) -> Result<std::result::Result<Attempt, String>> {
    let (n, q) = (pr.n, pr.q);
    let (s0, delta) = (bump.s0, bump.delta);
    let lo = s0 - delta;
    let k_delta = lo - bump.tail(lo);
    if k_delta < pr.start() {
        return Ok(Err(format!("σ(s₀ − δ) = {k_delta} leaves the profile")));
    }
    let mut s = Vec::with_capacity(BENT_NODES);
    let mut f = Vec::with_capacity(BENT_NODES);
    let mut fp = Vec::with_capacity(BENT_NODES);
    let mut fpp = Vec::with_capacity(BENT_NODES);
    let mut window_margin = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    // σ by cumulative integration from s₀ downwards.
    let nodes: Vec<f64> = (0..BENT_NODES)
        .map(|k| if k + 1 == BENT_NODES { s0 } else { lo + delta * k as f64 / (BENT_NODES - 1) as f64 })
        .collect();
    let mut tails = vec![0.0; BENT_NODES];
    for k in (0..BENT_NODES - 1).rev() {
        tails[k] = tails[k + 1] + integrate(|t| bump.value(t), nodes[k], nodes[k + 1], 1);
    }
    for (k, &x) in nodes.iter().enumerate() {
        let sig = x - tails[k];
        let (g0, g1, g2) = jet(sig)
            .ok_or_else(|| Error::BendPrecondition(format!("σ = {sig} outside the profile")))?;
        let b = bump.value(x);
        let db = bump.derivative(x);
        let sd = 1.0 + b;
        let (v0, v1, v2) = (g0, g1 * sd, g2 * sd * sd + g1 * db);
        let m = formula::margin(n, q, v0, v1, v2);
        let xr = s0 - x;
        if xr > 0.0 && b > 0.0 {
            let fk = g0.powi(n as i32 - 1);
            let bracket = 2.0 * g1 * delta * delta / xr.powi(3)
                - (2.0 + b) * (n - 1) as f64 * (1.0 - q * q / (fk * fk)) / (2.0 * g0);
            if !(bracket > 0.0) {
                return Ok(Err(format!("bending bracket {bracket:e} at s = {x}")));
            }
        }
        if x <= s0 - 0.5 * delta {
            window_margin = window_margin.min(m);
        } else {
            min_margin = min_margin.min(m);
        }
        s.push(x);
        f.push(v0);
        fp.push(v1);
        fpp.push(v2);
    }
    if !(window_margin > noise) {
        return Ok(Err(format!("window margin {window_margin:e} within noise {noise:e}")));
    }
    if min_margin < -spec.tol {
        return Ok(Err(format!("margin {min_margin:e} below −tol")));
    }
    if !(f[0] > spec.alpha_floor) {
        return Ok(Err(format!("f̃(s₀ − δ) = {} not above the floor {}", f[0], spec.alpha_floor)));
    }
    let fp0 = fp[BENT_NODES - 1];
    if !(fp[0] < fp0) {
        return Ok(Err(format!("slope {} at s₀ − δ not below f′(s₀) = {fp0}", fp[0])));
    }
    min_margin = min_margin.min(window_margin);
    Ok(Ok(Attempt {
        seg: ProfileSegment::new(Segment::BentRn, s, f, fp, fpp)?,
        k_delta,
        window_margin,
        min_margin,
    }))
}

/// Bends `pr` on [s₀ − δ, s₀] and drops everything below s₀ − δ; nodes above
/// s₀ are kept unchanged.
pub fn bend_profile(pr: &RadialProfile, spec: &BendSpec) -> Result<Bent> {
    bend_with(pr, &|s| pr.eval(s), spec)
}

/// As [`bend_profile`], with the jet of `pr` between nodes supplied by `jet`.
/// Interpolated second derivatives carry rounding of order ε·f/h², which
/// swamps the bending gain when `pr` saturates the inequality; an exact
/// evaluator avoids this.
pub fn bend_with<J: Fn(f64) -> Option<(f64, f64, f64)>>(pr: &RadialProfile, jet: &J, spec: &BendSpec) -> Result<Bent> {
    let s0 = spec.s0;
    if !(s0 > pr.start() && s0 < pr.end()) {
        return Err(Error::BendPrecondition(format!(
            "s₀ = {s0} not interior to [{}, {}]",
            pr.start(),
            pr.end()
        )));
    }
    let (f0, fp0, fpp0) = jet(s0).ok_or_else(|| Error::BendPrecondition(format!("no jet at s₀ = {s0}")))?;
    if !(fp0 > 0.0 && fpp0 > 0.0) {
        return Err(Error::BendPrecondition(format!(
            "need f′(s₀) > 0 and f″(s₀) > 0 (got {fp0}, {fpp0})"
        )));
    }
    let m0 = formula::margin(pr.n, pr.q, f0, fp0, fpp0);
    let noise = 1e-11 / (f0 * f0);
    if m0 > noise {
        return Ok(Bent {
            profile: pr.clone(),
            report: BendReport {
                s0,
                delta: 0.0,
                a: 0.0,
                k_delta: s0,
                halvings: 0,
                window_margin: m0,
                min_margin: m0,
            },
        });
    }
    let mut delta = 0.1 * (s0 - pr.start());
    let mut last = String::new();
    for halvings in 0..=spec.max_halvings {
        let a = (0.5 * std::f64::consts::E * fpp0 * delta / fp0).min(1.0);
        let bump = Bump { s0, delta, a };
        match try_bend(pr, jet, spec, &bump, noise)? {
            Ok(at) => {
                let mut segments = vec![at.seg];
                let rest = pr.restricted(s0, pr.end())?;
                segments.extend(rest.segments.into_iter().map(|mut seg| {
                    // The node at s₀ itself already closes the bent segment.
                    if seg.s[0] == s0 {
                        seg = seg.restricted(f64::from_bits(s0.to_bits() + 1), f64::INFINITY).unwrap_or(seg);
                    }
                    seg
                }));
                return Ok(Bent {
                    profile: RadialProfile::new(pr.n, pr.q, segments)?,
                    report: BendReport {
                        s0,
                        delta,
                        a,
                        k_delta: at.k_delta,
                        halvings,
                        window_margin: at.window_margin,
                        min_margin: at.min_margin,
                    },
                });
            }
            Err(why) => last = why,
        }
        delta *= 0.5;
    }
    Err(Error::BendSearch(format!(
        "no admissible δ after {} halvings: {last}",
        spec.max_halvings
    )))
}

//! Bridging two strictly DEC profiles.
//!
//! The bridge is built in two steps. First a C^{1,1} join f̃: f₁, then
//! f₁(b₁) + ∫ζ across the gap, then the translated f₂, where ζ is a
//! decreasing slope function with the right endpoint values and integral.
//! Then f̃ is mollified on the middle of [a₁, b₂] only, with the kernel
//! width halved until the DEC margin survives.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, integrate, smoothstep, smoothstep_jet};
use crate::rotsym::{formula, hypotheses_at, End, ProfileSegment, RadialProfile, Segment};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Translation {
    pub gap: f64,
    /// a₂ − b₁ after translation.
    pub length: f64,
    /// Added to the right profile's s.
    pub offset: f64,
    pub equal_slopes: bool,
}

/// Gap length L between b₁ and the translated a₂.
pub fn translation_length(slope1: f64, slope2: f64, gap: f64) -> Result<(f64, bool)> {
    if !(gap > 0.0) {
        return Err(Error::GlueHypothesis {
            condition: 2,
            detail: format!("f₁(b₁) < f₂(a₂) fails (gap {gap})"),
        });
    }
    if slope2 > slope1 {
        return Err(Error::GlueHypothesis {
            condition: 2,
            detail: format!("f₂′(a₂) = {slope2} exceeds f₁′(b₁) = {slope1}"),
        });
    }
    if slope1 <= 0.0 {
        return Err(Error::Ungluable(format!(
            "slopes {slope1}, {slope2} cannot close a positive gap {gap}"
        )));
    }
    if slope1 == slope2 {
        return Ok((gap / slope1, true));
    }
    let l = if slope2 > 0.0 {
        gap / (0.5 * (slope1 + slope2))
    } else {
        2.0 * gap / slope1
    };
    Ok((l, false))
}

pub fn translate_for_gluing(f1: &RadialProfile, f2: &RadialProfile) -> Result<Translation> {
    let e = f1.endpoint(End::End);
    let s = f2.endpoint(End::Start);
    let gap = s.f - e.f;
    let (length, equal_slopes) = translation_length(e.fp, s.fp, gap)?;
    Ok(Translation {
        gap,
        length,
        offset: e.s + length - s.s,
        equal_slopes,
    })
}

/// ζ(x) = ζ₂ + (ζ₁ − ζ₂) S(1 − x̂)^γ with x̂ = (x − b₁)/L.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Zeta {
    pub b1: f64,
    pub length: f64,
    pub slope1: f64,
    pub slope2: f64,
    /// None when the slopes agree and ζ is constant.
    pub gamma: Option<f64>,
}

/// ∫₀¹ S(y)^γ dy, decreasing from 1 to 0 as γ runs over (0, ∞).
fn power_mass(gamma: f64) -> f64 {
    integrate(|y| smoothstep(y).powf(gamma), 0.0, 1.0, 64)
}

impl Zeta {
    pub fn value(&self, x: f64) -> f64 {
        match self.gamma {
            None => self.slope1,
            Some(g) => {
                let v = smoothstep(1.0 - (x - self.b1) / self.length);
                self.slope2 + (self.slope1 - self.slope2) * v.powf(g)
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.gamma {
            None => 0.0,
            Some(g) => {
                let (v, dv, _) = smoothstep_jet(1.0 - (x - self.b1) / self.length);
                if v == 0.0 || dv == 0.0 {
                    return 0.0;
                }
                -(self.slope1 - self.slope2) * g * v.powf(g - 1.0) * dv / self.length
            }
        }
    }

    pub fn integral(&self) -> f64 {
        match self.gamma {
            None => self.slope1 * self.length,
            Some(g) => self.length * (self.slope2 + (self.slope1 - self.slope2) * power_mass(g)),
        }
    }
}

pub fn make_bridge_zeta(slope1: f64, slope2: f64, gap: f64, length: f64, b1: f64) -> Result<Zeta> {
    if !(length > 0.0) || slope2 > slope1 {
        return Err(Error::ZetaConstruction(format!(
            "need L > 0 and ζ₂ ≤ ζ₁ (L = {length}, slopes {slope1}, {slope2})"
        )));
    }
    if slope1 == slope2 {
        let z = Zeta { b1, length, slope1, slope2, gamma: None };
        if (z.integral() - gap).abs() > 1e-10 * gap.abs().max(1.0) {
            return Err(Error::ZetaConstruction(format!(
                "constant slope {slope1} over L = {length} does not close gap {gap}"
            )));
        }
        return Ok(z);
    }
    let target = (gap / length - slope2) / (slope1 - slope2);
    let (lo, hi) = (-18.0f64, 18.0f64);
    let (i_lo, i_hi) = (power_mass(lo.exp()), power_mass(hi.exp()));
    if !(target < i_lo && target > i_hi) {
        return Err(Error::ZetaConstruction(format!(
            "required mean slope fraction {target} outside the reachable band ({i_hi}, {i_lo})"
        )));
    }
    let lg = crate::numerics::bisect(|lg| power_mass(lg.exp()) - target, lo, hi, 1e-14)
        .ok_or_else(|| Error::ZetaConstruction("exponent root not bracketed".into()))?;
    Ok(Zeta { b1, length, slope1, slope2, gamma: Some(lg.exp()) })
}

/// The C^{1,1} join f̃ on [a₁, b₂] (right piece already translated).
#[derive(Clone, Debug)]
pub struct Joined {
    pub left: RadialProfile,
    pub right: RadialProfile,
    pub zeta: Zeta,
    /// Bridge nodes on [b₁, a₂] and f̃ there.
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
}

fn gauss16() -> (Vec<f64>, Vec<f64>) {
    gauss_legendre(16)
}

fn gl_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    gl.0.iter().zip(&gl.1).map(|(x, w)| w * f(c + r * x)).sum::<f64>() * r
}

impl Joined {
    fn new(left: RadialProfile, right: RadialProfile, zeta: Zeta, h: f64) -> Result<Self> {
        let b1 = left.end();
        let a2 = right.start();
        let cells = ((a2 - b1) / h).ceil().max(8.0) as usize;
        let nodes: Vec<f64> = (0..=cells)
            .map(|k| if k == cells { a2 } else { b1 + (a2 - b1) * k as f64 / cells as f64 })
            .collect();
        let f_b1 = left.endpoint(End::End).f;
        let gl = gauss16();
        let mut values = Vec::with_capacity(nodes.len());
        let mut acc = f_b1;
        values.push(acc);
        for w in nodes.windows(2) {
            acc += gl_integral(|x| zeta.value(x), w[0], w[1], &gl);
            values.push(acc);
        }
        let target = right.endpoint(End::Start).f;
        let miss = acc - target;
        if miss.abs() > 1e-10 * target.max(1.0) {
            return Err(Error::ZetaConstruction(format!(
                "join misses f₂(a₂) by {miss:e}"
            )));
        }
        Ok(Self { left, right, zeta, nodes, values, gl })
    }

    pub fn b1(&self) -> f64 {
        self.left.end()
    }

    pub fn a2(&self) -> f64 {
        self.right.start()
    }

    /// Points where f̃″ may jump.
    pub fn kinks(&self) -> Vec<f64> {
        let mut k = self.left.junctions();
        k.push(self.b1());
        k.push(self.a2());
        k.extend(self.right.junctions());
        k
    }

    pub fn eval(&self, y: f64) -> (f64, f64, f64) {
        if y <= self.b1() {
            return self.left.eval(y).expect("inside left profile");
        }
        if y >= self.a2() {
            return self.right.eval(y).expect("inside right profile");
        }
        let k = self.nodes.partition_point(|x| *x <= y) - 1;
        let f = self.values[k] + gl_integral(|x| self.zeta.value(x), self.nodes[k], y, &self.gl);
        (f, self.zeta.value(y), self.zeta.derivative(y))
    }
}

/// Blend weight χ: 0 up to c₁, 1 on [m₁, m₂], 0 from c₂ on.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Cutoff {
    pub c1: f64,
    pub m1: f64,
    pub m2: f64,
    pub c2: f64,
}

impl Cutoff {
    pub fn jet(&self, x: f64) -> (f64, f64, f64) {
        if x <= self.c1 || x >= self.c2 {
            return (0.0, 0.0, 0.0);
        }
        if x < self.m1 {
            let w = self.m1 - self.c1;
            let (s, d, dd) = smoothstep_jet((x - self.c1) / w);
            return (s, d / w, dd / (w * w));
        }
        if x > self.m2 {
            let w = self.c2 - self.m2;
            let (s, d, dd) = smoothstep_jet((self.c2 - x) / w);
            return (s, -d / w, dd / (w * w));
        }
        (1.0, 0.0, 0.0)
    }
}

/// (ρ_ε ∗ F) for F = f̃, f̃′, f̃″, split at the kinks of f̃″. Since f̃ is
/// C^{1,1}, the last two are the first and second derivatives of ρ_ε ∗ f̃.
fn convolve(j: &Joined, kinks: &[f64], x: f64, eps: f64, gl: &(Vec<f64>, Vec<f64>)) -> (f64, f64, f64) {
    let mut cuts = vec![x - eps];
    cuts.extend(kinks.iter().cloned().filter(|k| *k > x - eps && *k < x + eps));
    cuts.push(x + eps);
    let mut acc = [0.0f64; 4];
    for w in cuts.windows(2) {
        let panels = 3;
        for p in 0..panels {
            let a = w[0] + (w[1] - w[0]) * p as f64 / panels as f64;
            let b = w[0] + (w[1] - w[0]) * (p + 1) as f64 / panels as f64;
            let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
            for (z, wt) in gl.0.iter().zip(&gl.1) {
                let y = c + r * z;
                let u = (x - y) / eps;
                let rho = if u.abs() >= 1.0 { 0.0 } else { (-1.0 / (1.0 - u * u)).exp() };
                if rho == 0.0 {
                    continue;
                }
                let (f, fp, fpp) = j.eval(y);
                let k = wt * r * rho;
                acc[0] += k;
                acc[1] += k * f;
                acc[2] += k * fp;
                acc[3] += k * fpp;
            }
        }
    }
    (acc[1] / acc[0], acc[2] / acc[0], acc[3] / acc[0])
}

#[derive(Clone, Debug)]
pub struct BridgeSpec {
    pub left: RadialProfile,
    pub right: RadialProfile,
    /// Charge of the bridge, Q² ≤ min(Q₁², Q₂²); Q₁, Q₂ are the profiles' own.
    pub q: f64,
    /// Node spacing on the gap.
    pub h: f64,
    /// Initial kernel half-width; defaults to a quarter of the shortest
    /// relevant length.
    pub eps0: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BridgeReport {
    pub translation: Translation,
    pub zeta: Zeta,
    pub cutoff: Cutoff,
    /// (1/3) inf(Ω[f̃] − f̃″).
    pub d: f64,
    pub eps_moll: f64,
    pub halvings: usize,
    /// sup |Ω[f̃] − Ω[f_ε]| achieved.
    pub omega_shift: f64,
    pub min_margin: f64,
    /// min over the one-sided margins of f̃ at b₁ and a₂.
    pub junction_margins: [f64; 2],
}

#[derive(Clone, Debug)]
pub struct Bridge {
    pub profile: RadialProfile,
    pub report: BridgeReport,
}

fn check_endpoint_hypotheses(pr: &RadialProfile, end: End, which: u8) -> Result<()> {
    let nd = pr.endpoint(end);
    let h = hypotheses_at(pr.n, pr.q, nd.f, nd.fp);
    let label = if which == 3 { "f₁(b₁)" } else { "f₂(a₂)" };
    if !h.floor {
        return Err(Error::GlueHypothesis {
            condition: which,
            detail: format!("{label}^(n−1) = {} does not exceed |Q| = {}", nd.f.powi(pr.n as i32 - 1), pr.q.abs()),
        });
    }
    if !h.slope {
        return Err(Error::GlueHypothesis {
            condition: which,
            detail: format!("slope bound fails at {label} (f = {}, f′ = {})", nd.f, nd.fp),
        });
    }
    Ok(())
}

fn check_strict_dec(pr: &RadialProfile, side: &str) -> Result<()> {
    for nd in pr.nodes() {
        let m = formula::margin(pr.n, pr.q, nd.f, nd.fp, nd.fpp);
        if !(m > 0.0) {
            return Err(Error::GlueHypothesis {
                condition: 1,
                detail: format!("{side} profile margin {m:e} ≤ 0 at s = {}", nd.s),
            });
        }
    }
    Ok(())
}

/// Glues f₁ on [a₁, b₁] to f₂ on [a₂, b₂] (translated) into one profile
/// with strictly positive margin for the charge `spec.q`.
pub fn glue_profiles(spec: &BridgeSpec) -> Result<Bridge> {
    let (left, right) = (&spec.left, &spec.right);
    if left.n != right.n {
        return Err(Error::Dimension(right.n));
    }
    let n = left.n;
    if spec.q * spec.q > left.q.powi(2).min(right.q.powi(2)) {
        return Err(Error::GlueHypothesis {
            condition: 0,
            detail: format!("bridge charge {} exceeds min(|Q₁|, |Q₂|)", spec.q),
        });
    }
    check_endpoint_hypotheses(left, End::End, 3)?;
    check_endpoint_hypotheses(right, End::Start, 4)?;
    let tr = translate_for_gluing(left, right)?;
    check_strict_dec(left, "left")?;
    check_strict_dec(right, "right")?;

    let right_t = right.shifted(tr.offset).with_charge(spec.q);
    let left_q = left.with_charge(spec.q);
    let (a1, b1) = (left.start(), left.end());
    let (a2, b2) = (right_t.start(), right_t.end());
    let zeta = make_bridge_zeta(
        left.endpoint(End::End).fp,
        right.endpoint(End::Start).fp,
        tr.gap,
        tr.length,
        b1,
    )?;
    let joined = Joined::new(left_q.clone(), right_t.clone(), zeta, spec.h.min(tr.length / 16.0))?;

    // Preserved halves end at nodes so that the kept data is bit-exact.
    let c1 = left
        .nodes()
        .map(|nd| nd.s)
        .find(|s| *s >= 0.5 * (a1 + b1) && *s < b1)
        .ok_or_else(|| Error::Parameter("left profile too coarse to keep its first half".into()))?;
    let c2 = right_t
        .nodes()
        .map(|nd| nd.s)
        .filter(|s| *s <= 0.5 * (a2 + b2) && *s > a2)
        .last()
        .ok_or_else(|| Error::Parameter("right profile too coarse to keep its second half".into()))?;
    let cut = Cutoff { c1, m1: 0.5 * (c1 + b1), m2: 0.5 * (a2 + c2), c2 };

    // Work nodes: left nodes in [c1, b1], gap nodes, right nodes in [a2, c2].
    let mut xs: Vec<f64> = left.nodes().map(|nd| nd.s).filter(|s| *s >= c1 && *s <= b1).collect();
    xs.dedup();
    xs.extend(joined.nodes[1..joined.nodes.len() - 1].iter().cloned());
    let mut rs: Vec<f64> = right_t.nodes().map(|nd| nd.s).filter(|s| *s >= a2 && *s <= c2).collect();
    rs.dedup();
    xs.extend(rs);

    // 3d = inf(Ω[f̃] − f̃″) over all nodes of [a₁, b₂], one-sided at kinks.
    let margin_of = |f: f64, fp: f64, fpp: f64| formula::margin(n, spec.q, f, fp, fpp);
    let mut inf = f64::INFINITY;
    for nd in left_q.nodes().chain(right_t.nodes()) {
        inf = inf.min(margin_of(nd.f, nd.fp, nd.fpp));
    }
    for (x, f) in joined.nodes.iter().zip(&joined.values) {
        inf = inf.min(margin_of(*f, zeta.value(*x), zeta.derivative(*x)));
    }
    let eb = left_q.endpoint(End::End);
    let ea = right_t.endpoint(End::Start);
    let junction_margins = [
        margin_of(eb.f, eb.fp, eb.fpp).min(margin_of(eb.f, zeta.value(b1), zeta.derivative(b1))),
        margin_of(ea.f, ea.fp, ea.fpp).min(margin_of(ea.f, zeta.value(a2), zeta.derivative(a2))),
    ];
    let d = inf / 3.0;
    if !(d > 0.0) {
        return Err(Error::Mollification(format!("join margin infimum {inf:e} is not positive")));
    }

    let scale = b2 - a1;
    let reach = (c1 - a1).min(b2 - c2);
    let mut eps = spec
        .eps0
        .unwrap_or(0.25 * tr.length.min(b1 - c1).min(c2 - a2))
        .min(reach);
    let gl = gauss16();
    let kinks = joined.kinks();
    let mut halvings = 0;
    loop {
        if eps < 1e-12 * scale {
            return Err(Error::Mollification(format!(
                "kernel width fell below {:e} without meeting the margin bound d = {d:e}",
                1e-12 * scale
            )));
        }
        // The kernel smears each kink over [k − ε, k + ε]; sample that
        // window finely so the nodes see the whole transition.
        let mut pts = xs.clone();
        for &k in &kinks {
            for j in -16..=16 {
                let x = k + eps * j as f64 / 16.0;
                if x > c1 && x < c2 {
                    pts.push(x);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut f = Vec::with_capacity(pts.len());
        let mut fp = Vec::with_capacity(pts.len());
        let mut fpp = Vec::with_capacity(pts.len());
        let mut shift: f64 = 0.0;
        let mut min_margin = f64::INFINITY;
        for &x in &pts {
            let (t0, t1, t2) = joined.eval(x);
            let (chi, dchi, ddchi) = cut.jet(x);
            let (v0, v1, v2) = if chi == 0.0 && dchi == 0.0 && ddchi == 0.0 {
                (t0, t1, t2)
            } else {
                let (g0, g1, g2) = convolve(&joined, &kinks, x, eps, &gl);
                (
                    (1.0 - chi) * t0 + chi * g0,
                    (1.0 - chi) * t1 + chi * g1 + dchi * (g0 - t0),
                    (1.0 - chi) * t2 + chi * g2 + 2.0 * dchi * (g1 - t1) + ddchi * (g0 - t0),
                )
            };
            let om_t = formula::omega(n, spec.q, t0, t1);
            let om_e = formula::omega(n, spec.q, v0, v1);
            shift = shift.max((om_t - om_e).abs());
            min_margin = min_margin.min(om_e - v2);
            f.push(v0);
            fp.push(v1);
            fpp.push(v2);
        }
        if shift < d && min_margin > 0.0 {
            let bridge = ProfileSegment::new(Segment::Bridge, pts, f, fp, fpp)?;
            let mut segments = left.restricted(a1, c1)?.segments;
            segments.push(bridge);
            segments.extend(right_t.restricted(c2, b2)?.segments);
            let profile = RadialProfile::new(n, spec.q, segments)?;
            return Ok(Bridge {
                profile,
                report: BridgeReport {
                    translation: tr,
                    zeta,
                    cutoff: cut,
                    d,
                    eps_moll: eps,
                    halvings,
                    omega_shift: shift,
                    min_margin,
                    junction_margins,
                },
            });
        }
        eps *= 0.5;
        halvings += 1;
    }
}

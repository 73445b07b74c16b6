//! Rotationally symmetric charged data ds² + f(s)² g_* in dimension n + 1.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Segment {
    CollarNeck,
    Bridge,
    BentRn,
    RnTail,
    /// Anything supplied from outside the construction.
    Input,
}

impl Segment {
    pub fn as_str(self) -> &'static str {
        match self {
            Segment::CollarNeck => "COLLAR_NECK",
            Segment::Bridge => "BRIDGE",
            Segment::BentRn => "BENT_RN",
            Segment::RnTail => "RN_TAIL",
            Segment::Input => "INPUT",
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Segment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "COLLAR_NECK" => Segment::CollarNeck,
            "BRIDGE" => Segment::Bridge,
            "BENT_RN" => Segment::BentRn,
            "RN_TAIL" => Segment::RnTail,
            "INPUT" => Segment::Input,
            _ => return Err(Error::Format(format!("unknown segment tag `{s}`"))),
        })
    }
}

/// Sub-extremal Reissner–Nordström parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RNParams {
    pub m: f64,
    pub q: f64,
    pub r_plus: f64,
}

impl RNParams {
    pub fn new(m: f64, q: f64) -> Result<Self> {
        if !(m > q.abs()) || !m.is_finite() {
            return Err(Error::Extremality { m, q: q.abs() });
        }
        Ok(Self {
            m,
            q,
            r_plus: m + (m * m - q * q).sqrt(),
        })
    }

    /// u′² as a function of u.
    pub fn slope_sq(&self, u: f64) -> f64 {
        1.0 - 2.0 * self.m / u + self.q * self.q / (u * u)
    }

    pub fn accel(&self, u: f64) -> f64 {
        (self.m * u - self.q * self.q) / (u * u * u)
    }

    /// Radius at which u′ equals `slope` ∈ [0, 1).
    pub fn radius_at_slope(&self, slope: f64) -> f64 {
        // (1 − k²)u² − 2mu + Q² = 0, larger root.
        let a = 1.0 - slope * slope;
        let disc = (self.m * self.m - a * self.q * self.q).sqrt();
        (self.m + disc) / a
    }
}

/// A smooth piece of a profile with nodal jets (f, f′, f″).
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSegment {
    pub tag: Segment,
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub fpp: Vec<f64>,
}

impl ProfileSegment {
    pub fn new(tag: Segment, s: Vec<f64>, f: Vec<f64>, fp: Vec<f64>, fpp: Vec<f64>) -> Result<Self> {
        let n = s.len();
        if n < 2 || f.len() != n || fp.len() != n || fpp.len() != n {
            return Err(Error::Parameter(format!("segment {tag}: inconsistent lengths")));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter(format!("segment {tag}: s not strictly increasing")));
        }
        if let Some(i) = f.iter().position(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(Error::Parameter(format!("segment {tag}: f = {} at node {i}", f[i])));
        }
        if fp.iter().chain(&fpp).any(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("segment {tag}: non-finite derivative")));
        }
        Ok(Self { tag, s, f, fp, fpp })
    }

    /// Derivatives from a not-a-knot cubic spline through (s, f).
    pub fn from_samples(tag: Segment, s: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        let (fp, fpp) = spline_derivatives(&s, &f)?;
        Self::new(tag, s, f, fp, fpp)
    }

    /// Samples an analytic jet on the given nodes.
    pub fn from_fn<F: Fn(f64) -> (f64, f64, f64)>(tag: Segment, s: Vec<f64>, jet: F) -> Result<Self> {
        let mut f = Vec::with_capacity(s.len());
        let mut fp = Vec::with_capacity(s.len());
        let mut fpp = Vec::with_capacity(s.len());
        for &x in &s {
            let (a, b, c) = jet(x);
            f.push(a);
            fp.push(b);
            fpp.push(c);
        }
        Self::new(tag, s, f, fp, fpp)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.s[0]
    }

    pub fn end(&self) -> f64 {
        self.s[self.s.len() - 1]
    }

    pub fn jet(&self, i: usize) -> (f64, f64, f64) {
        (self.f[i], self.fp[i], self.fpp[i])
    }

    /// Quintic Hermite interpolation of the nodal jets.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.s.len();
        let i = match self.s.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.jet(i),
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let h = self.s[i + 1] - self.s[i];
        let t = (x - self.s[i]) / h;
        let (t2, t3, t4, t5) = (t * t, t * t * t, t.powi(4), t.powi(5));
        let b = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            0.5 * (t3 - 2.0 * t4 + t5),
        ];
        let d = [
            -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
            1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
            0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
            30.0 * t2 - 60.0 * t3 + 30.0 * t4,
            -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
            0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
        ];
        let dd = [
            -60.0 * t + 180.0 * t2 - 120.0 * t3,
            -36.0 * t + 96.0 * t2 - 60.0 * t3,
            0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3),
            60.0 * t - 180.0 * t2 + 120.0 * t3,
            -24.0 * t + 84.0 * t2 - 60.0 * t3,
            0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3),
        ];
        let c = [
            self.f[i],
            h * self.fp[i],
            h * h * self.fpp[i],
            self.f[i + 1],
            h * self.fp[i + 1],
            h * h * self.fpp[i + 1],
        ];
        let dot = |w: &[f64; 6]| w.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        (dot(&b), dot(&d) / h, dot(&dd) / (h * h))
    }

    /// The same nodal data moved by `offset` in s.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            s: self.s.iter().map(|s| s + offset).collect(),
            ..self.clone()
        }
    }

    pub fn retagged(mut self, tag: Segment) -> Self {
        self.tag = tag;
        self
    }

    /// Nodes with lo ≤ s ≤ hi.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.s[i] >= lo && self.s[i] <= hi).collect();
        let pick = |v: &Vec<f64>| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self::new(self.tag, pick(&self.s), pick(&self.f), pick(&self.fp), pick(&self.fpp))
    }
}

/// Nodal first and second derivatives of the not-a-knot cubic spline.
pub fn spline_derivatives(s: &[f64], f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = s.len();
    if n < 4 || f.len() != n {
        return Err(Error::Parameter("spline needs at least 4 matching samples".into()));
    }
    let h: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<f64> = (0..n - 1).map(|i| (f[i + 1] - f[i]) / h[i]).collect();
    // Unknowns M_1..M_{n−2}; the not-a-knot conditions eliminate M_0, M_{n−1}.
    let m = n - 2;
    let mut sub = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for r in 0..m {
        let i = r + 1;
        sub[r] = h[i - 1];
        diag[r] = 2.0 * (h[i - 1] + h[i]);
        sup[r] = h[i];
        rhs[r] = 6.0 * (slope[i] - slope[i - 1]);
    }
    // M_0 = ((h0 + h1) M_1 − h0 M_2) / h1
    let (h0, h1) = (h[0], h[1]);
    diag[0] += h0 * (h0 + h1) / h1;
    sup[0] -= h0 * h0 / h1;
    // M_{n−1} = ((ha + hb) M_{n−2} − hb M_{n−3}) / ha with ha = h[n−3], hb = h[n−2]
    let (ha, hb) = (h[n - 3], h[n - 2]);
    diag[m - 1] += hb * (ha + hb) / ha;
    sub[m - 1] -= hb * hb / ha;
    let inner = thomas(&sub, &diag, &sup, &rhs);
    let mut mm = vec![0.0; n];
    mm[1..n - 1].copy_from_slice(&inner);
    mm[0] = ((h0 + h1) * mm[1] - h0 * mm[2]) / h1;
    mm[n - 1] = ((ha + hb) * mm[n - 2] - hb * mm[n - 3]) / ha;
    let mut fp = vec![0.0; n];
    for i in 0..n - 1 {
        fp[i] = slope[i] - h[i] * (2.0 * mm[i] + mm[i + 1]) / 6.0;
    }
    fp[n - 1] = slope[n - 2] + h[n - 2] * (mm[n - 2] + 2.0 * mm[n - 1]) / 6.0;
    Ok((fp, mm))
}

/// Tridiagonal solve; row r is sub[r]·x[r−1] + diag[r]·x[r] + sup[r]·x[r+1].
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    if m == 1 {
        return vec![rhs[0] / diag[0]];
    }
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for r in 1..m {
        let den = diag[r] - sub[r] * c[r - 1];
        c[r] = if r + 1 < m { sup[r] / den } else { 0.0 };
        d[r] = (rhs[r] - sub[r] * d[r - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for r in (0..m - 1).rev() {
        x[r] = d[r] - c[r] * x[r + 1];
    }
    x
}

/// Pointwise formulas, shared by profiles and by the construction.
pub mod formula {
    /// R of ds² + f² g_* on an (n+1)-manifold.
    pub fn scalar_curvature(n: usize, f: f64, fp: f64, fpp: f64) -> f64 {
        let nf = n as f64;
        nf / (f * f) * ((nf - 1.0) * (1.0 - fp * fp) - 2.0 * f * fpp)
    }

    pub fn omega(n: usize, q: f64, f: f64, fp: f64) -> f64 {
        let nf = n as f64;
        (nf - 1.0) / (2.0 * f) * (1.0 - fp * fp - q * q / f.powi(2 * (n as i32 - 1)))
    }

    /// Ω[f] − f″; DEC holds iff this is ≥ 0.
    pub fn margin(n: usize, q: f64, f: f64, fp: f64, fpp: f64) -> f64 {
        omega(n, q, f, fp) - fpp
    }

    pub fn e_normal(n: usize, q: f64, f: f64) -> f64 {
        q / f.powi(n as i32)
    }

    pub fn e_norm_sq(n: usize, q: f64, f: f64) -> f64 {
        let e = e_normal(n, q, f);
        e * e
    }

    /// Charged Hawking mass of a coordinate sphere (n = 2).
    pub fn hawking(q: f64, f: f64, fp: f64) -> f64 {
        0.5 * f * (1.0 + q * q / (f * f) - fp * fp)
    }

    /// Volume of the unit n-sphere.
    pub fn sphere_volume(n: usize) -> f64 {
        use std::f64::consts::PI;
        match n {
            0 => 2.0,
            1 => 2.0 * PI,
            _ => 2.0 * PI / (n as f64 - 1.0) * sphere_volume(n - 2),
        }
    }
}

/// Piecewise smooth profile; consecutive segments may share their junction
/// point, in which case both one-sided jets are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub n: usize,
    pub q: f64,
    pub segments: Vec<ProfileSegment>,
}

#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub tag: Segment,
    pub s: f64,
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Start,
    End,
}

impl RadialProfile {
    pub fn new(n: usize, q: f64, segments: Vec<ProfileSegment>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        if segments.is_empty() {
            return Err(Error::Parameter("profile without segments".into()));
        }
        for w in segments.windows(2) {
            if w[1].start() < w[0].end() {
                return Err(Error::Parameter(format!(
                    "segments {} and {} overlap",
                    w[0].tag, w[1].tag
                )));
            }
        }
        Ok(Self { n, q, segments })
    }

    pub fn single(n: usize, q: f64, seg: ProfileSegment) -> Result<Self> {
        Self::new(n, q, vec![seg])
    }

    pub fn start(&self) -> f64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> f64 {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.segments.iter().flat_map(|seg| {
            (0..seg.len()).map(move |i| Node {
                tag: seg.tag,
                s: seg.s[i],
                f: seg.f[i],
                fp: seg.fp[i],
                fpp: seg.fpp[i],
            })
        })
    }

    pub fn node_count(&self) -> usize {
        self.segments.iter().map(|s| s.len()).sum()
    }

    /// Jet at s, from the first segment whose closed range contains s.
    pub fn eval(&self, s: f64) -> Option<(f64, f64, f64)> {
        self.segments
            .iter()
            .find(|seg| s >= seg.start() && s <= seg.end())
            .map(|seg| seg.eval(s))
    }

    pub fn endpoint(&self, end: End) -> Node {
        let seg = match end {
            End::Start => &self.segments[0],
            End::End => &self.segments[self.segments.len() - 1],
        };
        let i = match end {
            End::Start => 0,
            End::End => seg.len() - 1,
        };
        Node {
            tag: seg.tag,
            s: seg.s[i],
            f: seg.f[i],
            fp: seg.fp[i],
            fpp: seg.fpp[i],
        }
    }

    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            segments: self.segments.iter().map(|s| s.shifted(offset)).collect(),
            ..self.clone()
        }
    }

    /// Nodes with lo ≤ s ≤ hi; segments left with fewer than two nodes
    /// are dropped.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        let segments: Vec<ProfileSegment> = self
            .segments
            .iter()
            .filter(|seg| seg.end() >= lo && seg.start() <= hi)
            .filter(|seg| seg.s.iter().filter(|s| **s >= lo && **s <= hi).count() >= 2)
            .map(|seg| seg.restricted(lo, hi))
            .collect::<Result<_>>()?;
        Self::new(self.n, self.q, segments)
    }

    /// Interior segment junctions (where one-sided jets may differ).
    pub fn junctions(&self) -> Vec<f64> {
        self.segments.windows(2).map(|w| w[1].start()).collect()
    }

    pub fn with_charge(&self, q: f64) -> Self {
        Self { q, ..self.clone() }
    }

    pub fn segment(&self, tag: Segment) -> Option<&ProfileSegment> {
        self.segments.iter().find(|s| s.tag == tag)
    }

    /// Writes `segment,s,f,fprime,fsecond,R,E2,margin,mH_CH,Qflux`.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let vol = formula::sphere_volume(self.n);
        let rows: Vec<Vec<String>> = self
            .nodes()
            .map(|nd| {
                let mh = if self.n == 2 {
                    formula::hawking(self.q, nd.f, nd.fp)
                } else {
                    f64::NAN
                };
                // (1/4π) ∫ Q/fⁿ over the coordinate sphere of radius f.
                let flux = vol * nd.f.powi(self.n as i32) * formula::e_normal(self.n, self.q, nd.f)
                    / (4.0 * std::f64::consts::PI);
                let mut r = vec![nd.tag.as_str().to_owned()];
                r.extend(
                    [
                        nd.s,
                        nd.f,
                        nd.fp,
                        nd.fpp,
                        formula::scalar_curvature(self.n, nd.f, nd.fp, nd.fpp),
                        formula::e_norm_sq(self.n, self.q, nd.f),
                        formula::margin(self.n, self.q, nd.f, nd.fp, nd.fpp),
                        mh,
                        flux,
                    ]
                    .iter()
                    .map(|v| table::fmt(*v)),
                );
                r
            })
            .collect();
        table::write(
            path,
            &["segment", "s", "f", "fprime", "fsecond", "R", "E2", "margin", "mH_CH", "Qflux"],
            &rows,
        )
    }

    /// Reloads the jets written by [`RadialProfile::write_csv`]; derived
    /// columns are ignored and must be recomputed.
    pub fn read_csv<P: AsRef<Path>>(path: P, n: usize, q: f64) -> Result<Self> {
        let (header, rows) = table::read(path)?;
        let col = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
        };
        let (ct, cs, cf, cp, cpp) = (col("segment")?, col("s")?, col("f")?, col("fprime")?, col("fsecond")?);
        let num = |r: &Vec<String>, c: usize| -> Result<f64> {
            r.get(c)
                .ok_or_else(|| Error::Format("short row".into()))?
                .parse()
                .map_err(|e| Error::Format(format!("{e}")))
        };
        let mut segments = Vec::new();
        let mut cur: Option<(Segment, [Vec<f64>; 4])> = None;
        for r in &rows {
            let tag: Segment = r.get(ct).ok_or_else(|| Error::Format("short row".into()))?.parse()?;
            let vals = [num(r, cs)?, num(r, cf)?, num(r, cp)?, num(r, cpp)?];
            let continues = matches!(&cur, Some((t, v)) if *t == tag && v[0].last().is_some_and(|s| vals[0] > *s));
            if !continues {
                if let Some((t, [s, f, fp, fpp])) = cur.take() {
                    segments.push(ProfileSegment::new(t, s, f, fp, fpp)?);
                }
                cur = Some((tag, [vec![], vec![], vec![], vec![]]));
            }
            let (_, v) = cur.as_mut().unwrap();
            for k in 0..4 {
                v[k].push(vals[k]);
            }
        }
        if let Some((t, [s, f, fp, fpp])) = cur {
            segments.push(ProfileSegment::new(t, s, f, fp, fpp)?);
        }
        Self::new(n, q, segments)
    }
}

pub fn scalar_curvature(pr: &RadialProfile) -> Vec<f64> {
    pr.nodes()
        .map(|nd| formula::scalar_curvature(pr.n, nd.f, nd.fp, nd.fpp))
        .collect()
}

#[derive(Clone, Debug)]
pub struct ElectricField {
    pub normal: Vec<f64>,
    pub norm_sq: Vec<f64>,
    /// (1/fⁿ) ∂_s(fⁿ E^s) by spline differentiation per segment.
    pub divergence: Vec<f64>,
}

pub fn electric_field(pr: &RadialProfile) -> Result<ElectricField> {
    let n = pr.n;
    let mut out = ElectricField {
        normal: vec![],
        norm_sq: vec![],
        divergence: vec![],
    };
    for seg in &pr.segments {
        let e: Vec<f64> = seg.f.iter().map(|f| formula::e_normal(n, pr.q, *f)).collect();
        let flux: Vec<f64> = seg
            .f
            .iter()
            .zip(&e)
            .map(|(f, e)| f.powi(n as i32) * e)
            .collect();
        let d = if seg.len() >= 4 {
            spline_derivatives(&seg.s, &flux)?.0
        } else {
            vec![0.0; seg.len()]
        };
        for i in 0..seg.len() {
            out.normal.push(e[i]);
            out.norm_sq.push(e[i] * e[i]);
            out.divergence.push(d[i] / seg.f[i].powi(n as i32));
        }
    }
    Ok(out)
}

pub fn dec_margin(pr: &RadialProfile) -> Vec<f64> {
    pr.nodes()
        .map(|nd| formula::margin(pr.n, pr.q, nd.f, nd.fp, nd.fpp))
        .collect()
}

pub fn charged_hawking_profile(pr: &RadialProfile, s: f64) -> Result<f64> {
    if pr.n != 2 {
        return Err(Error::Dimension(pr.n));
    }
    let (f, fp, _) = pr
        .eval(s)
        .ok_or_else(|| Error::Parameter(format!("s = {s} outside the profile")))?;
    Ok(formula::hawking(pr.q, f, fp))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hypotheses {
    /// f^{n−1} > |Q|.
    pub floor: bool,
    /// 1 + Q²/f^{2(n−1)} − 2|Q|/f > f′².
    pub slope: bool,
    /// Charged Hawking mass for n = 2, with the m_H > |Q| form.
    pub hawking: Option<(f64, bool)>,
}

pub fn hypotheses_at(n: usize, q: f64, f: f64, fp: f64) -> Hypotheses {
    let fk = f.powi(n as i32 - 1);
    let qa = q.abs();
    let floor = fk > qa;
    let slope = 1.0 + q * q / (fk * fk) - 2.0 * qa / f > fp * fp;
    let hawking = (n == 2).then(|| {
        let m = formula::hawking(q, f, fp);
        (m, m > qa)
    });
    Hypotheses {
        floor,
        slope,
        hawking,
    }
}

pub fn hypotheses_34(pr: &RadialProfile, end: End) -> Hypotheses {
    let nd = pr.endpoint(end);
    hypotheses_at(pr.n, pr.q, nd.f, nd.fp)
}

/// RN radial profile u_{m,Q} integrated on a uniform grid from the horizon.
#[derive(Clone, Debug)]
pub struct RnSolution {
    pub params: RNParams,
    pub h: f64,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub up: Vec<f64>,
    pub upp: Vec<f64>,
}

fn rk4(p: &RNParams, u: f64, v: f64, h: f64) -> (f64, f64) {
    let k1 = (v, p.accel(u));
    let k2 = (v + 0.5 * h * k1.1, p.accel(u + 0.5 * h * k1.0));
    let k3 = (v + 0.5 * h * k2.1, p.accel(u + 0.5 * h * k2.0));
    let k4 = (v + h * k3.1, p.accel(u + h * k3.0));
    (
        u + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        v + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Integrates u″ = (mu − Q²)/u³ from (r₊, 0). This second-order form is
/// regular at the horizon, unlike u′ = √(1 − 2m/u + Q²/u²), so no start-up
/// series is needed and the first integral stays an independent check.
pub fn rn_solve(p: RNParams, s_max: f64, h: f64) -> Result<RnSolution> {
    if !(s_max > 0.0 && h > 0.0 && h <= s_max) {
        return Err(Error::Parameter(format!("s_max = {s_max}, h = {h}")));
    }
    let steps = (s_max / h).ceil() as usize;
    let mut s = Vec::with_capacity(steps + 1);
    let mut u = Vec::with_capacity(steps + 1);
    let mut up = Vec::with_capacity(steps + 1);
    let (mut a, mut b) = (p.r_plus, 0.0);
    for k in 0..=steps {
        s.push(k as f64 * h);
        u.push(a);
        up.push(b);
        let next = rk4(&p, a, b, h);
        a = next.0;
        b = next.1;
    }
    let upp = u.iter().map(|u| p.accel(*u)).collect();
    Ok(RnSolution {
        params: p,
        h,
        s,
        u,
        up,
        upp,
    })
}

pub fn rn_profile(p: RNParams, s_max: f64, h: f64) -> Result<RadialProfile> {
    rn_solve(p, s_max, h)?.profile(Segment::RnTail)
}

impl RnSolution {
    pub fn s_max(&self) -> f64 {
        self.s[self.s.len() - 1]
    }

    /// Jet at any s ∈ [0, s_max]: one integrator step from the node below.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        let k = ((s / self.h).floor().max(0.0) as usize).min(self.s.len() - 1);
        let dh = s - self.s[k];
        if dh == 0.0 {
            return (self.u[k], self.up[k], self.upp[k]);
        }
        let (u, v) = rk4(&self.params, self.u[k], self.up[k], dh);
        (u, v, self.params.accel(u))
    }

    /// max over nodes of |u′² − (1 − 2m/u + Q²/u²)|.
    pub fn first_integral_residual(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.up)
            .map(|(u, v)| (v * v - self.params.slope_sq(*u)).abs())
            .fold(0.0, f64::max)
    }

    /// s with u(s) = r, by bisection on the integrated profile.
    pub fn s_at_radius(&self, r: f64) -> Option<f64> {
        if r < self.u[0] || r > *self.u.last().unwrap() {
            return None;
        }
        let k = self.u.partition_point(|u| *u < r);
        if k < self.u.len() && self.u[k] == r {
            return Some(self.s[k]);
        }
        let lo = self.s[k.saturating_sub(1)];
        let hi = self.s[k.min(self.s.len() - 1)];
        crate::numerics::bisect(|s| self.eval(s).0 - r, lo, hi, 1e-15 * hi.max(1.0))
    }

    /// s with u′(s) = slope ∈ (0, u′(s_max)).
    pub fn s_at_slope(&self, slope: f64) -> Option<f64> {
        self.s_at_radius(self.params.radius_at_slope(slope))
    }

    /// Nodes with lo ≤ s ≤ hi as a segment.
    pub fn segment(&self, tag: Segment, lo: f64, hi: f64) -> Result<ProfileSegment> {
        let idx: Vec<usize> = (0..self.s.len()).filter(|&i| self.s[i] >= lo && self.s[i] <= hi).collect();
        let pick = |v: &Vec<f64>| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        ProfileSegment::new(tag, pick(&self.s), pick(&self.u), pick(&self.up), pick(&self.upp))
    }

    pub fn profile(&self, tag: Segment) -> Result<RadialProfile> {
        RadialProfile::single(
            2,
            self.params.q,
            ProfileSegment::new(tag, self.s.clone(), self.u.clone(), self.up.clone(), self.upp.clone())?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn rn_horizon_values() {
        assert_eq!(RNParams::new(1.0, 0.0).unwrap().r_plus, 2.0);
        assert!((RNParams::new(1.0, 0.6).unwrap().r_plus - 1.8).abs() < 1e-15);
        assert!(matches!(RNParams::new(1.0, 1.0), Err(Error::Extremality { .. })));
        let sol = rn_solve(RNParams::new(1.0, 0.6).unwrap(), 10.0, 1e-3).unwrap();
        assert_eq!(sol.u[0], 1.8);
        assert!(sol.first_integral_residual() < 1e-10);
    }

    #[test]
    fn rn_equality_case() {
        let sol = rn_solve(RNParams::new(1.0, 0.6).unwrap(), 8.0, 1e-3).unwrap();
        let pr = sol.profile(Segment::RnTail).unwrap();
        let r = scalar_curvature(&pr);
        let h2 = 1e-6;
        for (nd, r) in pr.nodes().zip(&r) {
            assert!((r - 2.0 * 0.36 / nd.f.powi(4)).abs() < 10.0 * h2);
        }
        assert!(dec_margin(&pr).iter().all(|m| m.abs() < 10.0 * h2));
        for s in [0.0, 0.37, 2.0, 7.9] {
            assert!((charged_hawking_profile(&pr, s).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rn_eval_between_nodes() {
        let sol = rn_solve(RNParams::new(1.0, 0.6).unwrap(), 4.0, 1e-2).unwrap();
        for s in [0.0031, 1.23456, 3.999] {
            let (u, v, _) = sol.eval(s);
            assert!((v * v - sol.params.slope_sq(u)).abs() < 1e-10);
        }
        let s = sol.s_at_radius(2.0).unwrap();
        assert!((sol.eval(s).0 - 2.0).abs() < 1e-12);
        let s = sol.s_at_slope(0.5).unwrap();
        assert!((sol.eval(s).1 - 0.5).abs() < 1e-10);
    }

    #[test]
    fn curvature_examples() {
        let s = grid(0.5, 2.0, 20);
        let cyl = ProfileSegment::from_fn(Segment::Input, s.clone(), |_| (1.5, 0.0, 0.0)).unwrap();
        let pr = RadialProfile::single(2, 0.0, cyl).unwrap();
        assert!(scalar_curvature(&pr).iter().all(|r| (r - 2.0 / 2.25).abs() < 1e-14));
        assert!(dec_margin(&pr).iter().all(|m| (m - 1.0 / 3.0).abs() < 1e-14));
        let flat = ProfileSegment::from_fn(Segment::Input, s.clone(), |s| (s, 1.0, 0.0)).unwrap();
        let pr = RadialProfile::single(2, 0.0, flat).unwrap();
        assert!(scalar_curvature(&pr).iter().all(|r| r.abs() < 1e-14));
        for x in [0.5, 1.0, 2.0] {
            assert!(charged_hawking_profile(&pr, x).unwrap().abs() < 1e-13);
        }
        let ch = ProfileSegment::from_fn(Segment::Input, grid(0.0, 3.0, 31), |s| {
            (s.cosh(), s.sinh(), s.cosh())
        })
        .unwrap();
        let pr = RadialProfile::single(2, 0.0, ch).unwrap();
        for (nd, m) in pr.nodes().zip(dec_margin(&pr)) {
            let oracle = (1.0 - nd.s.sinh().powi(2)) / (2.0 * nd.s.cosh()) - nd.s.cosh();
            assert!((m - oracle).abs() < 1e-12);
        }
        assert!(dec_margin(&pr).last().unwrap() < &0.0);
    }

    #[test]
    fn electric_field_examples() {
        let s = grid(0.0, 1.0, 11);
        let pr = RadialProfile::single(3, 8.0, ProfileSegment::from_fn(Segment::Input, s.clone(), |_| (2.0, 0.0, 0.0)).unwrap()).unwrap();
        let e = electric_field(&pr).unwrap();
        assert!(e.normal.iter().all(|e| (e - 1.0).abs() < 1e-15));
        let zero = pr.with_charge(0.0);
        assert!(electric_field(&zero).unwrap().norm_sq.iter().all(|e| *e == 0.0));
        assert!((formula::e_normal(2, 0.6, 2.0) - 0.15).abs() < 1e-16);
        let rn = rn_profile(RNParams::new(1.0, 0.6).unwrap(), 3.0, 1e-2).unwrap();
        assert!(electric_field(&rn).unwrap().divergence.iter().all(|d| d.abs() < 1e-8));
    }

    #[test]
    fn hawking_and_hypotheses() {
        assert!((formula::hawking(0.5, 1.0, 0.0) - 0.625).abs() < 1e-15);
        let h = hypotheses_at(2, 1.0, 1.0, 0.0);
        assert!(!h.floor);
        let h = hypotheses_at(2, 0.3, 1.5, 0.9);
        assert!(!h.slope);
        let rn = rn_profile(RNParams::new(1.0, 0.6).unwrap(), 5.0, 1e-2).unwrap();
        for e in [End::Start, End::End] {
            let h = hypotheses_34(&rn, e);
            assert!(h.floor && h.slope && h.hawking.unwrap().1);
        }
        let pr = RadialProfile::single(3, 0.0, ProfileSegment::from_fn(Segment::Input, grid(0.0, 1.0, 5), |s| (1.0 + s, 1.0, 0.0)).unwrap()).unwrap();
        assert!(matches!(charged_hawking_profile(&pr, 0.5), Err(Error::Dimension(3))));
    }

    #[test]
    fn spline_consistency() {
        for n in [20, 40, 80] {
            let s: Vec<f64> = (0..n).map(|i| 0.1 + (i as f64 / (n - 1) as f64).powf(1.3) * 2.0).collect();
            let f: Vec<f64> = s.iter().map(|s| s.sin() + 2.0).collect();
            let (fp, fpp) = spline_derivatives(&s, &f).unwrap();
            let h = 2.0 / n as f64;
            for i in 0..n {
                assert!((fp[i] - s[i].cos()).abs() < 2.0 * h * h);
                assert!((fpp[i] + s[i].sin()).abs() < 10.0 * h);
            }
        }
        // Cubics are reproduced exactly.
        let s = grid(-1.0, 2.0, 9);
        let f: Vec<f64> = s.iter().map(|x| x * x * x - x).collect();
        let (fp, fpp) = spline_derivatives(&s, &f).unwrap();
        for i in 0..9 {
            assert!((fp[i] - (3.0 * s[i] * s[i] - 1.0)).abs() < 1e-12);
            assert!((fpp[i] - 6.0 * s[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn hermite_matches_nodes_and_quintics() {
        let s = grid(0.0, 1.0, 6);
        let seg = ProfileSegment::from_fn(Segment::Input, s, |x| {
            (1.0 + x.powi(5), 5.0 * x.powi(4), 20.0 * x.powi(3))
        })
        .unwrap();
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let (f, fp, fpp) = seg.eval(x);
            assert!((f - 1.0 - x.powi(5)).abs() < 1e-14);
            assert!((fp - 5.0 * x.powi(4)).abs() < 1e-12);
            assert!((fpp - 20.0 * x.powi(3)).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let a = ProfileSegment::from_fn(Segment::CollarNeck, grid(0.0, 1.0, 5), |s| (1.0 + s * s, 2.0 * s, 2.0)).unwrap();
        let b = ProfileSegment::from_fn(Segment::Bridge, grid(1.0, 2.0, 5), |s| (s + 1.0, 1.0, 0.0)).unwrap();
        let pr = RadialProfile::new(2, 0.4, vec![a, b]).unwrap();
        let f = dir.path().join("p.csv");
        pr.write_csv(&f).unwrap();
        assert_eq!(RadialProfile::read_csv(&f, 2, 0.4).unwrap(), pr);
    }
}

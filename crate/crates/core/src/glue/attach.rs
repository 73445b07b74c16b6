//! Attaching a charged neck to a Reissner–Nordström exterior.
//!
//! The exterior RN(m_e, Q) is bent just below an attachment point s_ε so
//! that it becomes strictly DEC there, and the neck is bridged onto the
//! bent window [s_ε − δ, s_ε − δ/2]. Beyond s_ε the output is the RN
//! profile itself.

use serde::Serialize;

use super::bend::{bend_with, BendReport, BendSpec};
use super::bridge::{glue_profiles, BridgeReport, BridgeSpec};
use crate::error::{Error, Result, StageExt};
use crate::rotsym::{formula, rn_solve, End, RNParams, RadialProfile, RnSolution};

#[derive(Clone, Copy, Debug)]
pub struct AttachOptions {
    /// RN integration step; defaults to 10⁻³·m_e.
    pub rn_h: Option<f64>,
    /// Length of the RN integration; defaults to 40·m_e past the attachment.
    pub rn_length: Option<f64>,
    /// Node spacing on the bridge gap.
    pub bridge_h: f64,
}

impl Default for AttachOptions {
    fn default() -> Self {
        Self { rn_h: None, rn_length: None, bridge_h: 2e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AttachCase {
    /// f(b) < r₊: attach near the horizon where u′ = f′(b)/2.
    InsideHorizon,
    /// f(b) ≥ r₊: attach where u = f(b) + ε_att.
    OutsideHorizon,
}

#[derive(Clone, Debug, Serialize)]
pub struct SegmentMargin {
    pub segment: String,
    pub start: f64,
    pub end: f64,
    pub min_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JunctionReport {
    pub m_e: f64,
    pub q: f64,
    pub m_star: f64,
    pub mu: f64,
    pub case: AttachCase,
    /// 0 in the inside-horizon case.
    pub eps_att: f64,
    pub s_eps: f64,
    pub offset: f64,
    /// Charged Hawking mass of the bent attachment slice.
    pub bent_hawking: f64,
    pub equal_slopes: bool,
    pub length: f64,
    pub gamma: Option<f64>,
    pub eps_moll: f64,
    pub d: f64,
    pub delta: f64,
    pub bend: BendReport,
    pub bridge: BridgeReport,
    pub segments: Vec<SegmentMargin>,
    /// max |m_H − m_e| over the RN tail nodes.
    pub tail_mass_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct Attached {
    pub profile: RadialProfile,
    /// The exterior RN solution, in the output's s shifted by `report.offset`.
    pub rn: RnSolution,
    pub report: JunctionReport,
}

fn neck_gate(neck: &RadialProfile, q: f64) -> Result<(f64, f64, f64)> {
    let nd = neck.endpoint(End::End);
    for node in neck.nodes() {
        let m = formula::margin(neck.n, q, node.f, node.fp, node.fpp);
        if !(m > 0.0) {
            return Err(Error::GlueHypothesis {
                condition: 1,
                detail: format!("neck margin {m:e} ≤ 0 at s = {}", node.s),
            });
        }
    }
    if !(nd.f > q.abs()) {
        return Err(Error::GlueHypothesis {
            condition: 3,
            detail: format!("neck radius {} does not exceed |Q| = {}", nd.f, q.abs()),
        });
    }
    if !(nd.fp > 0.0) {
        return Err(Error::GlueHypothesis {
            condition: 3,
            detail: format!("neck mean curvature not positive (f′(b) = {})", nd.fp),
        });
    }
    let m_star = formula::hawking(q, nd.f, nd.fp);
    if !(m_star > q.abs()) {
        return Err(Error::GlueHypothesis {
            condition: 3,
            detail: format!("neck charged Hawking mass {m_star} does not exceed |Q|"),
        });
    }
    Ok((nd.f, nd.fp, m_star))
}

/// Extends `neck` (ending at b) by a bridge onto RN(m_e, Q).
pub fn glue_to_rn(neck: &RadialProfile, m_e: f64, q: f64, opts: &AttachOptions) -> Result<Attached> {
    if neck.n != 2 {
        return Err(Error::Dimension(neck.n));
    }
    let neck = neck.with_charge(q);
    let (fb, fpb, m_star) = neck_gate(&neck, q)?;
    if !(m_e > m_star) {
        return Err(Error::MassTooSmall { m_e, m_star });
    }
    let params = RNParams::new(m_e, q)?;
    let h = opts.rn_h.unwrap_or(1e-3 * m_e);
    let length = opts.rn_length.unwrap_or(40.0 * m_e);
    // Long enough to reach radius f(b)·1.1 + r₊ with room to spare.
    let sol = rn_solve(params, length + 2.0 * fb + 2.0 * params.r_plus, h)?;
    let mu = 2.0 * (m_e - m_star) / fb;

    let (case, eps_att, s_eps) = if fb < params.r_plus {
        let s = sol
            .s_at_slope(0.5 * fpb)
            .ok_or_else(|| Error::Parameter(format!("RN slope never reaches {}", 0.5 * fpb)))?;
        (AttachCase::InsideHorizon, 0.0, s)
    } else {
        let target = fpb * fpb - 0.5 * mu;
        let mut eps = 0.1 * fb;
        loop {
            if eps < 1e-12 * fb {
                return Err(Error::Parameter("attachment offset ε_att underflowed".into()));
            }
            let s = sol
                .s_at_radius(fb + eps)
                .ok_or_else(|| Error::Parameter(format!("RN radius never reaches {}", fb + eps)))?;
            let up = sol.eval(s).1;
            if up * up < target {
                break (AttachCase::OutsideHorizon, eps, s);
            }
            eps *= 0.5;
        }
    };

    let exterior = sol.profile(crate::rotsym::Segment::RnTail)?;
    let s_max = sol.s_max();
    let jet = |s: f64| (0.0..=s_max).contains(&s).then(|| sol.eval(s));
    let bent = bend_with(&exterior, &jet, &BendSpec::new(s_eps, fb)).stage("bend")?;
    let br = bent.report.clone();
    let lo = s_eps - br.delta;
    let (f_lo, fp_lo, _) = bent.profile.eval(lo).expect("bent start");
    let bent_hawking = formula::hawking(q, f_lo, fp_lo);
    if !(bent_hawking > q.abs()) {
        return Err(Error::GlueHypothesis {
            condition: 4,
            detail: format!("bent attachment slice has m_H = {bent_hawking} ≤ |Q|"),
        });
    }

    let window = bent.profile.restricted(lo, s_eps - 0.5 * br.delta)?;
    let bridge = glue_profiles(&BridgeSpec {
        left: neck.clone(),
        right: window.clone(),
        q,
        h: opts.bridge_h,
        eps0: None,
    })
    .stage("bridge")?;
    let offset = bridge.report.translation.offset;
    let w_end = window.end();
    let mut segments = bridge.profile.segments.clone();
    let rest = bent.profile.shifted(offset);
    for seg in rest.segments {
        let keep: Vec<usize> = (0..seg.len()).filter(|&i| seg.s[i] > w_end + offset).collect();
        if keep.is_empty() {
            continue;
        }
        // The last window node may be the last node of a segment; the
        // remainder starts strictly after it.
        let lo_s = seg.s[keep[0]];
        let mut part = seg.restricted(lo_s, f64::INFINITY)?;
        if let Some(last) = segments.last_mut() {
            if last.tag == part.tag {
                last.s.append(&mut part.s);
                last.f.append(&mut part.f);
                last.fp.append(&mut part.fp);
                last.fpp.append(&mut part.fpp);
                continue;
            }
        }
        segments.push(part);
    }
    let profile = RadialProfile::new(2, q, segments)?;

    let segments_report = profile
        .segments
        .iter()
        .map(|seg| SegmentMargin {
            segment: seg.tag.to_string(),
            start: seg.start(),
            end: seg.end(),
            min_margin: (0..seg.len())
                .map(|i| formula::margin(2, q, seg.f[i], seg.fp[i], seg.fpp[i]))
                .fold(f64::INFINITY, f64::min),
        })
        .collect();
    let tail_mass_deviation = profile
        .segment(crate::rotsym::Segment::RnTail)
        .map(|seg| {
            (0..seg.len())
                .map(|i| (formula::hawking(q, seg.f[i], seg.fp[i]) - m_e).abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(0.0);

    let report = JunctionReport {
        m_e,
        q,
        m_star,
        mu,
        case,
        eps_att,
        s_eps,
        offset,
        bent_hawking,
        equal_slopes: bridge.report.translation.equal_slopes,
        length: bridge.report.translation.length,
        gamma: bridge.report.zeta.gamma,
        eps_moll: bridge.report.eps_moll,
        d: bridge.report.d,
        delta: br.delta,
        bend: br,
        bridge: bridge.report,
        segments: segments_report,
        tail_mass_deviation,
    };
    Ok(Attached { profile, rn: sol, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotsym::{dec_margin, ProfileSegment, Segment};

    /// f = √(1 + c s²) on [0.75, 1].
    fn neck(c: f64, q: f64) -> RadialProfile {
        let s: Vec<f64> = (0..=100).map(|i| 0.75 + 0.0025 * i as f64).collect();
        let seg = ProfileSegment::from_fn(Segment::CollarNeck, s, |x| {
            let f = (1.0 + c * x * x).sqrt();
            (f, c * x / f, c / (f * f * f))
        })
        .unwrap();
        RadialProfile::single(2, q, seg).unwrap()
    }

    fn check(att: &Attached, neck: &RadialProfile) {
        let pr = &att.profile;
        let m = dec_margin(pr);
        for (nd, m) in pr.nodes().zip(&m) {
            match nd.tag {
                Segment::CollarNeck | Segment::Bridge => assert!(*m > 0.0, "{} {m:e} at {}", nd.tag, nd.s),
                _ => assert!(*m >= -1e-10, "{} {m:e} at {}", nd.tag, nd.s),
            }
        }
        assert!(pr.nodes().all(|n| n.fp > 0.0));
        // Inner half of the neck untouched.
        let mid = 0.5 * (neck.start() + neck.end());
        for (a, b) in neck.nodes().filter(|n| n.s <= mid).zip(pr.nodes()) {
            assert_eq!((a.s, a.f, a.fp, a.fpp), (b.s, b.f, b.fp, b.fpp));
        }
        assert!(att.report.tail_mass_deviation < 1e-8, "{:e}", att.report.tail_mass_deviation);
        // Defined past 20 m_e and RN there.
        let end = pr.endpoint(End::End);
        assert!(end.f > 20.0 * att.report.m_e);
        assert!((formula::hawking(att.report.q, end.f, end.fp) - att.report.m_e).abs() < 1e-8);
        serde_json::to_string(&att.report).unwrap();
    }

    #[test]
    fn charged_round_neck() {
        let nk = neck(0.01, 0.5);
        let att = glue_to_rn(&nk, 0.7, 0.5, &AttachOptions::default()).unwrap();
        assert_eq!(att.report.case, AttachCase::InsideHorizon);
        assert!((att.report.m_star - 0.625).abs() < 5e-3);
        check(&att, &nk);
    }

    #[test]
    fn mass_gate() {
        let nk = neck(0.01, 0.5);
        let err = glue_to_rn(&nk, 0.6, 0.5, &AttachOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MassTooSmall { .. }));
    }

    #[test]
    fn uncharged_neck() {
        let nk = neck(0.01, 0.0);
        let att = glue_to_rn(&nk, 0.6, 0.0, &AttachOptions::default()).unwrap();
        check(&att, &nk);
    }

    #[test]
    fn outside_horizon_attachment() {
        let nk = neck(0.5, 0.3);
        let att = glue_to_rn(&nk, 0.6, 0.3, &AttachOptions::default()).unwrap();
        assert_eq!(att.report.case, AttachCase::OutsideHorizon);
        assert!(att.report.eps_att > 0.0 && att.report.mu > 0.0);
        check(&att, &nk);
    }
}

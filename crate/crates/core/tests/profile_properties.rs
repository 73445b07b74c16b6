use proptest::prelude::*;

use chargext::glue::{glue_profiles, BridgeSpec};
use chargext::rotsym::{
    charged_hawking_profile, dec_margin, formula, hypotheses_at, rn_profile, rn_solve, scalar_curvature, ProfileSegment,
    RNParams, RadialProfile, Segment,
};
use chargext::sphere::{charge_flux, AxisymMetric, PolarGrid, ScalarField};

fn thinned(m: f64, q: f64, lo: f64, hi: f64) -> RadialProfile {
    let sol = rn_solve(RNParams::new(m, q).unwrap(), 2.0 * hi + 10.0, 2e-3).unwrap();
    let seg = sol.segment(Segment::Input, sol.s_at_radius(lo).unwrap(), sol.s_at_radius(hi).unwrap()).unwrap();
    let c = 1.0 - 1e-3;
    let sc = |v: &[f64]| v.iter().map(|x| c * x).collect::<Vec<_>>();
    let seg = ProfileSegment::new(Segment::Input, seg.s.clone(), sc(&seg.f), sc(&seg.fp), sc(&seg.fpp)).unwrap();
    RadialProfile::single(2, q, seg).unwrap()
}

/// Two thinned RN pieces with m₂ > m₁ and a gap between them; Some only
/// when the slopes decrease across the gap.
fn pair(m1: f64, qf: f64, lo: f64, dm: f64, gap: f64) -> Option<(RadialProfile, RadialProfile, f64)> {
    let q = qf * m1;
    let (lo1, hi1) = (lo * m1, (lo + 0.5) * m1);
    let m2 = m1 * (1.0 + dm);
    let lo2 = hi1 * (1.0 + gap);
    let slope = |m: f64, u: f64| (1.0 - 2.0 * m / u + q * q / (u * u)).sqrt();
    (slope(m2, lo2) < slope(m1, hi1)).then(|| (thinned(m1, q, lo1, hi1), thinned(m2, q, lo2, lo2 + 0.5 * m1), q))
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 12, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn rn_self_consistency(m in 0.5..2.0f64, qf in -0.9..0.9f64) {
        let q = qf * m;
        let pr = rn_profile(RNParams::new(m, q).unwrap(), 20.0 * m, 1e-3 * m).unwrap();
        let h2 = 1e-6 * m * m;
        for ((nd, r), dm) in pr.nodes().zip(scalar_curvature(&pr)).zip(dec_margin(&pr)) {
            prop_assert!(dm.abs() <= 10.0 * h2);
            prop_assert!((r - 2.0 * q * q / nd.f.powi(4)).abs() <= 1e-8 * (1.0 + r.abs()));
            prop_assert!((charged_hawking_profile(&pr, nd.s).unwrap() - m).abs() <= 1e-8);
        }
    }

    #[test]
    fn floor_hypothesis_is_hawking_mass_above_charge(f in 0.1..5.0f64, fp in 0.0..1.5f64, q in -3.0..3.0f64) {
        let h = hypotheses_at(2, q, f, fp);
        let (mh, above) = h.hawking.unwrap();
        prop_assert!((mh - formula::hawking(q, f, fp)).abs() <= 1e-14 * mh.abs().max(1.0));
        prop_assert_eq!(above, mh > q.abs());
        // 1 + Q²/f² − 2|Q|/f > f′² is m_H > |Q| rearranged; compare away from ties.
        if (mh - q.abs()).abs() > 1e-9 {
            prop_assert_eq!(h.slope, above);
        }
    }

    #[test]
    fn margin_scales_inversely(f in 0.5..3.0f64, fp in -1.0..1.0f64, fpp in -2.0..2.0f64, q in -0.4..0.4f64, lam in 0.2..5.0f64) {
        // s ↦ λs, f ↦ λf, Q ↦ λQ (n = 2): f′ fixed, f″ ↦ f″/λ.
        let m0 = formula::margin(2, q, f, fp, fpp);
        let m1 = formula::margin(2, lam * q, lam * f, fp, fpp / lam);
        prop_assert!((m1 - m0 / lam).abs() <= 1e-12 * (1.0 + m0.abs()));
        prop_assert_eq!(m1 > 0.0, m0 > 0.0);
    }

    #[test]
    fn bridges_are_monotone_and_carry_their_charge(
        m1 in 0.5..1.5f64, qf in 0.0..0.5f64, lo in 2.5..3.5f64, dm in 0.005..0.05f64, gap in 0.002..0.02f64,
    ) {
        let Some((left, right, q)) = pair(m1, qf, lo, dm, gap) else { return Ok(()) };
        let b = glue_profiles(&BridgeSpec { left, right, q, h: 2e-3, eps0: None }).unwrap();
        let grid = PolarGrid::new(33).unwrap();
        let mut last = f64::NEG_INFINITY;
        for nd in b.profile.nodes() {
            prop_assert!(nd.fp > 0.0);
            let mh = charged_hawking_profile(&b.profile, nd.s).unwrap();
            prop_assert!(mh >= last - 1e-9, "m_H drops from {last} to {mh} at s = {}", nd.s);
            last = mh;
        }
        for nd in b.profile.nodes().step_by(37) {
            let slice = AxisymMetric::round(&grid, nd.f);
            let e = ScalarField::new(&grid, vec![formula::e_normal(2, q, nd.f); grid.len()]).unwrap();
            prop_assert!((charge_flux(&slice, &e).unwrap() - q).abs() <= 1e-9);
        }
    }
}

#[test]
fn mollification_width_is_grid_independent() {
    let (left, right, q) = pair(1.0, 0.3, 3.0, 0.02, 0.01).unwrap();
    let widths: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&h| {
            let b = glue_profiles(&BridgeSpec { left: left.clone(), right: right.clone(), q, h, eps0: None }).unwrap();
            assert!(b.report.omega_shift <= b.report.d);
            b.report.eps_moll
        })
        .collect();
    let (lo, hi) = widths.iter().fold((f64::INFINITY, 0.0f64), |(a, b), w| (a.min(*w), b.max(*w)));
    assert!(lo > 0.0 && hi / lo <= 4.0, "{widths:?}");
}

#[test]
fn input_profiles_are_strict_and_uniform_in_charge() {
    let pr = thinned(1.0, 0.4, 2.5, 3.5);
    assert!(dec_margin(&pr).into_iter().all(|m| m > 0.0));
    let grid = PolarGrid::new(33).unwrap();
    for nd in pr.nodes().step_by(50) {
        let e = ScalarField::new(&grid, vec![formula::e_normal(2, pr.q, nd.f); grid.len()]).unwrap();
        assert!((charge_flux(&AxisymMetric::round(&grid, nd.f), &e).unwrap() - pr.q).abs() < 1e-12);
    }
}

//! Bartnik data in, certified charged extension out.

pub mod admissibility;
pub mod build;
pub mod config;
pub mod dump;
pub mod verify;

pub use admissibility::{check_admissibility, AdmissibilityReport};
pub use build::{build_extension, BuildFailure, Extension, RunReport, Status};
pub use config::{BartnikDataInput, BoundaryMetric, Config, Tolerances};
pub use verify::{verify_extension, CollarData, ExtensionData, ExtensionParams, ExtensionReport, PassFlags};

#[cfg(test)]
mod tests {
    use super::*;

    fn round(q: f64, m: f64, ntheta: usize, nt: usize) -> BartnikDataInput {
        let text = format!(
            "[bartnik]\nmetric = \"round\"\nr_o = 1.0\nQ = {q}\n[target]\nmass = {m}\n[grid]\nntheta = {ntheta}\nnt = {nt}\n"
        );
        Config::from_toml(&text).unwrap().input().unwrap()
    }

    #[test]
    fn round_admissibility() {
        let a = check_admissibility(&round(0.5, 0.7, 33, 17));
        assert!(a.pass, "{a:?}");
        assert!((a.kappa - 1.0).abs() < 1e-8 && (a.mass_bound - 0.625).abs() < 1e-14);
        let b = check_admissibility(&round(1.2, 2.0, 33, 17));
        assert!(!b.pass && !b.area_charge && !b.kappa_charge);
        assert!(b.violated.iter().any(|v| v.starts_with("area-charge")));
    }

    #[test]
    fn round_build_and_reload() {
        let input = round(0.5, 0.7, 33, 17);
        let tol = Tolerances::default();
        let (ext, rep) = build_extension(&input, &tol).unwrap();
        assert!(rep.pass, "{}", serde_json::to_string_pretty(&rep).unwrap());
        assert!((rep.mh_boundary - 0.625).abs() < 1e-8);
        assert!((rep.gap - 0.075).abs() < 1e-8);
        let dir = tempfile::tempdir().unwrap();
        dump::write_extension(dir.path(), &ext, &ext.run_report(&rep)).unwrap();
        let back = dump::read_extension(dir.path()).unwrap();
        let again = verify_extension(&back, &tol);
        assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&rep).unwrap());
    }

    #[test]
    fn mass_below_bound_is_admissibility_failure() {
        let f = build_extension(&round(0.5, 0.62, 33, 17), &Tolerances::default()).unwrap_err();
        assert!(f.is_admissibility());
        assert_eq!(f.report.stage.as_deref(), Some("admissibility"));
    }

    #[test]
    fn corrupted_bridge_fails_verification() {
        let (ext, rep) = build_extension(&round(0.5, 0.7, 33, 17), &Tolerances::default()).unwrap();
        assert!(rep.pass);
        let mut data = ext.data();
        for seg in &mut data.profile.segments {
            if seg.tag == crate::rotsym::Segment::Bridge {
                seg.f.iter_mut().for_each(|f| *f *= 0.99);
            }
        }
        let bad = verify_extension(&data, &Tolerances::default());
        assert!(!bad.pass && (!bad.flags.continuity || !bad.flags.dec));
    }

    #[test]
    fn pure_reissner_nordstrom_has_zero_gap() {
        use crate::rotsym::{rn_profile, RNParams};
        let (m, q, h) = (1.0, 0.6, 1e-3);
        let params = ExtensionParams { m_e: m, q_o: q, eps: None, amplitude: None, theta_cut: None, rn_h: h, rn_offset: 0.0 };
        let profile = rn_profile(RNParams::new(m, q).unwrap(), 30.0, h).unwrap();
        let rep = verify_extension(&ExtensionData { params, collar: None, profile }, &Tolerances::default());
        assert!(rep.pass, "{:?} {:?}", rep.flags, rep.problems);
        assert!(rep.gap.abs() < 1e-12 && (rep.penrose_bound - m).abs() < 1e-12);
    }
}

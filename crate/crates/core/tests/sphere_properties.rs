use std::f64::consts::PI;

use proptest::prelude::*;

use chargext::path::{conformal_path, normalize_path};
use chargext::sphere::eigen::QuadraticForm;
use chargext::sphere::{
    conformal_representation, first_eigenpair, gaussian_curvature, laplace_beltrami, AxisymMetric, ConformalData,
    PolarGrid, ScalarField,
};

/// A surface of revolution that is not conformally round in its own θ:
/// q = (1+b)(1 + c sin²θ)^{1/2}, p = sin θ (1 + b cos²θ).
fn revolution(grid: &PolarGrid, b: f64, c: f64) -> AxisymMetric {
    let th = grid.theta();
    let q = th.iter().map(|t| (1.0 + b) * (1.0 + c * t.sin().powi(2)).sqrt()).collect();
    let p = th.iter().map(|t| t.sin() * (1.0 + b * t.cos().powi(2))).collect();
    AxisymMetric::new(grid, q, p).unwrap()
}

fn trig_w(grid: &PolarGrid, c: &[f64]) -> Vec<f64> {
    grid.theta()
        .iter()
        .map(|t| c.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * t).cos()).sum())
        .collect()
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 16, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn gauss_bonnet(b in 0.0..0.3f64, c in -0.3..0.3f64) {
        let grid = PolarGrid::new(65).unwrap();
        let m = revolution(&grid, b, c);
        let k = gaussian_curvature(&m).unwrap();
        prop_assert!((m.integrate(&k.values) - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn rayleigh_quotient_is_an_infimum(b in 0.0..0.3f64, c in -0.3..0.3f64, seed in any::<u64>()) {
        let grid = PolarGrid::new(49).unwrap();
        let m = revolution(&grid, b, c);
        let e = first_eigenpair(&m).unwrap();
        let form = QuadraticForm::assemble(&m).unwrap();
        prop_assert!((form.rayleigh(&e.u.values) - e.lambda).abs() < 1e-8);
        let mut rng = seed;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..6).map(|_| next()).collect();
            let phi: Vec<f64> = grid
                .x()
                .iter()
                .map(|x| coeffs.iter().enumerate().map(|(k, a)| a * x.powi(k as i32)).sum())
                .collect();
            prop_assert!(form.rayleigh(&phi) >= e.lambda - 1e-8);
        }
    }

    #[test]
    fn spectrum_and_area_are_coordinate_free(b in 0.0..0.3f64, c in -0.3..0.3f64) {
        let grid = PolarGrid::new(65).unwrap();
        let m = revolution(&grid, b, c);
        let (cd, _) = conformal_representation(&m).unwrap();
        let iso = cd.metric();
        prop_assert!((iso.area() - m.area()).abs() < 1e-6 * m.area());
        let (l0, l1) = (first_eigenpair(&m).unwrap().lambda, first_eigenpair(&iso).unwrap().lambda);
        prop_assert!((l0 - l1).abs() < 1e-6 * l0.abs().max(1.0), "{l0} vs {l1}");
    }

    #[test]
    fn path_lambda_never_dips(c1 in -1.0..1.0f64, c2 in -1.0..1.0f64, c3 in -1.0..1.0f64, amp in 0.05..0.3f64) {
        let grid = PolarGrid::new(33).unwrap();
        let raw = trig_w(&grid, &[c1, c2, c3]);
        let top = raw.iter().fold(1e-12f64, |a, w| a.max(w.abs()));
        let cd = ConformalData::normalized(&grid, raw.iter().map(|w| 0.5 * amp * w / top).collect(), 1.0).unwrap();
        let path = conformal_path(&cd, 17).unwrap();
        let lam: Vec<f64> = path.metrics.iter().map(|m| first_eigenpair(m).unwrap().lambda).collect();
        let floor = lam[0].min(*lam.last().unwrap());
        prop_assert!(lam.iter().all(|l| *l >= floor - 1e-6), "{lam:?}");

        // Moser normalization is a pullback, so λ₁ survives it node by node.
        let norm = normalize_path(&path, 0.75).unwrap();
        let inf = norm.eigen.iter().map(|e| e.lambda).fold(f64::INFINITY, f64::min);
        prop_assert!((norm.kappa - inf).abs() < 1e-12);
    }
}

#[test]
fn curvature_and_laplacian_at_rounding_level() {
    // g = e^{2w} g_* with w = a cos 2θ + c: K = e^{−2w}(1 − Δ_* w), and
    // Δ_* cos 2θ = −8 P₂(cos θ) since cos 2θ = (4P₂ − 1)/3. The collocation
    // scheme is spectral, so truncation is gone by the smallest grid and what
    // remains is rounding of the second-derivative matrices, at most ~N⁴ε.
    let a = 0.2;
    let p2 = |x: f64| 0.5 * (3.0 * x * x - 1.0);
    for n in [33, 65, 129] {
        let grid = PolarGrid::new(n).unwrap();
        let cd = ConformalData::normalized(&grid, trig_w(&grid, &[0.0, a]), 1.0).unwrap();
        let m = cd.metric();
        let k = gaussian_curvature(&m).unwrap();
        let x = grid.x();
        let ek = (0..n)
            .map(|i| (k.values[i] - (-2.0 * cd.w[i]).exp() * (1.0 + 8.0 * a * p2(x[i]))).abs())
            .fold(0.0, f64::max);
        // Δ_g of φ = x: Δ_* x = −2x.
        let lap = laplace_beltrami(&m, &ScalarField::new(&grid, x.to_vec()).unwrap()).unwrap();
        let el = (0..n).map(|i| (lap.values[i] + 2.0 * x[i] * (-2.0 * cd.w[i]).exp()).abs()).fold(0.0, f64::max);
        let floor = 1e-15 * (n as f64).powi(4);
        assert!(ek <= floor && el <= floor, "N = {n}: K error {ek:e}, Δ error {el:e}");
    }
}

#[test]
fn area_charge_on_round_slices() {
    let grid = PolarGrid::new(33).unwrap();
    for (r, q) in [(1.0, 0.5), (2.0, 1.999), (0.5, -0.3)] {
        let m = AxisymMetric::round(&grid, r);
        let e = ScalarField::new(&grid, vec![q / (r * r); grid.len()]).unwrap();
        let flux = chargext::sphere::charge_flux(&m, &e).unwrap();
        assert!((flux - q).abs() < 1e-12);
        // 4π|Σ| ≥ 16π²Q² reduces to |Q| ≤ r on a round slice.
        assert_eq!(4.0 * PI * m.area() >= 16.0 * PI * PI * flux * flux, flux.abs() <= r);
    }
}

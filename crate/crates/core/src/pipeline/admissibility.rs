//! Admissibility of Bartnik data for the charged extension, evaluated without failing.

use serde::Serialize;

use super::config::BartnikDataInput;
use crate::path::{conformal_path, normalize_path, MetricPath};
use crate::Result;

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub r_o: f64,
    pub q_o: f64,
    pub m: f64,
    pub area: f64,
    pub lambda_boundary: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub q2_over_r4: f64,
    /// κ − Q²/r_o⁴.
    pub kappa_margin: f64,
    /// r_o/2 + Q²/(2r_o), the charged Hawking mass of the minimal boundary.
    pub mass_bound: f64,
    pub area_charge: bool,
    pub kappa_charge: bool,
    pub lambda_positive: bool,
    pub mass_above_bound: bool,
    pub isometry_defect: Option<f64>,
    /// Names of the violated hypotheses.
    pub violated: Vec<String>,
    pub error: Option<String>,
    pub pass: bool,
}

impl AdmissibilityReport {
    fn failed(input: &BartnikDataInput, e: String) -> Self {
        Self {
            r_o: f64::NAN,
            q_o: input.q_o,
            m: input.m,
            area: f64::NAN,
            lambda_boundary: f64::NAN,
            kappa: f64::NAN,
            alpha: f64::NAN,
            beta: f64::NAN,
            q2_over_r4: f64::NAN,
            kappa_margin: f64::NAN,
            mass_bound: f64::NAN,
            area_charge: false,
            kappa_charge: false,
            lambda_positive: false,
            mass_above_bound: false,
            isometry_defect: None,
            violated: vec!["metric".into()],
            error: Some(e),
            pass: false,
        }
    }
}

fn build_path(input: &BartnikDataInput) -> Result<(MetricPath, Option<f64>)> {
    let (cd, defect) = input.conformal()?;
    let path = normalize_path(&conformal_path(&cd, input.nt)?, input.theta_cut)?;
    Ok((path, defect))
}

/// Report plus the normalized path it was computed from, when that exists.
pub fn admissibility_with_path(input: &BartnikDataInput) -> (AdmissibilityReport, Option<MetricPath>) {
    let (path, defect) = match build_path(input) {
        Ok(p) => p,
        Err(e) => return (AdmissibilityReport::failed(input, e.to_string()), None),
    };
    let r = path.r_o;
    let q2 = input.q_o * input.q_o;
    let q2_over_r4 = q2 / r.powi(4);
    let lambda_boundary = path.eigen[0].lambda;
    let mass_bound = 0.5 * r + q2 / (2.0 * r);
    let area_charge = q2 < r * r;
    let kappa_charge = path.kappa > q2_over_r4;
    let lambda_positive = lambda_boundary > 0.0;
    let mass_above_bound = input.m > mass_bound;
    let mut violated = Vec::new();
    if !area_charge {
        violated.push("area-charge: Q_o^2 < r_o^2".to_owned());
    }
    if !kappa_charge {
        violated.push("kappa: kappa > Q_o^2/r_o^4".to_owned());
    }
    if !lambda_positive {
        violated.push("lambda_1(g_o) > 0".to_owned());
    }
    if !mass_above_bound {
        violated.push("mass: m > r_o/2 + Q_o^2/(2 r_o)".to_owned());
    }
    let report = AdmissibilityReport {
        r_o: r,
        q_o: input.q_o,
        m: input.m,
        area: path.metrics[0].area(),
        lambda_boundary,
        kappa: path.kappa,
        alpha: path.alpha,
        beta: path.beta,
        q2_over_r4,
        kappa_margin: path.kappa - q2_over_r4,
        mass_bound,
        area_charge,
        kappa_charge,
        lambda_positive,
        mass_above_bound,
        isometry_defect: defect,
        pass: violated.is_empty(),
        violated,
        error: None,
    };
    (report, Some(path))
}

/// Evaluates Q² < r², κ > Q²/r⁴, λ₁(g_o) > 0 and the mass gate.
pub fn check_admissibility(input: &BartnikDataInput) -> AdmissibilityReport {
    admissibility_with_path(input).0
}

//! The composed construction: path, collar, neck, RN attachment, verification.

use serde::Serialize;

use super::admissibility::{admissibility_with_path, AdmissibilityReport};
use super::config::{BartnikDataInput, Tolerances};
use super::verify::{verify_extension, CollarData, ExtensionData, ExtensionParams, ExtensionReport};
use crate::collar::{
    assemble_collar, collar_neck_profile, eigen_path, select_amplitude, select_epsilon, CollarBlock, CollarReport,
    EpsilonChoice,
};
use crate::error::{Error, StageExt};
use crate::glue::{glue_to_rn, AttachCase, AttachOptions, Attached};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    AdmissibilityFailed,
    ConstructionFailed,
    VerificationFailed,
}

#[derive(Clone, Debug, Serialize)]
pub struct JunctionSummary {
    pub case: AttachCase,
    pub m_star: f64,
    pub s_eps: f64,
    pub delta: f64,
    pub gamma: Option<f64>,
    pub eps_moll: f64,
    pub equal_slopes: bool,
}

/// Everything `report.json` holds. Sections after a failed stage are absent.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub status: Status,
    pub stage: Option<String>,
    pub error: Option<String>,
    pub failed_flags: Vec<String>,
    pub admissibility: Option<AdmissibilityReport>,
    pub params: Option<ExtensionParams>,
    pub collar: Option<CollarReport>,
    pub junction: Option<JunctionSummary>,
    pub extension: Option<ExtensionReport>,
}

impl RunReport {
    fn empty() -> Self {
        Self {
            status: Status::ConstructionFailed,
            stage: None,
            error: None,
            failed_flags: Vec::new(),
            admissibility: None,
            params: None,
            collar: None,
            junction: None,
            extension: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Extension {
    pub collar: CollarBlock,
    pub epsilon: EpsilonChoice,
    pub attached: Attached,
    pub params: ExtensionParams,
    pub admissibility: AdmissibilityReport,
}

impl Extension {
    /// The raw fields a dump carries.
    pub fn data(&self) -> ExtensionData {
        let c = &self.collar;
        ExtensionData {
            params: self.params.clone(),
            collar: Some(CollarData {
                t: c.path.t.clone(),
                v: c.v.clone(),
                slices: c.path.metrics.iter().zip(&c.big_f).map(|(m, f)| m.scaled(f.0)).collect(),
            }),
            profile: self.attached.profile.clone(),
        }
    }

    pub fn run_report(&self, report: &ExtensionReport) -> RunReport {
        let j = &self.attached.report;
        RunReport {
            status: if report.pass { Status::Pass } else { Status::VerificationFailed },
            stage: (!report.pass).then(|| "verify".to_owned()),
            error: None,
            failed_flags: report.flags.failed().into_iter().map(str::to_owned).collect(),
            admissibility: Some(self.admissibility.clone()),
            params: Some(self.params.clone()),
            collar: Some(self.collar.report(Some(self.epsilon))),
            junction: Some(JunctionSummary {
                case: j.case,
                m_star: j.m_star,
                s_eps: j.s_eps,
                delta: j.delta,
                gamma: j.gamma,
                eps_moll: j.eps_moll,
                equal_slopes: j.equal_slopes,
            }),
            extension: Some(report.clone()),
        }
    }
}

/// A stage-tagged error with whatever was computed before it.
#[derive(Debug)]
pub struct BuildFailure {
    pub error: Error,
    pub report: Box<RunReport>,
}

impl BuildFailure {
    pub fn is_admissibility(&self) -> bool {
        self.report.status == Status::AdmissibilityFailed
    }
}

/// Runs the full construction and verifies the result from its raw fields.
pub fn build_extension(
    input: &BartnikDataInput,
    tol: &Tolerances,
) -> std::result::Result<(Extension, ExtensionReport), BuildFailure> {
    let mut run = RunReport::empty();
    let fail = |run: &mut RunReport, e: Error| {
        let stage = match &e {
            Error::Stage { stage, .. } => Some((*stage).to_owned()),
            _ => None,
        };
        run.stage = stage;
        run.error = Some(e.to_string());
        BuildFailure { error: e, report: Box::new(run.clone()) }
    };

    let (adm, path) = admissibility_with_path(input);
    run.admissibility = Some(adm.clone());
    if !adm.pass {
        run.status = Status::AdmissibilityFailed;
        let detail = adm.error.clone().unwrap_or_else(|| adm.violated.join("; "));
        let mut f = fail(&mut run, Error::Admissibility(detail));
        f.report.stage = Some("admissibility".into());
        return Err(f);
    }
    let path = path.expect("admissible input has a path");
    let q = input.q_o;
    let m = input.m;

    let eigen = eigen_path(&path).stage("eigen_path").map_err(|e| fail(&mut run, e))?;
    let amplitude = select_amplitude(&eigen, path.kappa, path.alpha, q, path.r_o)
        .stage("amplitude")
        .map_err(|e| fail(&mut run, e))?;
    let u1 = 1.0 / (4.0 * std::f64::consts::PI * path.r_o * path.r_o).sqrt();
    let epsilon = select_epsilon(m, path.r_o, q, amplitude.a, u1)
        .stage("epsilon")
        .map_err(|e| fail(&mut run, e))?;
    let block = assemble_collar(&path, &eigen, amplitude, epsilon.eps, q)
        .stage("collar")
        .map_err(|e| fail(&mut run, e))?;
    run.collar = Some(block.report(Some(epsilon)));
    let neck = collar_neck_profile(&block).stage("neck").map_err(|e| fail(&mut run, e))?;

    let rn_h = input.ds.unwrap_or(1e-3 * m);
    let opts = AttachOptions {
        rn_h: Some(rn_h),
        rn_length: None,
        bridge_h: input.ds.unwrap_or(AttachOptions::default().bridge_h),
    };
    let attached = glue_to_rn(&neck, m, q, &opts).stage("glue").map_err(|e| fail(&mut run, e))?;
    let params = ExtensionParams {
        m_e: m,
        q_o: q,
        eps: Some(block.eps),
        amplitude: Some(block.amplitude.a),
        theta_cut: Some(path.theta_cut),
        rn_h,
        rn_offset: attached.report.offset,
    };
    let ext = Extension { collar: block, epsilon, attached, params, admissibility: adm };
    let report = verify_extension(&ext.data(), tol);
    Ok((ext, report))
}

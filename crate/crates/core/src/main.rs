use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use chargext::collar::{assemble_collar, eigen_path, select_amplitude, select_epsilon};
use chargext::glue::{glue_profiles, BridgeSpec};
use chargext::pipeline::admissibility::admissibility_with_path;
use chargext::pipeline::{build_extension, dump, verify_extension, Config, ExtensionParams, Status, Tolerances};
use chargext::rotsym::{rn_solve, RNParams, RadialProfile, Segment};
use chargext::sphere::{first_eigenpair, io};
use chargext::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_ADMISSIBILITY: u8 = 2;
const EXIT_CONSTRUCTION: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser)]
#[command(name = "chargext", version, about = "Charged asymptotically flat extensions of minimal Bartnik data")]
struct Cli {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    ntheta: Option<usize>,
    #[arg(long, global = true)]
    nt: Option<usize>,
    #[arg(long, global = true)]
    ds: Option<f64>,
    /// Print the full JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// First eigenpair of −Δ + K on a `theta,q,p` metric file or the configured boundary.
    Eigen {
        #[arg(long)]
        metric: Option<PathBuf>,
    },
    /// Build and normalize the path of metrics; report κ, α, β.
    Path,
    /// Dump an RN(m, Q) profile from its horizon.
    Rn {
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, default_value_t = 40.0)]
        s_max: f64,
    },
    /// Assemble the collar and dump its fields.
    Collar,
    /// Glue two dumped profiles.
    Glue {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        q_left: f64,
        #[arg(long, allow_negative_numbers = true)]
        q_right: f64,
        /// Bridge charge; defaults to the smaller of the two.
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
    },
    /// The full construction with verification.
    Build,
    /// Re-certify a dumped extension from its raw fields.
    Verify,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Io(_) | Error::Format(_) | Error::GridMismatch(_) => EXIT_USAGE,
            Error::Admissibility(_) => EXIT_ADMISSIBILITY,
            _ => EXIT_CONSTRUCTION,
        };
        Failure { code, msg: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| usage("--config is required for this subcommand"))?;
    let mut c = Config::load(path)?;
    if let Some(n) = cli.ntheta {
        c.grid.ntheta = n;
    }
    if let Some(n) = cli.nt {
        c.grid.nt = n;
    }
    if cli.ds.is_some() {
        c.grid.ds = cli.ds;
    }
    Ok(c)
}

fn out_dir(cli: &Cli) -> Result<&Path, Failure> {
    cli.out_dir.as_deref().ok_or_else(|| usage("--out-dir is required for this subcommand"))
}

fn emit<T: Serialize>(cli: &Cli, value: &T, summary: &[(&str, String)]) -> Result<(), Failure> {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(value).map_err(Error::from)?);
    } else {
        for (k, v) in summary {
            println!("{k}: {v}");
        }
    }
    Ok(())
}

fn cmd_eigen(cli: &Cli, metric: &Option<PathBuf>) -> Outcome {
    let g = match metric {
        Some(p) => io::read_metric(p)?,
        None => load_config(cli)?.input()?.conformal()?.0.metric(),
    };
    let e = first_eigenpair(&g)?;
    #[derive(Serialize)]
    struct Out {
        lambda: f64,
        residual: f64,
        iterations: usize,
        u_min: f64,
        u_max: f64,
    }
    let o = Out { lambda: e.lambda, residual: e.residual, iterations: e.iterations, u_min: e.u.min(), u_max: e.u.max() };
    emit(cli, &o, &[("lambda_1", format!("{}", o.lambda)), ("residual", format!("{:e}", o.residual))])?;
    Ok(0)
}

fn cmd_path(cli: &Cli) -> Outcome {
    let input = load_config(cli)?.input()?;
    let (adm, path) = admissibility_with_path(&input);
    let Some(path) = path else {
        return Err(usage(adm.error.unwrap_or_default()));
    };
    if let Some(dir) = &cli.out_dir {
        path.export(dir.join("path"))?;
    }
    emit(
        cli,
        &adm,
        &[
            ("kappa", format!("{}", path.kappa)),
            ("alpha", format!("{}", path.alpha)),
            ("beta", format!("{}", path.beta)),
            ("lambda_1(g_o)", format!("{}", adm.lambda_boundary)),
        ],
    )?;
    Ok(0)
}

fn cmd_rn(cli: &Cli, m: f64, q: f64, s_max: f64) -> Outcome {
    let h = cli.ds.unwrap_or(1e-3 * m);
    let sol = rn_solve(RNParams::new(m, q)?, s_max, h)?;
    let dir = out_dir(cli)?;
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    sol.profile(Segment::RnTail)?.write_csv(dir.join(dump::PROFILE))?;
    // Enough for `verify`: the horizon is a minimal boundary.
    let params = ExtensionParams { m_e: m, q_o: q, eps: None, amplitude: None, theta_cut: None, rn_h: h, rn_offset: 0.0 };
    dump::write_json(&serde_json::json!({ "params": params }), dir.join(dump::REPORT))?;
    #[derive(Serialize)]
    struct Out {
        r_plus: f64,
        first_integral_residual: f64,
        nodes: usize,
    }
    let o = Out { r_plus: sol.params.r_plus, first_integral_residual: sol.first_integral_residual(), nodes: sol.s.len() };
    emit(cli, &o, &[("r_plus", format!("{}", o.r_plus)), ("first_integral_residual", format!("{:e}", o.first_integral_residual))])?;
    Ok(0)
}

fn cmd_collar(cli: &Cli) -> Outcome {
    let input = load_config(cli)?.input()?;
    let (adm, path) = admissibility_with_path(&input);
    let Some(path) = path.filter(|_| adm.pass) else {
        emit(cli, &adm, &[("admissibility", format!("fail: {}", adm.violated.join("; ")))])?;
        return Ok(EXIT_ADMISSIBILITY);
    };
    let eig = eigen_path(&path)?;
    let amp = select_amplitude(&eig, path.kappa, path.alpha, input.q_o, path.r_o)?;
    let u1 = 1.0 / (4.0 * std::f64::consts::PI * path.r_o * path.r_o).sqrt();
    let ec = select_epsilon(input.m, path.r_o, input.q_o, amp.a, u1)?;
    let block = assemble_collar(&path, &eig, amp, ec.eps, input.q_o)?;
    let dir = out_dir(cli)?;
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    block.write_collar_csv(dir.join(dump::COLLAR))?;
    block.write_slices_csv(dir.join(dump::SLICES))?;
    let rep = block.report(Some(ec));
    dump::write_json(&rep, dir.join("collar.json"))?;
    emit(
        cli,
        &rep,
        &[
            ("A", format!("{}", rep.a)),
            ("eps", format!("{}", rep.eps)),
            ("min_margin", format!("{}", rep.min_margin)),
        ],
    )?;
    Ok(0)
}

fn cmd_glue(cli: &Cli, left: &Path, right: &Path, q_left: f64, q_right: f64, q: Option<f64>) -> Outcome {
    let l = RadialProfile::read_csv(left, 2, q_left)?;
    let r = RadialProfile::read_csv(right, 2, q_right)?;
    let q = q.unwrap_or(if q_left.abs() <= q_right.abs() { q_left } else { q_right });
    let b = glue_profiles(&BridgeSpec { left: l, right: r, q, h: cli.ds.unwrap_or(2e-3), eps0: None })?;
    let dir = out_dir(cli)?;
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    b.profile.write_csv(dir.join(dump::PROFILE))?;
    dump::write_json(&b.report, dir.join("bridge.json"))?;
    emit(cli, &b.report, &[("min_margin", format!("{}", b.report.min_margin)), ("eps_moll", format!("{:e}", b.report.eps_moll))])?;
    Ok(0)
}

fn cmd_build(cli: &Cli) -> Outcome {
    let cfg = load_config(cli)?;
    let dir = out_dir(cli)?;
    let input = cfg.input()?;
    match build_extension(&input, &cfg.tolerances) {
        Ok((ext, rep)) => {
            let run = ext.run_report(&rep);
            dump::write_extension(dir, &ext, &run)?;
            emit(
                cli,
                &run,
                &[
                    ("status", format!("{:?}", run.status)),
                    ("m_e", format!("{}", rep.m_e)),
                    ("boundary mH_CH", format!("{}", rep.mh_boundary)),
                    ("gap", format!("{}", rep.gap)),
                    ("min_margin", format!("{}", rep.min_margin)),
                    ("failed flags", run.failed_flags.join(", ")),
                ],
            )?;
            Ok(if rep.pass { 0 } else { EXIT_VERIFICATION })
        }
        Err(f) => {
            dump::write_report(dir, &f.report)?;
            let code = if f.report.status == Status::AdmissibilityFailed { EXIT_ADMISSIBILITY } else { EXIT_CONSTRUCTION };
            emit(cli, &f.report, &[("status", format!("{:?}", f.report.status)), ("error", f.error.to_string())])?;
            Ok(code)
        }
    }
}

fn cmd_verify(cli: &Cli) -> Outcome {
    let dir = out_dir(cli)?;
    let tol = match &cli.config {
        Some(_) => load_config(cli)?.tolerances,
        None => Tolerances::default(),
    };
    let data = dump::read_extension(dir)?;
    let rep = verify_extension(&data, &tol);
    emit(
        cli,
        &rep,
        &[
            ("pass", format!("{}", rep.pass)),
            ("gap", format!("{}", rep.gap)),
            ("failed flags", rep.flags.failed().join(", ")),
            ("problems", rep.problems.join("; ")),
        ],
    )?;
    Ok(if rep.pass { 0 } else { EXIT_VERIFICATION })
}

fn run(cli: &Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Eigen { metric } => cmd_eigen(cli, metric),
        Cmd::Path => cmd_path(cli),
        Cmd::Rn { m, q, s_max } => cmd_rn(cli, *m, *q, *s_max),
        Cmd::Collar => cmd_collar(cli),
        Cmd::Glue { left, right, q_left, q_right, q } => cmd_glue(cli, left, right, *q_left, *q_right, *q),
        Cmd::Build => cmd_build(cli),
        Cmd::Verify => cmd_verify(cli),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

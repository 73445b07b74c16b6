//! TOML run configuration and its resolution into Bartnik data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{conformal_path, normalize_path, DEFAULT_THETA_CUT};
use crate::sphere::{conformal_representation, io, AxisymMetric, ConformalData, PolarGrid};

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Round sphere of radius `r_o`.
    Round,
    /// `theta,w` file, or `w_modes` on the configured grid.
    Conformal,
    /// `theta,q,p` file.
    Axisym,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BartnikSection {
    pub metric: MetricKind,
    pub file: Option<PathBuf>,
    pub r_o: Option<f64>,
    /// w = Σ a cos(kθ) for pairs [a, k], shifted to area 4π r_o².
    pub w_modes: Option<Vec<(f64, f64)>>,
    #[serde(rename = "Q", alias = "q")]
    pub q: Option<f64>,
    /// Alternative to Q: Q²/r_o⁴ = charge_fraction · κ, Q ≥ 0.
    pub charge_fraction: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub mass: Option<f64>,
    /// Alternative to mass: a multiple of r_o/2 + Q²/(2r_o).
    pub mass_factor: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub ntheta: usize,
    pub nt: usize,
    /// Radial step for the RN integration and the bridge. Unset means
    /// 10⁻³·m for RN and 2·10⁻³ for the bridge.
    pub ds: Option<f64>,
    pub theta_cut: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { ntheta: 129, nt: 65, ds: None, theta_cut: DEFAULT_THETA_CUT }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Allowed flux drift |Q(Σ) − Q_o|.
    pub flux: f64,
    /// Allowed negative margin on the RN and bent RN regions, where it is
    /// zero or tiny by construction.
    pub rn_margin: f64,
    /// |H| on the boundary.
    pub minimal: f64,
    pub continuity: f64,
    /// Charged Hawking mass deviation and RN agreement on the tail.
    pub tail: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { flux: 1e-8, rn_margin: 1e-9, minimal: 1e-10, continuity: 1e-8, tail: 1e-8 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub bartnik: BartnikSection,
    #[serde(default)]
    pub target: TargetSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Directory relative file paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug)]
pub enum BoundaryMetric {
    Conformal(ConformalData),
    Axisym(AxisymMetric),
}

/// Boundary geometry (H ≡ 0 implied), charge and target mass.
#[derive(Clone, Debug)]
pub struct BartnikDataInput {
    pub metric: BoundaryMetric,
    pub q_o: f64,
    pub m: f64,
    pub nt: usize,
    pub theta_cut: f64,
    /// Grid the construction runs on; conformal data is resampled to it.
    pub ntheta: usize,
    pub ds: Option<f64>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let mut c = Self::from_toml(&fs::read_to_string(path)?)?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    fn file(&self) -> Result<PathBuf> {
        let f = self
            .bartnik
            .file
            .as_ref()
            .ok_or_else(|| Error::Format("[bartnik] needs `file` for this metric kind".into()))?;
        Ok(if f.is_absolute() { f.clone() } else { self.base_dir.join(f) })
    }

    pub fn boundary(&self) -> Result<BoundaryMetric> {
        let b = &self.bartnik;
        Ok(match b.metric {
            MetricKind::Round => {
                let g = PolarGrid::new(self.grid.ntheta)?;
                BoundaryMetric::Conformal(ConformalData::new(&g, vec![0.0; g.len()], b.r_o.unwrap_or(1.0))?)
            }
            MetricKind::Conformal => match (&b.w_modes, &b.file) {
                (Some(modes), None) => {
                    let g = PolarGrid::new(self.grid.ntheta)?;
                    let w = g
                        .theta()
                        .iter()
                        .map(|t| modes.iter().map(|(a, k)| a * (k * t).cos()).sum())
                        .collect();
                    BoundaryMetric::Conformal(ConformalData::normalized(&g, w, b.r_o.unwrap_or(1.0))?)
                }
                (None, Some(_)) => BoundaryMetric::Conformal(io::read_conformal(self.file()?, b.r_o)?),
                _ => return Err(Error::Format("conformal metric needs exactly one of `file`, `w_modes`".into())),
            },
            MetricKind::Axisym => BoundaryMetric::Axisym(io::read_metric(self.file()?)?),
        })
    }

    /// Resolves charge and mass; `charge_fraction` needs κ and builds the path once.
    pub fn input(&self) -> Result<BartnikDataInput> {
        let metric = self.boundary()?;
        let mut input = BartnikDataInput {
            metric,
            q_o: 0.0,
            m: 0.0,
            nt: self.grid.nt,
            theta_cut: self.grid.theta_cut,
            ntheta: self.grid.ntheta,
            ds: self.grid.ds,
        };
        let cd = input.conformal()?.0;
        let r = cd.r_o;
        input.q_o = match (self.bartnik.q, self.bartnik.charge_fraction) {
            (Some(q), None) => q,
            (None, Some(frac)) => {
                let path = normalize_path(&conformal_path(&cd, input.nt)?, input.theta_cut)?;
                (frac * path.kappa).max(0.0).sqrt() * r * r
            }
            (None, None) => 0.0,
            _ => return Err(Error::Format("give at most one of `Q`, `charge_fraction`".into())),
        };
        let q2 = input.q_o * input.q_o;
        let bound = 0.5 * r + q2 / (2.0 * r);
        input.m = match (self.target.mass, self.target.mass_factor) {
            (Some(m), None) => m,
            (None, Some(k)) => k * bound,
            _ => return Err(Error::Format("[target] needs exactly one of `mass`, `mass_factor`".into())),
        };
        Ok(input)
    }
}

impl BartnikDataInput {
    /// Conformal data on the construction grid, plus the isometry defect of
    /// the conformal representation when the input was a (q, p) metric.
    pub fn conformal(&self) -> Result<(ConformalData, Option<f64>)> {
        let (cd, defect) = match &self.metric {
            BoundaryMetric::Conformal(cd) => (cd.clone(), None),
            BoundaryMetric::Axisym(m) => {
                let (cd, map) = conformal_representation(m)?;
                let back = map.pullback(&cd, &m.grid);
                let scale = m.q.iter().fold(0.0f64, |a, b| a.max(*b));
                let dev = m
                    .q
                    .iter()
                    .zip(&back.q)
                    .chain(m.p.iter().zip(&back.p))
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                (cd, Some(dev / scale))
            }
        };
        if cd.grid.len() == self.ntheta {
            return Ok((cd, defect));
        }
        let series = cd.w_series();
        let g = PolarGrid::new(self.ntheta)?;
        let w = g.x().iter().map(|x| series.eval(*x)).collect();
        Ok((ConformalData::normalized(&g, w, cd.r_o)?, defect))
    }
}

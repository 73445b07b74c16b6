use thiserror::Error;

/// Every failure the construction can report. Variants mirror the stage
/// that detected them so a caller can decide whether to raise resolution,
/// change the input, or give up.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pole regularity violated: {0}")]
    PoleRegularity(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("eigensolver did not converge: {0}")]
    EigenSolve(String),
    #[error("first eigenfunction not positive: {0}")]
    SimplicityViolation(String),
    #[error("uniformization failed: {0}")]
    Uniformization(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("sub-extremality violated: m = {m}, |Q| = {q}")]
    Extremality { m: f64, q: f64 },
    #[error("formula requires dimension n = 2, got {0}")]
    Dimension(usize),
    #[error("no admissible translation: {0}")]
    Ungluable(String),
    #[error("bridge slope function: {0}")]
    ZetaConstruction(String),
    #[error("gluing hypothesis ({condition}) violated: {detail}")]
    GlueHypothesis { condition: u8, detail: String },
    #[error("mollification search exhausted: {0}")]
    Mollification(String),
    #[error("bending precondition: {0}")]
    BendPrecondition(String),
    #[error("bending search exhausted: {0}")]
    BendSearch(String),
    #[error("target mass {m_e} does not exceed boundary charged Hawking mass {m_star}")]
    MassTooSmall { m_e: f64, m_star: f64 },
    #[error("eigenfunctions not coherent along the path: {0}")]
    PathCoherence(String),
    #[error("admissibility: {0}")]
    Admissibility(String),
    #[error("neck parameter search exhausted: {0}")]
    EpsilonSearch(String),
    #[error("collar DEC margin {margin:e} <= 0 at t = {t}, theta = {theta}")]
    CollarDec { t: f64, theta: f64, margin: f64 },
    #[error("neck is not round: {0}")]
    Neck(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}

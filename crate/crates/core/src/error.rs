use alloc::string::String;

/// Errors produced while building graphs, designing filters or assembling banks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected: vertex {vertex} is unreachable from vertex 0")]
    Disconnected { vertex: usize },

    #[error("graph is not bipartite: odd cycle through edge ({0}, {1})")]
    NotBipartite(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("rank deficiency at {stage}: {detail}")]
    RankDeficient { stage: &'static str, detail: String },

    #[error("singular filterbank: sigma_min(I + KG) = {sigma_min:e}")]
    Singular { sigma_min: f64 },

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_level(self, level: usize) -> Self {
        Error::AtLevel {
            level,
            source: alloc::boxed::Box::new(self),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

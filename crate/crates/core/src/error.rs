use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid spectral density table: {0}")]
    InvalidTable(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "defective effective Hamiltonian (eigenvector condition {condition:.3e}); perturb the parameters slightly"
    )]
    Defective { condition: f64 },

    #[error("time step too large: kernel phase per step {phase:.3} rad is above the limit; use dt <= {suggested_dt_fs:.6} fs")]
    StepTooLarge { phase: f64, suggested_dt_fs: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported scenario: {0}")]
    Unsupported(String),

    #[error("resource limit: {0}")]
    Limit(String),

    /// `line` is 1-based; 0 when the problem concerns the whole document.
    #[error("{path}{}: {msg}", line_suffix(*.line))]
    Parse { path: String, line: u64, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Prefixes the error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// The innermost error, through any stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

fn line_suffix(line: u64) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(":{line}")
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

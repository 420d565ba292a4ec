use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// No altitude / distance satisfies the link budget.
    #[error("infeasible link budget: {0}")]
    InfeasibleLink(String),

    #[error("ground nodes not covered by any candidate: {node_ids:?}")]
    InfeasibleCoverage { node_ids: Vec<usize> },

    #[error("candidate backhaul graph cannot connect a covering set (component sizes {component_sizes:?})")]
    InfeasibleBackhaul { component_sizes: Vec<usize> },

    #[error("instance too large for exact search: {candidates} candidates (limit {limit})")]
    InstanceTooLarge { candidates: usize, limit: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("malformed document: {0}")]
    Format(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Any of the above, tagged with the scenario it arose in.
    #[error("{source} [scenario {fingerprint}]")]
    InScenario { fingerprint: String, source: Box<Error> },
}

impl Error {
    /// The underlying error with any scenario context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::InScenario { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stable machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InScenario { source, .. } => source.category(),
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InfeasibleLink(_) => "infeasible_link",
            Error::InfeasibleCoverage { .. } => "infeasible_coverage",
            Error::InfeasibleBackhaul { .. } => "infeasible_backhaul",
            Error::InstanceTooLarge { .. } => "instance_too_large",
            Error::Invariant(_) => "invariant_violation",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::Format(_) => "malformed_input",
            Error::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InScenario { source, .. } => source.exit_code(),
            Error::InvalidParameter(_) => 3,
            Error::InfeasibleLink(_) => 4,
            Error::InfeasibleCoverage { .. } => 5,
            Error::InfeasibleBackhaul { .. } => 6,
            Error::InstanceTooLarge { .. } => 7,
            Error::Invariant(_) | Error::VersionMismatch { .. } | Error::Format(_) => 8,
            Error::Io(_) => 9,
        }
    }
}

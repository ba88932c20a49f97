use lossy_cavity::CavityError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("physics: {0}")]
    Physics(String),
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// 0 ok, 2 config, 3 solver, 4 physics validity; 1 for output failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Physics(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

impl From<CavityError> for CliError {
    fn from(e: CavityError) -> Self {
        use CavityError::*;
        let msg = e.to_string();
        match e {
            NoConvergence { .. } | BranchJump { .. } | Quadrature { .. } | PoleProximity { .. } => {
                CliError::Solver(msg)
            }
            NegativeXi { .. } | WindowLeakage { .. } => CliError::Physics(msg),
            Io(_) => CliError::Output(msg),
            _ => CliError::Config(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

use cnls::fem::FemError;
use cnls::mesh::MeshError;
use cnls::stepper::StepError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("mesh error: {0}")]
    Mesh(#[from] MeshError),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("numerical blow-up: {0}")]
    BlowUp(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Mesh(_) => 3,
            CliError::Solver(_) => 4,
            CliError::BlowUp(_) => 5,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<FemError> for CliError {
    fn from(e: FemError) -> Self {
        match e {
            FemError::Solver(s) => CliError::Solver(s.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<StepError> for CliError {
    fn from(e: StepError) -> Self {
        match e {
            StepError::Config(m) => CliError::Config(m),
            StepError::Fem(f) => f.into(),
            e @ StepError::Solver { .. } => CliError::Solver(e.to_string()),
            e @ StepError::BlowUp { .. } => CliError::BlowUp(e.to_string()),
        }
    }
}

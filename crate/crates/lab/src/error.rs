use std::fmt;
use std::path::PathBuf;

use latticetherm_core::Error as CoreError;

/// Where in a config file a problem was found.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    /// Dotted field path, e.g. `phi.terms[0].matrix`; empty for the document root.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = if self.field.is_empty() { "<root>" } else { &self.field };
        write!(f, "line {}, column {}: field `{}`: {}", self.line, self.column, field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    ConfigInvalid(Diagnostic),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("manifest missing: {}", .0.display())]
    ManifestMissing(PathBuf),
    #[error("{0}")]
    Io(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::ConfigInvalid(_) => 2,
            LabError::ResourceCap(_) => 3,
            LabError::NumericalFailure(_) => 4,
            LabError::ManifestMissing(_) => 5,
            LabError::Io(_) => 1,
        }
    }

    pub(crate) fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        LabError::Io(format!("{context}: {err}"))
    }
}

/// Classifies a core error raised while running an already validated config.
impl From<CoreError> for LabError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::VolumeTooLarge { .. } => LabError::ResourceCap(err.to_string()),
            CoreError::InvalidParameter(_)
            | CoreError::InvalidVolume(_)
            | CoreError::MarginTooSmall
            | CoreError::DimensionNotSupported(_)
            | CoreError::InteractionMismatch
            | CoreError::InvalidSiteDimension(_) => LabError::ConfigInvalid(Diagnostic {
                line: 1,
                column: 1,
                field: String::new(),
                message: err.to_string(),
            }),
            _ => LabError::NumericalFailure(err.to_string()),
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

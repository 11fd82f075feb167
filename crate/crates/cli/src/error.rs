use synthcrowd::compose::ComposeError;
use synthcrowd::dataset::{DatasetError, SequenceError};
use synthcrowd::eval::EvalError;
use synthcrowd::pnm::PnmError;
use synthcrowd::retarget::FitError;
use synthcrowd::scanning::ScanError;

pub const USAGE: u8 = 2;
pub const VALIDATION: u8 = 3;
pub const DIVERGENCE: u8 = 4;
pub const IO: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> CliError {
        CliError { code: USAGE, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> CliError {
        CliError { code: VALIDATION, message: message.into() }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
        CliError { code: IO, message: format!("{}: {e}", path.display()) }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        let code = if matches!(e, FitError::Divergence { .. }) { DIVERGENCE } else { VALIDATION };
        CliError { code, message: e.to_string() }
    }
}

impl From<PnmError> for CliError {
    fn from(e: PnmError) -> Self {
        let code = if matches!(e, PnmError::Io { .. }) { IO } else { VALIDATION };
        CliError { code, message: e.to_string() }
    }
}

impl From<SequenceError> for CliError {
    fn from(e: SequenceError) -> Self {
        let code = if matches!(e, SequenceError::Io { .. }) { IO } else { VALIDATION };
        CliError { code, message: e.to_string() }
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::Pnm(p) => p.into(),
            ScanError::Io(_) => CliError { code: IO, message: e.to_string() },
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<ComposeError> for CliError {
    fn from(e: ComposeError) -> Self {
        match e {
            ComposeError::Pnm(p) => p.into(),
            ComposeError::Plate { .. } => CliError { code: IO, message: e.to_string() },
            ComposeError::Dimension(_) => CliError::validation(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Sequence(s) => s.into(),
            DatasetError::Fit { source: FitError::Divergence { .. }, .. } | DatasetError::TooManyFailures { .. } => {
                CliError { code: DIVERGENCE, message: e.to_string() }
            }
            DatasetError::Io { .. } => CliError { code: IO, message: e.to_string() },
            DatasetError::Pnm(p) => p.into(),
            DatasetError::Compose(c) => c.into(),
            DatasetError::Scan(s) => s.into(),
            _ => CliError::validation(e.to_string()),
        }
    }
}

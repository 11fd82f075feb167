//! Scenario files, skeleton sequence input and the on-disk frame bundles.

mod bundle;
mod generate;
mod meta;
mod scenario;
mod sequence;

pub use bundle::{
    encode_bundle, list_bundles, read_bundle, write_bundle_atomic, Bundle, BACKGROUND_FILE, COMPOSITE_FILE,
    DEPTH16_FILE, DEPTH_Q_FILE, INSTANCE_FILE, META_FILE, RGB_FILE, SEMANTIC_FILE, U_FILE, V_FILE,
};
pub use generate::{generate_dataset, Failure, Manifest, SubjectSummary, Timings, MAX_FAILURE_FRACTION};
pub use meta::{AvatarMeta, FrameMeta, SeedInfo, META_FORMAT_VERSION, META_SCHEMA};
pub use scenario::{LabelSource, ScenarioConfig, SubjectConfig};
pub use sequence::{
    load_skeleton_sequences, parse_skeleton_sequences, LoadedSequence, SequenceFrame, SkeletonSequenceFile,
};

use thiserror::Error;

use crate::body_model::BodyModelError;
use crate::compose::ComposeError;
use crate::pnm::PnmError;
use crate::retarget::FitError;
use crate::scanning::ScanError;
use crate::scene::SceneError;

#[derive(Debug, Error)]
pub enum SequenceError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {field}: {message}")]
    Schema { path: String, field: String, message: String },
    #[error("{path}: frames[{frame}].t = {t} does not follow {previous}")]
    NonMonotone { path: String, frame: usize, t: f64, previous: f64 },
    #[error("{path}: unknown joint names {names:?}")]
    UnknownJoints { path: String, names: Vec<String> },
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("avatar: {0}")]
    Body(BodyModelError),
    #[error("fitting subject {subject}: {source}")]
    Fit { subject: String, source: FitError },
    #[error("scene: {0}")]
    Scene(SceneError),
    #[error("scan: {0}")]
    Scan(#[from] ScanError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Pnm(#[from] PnmError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error("{failed} of {total} bundles failed")]
    TooManyFailures { failed: usize, total: usize },
    #[error("{path}: {message}")]
    Bundle { path: String, message: String },
}

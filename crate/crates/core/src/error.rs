use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("unknown input format `{0}` (expected csv or json)")]
    UnknownFormat(String),

    #[error("duplicate subtask `{subtask_id}` in project `{project_id}`")]
    DuplicateSubtask {
        project_id: String,
        subtask_id: String,
    },

    #[error("subtask `{subtask_id}` has non-positive points")]
    NonPositivePoints { subtask_id: String },

    #[error("invalid project specification: {0}")]
    InvalidProject(String),

    #[error("invalid team roster: {0}")]
    InvalidRoster(String),

    #[error("student `{student_id}` is not a node of network {team_id}/{project_id}")]
    UnknownStudent {
        student_id: String,
        team_id: String,
        project_id: String,
    },

    #[error("interaction by `{student_id}` is not from a member of team `{team_id}`")]
    NonMemberInteraction { student_id: String, team_id: String },

    #[error("interaction cites subtask `{subtask_id}` which is not part of project `{project_id}`")]
    UnknownSubtaskInteraction {
        subtask_id: String,
        project_id: String,
    },

    #[error("project mismatch: expected `{expected}`, found `{found}`")]
    ProjectMismatch { expected: String, found: String },

    #[error("{items} items exceed the total type capacity {capacity}")]
    CapacityExceeded { items: usize, capacity: usize },

    #[error("histogram is inconsistent with the type capacities: {0}")]
    InconsistentHistogram(String),

    #[error("invalid logarithm base {0}: must be positive, finite and not 1")]
    InvalidLogBase(f64),

    #[error("value {value} for {what} is outside [0, 1]")]
    OutOfUnitRange { what: &'static str, value: f64 },

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("student `{student_id}` appears more than once in the profiles of project `{project_id}`")]
    DuplicateProfile {
        student_id: String,
        project_id: String,
    },

    #[error("sample `{0}` is empty")]
    EmptySample(&'static str),

    #[error("sample `{0}` contains a non-finite value")]
    NonFiniteSample(&'static str),

    #[error("exact Mann-Whitney distribution requested for n = {n}, above the cap of {cap}")]
    ExactCapExceeded { n: usize, cap: usize },

    #[error("degenerate contingency table margins: {0}")]
    DegenerateMargins(String),

    #[error("invalid grid resolution {0}: must lie in (0, 0.5)")]
    InvalidGrid(f64),

    #[error("unknown project `{id}` (known: {})", known.join(", "))]
    UnknownProject { id: String, known: Vec<String> },

    #[error("grouping `{grouping}` is empty for project `{project_id}`: {detail}")]
    EmptyGroup {
        grouping: String,
        project_id: String,
        detail: String,
    },

    #[error("infeasible planted target for `{student_id}`: {constraint}")]
    Infeasible {
        student_id: String,
        constraint: String,
    },

    #[error("invalid cohort specification: {0}")]
    InvalidCohort(String),

    #[error("oracle cap exceeded: {0}")]
    OracleCapExceeded(String),

    #[error("profiles do not cover the network: {0}")]
    ProfileMismatch(String),

    #[error("dataset failed validation with {} violation(s)", .0.len())]
    Validation(Vec<crate::model::Violation>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the environment (files, directories) rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

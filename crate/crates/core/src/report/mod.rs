//! Exports: Graphviz drawings of team networks, SVG quadrant charts, and
//! the versioned `report.json` bundle. Nothing here computes a measure or a
//! test statistic; every number is copied from the analysis that produced it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::Format;
use crate::roles::{ContingencyTable2x2, ContributionProfile, RoleTransition, Thresholds};
use crate::stats::{BarnardOptions, BarnardResult, GroupComparison, MwuOptions};

mod dot;
mod style;
mod svg;

pub use dot::export_network_dot;
pub use style::role_color;
pub use svg::{export_quadrant_svg, to_canvas, transition_arrows, TransitionArrow, CANVAS, MARGIN};

pub const REPORT_SCHEMA_VERSION: &str = "collabnet-report/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_bytes(name: impl Into<String>, data: &[u8]) -> Self {
        InputDigest {
            name: name.into(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(data)),
        }
    }

    /// Digest of a file, recorded under its file name only.
    pub fn of_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(Self::of_bytes(name, &data))
    }
}

/// The effective configuration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub input_format: Format,
    pub thresholds: Thresholds,
    pub mann_whitney: MwuOptions,
    pub barnard: BarnardOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub tool_version: String,
    pub settings: RunSettings,
    pub inputs: Vec<InputDigest>,
    /// Provenance carried by the dataset itself, e.g. a synthetic generator id.
    pub dataset: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamReport {
    pub team_id: String,
    pub leader: Option<String>,
    pub subtask_count: usize,
    pub edge_count: usize,
    pub profiles: Vec<ContributionProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub project_id: String,
    pub subtask_count: usize,
    pub type_capacities: BTreeMap<String, usize>,
    pub total_points: u64,
    pub teams: Vec<TeamReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Quantity,
    Heterogeneity,
}

impl std::str::FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "quantity" => Ok(Measure::Quantity),
            "heterogeneity" => Ok(Measure::Heterogeneity),
            other => Err(format!("unknown measure `{other}` (expected quantity or heterogeneity)")),
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Measure::Quantity => "quantity",
            Measure::Heterogeneity => "heterogeneity",
        })
    }
}

/// Leaders against non-leaders on one measure in one project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderComparison {
    pub project_id: String,
    pub measure: Measure,
    pub grouping: String,
    pub comparison: Option<GroupComparison>,
    /// Why the comparison was not run, when it was not.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub from_project: String,
    pub to_project: String,
    pub transitions: Vec<RoleTransition>,
    pub only_before: Vec<String>,
    pub only_after: Vec<String>,
    pub contingency: ContingencyTable2x2,
    /// The configured tail convention first, then the other one.
    pub barnard: Vec<BarnardResult>,
    pub barnard_skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: String,
    pub metadata: ReportMetadata,
    pub projects: Vec<ProjectReport>,
    pub transitions: Vec<TransitionReport>,
    pub tests: Vec<LeaderComparison>,
}

impl ReportBundle {
    /// Pretty-printed JSON with struct fields in declaration order and a
    /// trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

pub fn write_report_json(bundle: &ReportBundle, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, bundle.to_json_string()).map_err(|e| Error::io(path, e))
}

/// File-name-safe form of an identifier.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

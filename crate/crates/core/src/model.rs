//! Domain types for projects, team rosters and interaction logs, with the
//! canonical CSV and JSON readers/writers and referential-integrity checks.
//!
//! On disk a dataset is either three CSV files (`subtasks.csv`, `teams.csv`,
//! `interactions.csv`) in one directory, or a single `dataset.json` bundle
//! whose `projects`, `teams` and `interactions` arrays hold the same rows.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SUBTASKS_FILE: &str = "subtasks.csv";
pub const TEAMS_FILE: &str = "teams.csv";
pub const INTERACTIONS_FILE: &str = "interactions.csv";
pub const DATASET_FILE: &str = "dataset.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// A teacher-authored unit of work. `points` is the subtask's weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtask {
    pub project_id: String,
    pub subtask_id: String,
    pub task_type: String,
    pub points: u32,
}

/// The static task design of one project.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectSpec {
    project_id: String,
    subtasks: Vec<Subtask>,
    type_capacities: BTreeMap<String, usize>,
    index: HashMap<String, usize>,
}

impl ProjectSpec {
    pub fn new(project_id: impl Into<String>, subtasks: Vec<Subtask>) -> Result<Self> {
        let project_id = project_id.into();
        if project_id.is_empty() {
            return Err(Error::InvalidProject("empty project_id".into()));
        }
        if subtasks.is_empty() {
            return Err(Error::InvalidProject(format!(
                "project `{project_id}` has no subtasks"
            )));
        }
        let mut index = HashMap::with_capacity(subtasks.len());
        let mut type_capacities = BTreeMap::new();
        for (i, subtask) in subtasks.iter().enumerate() {
            if subtask.project_id != project_id {
                return Err(Error::ProjectMismatch {
                    expected: project_id,
                    found: subtask.project_id.clone(),
                });
            }
            if subtask.subtask_id.is_empty() {
                return Err(Error::InvalidProject("empty subtask_id".into()));
            }
            if subtask.task_type.is_empty() {
                return Err(Error::InvalidProject(format!(
                    "subtask `{}` has an empty task_type",
                    subtask.subtask_id
                )));
            }
            if subtask.points == 0 {
                return Err(Error::NonPositivePoints {
                    subtask_id: subtask.subtask_id.clone(),
                });
            }
            if index.insert(subtask.subtask_id.clone(), i).is_some() {
                return Err(Error::DuplicateSubtask {
                    project_id,
                    subtask_id: subtask.subtask_id.clone(),
                });
            }
            *type_capacities.entry(subtask.task_type.clone()).or_insert(0) += 1;
        }
        Ok(ProjectSpec {
            project_id,
            subtasks,
            type_capacities,
            index,
        })
    }

    pub fn project_id(&self) -> &str {
        &self.project_id
    }

    pub fn subtasks(&self) -> &[Subtask] {
        &self.subtasks
    }

    pub fn len(&self) -> usize {
        self.subtasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subtasks.is_empty()
    }

    pub fn subtask(&self, subtask_id: &str) -> Option<&Subtask> {
        self.index.get(subtask_id).map(|&i| &self.subtasks[i])
    }

    /// Number of subtasks per task type, keyed by type label.
    pub fn type_capacities(&self) -> &BTreeMap<String, usize> {
        &self.type_capacities
    }

    /// Number of distinct task types.
    pub fn type_count(&self) -> usize {
        self.type_capacities.len()
    }

    pub fn total_points(&self) -> u64 {
        self.subtasks.iter().map(|s| u64::from(s.points)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamRoster {
    pub team_id: String,
    pub project_id: String,
    pub members: BTreeSet<String>,
    pub leader: Option<String>,
}

impl TeamRoster {
    pub fn is_leader(&self, student_id: &str) -> bool {
        self.leader.as_deref() == Some(student_id)
    }
}

/// One logged engagement of a student with a subtask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub project_id: String,
    pub team_id: String,
    pub student_id: String,
    pub subtask_id: String,
    /// ISO-8601 instant, kept verbatim. No measure reads it.
    #[serde(default)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub projects: BTreeMap<String, ProjectSpec>,
    pub rosters: Vec<TeamRoster>,
    pub interactions: Vec<InteractionRecord>,
    /// Free-form provenance, e.g. the generator that produced a synthetic cohort.
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    UnknownProject,
    UnknownTeam,
    UnknownSubtask,
    NotTeamMember,
    LeaderNotMember,
    EmptyRoster,
    DuplicateTeam,
    StudentInMultipleTeams,
    ProjectKeyMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SubtaskRow {
    project_id: String,
    subtask_id: String,
    task_type: String,
    points: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct TeamRow {
    project_id: String,
    team_id: String,
    student_id: String,
    is_leader: u8,
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetBundle {
    projects: Vec<SubtaskRow>,
    teams: Vec<TeamRow>,
    interactions: Vec<InteractionRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

/// Where a row came from, for error messages. CSV rows carry their physical
/// line number; JSON records carry their 1-based position in the array.
#[derive(Debug, Clone, Copy)]
enum RowPos {
    Line(u64),
    Record(u64),
}

fn row_error(path: &Path, pos: RowPos, message: impl Into<String>) -> Error {
    let message = message.into();
    match pos {
        RowPos::Line(line) => Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            message,
        },
        RowPos::Record(n) => Error::MalformedRow {
            path: path.to_path_buf(),
            line: n,
            message: format!("record {n}: {message}"),
        },
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    let message = err.to_string();
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        _ => Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            message,
        },
    }
}

fn read_csv_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<(RowPos, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = record
            .deserialize(Some(&headers))
            .map_err(|e| row_error(path, RowPos::Line(line), e.to_string()))?;
        rows.push((RowPos::Line(line), row));
    }
    Ok(rows)
}

fn read_json_value(path: &Path) -> Result<serde_json::Value> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn json_rows<T: DeserializeOwned>(path: &Path, value: serde_json::Value) -> Result<Vec<(RowPos, T)>> {
    let serde_json::Value::Array(items) = value else {
        return Err(row_error(path, RowPos::Record(0), "expected a JSON array of records"));
    };
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            let pos = RowPos::Record(i as u64 + 1);
            serde_json::from_value(item)
                .map(|row| (pos, row))
                .map_err(|e| row_error(path, pos, e.to_string()))
        })
        .collect()
}

fn read_rows<T: DeserializeOwned>(path: &Path, format: Format) -> Result<Vec<(RowPos, T)>> {
    match format {
        Format::Csv => read_csv_rows(path),
        Format::Json => json_rows(path, read_json_value(path)?),
    }
}

fn require_nonempty(path: &Path, pos: RowPos, field: &str, value: &str) -> Result<()> {
    if value.is_empty() {
        Err(row_error(path, pos, format!("empty {field}")))
    } else {
        Ok(())
    }
}

fn projects_from_rows(
    path: &Path,
    rows: Vec<(RowPos, SubtaskRow)>,
) -> Result<BTreeMap<String, ProjectSpec>> {
    let mut grouped: BTreeMap<String, Vec<Subtask>> = BTreeMap::new();
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    for (pos, row) in rows {
        require_nonempty(path, pos, "project_id", &row.project_id)?;
        require_nonempty(path, pos, "subtask_id", &row.subtask_id)?;
        require_nonempty(path, pos, "task_type", &row.task_type)?;
        if row.points <= 0 {
            let err = Error::NonPositivePoints {
                subtask_id: row.subtask_id,
            };
            return Err(row_error(path, pos, err.to_string()));
        }
        let points = u32::try_from(row.points)
            .map_err(|_| row_error(path, pos, format!("points {} out of range", row.points)))?;
        if !seen.insert((row.project_id.clone(), row.subtask_id.clone())) {
            let err = Error::DuplicateSubtask {
                project_id: row.project_id,
                subtask_id: row.subtask_id,
            };
            return Err(row_error(path, pos, err.to_string()));
        }
        grouped.entry(row.project_id.clone()).or_default().push(Subtask {
            project_id: row.project_id,
            subtask_id: row.subtask_id,
            task_type: row.task_type,
            points,
        });
    }
    grouped
        .into_iter()
        .map(|(id, subtasks)| Ok((id.clone(), ProjectSpec::new(id, subtasks)?)))
        .collect()
}

fn rosters_from_rows(path: &Path, rows: Vec<(RowPos, TeamRow)>) -> Result<Vec<TeamRoster>> {
    let mut grouped: BTreeMap<(String, String), TeamRoster> = BTreeMap::new();
    for (pos, row) in rows {
        require_nonempty(path, pos, "project_id", &row.project_id)?;
        require_nonempty(path, pos, "team_id", &row.team_id)?;
        require_nonempty(path, pos, "student_id", &row.student_id)?;
        if row.is_leader > 1 {
            return Err(row_error(path, pos, format!("is_leader must be 0 or 1, got {}", row.is_leader)));
        }
        let roster = grouped
            .entry((row.project_id.clone(), row.team_id.clone()))
            .or_insert_with(|| TeamRoster {
                team_id: row.team_id.clone(),
                project_id: row.project_id.clone(),
                members: BTreeSet::new(),
                leader: None,
            });
        if !roster.members.insert(row.student_id.clone()) {
            return Err(row_error(
                path,
                pos,
                format!("student `{}` listed twice in team `{}`", row.student_id, row.team_id),
            ));
        }
        if row.is_leader == 1 {
            if let Some(existing) = &roster.leader {
                return Err(row_error(
                    path,
                    pos,
                    format!("team `{}` already has leader `{existing}`", row.team_id),
                ));
            }
            roster.leader = Some(row.student_id);
        }
    }
    Ok(grouped.into_values().collect())
}

fn is_iso8601(ts: &str) -> bool {
    use chrono::{DateTime, NaiveDate, NaiveDateTime};
    DateTime::parse_from_rfc3339(ts).is_ok()
        || NaiveDateTime::parse_from_str(ts, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        || NaiveDateTime::parse_from_str(ts, "%Y-%m-%d %H:%M:%S%.f").is_ok()
        || NaiveDate::parse_from_str(ts, "%Y-%m-%d").is_ok()
}

fn interactions_from_rows(
    path: &Path,
    rows: Vec<(RowPos, InteractionRecord)>,
) -> Result<Vec<InteractionRecord>> {
    rows.into_iter()
        .map(|(pos, mut rec)| {
            require_nonempty(path, pos, "project_id", &rec.project_id)?;
            require_nonempty(path, pos, "team_id", &rec.team_id)?;
            require_nonempty(path, pos, "student_id", &rec.student_id)?;
            require_nonempty(path, pos, "subtask_id", &rec.subtask_id)?;
            if rec.timestamp.as_deref() == Some("") {
                rec.timestamp = None;
            }
            if let Some(ts) = &rec.timestamp {
                if !is_iso8601(ts) {
                    return Err(row_error(path, pos, format!("timestamp `{ts}` is not ISO-8601")));
                }
            }
            Ok(rec)
        })
        .collect()
}

/// Reads a subtask file that describes exactly one project.
pub fn parse_project_spec(path: impl AsRef<Path>, format: Format) -> Result<ProjectSpec> {
    let path = path.as_ref();
    let mut projects = parse_project_specs(path, format)?;
    match projects.len() {
        1 => Ok(projects.pop_first().expect("one project").1),
        0 => Err(Error::InvalidProject(format!("{}: no subtask rows", path.display()))),
        n => Err(Error::InvalidProject(format!(
            "{}: expected one project, found {n} ({})",
            path.display(),
            projects.keys().cloned().collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Reads a subtask file that may describe several projects.
pub fn parse_project_specs(
    path: impl AsRef<Path>,
    format: Format,
) -> Result<BTreeMap<String, ProjectSpec>> {
    let path = path.as_ref();
    projects_from_rows(path, read_rows(path, format)?)
}

pub fn parse_rosters(path: impl AsRef<Path>, format: Format) -> Result<Vec<TeamRoster>> {
    let path = path.as_ref();
    rosters_from_rows(path, read_rows(path, format)?)
}

/// Records come back in file order; repeated events are kept.
pub fn parse_interactions(path: impl AsRef<Path>, format: Format) -> Result<Vec<InteractionRecord>> {
    let path = path.as_ref();
    interactions_from_rows(path, read_rows(path, format)?)
}

/// Checks referential integrity. An empty result means the dataset is consistent.
pub fn validate_dataset(dataset: &Dataset) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut push = |kind, detail: String| violations.push(Violation { kind, detail });

    for (key, spec) in &dataset.projects {
        if key != spec.project_id() {
            push(
                ViolationKind::ProjectKeyMismatch,
                format!("project stored under `{key}` has id `{}`", spec.project_id()),
            );
        }
    }

    let mut teams: BTreeMap<(&str, &str), &TeamRoster> = BTreeMap::new();
    let mut membership: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    for roster in &dataset.rosters {
        let team = format!("team `{}` in project `{}`", roster.team_id, roster.project_id);
        if !dataset.projects.contains_key(&roster.project_id) {
            push(ViolationKind::UnknownProject, format!("{team}: project is not defined"));
        }
        if teams
            .insert((roster.project_id.as_str(), roster.team_id.as_str()), roster)
            .is_some()
        {
            push(ViolationKind::DuplicateTeam, format!("{team} is declared twice"));
        }
        if roster.members.is_empty() {
            push(ViolationKind::EmptyRoster, format!("{team} has no members"));
        }
        if let Some(leader) = &roster.leader {
            if !roster.members.contains(leader) {
                push(
                    ViolationKind::LeaderNotMember,
                    format!("{team}: leader `{leader}` is not a member"),
                );
            }
        }
        for student in &roster.members {
            let key = (roster.project_id.as_str(), student.as_str());
            match membership.get(&key) {
                Some(other) if *other != roster.team_id.as_str() => push(
                    ViolationKind::StudentInMultipleTeams,
                    format!(
                        "student `{student}` belongs to teams `{other}` and `{}` in project `{}`",
                        roster.team_id, roster.project_id
                    ),
                ),
                Some(_) => {}
                None => {
                    membership.insert(key, roster.team_id.as_str());
                }
            }
        }
    }

    for (i, rec) in dataset.interactions.iter().enumerate() {
        let who = format!(
            "interaction #{} ({}/{}/{}/{})",
            i + 1,
            rec.project_id,
            rec.team_id,
            rec.student_id,
            rec.subtask_id
        );
        let Some(spec) = dataset.projects.get(&rec.project_id) else {
            push(ViolationKind::UnknownProject, format!("{who}: project is not defined"));
            continue;
        };
        if spec.subtask(&rec.subtask_id).is_none() {
            push(ViolationKind::UnknownSubtask, format!("{who}: subtask is not defined"));
        }
        match teams.get(&(rec.project_id.as_str(), rec.team_id.as_str())) {
            None => push(ViolationKind::UnknownTeam, format!("{who}: team has no roster")),
            Some(roster) if !roster.members.contains(&rec.student_id) => push(
                ViolationKind::NotTeamMember,
                format!("{who}: student is not on the team roster"),
            ),
            Some(_) => {}
        }
    }
    violations
}

impl Dataset {
    /// Builds a dataset with rosters in canonical (project, team) order.
    pub fn new(
        projects: BTreeMap<String, ProjectSpec>,
        mut rosters: Vec<TeamRoster>,
        interactions: Vec<InteractionRecord>,
    ) -> Self {
        rosters.sort_by(|a, b| {
            (a.project_id.as_str(), a.team_id.as_str()).cmp(&(b.project_id.as_str(), b.team_id.as_str()))
        });
        Dataset {
            projects,
            rosters,
            interactions,
            metadata: BTreeMap::new(),
        }
    }

    /// Loads a dataset. For CSV, `path` is a directory holding the three
    /// canonical files; for JSON it is the bundle file or a directory holding
    /// `dataset.json`.
    pub fn load(path: impl AsRef<Path>, format: Format) -> Result<Self> {
        let path = path.as_ref();
        match format {
            Format::Csv => Self::load_csv_files(
                path.join(SUBTASKS_FILE),
                path.join(TEAMS_FILE),
                path.join(INTERACTIONS_FILE),
            ),
            Format::Json => {
                let file = if path.is_dir() {
                    path.join(DATASET_FILE)
                } else {
                    path.to_path_buf()
                };
                Self::from_bundle(&file, read_json_value(&file)?)
            }
        }
    }

    pub fn load_csv_files(
        subtasks: impl AsRef<Path>,
        teams: impl AsRef<Path>,
        interactions: impl AsRef<Path>,
    ) -> Result<Self> {
        let projects = parse_project_specs(subtasks, Format::Csv)?;
        let rosters = parse_rosters(teams, Format::Csv)?;
        let interactions = parse_interactions(interactions, Format::Csv)?;
        Ok(Self::new(projects, rosters, interactions))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let path = PathBuf::from("<memory>");
        let value = serde_json::from_str(text).map_err(|source| Error::Json {
            path: path.clone(),
            source,
        })?;
        Self::from_bundle(&path, value)
    }

    fn from_bundle(path: &Path, value: serde_json::Value) -> Result<Self> {
        let serde_json::Value::Object(mut map) = value else {
            return Err(row_error(path, RowPos::Record(0), "expected a JSON object"));
        };
        let mut take = |key: &str| map.remove(key).unwrap_or(serde_json::Value::Array(Vec::new()));
        let projects = projects_from_rows(path, json_rows(path, take("projects"))?)?;
        let rosters = rosters_from_rows(path, json_rows(path, take("teams"))?)?;
        let interactions = interactions_from_rows(path, json_rows(path, take("interactions"))?)?;
        let metadata = match map.remove("metadata") {
            Some(value) => serde_json::from_value(value).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?,
            None => BTreeMap::new(),
        };
        let mut dataset = Self::new(projects, rosters, interactions);
        dataset.metadata = metadata;
        Ok(dataset)
    }

    fn subtask_rows(&self) -> Vec<SubtaskRow> {
        self.projects
            .values()
            .flat_map(|p| p.subtasks())
            .map(|s| SubtaskRow {
                project_id: s.project_id.clone(),
                subtask_id: s.subtask_id.clone(),
                task_type: s.task_type.clone(),
                points: i64::from(s.points),
            })
            .collect()
    }

    fn team_rows(&self) -> Vec<TeamRow> {
        self.rosters
            .iter()
            .flat_map(|r| {
                r.members.iter().map(move |m| TeamRow {
                    project_id: r.project_id.clone(),
                    team_id: r.team_id.clone(),
                    student_id: m.clone(),
                    is_leader: u8::from(r.is_leader(m)),
                })
            })
            .collect()
    }

    /// Canonical JSON bundle, pretty-printed with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let bundle = DatasetBundle {
            projects: self.subtask_rows(),
            teams: self.team_rows(),
            interactions: self.interactions.clone(),
            metadata: self.metadata.clone(),
        };
        let mut text = serde_json::to_string_pretty(&bundle).expect("dataset serializes");
        text.push('\n');
        text
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    /// Writes the three canonical CSV files into `dir`, creating it if needed.
    pub fn write_csv_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_csv(&dir.join(SUBTASKS_FILE), self.subtask_rows())?;
        write_csv(&dir.join(TEAMS_FILE), self.team_rows())?;
        write_csv(&dir.join(INTERACTIONS_FILE), self.interactions.clone())
    }

    pub fn roster(&self, project_id: &str, team_id: &str) -> Option<&TeamRoster> {
        self.rosters
            .iter()
            .find(|r| r.project_id == project_id && r.team_id == team_id)
    }

    pub fn rosters_for<'a>(&'a self, project_id: &'a str) -> impl Iterator<Item = &'a TeamRoster> + 'a {
        self.rosters.iter().filter(move |r| r.project_id == project_id)
    }

    /// Interactions belonging to one team in one project, in file order.
    pub fn team_interactions(&self, project_id: &str, team_id: &str) -> Vec<InteractionRecord> {
        self.interactions
            .iter()
            .filter(|r| r.project_id == project_id && r.team_id == team_id)
            .cloned()
            .collect()
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: Vec<T>) -> Result<()> {
    let mut buffer = Vec::new();
    {
        let mut writer = csv::Writer::from_writer(&mut buffer);
        for row in rows {
            writer.serialize(row).map_err(|e| csv_error(path, e))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buffer).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    fn subtask(project: &str, id: &str, ty: &str, points: u32) -> Subtask {
        Subtask {
            project_id: project.into(),
            subtask_id: id.into(),
            task_type: ty.into(),
            points,
        }
    }

    #[test]
    fn single_subtask_project() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "s.csv",
            "project_id,subtask_id,task_type,points\nP,a1,Design,3\n",
        );
        let spec = parse_project_spec(&path, Format::Csv).unwrap();
        assert_eq!(spec.type_count(), 1);
        assert_eq!(spec.type_capacities().get("Design"), Some(&1));
        assert_eq!(spec.total_points(), 3);
    }

    #[test]
    fn zero_points_names_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "s.csv",
            "project_id,subtask_id,task_type,points\nP,a1,Design,3\nP,a2,Written,0\n",
        );
        match parse_project_spec(&path, Format::Csv) {
            Err(Error::MalformedRow { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("a2"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_subtask_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "s.csv",
            "project_id,subtask_id,task_type,points\nP,a1,Design,3\nP,a1,Written,2\n",
        );
        let err = parse_project_spec(&path, Format::Csv).unwrap_err();
        assert!(err.to_string().contains("duplicate subtask `a1`"), "{err}");
    }

    #[test]
    fn interactions_in_file_order_with_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "i.csv",
            "project_id,team_id,student_id,subtask_id,timestamp\n\
             P,T,S1,a1,2023-02-01T09:00:00Z\nP,T,S1,a2,\nP,T,S1,a3,2023-02-01\nP,T,S1,a3,\n",
        );
        let recs = parse_interactions(&path, Format::Csv).unwrap();
        let ids: Vec<_> = recs.iter().map(|r| r.subtask_id.as_str()).collect();
        assert_eq!(ids, ["a1", "a2", "a3", "a3"]);
        assert_eq!(recs[1].timestamp, None);
        assert_eq!(recs[0].timestamp.as_deref(), Some("2023-02-01T09:00:00Z"));
    }

    #[test]
    fn header_only_interactions_are_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "i.csv",
            "project_id,team_id,student_id,subtask_id,timestamp\n",
        );
        assert!(parse_interactions(&path, Format::Csv).unwrap().is_empty());
    }

    #[test]
    fn missing_column_reports_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "i.csv",
            "project_id,team_id,student_id,subtask_id,timestamp\nP,T,S1,a1,\nP,T,S1\n",
        );
        match parse_interactions(&path, Format::Csv) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_timestamp_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "i.csv",
            "project_id,team_id,student_id,subtask_id,timestamp\nP,T,S1,a1,yesterday\n",
        );
        assert!(matches!(
            parse_interactions(&path, Format::Csv),
            Err(Error::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn unknown_format() {
        assert!(matches!("xml".parse::<Format>(), Err(Error::UnknownFormat(_))));
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
    }

    #[test]
    fn json_rows_report_record_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "i.json",
            r#"[{"project_id":"P","team_id":"T","student_id":"S1","subtask_id":"a1"},
                {"project_id":"P","team_id":"T","student_id":"S1"}]"#,
        );
        match parse_interactions(&path, Format::Json) {
            Err(Error::MalformedRow { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("subtask_id"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io() {
        let err = parse_interactions("/nonexistent/interactions.csv", Format::Csv).unwrap_err();
        assert!(err.is_io());
        assert!(err.to_string().contains("/nonexistent/interactions.csv"));
    }

    fn small_dataset() -> Dataset {
        let spec = ProjectSpec::new(
            "P",
            vec![subtask("P", "a1", "W", 2), subtask("P", "a2", "R", 3)],
        )
        .unwrap();
        let roster = TeamRoster {
            team_id: "T".into(),
            project_id: "P".into(),
            members: ["S1", "S2"].iter().map(|s| s.to_string()).collect(),
            leader: Some("S1".into()),
        };
        let rec = InteractionRecord {
            project_id: "P".into(),
            team_id: "T".into(),
            student_id: "S1".into(),
            subtask_id: "a1".into(),
            timestamp: None,
        };
        Dataset::new(BTreeMap::from([("P".into(), spec)]), vec![roster], vec![rec])
    }

    #[test]
    fn consistent_dataset_has_no_violations() {
        assert!(validate_dataset(&small_dataset()).is_empty());
    }

    #[test]
    fn unknown_subtask_violation() {
        let mut ds = small_dataset();
        ds.interactions[0].subtask_id = "zz".into();
        let v = validate_dataset(&ds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::UnknownSubtask);
    }

    #[test]
    fn leader_not_member_violation() {
        let mut ds = small_dataset();
        ds.rosters[0].leader = Some("S9".into());
        let v = validate_dataset(&ds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::LeaderNotMember);
    }

    #[test]
    fn student_in_two_teams_violation() {
        let mut ds = small_dataset();
        let mut other = ds.rosters[0].clone();
        other.team_id = "U".into();
        other.leader = None;
        other.members = BTreeSet::from(["S2".to_string()]);
        ds.rosters.push(other);
        let v = validate_dataset(&ds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::StudentInMultipleTeams);
    }

    #[test]
    fn non_member_interaction_violation() {
        let mut ds = small_dataset();
        ds.interactions[0].student_id = "S7".into();
        let v = validate_dataset(&ds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NotTeamMember);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let ds = small_dataset();
        let dir = tempfile::tempdir().unwrap();
        ds.write_csv_dir(dir.path()).unwrap();
        assert_eq!(Dataset::load(dir.path(), Format::Csv).unwrap(), ds);
        let back = Dataset::from_json_str(&ds.to_json_string()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn multiple_leaders_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "t.csv",
            "project_id,team_id,student_id,is_leader\nP,T,S1,1\nP,T,S2,1\n",
        );
        assert!(matches!(
            parse_rosters(&path, Format::Csv),
            Err(Error::MalformedRow { line: 3, .. })
        ));
    }
}

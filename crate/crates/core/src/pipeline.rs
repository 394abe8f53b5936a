//! End-to-end analysis of a validated dataset: per-team networks and
//! profiles, leader versus non-leader comparisons per project, and role
//! transitions between consecutive projects.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measures::{self, BipartiteNetwork};
use crate::model::{self, Dataset, ProjectSpec, TeamRoster};
use crate::report::{
    LeaderComparison, Measure, ProjectReport, ReportBundle, ReportMetadata, TeamReport,
    TransitionReport, REPORT_SCHEMA_VERSION,
};
use crate::roles::{self, ContributionProfile, Thresholds};
use crate::stats::{self, BarnardOptions, GroupComparison, MwuOptions, Tails};

pub const LEADER_GROUPING: &str = "leader-vs-nonleader";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisConfig {
    pub thresholds: Thresholds,
    pub mann_whitney: MwuOptions,
    pub barnard: BarnardOptions,
}

#[derive(Debug, Clone)]
pub struct TeamAnalysis {
    pub roster: TeamRoster,
    pub network: BipartiteNetwork,
    pub profiles: Vec<ContributionProfile>,
}

#[derive(Debug, Clone)]
pub struct ProjectAnalysis {
    pub spec: ProjectSpec,
    pub teams: Vec<TeamAnalysis>,
}

impl ProjectAnalysis {
    pub fn project_id(&self) -> &str {
        self.spec.project_id()
    }

    pub fn profiles(&self) -> Vec<ContributionProfile> {
        self.teams.iter().flat_map(|t| t.profiles.iter().cloned()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub projects: Vec<ProjectAnalysis>,
    pub transitions: Vec<TransitionReport>,
    pub tests: Vec<LeaderComparison>,
}

impl Analysis {
    pub fn project(&self, project_id: &str) -> Result<&ProjectAnalysis> {
        self.projects
            .iter()
            .find(|p| p.project_id() == project_id)
            .ok_or_else(|| Error::UnknownProject {
                id: project_id.to_string(),
                known: self.projects.iter().map(|p| p.project_id().to_string()).collect(),
            })
    }

    pub fn report(&self, metadata: ReportMetadata) -> ReportBundle {
        let projects = self
            .projects
            .iter()
            .map(|p| ProjectReport {
                project_id: p.project_id().to_string(),
                subtask_count: p.spec.len(),
                type_capacities: p.spec.type_capacities().clone(),
                total_points: p.spec.total_points(),
                teams: p
                    .teams
                    .iter()
                    .map(|t| TeamReport {
                        team_id: t.roster.team_id.clone(),
                        leader: t.roster.leader.clone(),
                        subtask_count: t.network.subtasks().len(),
                        edge_count: t.network.edge_count(),
                        profiles: t.profiles.clone(),
                    })
                    .collect(),
            })
            .collect();
        ReportBundle {
            schema_version: REPORT_SCHEMA_VERSION.to_string(),
            metadata,
            projects,
            transitions: self.transitions.clone(),
            tests: self.tests.clone(),
        }
    }
}

/// Builds networks and profiles for every team of one project.
pub fn analyze_project(
    dataset: &Dataset,
    spec: &ProjectSpec,
    thresholds: &Thresholds,
) -> Result<ProjectAnalysis> {
    let mut by_team: BTreeMap<&str, Vec<model::InteractionRecord>> = BTreeMap::new();
    for rec in dataset.interactions.iter().filter(|r| r.project_id == spec.project_id()) {
        by_team.entry(rec.team_id.as_str()).or_default().push(rec.clone());
    }
    let teams = dataset
        .rosters_for(spec.project_id())
        .map(|roster| {
            let events = by_team.get(roster.team_id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            let network = measures::build_network(roster, spec, events)?;
            let profiles = roles::profile_team(&network, spec, roster, thresholds)?;
            Ok(TeamAnalysis {
                roster: roster.clone(),
                network,
                profiles,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectAnalysis {
        spec: spec.clone(),
        teams,
    })
}

/// Two samples of one measure: assigned leaders first, then everyone else.
pub fn leader_samples(project: &ProjectAnalysis, measure: Measure) -> (Vec<f64>, Vec<f64>) {
    let value = |p: &ContributionProfile| match measure {
        Measure::Quantity => p.quantity,
        Measure::Heterogeneity => p.heterogeneity,
    };
    let (leaders, others): (Vec<_>, Vec<_>) = project
        .profiles()
        .into_iter()
        .partition(|p| p.is_assigned_leader);
    (
        leaders.iter().map(value).collect(),
        others.iter().map(value).collect(),
    )
}

pub fn leader_comparison(
    project: &ProjectAnalysis,
    measure: Measure,
    options: &MwuOptions,
) -> Result<GroupComparison> {
    let (leaders, others) = leader_samples(project, measure);
    let empty = |detail: &str| Error::EmptyGroup {
        grouping: LEADER_GROUPING.to_string(),
        project_id: project.project_id().to_string(),
        detail: detail.to_string(),
    };
    if leaders.is_empty() {
        return Err(empty("no student is flagged as an assigned leader"));
    }
    if others.is_empty() {
        return Err(empty("every student is flagged as an assigned leader"));
    }
    stats::compare_groups("leaders", &leaders, "non-leaders", &others, options)
}

fn other_tails(tails: Tails) -> Tails {
    match tails {
        Tails::One => Tails::Two,
        Tails::Two => Tails::One,
    }
}

/// Role transitions from `before` to `after`, their contingency table, and
/// Barnard's test under both tail conventions (configured one first).
pub fn compare_projects(
    before: &ProjectAnalysis,
    after: &ProjectAnalysis,
    options: &BarnardOptions,
) -> Result<TransitionReport> {
    let set = roles::role_transitions(&before.profiles(), &after.profiles())?;
    let contingency = roles::build_contingency(&set.transitions);
    let mut barnard = Vec::new();
    let mut barnard_skipped = None;
    for tails in [options.tails, other_tails(options.tails)] {
        let opts = BarnardOptions { tails, ..*options };
        match stats::barnard_test(&contingency, &opts) {
            Ok(result) => barnard.push(result),
            Err(Error::DegenerateMargins(reason)) => {
                barnard_skipped = Some(reason);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(TransitionReport {
        from_project: before.project_id().to_string(),
        to_project: after.project_id().to_string(),
        transitions: set.transitions,
        only_before: set.only_before,
        only_after: set.only_after,
        contingency,
        barnard,
        barnard_skipped,
    })
}

/// Validates the dataset, then analyzes every project, compares leaders with
/// non-leaders on both measures, and tracks transitions between each pair of
/// consecutive projects in id order.
pub fn analyze(dataset: &Dataset, config: &AnalysisConfig) -> Result<Analysis> {
    let violations = model::validate_dataset(dataset);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let projects = dataset
        .projects
        .values()
        .map(|spec| analyze_project(dataset, spec, &config.thresholds))
        .collect::<Result<Vec<_>>>()?;

    let mut tests = Vec::new();
    for project in &projects {
        for measure in [Measure::Quantity, Measure::Heterogeneity] {
            let (comparison, skipped) = match leader_comparison(project, measure, &config.mann_whitney) {
                Ok(c) => (Some(c), None),
                Err(e @ Error::EmptyGroup { .. }) => (None, Some(e.to_string())),
                Err(e) => return Err(e),
            };
            tests.push(LeaderComparison {
                project_id: project.project_id().to_string(),
                measure,
                grouping: LEADER_GROUPING.to_string(),
                comparison,
                skipped,
            });
        }
    }

    let transitions = projects
        .windows(2)
        .map(|pair| compare_projects(&pair[0], &pair[1], &config.barnard))
        .collect::<Result<Vec<_>>>()?;

    Ok(Analysis {
        projects,
        transitions,
        tests,
    })
}

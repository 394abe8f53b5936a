//! Synthetic cohorts with planted emerging roles, and brute-force oracles
//! used to cross-check the measures and the exact Mann-Whitney distribution.
//!
//! A cohort is planted by construction rather than by rejection sampling.
//! For each student every type histogram of the project is scored once; the
//! histograms whose heterogeneity lies in the student's band and whose
//! reachable point range overlaps the quantity band are candidates. One is
//! drawn at random, filled with random subtasks of each type, and then
//! same-type swaps move the point total into the quantity band. Swaps never
//! change the histogram, so heterogeneity is unaffected.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`; the generator
//! id is stored in the dataset metadata.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, SecondsFormat};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, TypeHistogram};
use crate::model::{Dataset, InteractionRecord, ProjectSpec, Subtask, TeamRoster};
use crate::pipeline;
use crate::roles::{RoleLabel, Thresholds};

pub const GENERATOR_ID: &str = "rand_chacha::ChaCha8Rng/seed_from_u64";

/// Required distance between a target band and the threshold it must clear.
pub const MIN_MARGIN: f64 = 0.05;

const MAX_HISTOGRAMS: usize = 2_000_000;
const ATTEMPTS: usize = 32;
// 2023-02-06T09:00:00Z
const FIRST_EVENT_EPOCH: i64 = 1_675_674_000;

/// Closed interval `[min, max]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band(pub f64, pub f64);

impl Band {
    pub fn min(&self) -> f64 {
        self.0
    }

    pub fn max(&self) -> f64 {
        self.1
    }

    pub fn contains(&self, x: f64) -> bool {
        self.0 <= x && x <= self.1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCapacity {
    pub task_type: String,
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFrequency {
    pub points: u32,
    pub count: usize,
}

/// Project design to instantiate: how many subtasks of each type and how
/// many carry each point value. Points are assigned to subtasks at random.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectTemplate {
    pub project_id: String,
    pub types: Vec<TypeCapacity>,
    pub points: Vec<PointFrequency>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedMember {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub student_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub team_id: Option<String>,
    #[serde(default)]
    pub leader: bool,
    pub role: RoleLabel,
    pub quantity: Band,
    pub heterogeneity: Band,
}

/// Members are given either once per group slot (`group_size` entries,
/// repeated for every group with generated ids), once per student
/// (`groups * group_size` entries, ids optional), or in any number with
/// explicit student and team ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedProject {
    pub template: ProjectTemplate,
    pub members: Vec<PlantedMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCohortSpec {
    pub seed: u64,
    pub groups: usize,
    pub group_size: usize,
    #[serde(default)]
    pub thresholds: Thresholds,
    pub projects: Vec<PlantedProject>,
}

impl PlantedCohortSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json {
            path: "<cohort spec>".into(),
            source,
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// One generated student with its planted target and realised measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedAssignment {
    pub project_id: String,
    pub team_id: String,
    pub student_id: String,
    pub leader: bool,
    pub role: RoleLabel,
    pub quantity_band: Band,
    pub heterogeneity_band: Band,
    pub quantity: f64,
    pub heterogeneity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCohort {
    pub dataset: Dataset,
    pub planted: Vec<PlantedAssignment>,
}

#[derive(Debug, Clone)]
struct ResolvedMember {
    student_id: String,
    team_id: String,
    leader: bool,
    role: RoleLabel,
    quantity: Band,
    heterogeneity: Band,
}

fn expand_members(spec: &PlantedCohortSpec, project: &PlantedProject) -> Result<Vec<ResolvedMember>> {
    let members = &project.members;
    let project_id = &project.template.project_id;
    let resolve = |m: &PlantedMember, student: String, team: String| ResolvedMember {
        student_id: student,
        team_id: team,
        leader: m.leader,
        role: m.role,
        quantity: m.quantity,
        heterogeneity: m.heterogeneity,
    };
    let team_name = |g: usize| format!("Team_{}", g + 1);
    let student_name = |i: usize| format!("S{}", i + 1);

    if spec.groups * spec.group_size == 0 && members.iter().any(|m| m.student_id.is_none() || m.team_id.is_none()) {
        return Err(Error::InvalidCohort("groups and group_size must be positive".into()));
    }
    if members.len() == spec.group_size && spec.groups > 1 {
        if members.iter().any(|m| m.student_id.is_some() || m.team_id.is_some()) {
            return Err(Error::InvalidCohort(format!(
                "project `{project_id}`: per-slot members are repeated for every group and cannot name ids"
            )));
        }
        let mut out = Vec::with_capacity(spec.groups * spec.group_size);
        for g in 0..spec.groups {
            for (k, m) in members.iter().enumerate() {
                out.push(resolve(m, student_name(g * spec.group_size + k), team_name(g)));
            }
        }
        return Ok(out);
    }
    if members.len() == spec.groups * spec.group_size {
        return Ok(members
            .iter()
            .enumerate()
            .map(|(i, m)| {
                resolve(
                    m,
                    m.student_id.clone().unwrap_or_else(|| student_name(i)),
                    m.team_id.clone().unwrap_or_else(|| team_name(i / spec.group_size)),
                )
            })
            .collect());
    }
    members
        .iter()
        .map(|m| match (&m.student_id, &m.team_id) {
            (Some(s), Some(t)) => Ok(resolve(m, s.clone(), t.clone())),
            _ => Err(Error::InvalidCohort(format!(
                "project `{project_id}`: {} members match neither group_size ({}) nor groups × group_size ({}), \
                 so every member needs explicit student_id and team_id",
                members.len(),
                spec.group_size,
                spec.groups * spec.group_size
            ))),
        })
        .collect()
}

fn check_band(member: &ResolvedMember, axis: &str, band: Band, cut: f64, high: bool) -> Result<()> {
    let infeasible = |constraint: String| Error::Infeasible {
        student_id: member.student_id.clone(),
        constraint,
    };
    if !(0.0..=1.0).contains(&band.0) || !(0.0..=1.0).contains(&band.1) || band.0 > band.1 {
        return Err(infeasible(format!(
            "{axis} band [{}, {}] is not an ordered interval inside [0, 1]",
            band.0, band.1
        )));
    }
    let ok = if high {
        band.0 >= cut + MIN_MARGIN - 1e-12
    } else {
        band.1 <= cut - MIN_MARGIN + 1e-12
    };
    if !ok {
        return Err(infeasible(format!(
            "{axis} band [{}, {}] must lie {} the cut {cut} by at least {MIN_MARGIN} for role {}",
            band.0,
            band.1,
            if high { "above" } else { "below" },
            member.role
        )));
    }
    Ok(())
}

fn validate_members(members: &[ResolvedMember], thresholds: &Thresholds, project_id: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut leaders: BTreeMap<&str, &str> = BTreeMap::new();
    for m in members {
        if !seen.insert(m.student_id.as_str()) {
            return Err(Error::InvalidCohort(format!(
                "project `{project_id}`: student `{}` listed twice",
                m.student_id
            )));
        }
        if m.leader {
            if let Some(other) = leaders.insert(m.team_id.as_str(), m.student_id.as_str()) {
                return Err(Error::InvalidCohort(format!(
                    "project `{project_id}`: team `{}` has two leaders ({other}, {})",
                    m.team_id, m.student_id
                )));
            }
        }
        check_band(m, "quantity", m.quantity, thresholds.quantity_cut(), m.role.high_quantity())?;
        check_band(
            m,
            "heterogeneity",
            m.heterogeneity,
            thresholds.heterogeneity_cut(),
            m.role.high_heterogeneity(),
        )?;
    }
    Ok(())
}

/// A project instantiated from its template, with every type histogram
/// scored once.
struct ProjectPlan {
    spec: ProjectSpec,
    type_names: Vec<String>,
    // Per type: subtask indices into `spec.subtasks()`.
    by_type: Vec<Vec<usize>>,
    min_prefix: Vec<Vec<u64>>,
    max_prefix: Vec<Vec<u64>>,
    total_points: u64,
    histograms: Vec<(Vec<usize>, f64)>,
}

fn instantiate(template: &ProjectTemplate, rng: &mut ChaCha8Rng) -> Result<ProjectSpec> {
    let id = &template.project_id;
    let invalid = |msg: String| Error::InvalidCohort(format!("template `{id}`: {msg}"));
    if template.types.is_empty() {
        return Err(invalid("no task types".into()));
    }
    let mut names = BTreeSet::new();
    for t in &template.types {
        if t.capacity == 0 || t.task_type.is_empty() || !names.insert(t.task_type.as_str()) {
            return Err(invalid(format!("bad task type entry `{}` ({})", t.task_type, t.capacity)));
        }
    }
    if template.points.iter().any(|p| p.points == 0) {
        return Err(invalid("point values must be positive".into()));
    }
    let subtask_count: usize = template.types.iter().map(|t| t.capacity).sum();
    let point_count: usize = template.points.iter().map(|p| p.count).sum();
    if subtask_count != point_count {
        return Err(invalid(format!(
            "{subtask_count} subtasks by type but {point_count} by point value"
        )));
    }
    let mut types: Vec<&str> = template
        .types
        .iter()
        .flat_map(|t| std::iter::repeat_n(t.task_type.as_str(), t.capacity))
        .collect();
    let mut points: Vec<u32> = template
        .points
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.points, p.count))
        .collect();
    types.shuffle(rng);
    points.shuffle(rng);
    let width = subtask_count.to_string().len().max(2);
    let subtasks = types
        .into_iter()
        .zip(points)
        .enumerate()
        .map(|(i, (task_type, points))| Subtask {
            project_id: id.clone(),
            subtask_id: format!("{id}-{:0width$}", i + 1),
            task_type: task_type.to_string(),
            points,
        })
        .collect();
    ProjectSpec::new(id.clone(), subtasks)
}

fn prefix_sums(values: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(0);
    for v in values {
        out.push(out.last().unwrap() + v);
    }
    out
}

impl ProjectPlan {
    fn new(spec: ProjectSpec, template: &ProjectTemplate) -> Result<Self> {
        let type_names: Vec<String> = template.types.iter().map(|t| t.task_type.clone()).collect();
        let mut by_type = vec![Vec::new(); type_names.len()];
        for (i, s) in spec.subtasks().iter().enumerate() {
            let t = type_names.iter().position(|n| *n == s.task_type).expect("template type");
            by_type[t].push(i);
        }
        let points_of = |i: &usize| u64::from(spec.subtasks()[*i].points);
        let mut min_prefix = Vec::new();
        let mut max_prefix = Vec::new();
        for items in &by_type {
            let mut pts: Vec<u64> = items.iter().map(points_of).collect();
            pts.sort_unstable();
            min_prefix.push(prefix_sums(&pts));
            pts.reverse();
            max_prefix.push(prefix_sums(&pts));
        }

        let caps: Vec<usize> = by_type.iter().map(Vec::len).collect();
        let combos = caps.iter().try_fold(1usize, |acc, c| acc.checked_mul(c + 1));
        if combos.is_none_or(|n| n > MAX_HISTOGRAMS) {
            return Err(Error::InvalidCohort(format!(
                "template `{}` has too many type histograms to enumerate",
                spec.project_id()
            )));
        }
        let mut histograms = Vec::with_capacity(combos.unwrap_or(0));
        let mut current = vec![0usize; caps.len()];
        loop {
            let hist = TypeHistogram {
                student_id: String::new(),
                counts: type_names.iter().cloned().zip(current.iter().copied()).collect(),
                total: current.iter().sum(),
            };
            let h = measures::heterogeneity(&hist, spec.type_capacities())?;
            histograms.push((current.clone(), h));
            // Odometer increment.
            let mut k = 0;
            while k < caps.len() && current[k] == caps[k] {
                current[k] = 0;
                k += 1;
            }
            if k == caps.len() {
                break;
            }
            current[k] += 1;
        }
        Ok(ProjectPlan {
            total_points: spec.total_points(),
            spec,
            type_names,
            by_type,
            min_prefix,
            max_prefix,
            histograms,
        })
    }

    fn weight_range(&self, hist: &[usize]) -> (u64, u64) {
        hist.iter().enumerate().fold((0, 0), |(lo, hi), (t, &n)| {
            (lo + self.min_prefix[t][n], hi + self.max_prefix[t][n])
        })
    }

    /// Integer point totals whose share of the project lies in `band`,
    /// evaluated with the same division as the weighted degree.
    fn weight_bounds(&self, band: Band) -> Option<(u64, u64)> {
        let total = self.total_points as f64;
        let inside: Vec<u64> = (0..=self.total_points)
            .filter(|&w| band.contains(w as f64 / total))
            .collect();
        Some((*inside.first()?, *inside.last()?))
    }

    fn plant(&self, member: &ResolvedMember, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
        let infeasible = |constraint: String| Error::Infeasible {
            student_id: member.student_id.clone(),
            constraint,
        };
        let (q, h) = (member.quantity, member.heterogeneity);
        let (w_lo, w_hi) = self.weight_bounds(q).ok_or_else(|| {
            infeasible(format!(
                "quantity band [{}, {}] contains no reachable share of the {} project points",
                q.0, q.1, self.total_points
            ))
        })?;
        let by_h: Vec<&(Vec<usize>, f64)> =
            self.histograms.iter().filter(|(_, value)| h.contains(*value)).collect();
        if by_h.is_empty() {
            return Err(infeasible(format!(
                "heterogeneity band [{}, {}] contains no value reachable by any type histogram",
                h.0, h.1
            )));
        }
        let candidates: Vec<(&Vec<usize>, u64, u64)> = by_h
            .iter()
            .filter_map(|(hist, _)| {
                let (lo, hi) = self.weight_range(hist);
                let (lo, hi) = (lo.max(w_lo), hi.min(w_hi));
                (lo <= hi).then_some((hist, lo, hi))
            })
            .collect();
        if candidates.is_empty() {
            return Err(infeasible(format!(
                "quantity band [{}, {}] (points {w_lo}..={w_hi} of {}) is unreachable by any type mix \
                 with heterogeneity in [{}, {}]",
                q.0, q.1, self.total_points, h.0, h.1
            )));
        }
        for _ in 0..ATTEMPTS {
            let (hist, lo, hi) = candidates[rng.random_range(0..candidates.len())];
            let target = rng.random_range(lo..=hi);
            if let Some(chosen) = self.fill(hist, target, (w_lo, w_hi), rng) {
                return Ok(chosen);
            }
        }
        Err(infeasible(format!(
            "no subtask selection reached points {w_lo}..={w_hi} within {ATTEMPTS} attempts"
        )))
    }

    /// Random subtasks matching `hist`, then same-type swaps toward `target`
    /// points until the total lies within `bounds`.
    fn fill(&self, hist: &[usize], target: u64, bounds: (u64, u64), rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
        let pts = |i: usize| i64::from(self.spec.subtasks()[i].points);
        let mut selected = Vec::new();
        let mut spare = Vec::new();
        for (t, &n) in hist.iter().enumerate() {
            let mut items = self.by_type[t].clone();
            items.shuffle(rng);
            spare.push(items.split_off(n));
            selected.push(items);
        }
        let mut weight: i64 = selected.iter().flatten().map(|&i| pts(i)).sum();
        let target = target as i64;
        let (lo, hi) = (bounds.0 as i64, bounds.1 as i64);
        while weight < lo || weight > hi {
            let gap = (weight - target).abs();
            let mut best: Option<(i64, usize, usize, usize)> = None;
            for t in 0..hist.len() {
                for (a, &i) in selected[t].iter().enumerate() {
                    for (b, &j) in spare[t].iter().enumerate() {
                        let after = (weight - pts(i) + pts(j) - target).abs();
                        if after < gap && best.is_none_or(|(g, ..)| after < g) {
                            best = Some((after, t, a, b));
                        }
                    }
                }
            }
            let (_, t, a, b) = best?;
            weight += pts(spare[t][b]) - pts(selected[t][a]);
            std::mem::swap(&mut selected[t][a], &mut spare[t][b]);
        }
        let mut chosen: Vec<usize> = selected.into_iter().flatten().collect();
        chosen.sort_unstable();
        Some(chosen)
    }
}

fn timestamp(offset_seconds: i64) -> String {
    DateTime::from_timestamp(FIRST_EVENT_EPOCH, 0)
        .expect("valid epoch")
        .checked_add_signed(Duration::seconds(offset_seconds))
        .expect("timestamp in range")
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Generates the dataset and records, for each student, the planted target
/// next to the measured quantity and heterogeneity.
pub fn plant_cohort(spec: &PlantedCohortSpec) -> Result<PlantedCohort> {
    if spec.projects.is_empty() {
        return Err(Error::InvalidCohort("no projects".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut projects = BTreeMap::new();
    let mut rosters = Vec::new();
    let mut interactions = Vec::new();
    let mut planted = Vec::new();

    for (p_index, project) in spec.projects.iter().enumerate() {
        let project_id = project.template.project_id.clone();
        if projects.contains_key(&project_id) {
            return Err(Error::InvalidCohort(format!("project `{project_id}` appears twice")));
        }
        let members = expand_members(spec, project)?;
        validate_members(&members, &spec.thresholds, &project_id)?;
        let plan = ProjectPlan::new(instantiate(&project.template, &mut rng)?, &project.template)?;

        let mut teams: BTreeMap<String, TeamRoster> = BTreeMap::new();
        let mut events = Vec::new();
        let project_start = p_index as i64 * 120 * 86_400;
        for m in &members {
            let roster = teams.entry(m.team_id.clone()).or_insert_with(|| TeamRoster {
                team_id: m.team_id.clone(),
                project_id: project_id.clone(),
                members: BTreeSet::new(),
                leader: None,
            });
            roster.members.insert(m.student_id.clone());
            if m.leader {
                roster.leader = Some(m.student_id.clone());
            }
            for i in plan.plant(m, &mut rng)? {
                for _ in 0..rng.random_range(1..=3) {
                    let at = project_start + rng.random_range(0..60 * 86_400);
                    events.push((
                        at,
                        InteractionRecord {
                            project_id: project_id.clone(),
                            team_id: m.team_id.clone(),
                            student_id: m.student_id.clone(),
                            subtask_id: plan.spec.subtasks()[i].subtask_id.clone(),
                            timestamp: Some(timestamp(at)),
                        },
                    ));
                }
            }
        }
        events.sort_by_key(|e| e.0);
        interactions.extend(events.into_iter().map(|(_, rec)| rec));
        rosters.extend(teams.into_values());
        for m in members {
            planted.push(PlantedAssignment {
                project_id: project_id.clone(),
                team_id: m.team_id,
                student_id: m.student_id,
                leader: m.leader,
                role: m.role,
                quantity_band: m.quantity,
                heterogeneity_band: m.heterogeneity,
                quantity: f64::NAN,
                heterogeneity: f64::NAN,
            });
        }
        debug_assert!(plan.type_names.len() == plan.by_type.len());
        projects.insert(project_id, plan.spec);
    }

    let mut dataset = Dataset::new(projects, rosters, interactions);
    dataset.metadata.insert("generator".into(), GENERATOR_ID.into());
    dataset.metadata.insert("seed".into(), spec.seed.to_string());

    // Measure what was generated through the ordinary analysis path.
    let mut measured = BTreeMap::new();
    for project_spec in dataset.projects.values() {
        let analysis = pipeline::analyze_project(&dataset, project_spec, &spec.thresholds)?;
        for p in analysis.profiles() {
            measured.insert((p.project_id.clone(), p.student_id.clone()), p);
        }
    }
    for a in &mut planted {
        let p = &measured[&(a.project_id.clone(), a.student_id.clone())];
        a.quantity = p.quantity;
        a.heterogeneity = p.heterogeneity;
        if p.role != a.role || !a.quantity_band.contains(p.quantity) || !a.heterogeneity_band.contains(p.heterogeneity) {
            return Err(Error::Infeasible {
                student_id: a.student_id.clone(),
                constraint: format!(
                    "generated profile ({:.4}, {:.4}, {}) misses the planted target",
                    p.quantity, p.heterogeneity, p.role
                ),
            });
        }
    }
    Ok(PlantedCohort { dataset, planted })
}

pub fn generate_cohort(spec: &PlantedCohortSpec) -> Result<Dataset> {
    plant_cohort(spec).map(|c| c.dataset)
}

/// Largest item count the entropy oracle will enumerate.
pub const ORACLE_MAX_ITEMS: usize = 60;
/// Largest number of task types the entropy oracle will enumerate.
pub const ORACLE_MAX_TYPES: usize = 5;

/// Maximum entropy over every capacity-feasible integer composition of `n`,
/// found by exhaustive enumeration, with one maximizing composition.
pub fn oracle_max_entropy_composition(n: usize, capacities: &[usize]) -> Result<(f64, Vec<usize>)> {
    if n > ORACLE_MAX_ITEMS || capacities.len() > ORACLE_MAX_TYPES {
        return Err(Error::OracleCapExceeded(format!(
            "n = {n} and {} types; limits are {ORACLE_MAX_ITEMS} items and {ORACLE_MAX_TYPES} types",
            capacities.len()
        )));
    }
    let capacity: usize = capacities.iter().sum();
    if n > capacity {
        return Err(Error::CapacityExceeded { items: n, capacity });
    }
    if n == 0 {
        return Ok((0.0, vec![0; capacities.len()]));
    }

    fn entropy(parts: &[usize], n: usize) -> f64 {
        let mut h = 0.0;
        for &c in parts {
            if c > 0 {
                let p = c as f64 / n as f64;
                h -= p * p.ln();
            }
        }
        h
    }

    fn walk(
        caps: &[usize],
        left: usize,
        n: usize,
        parts: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        if parts.len() == caps.len() {
            if left == 0 {
                let h = entropy(parts, n);
                if h > best.0 {
                    *best = (h, parts.clone());
                }
            }
            return;
        }
        let room_after: usize = caps[parts.len() + 1..].iter().sum();
        let cap = caps[parts.len()];
        for c in 0..=cap.min(left) {
            if left - c > room_after {
                continue;
            }
            parts.push(c);
            walk(caps, left - c, n, parts, best);
            parts.pop();
        }
    }

    let mut best = (f64::NEG_INFINITY, Vec::new());
    walk(capacities, n, n, &mut Vec::with_capacity(capacities.len()), &mut best);
    Ok(best)
}

pub fn oracle_max_entropy(n: usize, capacities: &[usize]) -> Result<f64> {
    oracle_max_entropy_composition(n, capacities).map(|(h, _)| h)
}

/// Largest pooled size the U enumeration oracle accepts.
pub const ORACLE_MAX_POOLED: usize = 21;

/// Null distribution of U (pairs with the first group below the second) by
/// enumerating every assignment of ranks 1..=n1+n2 to the first group.
pub fn oracle_exact_u_distribution(n1: usize, n2: usize) -> Result<BTreeMap<u64, u64>> {
    let n = n1 + n2;
    if n > ORACLE_MAX_POOLED {
        return Err(Error::OracleCapExceeded(format!(
            "n1 + n2 = {n} exceeds {ORACLE_MAX_POOLED}"
        )));
    }
    let mut counts = BTreeMap::new();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        // Count (i in group 1, j in group 2) with rank i < rank j.
        let mut u = 0u64;
        let mut second_seen_above = n2 as u64;
        for rank in 0..n {
            if mask & (1 << rank) != 0 {
                u += second_seen_above;
            } else {
                second_seen_above -= 1;
            }
        }
        *counts.entry(u).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp1_template() -> ProjectTemplate {
        ProjectTemplate {
            project_id: "TP1".into(),
            types: [("Written", 35), ("Research", 26), ("Design", 17)]
                .iter()
                .map(|(t, c)| TypeCapacity {
                    task_type: t.to_string(),
                    capacity: *c,
                })
                .collect(),
            points: [(2, 21), (3, 28), (5, 17), (10, 12)]
                .iter()
                .map(|(p, c)| PointFrequency { points: *p, count: *c })
                .collect(),
        }
    }

    fn member(role: RoleLabel, q: (f64, f64), h: (f64, f64)) -> PlantedMember {
        PlantedMember {
            student_id: None,
            team_id: None,
            leader: false,
            role,
            quantity: Band(q.0, q.1),
            heterogeneity: Band(h.0, h.1),
        }
    }

    fn cohort(seed: u64, members: Vec<PlantedMember>) -> PlantedCohortSpec {
        PlantedCohortSpec {
            seed,
            groups: 2,
            group_size: members.len(),
            thresholds: Thresholds::default(),
            projects: vec![PlantedProject {
                template: tp1_template(),
                members,
            }],
        }
    }

    #[test]
    fn oracle_examples() {
        assert!((oracle_max_entropy(21, &[35, 26, 17]).unwrap() - 3f64.ln()).abs() < 1e-12);
        let (h, parts) = oracle_max_entropy_composition(57, &[35, 26, 17]).unwrap();
        assert_eq!(parts, vec![20, 20, 17]);
        assert!((h - 1.095_789_552_200_948).abs() < 1e-12);
        assert_eq!(oracle_max_entropy(0, &[3, 4]).unwrap(), 0.0);
        assert!(oracle_max_entropy(61, &[40, 40]).is_err());
    }

    #[test]
    fn u_oracle_examples() {
        assert_eq!(oracle_exact_u_distribution(1, 1).unwrap(), BTreeMap::from([(0, 1), (1, 1)]));
        let d = oracle_exact_u_distribution(2, 2).unwrap();
        assert_eq!(d, BTreeMap::from([(0, 1), (1, 1), (2, 2), (3, 1), (4, 1)]));
        assert!(oracle_exact_u_distribution(11, 11).is_err());
    }

    #[test]
    fn planted_roles_land_in_band() {
        let spec = cohort(
            7,
            vec![
                PlantedMember {
                    leader: true,
                    ..member(RoleLabel::ComprehensiveContributor, (0.7, 0.9), (0.9, 1.0))
                },
                member(RoleLabel::VersatileParticipant, (0.1, 0.3), (0.7, 1.0)),
                member(RoleLabel::FreeRider, (0.0, 0.1), (0.0, 0.1)),
            ],
        );
        let cohort = plant_cohort(&spec).unwrap();
        assert_eq!(cohort.planted.len(), 6);
        assert_eq!(cohort.dataset.rosters.len(), 2);
        for a in &cohort.planted {
            assert!(a.quantity_band.contains(a.quantity), "{a:?}");
            assert!(a.heterogeneity_band.contains(a.heterogeneity), "{a:?}");
        }
        assert!(crate::model::validate_dataset(&cohort.dataset).is_empty());
        assert_eq!(cohort.dataset.metadata["generator"], GENERATOR_ID);
    }

    #[test]
    fn same_seed_same_dataset() {
        let members = vec![member(RoleLabel::VersatileParticipant, (0.1, 0.3), (0.7, 1.0))];
        let a = generate_cohort(&cohort(11, members.clone())).unwrap();
        let b = generate_cohort(&cohort(11, members.clone())).unwrap();
        let c = generate_cohort(&cohort(12, members)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn margin_violation_is_infeasible() {
        let spec = cohort(1, vec![member(RoleLabel::ComprehensiveContributor, (0.52, 0.9), (0.9, 1.0))]);
        match plant_cohort(&spec) {
            Err(Error::Infeasible { constraint, .. }) => assert!(constraint.contains("quantity band"), "{constraint}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unreachable_quantity_band_is_infeasible() {
        // The smallest positive share is 2/331 ≈ 0.0061.
        let spec = cohort(1, vec![member(RoleLabel::FreeRider, (0.001, 0.002), (0.0, 0.2))]);
        match plant_cohort(&spec) {
            Err(Error::Infeasible { constraint, .. }) => assert!(constraint.contains("quantity band"), "{constraint}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_leaders_in_a_team_rejected() {
        let leader = PlantedMember {
            leader: true,
            ..member(RoleLabel::ComprehensiveContributor, (0.7, 0.9), (0.9, 1.0))
        };
        let spec = cohort(1, vec![leader.clone(), leader]);
        assert!(matches!(plant_cohort(&spec), Err(Error::InvalidCohort(_))));
    }
}

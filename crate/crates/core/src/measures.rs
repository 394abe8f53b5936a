//! Student–subtask bipartite networks and the per-student contribution
//! measures computed on them: degree, point-weighted degree, and the
//! capacity-normalized entropy of a student's task-type mix.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InteractionRecord, ProjectSpec, TeamRoster};

/// Binary incidence between the members of one team and every subtask of
/// one project. Both node sets are kept in lexicographic id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteNetwork {
    team_id: String,
    project_id: String,
    students: Vec<String>,
    subtasks: Vec<String>,
    // Per student, sorted indices into `subtasks`.
    adjacency: Vec<Vec<usize>>,
}

impl BipartiteNetwork {
    pub fn team_id(&self) -> &str {
        &self.team_id
    }

    pub fn project_id(&self) -> &str {
        &self.project_id
    }

    pub fn students(&self) -> &[String] {
        &self.students
    }

    pub fn subtasks(&self) -> &[String] {
        &self.subtasks
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Edges as (student, subtask) pairs, students first then subtasks in id order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.students.iter().zip(&self.adjacency).flat_map(move |(s, adj)| {
            adj.iter().map(move |&j| (s.as_str(), self.subtasks[j].as_str()))
        })
    }

    pub fn has_edge(&self, student_id: &str, subtask_id: &str) -> bool {
        let (Ok(i), Ok(j)) = (
            self.students.binary_search_by(|s| s.as_str().cmp(student_id)),
            self.subtasks.binary_search_by(|s| s.as_str().cmp(subtask_id)),
        ) else {
            return false;
        };
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Subtasks incident to `student_id`, in id order.
    pub fn neighbors(&self, student_id: &str) -> Result<impl Iterator<Item = &str> + '_> {
        let i = self.student_index(student_id)?;
        Ok(self.adjacency[i].iter().map(move |&j| self.subtasks[j].as_str()))
    }

    pub fn degree(&self, student_id: &str) -> Result<usize> {
        Ok(self.adjacency[self.student_index(student_id)?].len())
    }

    fn student_index(&self, student_id: &str) -> Result<usize> {
        self.students
            .binary_search_by(|s| s.as_str().cmp(student_id))
            .map_err(|_| Error::UnknownStudent {
                student_id: student_id.to_string(),
                team_id: self.team_id.clone(),
                project_id: self.project_id.clone(),
            })
    }

    fn check_spec(&self, spec: &ProjectSpec) -> Result<()> {
        if spec.project_id() != self.project_id {
            return Err(Error::ProjectMismatch {
                expected: self.project_id.clone(),
                found: spec.project_id().to_string(),
            });
        }
        Ok(())
    }
}

/// Builds the network for one team. Every project subtask becomes a node,
/// touched or not, and any number of events on a (student, subtask) pair
/// collapses to a single edge.
pub fn build_network(
    roster: &TeamRoster,
    spec: &ProjectSpec,
    interactions: &[InteractionRecord],
) -> Result<BipartiteNetwork> {
    if roster.project_id != spec.project_id() {
        return Err(Error::ProjectMismatch {
            expected: spec.project_id().to_string(),
            found: roster.project_id.clone(),
        });
    }
    let students: Vec<String> = roster.members.iter().cloned().collect();
    let mut subtasks: Vec<String> = spec.subtasks().iter().map(|s| s.subtask_id.clone()).collect();
    subtasks.sort();
    let student_pos: HashMap<&str, usize> =
        students.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let subtask_pos: HashMap<&str, usize> =
        subtasks.iter().enumerate().map(|(j, s)| (s.as_str(), j)).collect();

    let mut adjacency = vec![Vec::new(); students.len()];
    for rec in interactions {
        if rec.project_id != roster.project_id {
            return Err(Error::ProjectMismatch {
                expected: roster.project_id.clone(),
                found: rec.project_id.clone(),
            });
        }
        let i = match student_pos.get(rec.student_id.as_str()) {
            Some(&i) if rec.team_id == roster.team_id => i,
            _ => {
                return Err(Error::NonMemberInteraction {
                    student_id: rec.student_id.clone(),
                    team_id: roster.team_id.clone(),
                })
            }
        };
        let j = *subtask_pos
            .get(rec.subtask_id.as_str())
            .ok_or_else(|| Error::UnknownSubtaskInteraction {
                subtask_id: rec.subtask_id.clone(),
                project_id: roster.project_id.clone(),
            })?;
        adjacency[i].push(j);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }
    Ok(BipartiteNetwork {
        team_id: roster.team_id.clone(),
        project_id: roster.project_id.clone(),
        students,
        subtasks,
        adjacency,
    })
}

/// Fraction of the project's subtasks the student is incident to.
pub fn degree_centrality(net: &BipartiteNetwork, student_id: &str) -> Result<f64> {
    let degree = net.degree(student_id)?;
    Ok(degree as f64 / net.subtasks.len() as f64)
}

/// Point-weighted share of the project's subtasks the student is incident to.
/// The denominator is the total points of the whole project.
pub fn weighted_degree(net: &BipartiteNetwork, spec: &ProjectSpec, student_id: &str) -> Result<f64> {
    net.check_spec(spec)?;
    let mut earned: u64 = 0;
    for subtask_id in net.neighbors(student_id)? {
        let subtask = spec.subtask(subtask_id).ok_or_else(|| Error::UnknownSubtaskInteraction {
            subtask_id: subtask_id.to_string(),
            project_id: spec.project_id().to_string(),
        })?;
        earned += u64::from(subtask.points);
    }
    Ok(earned as f64 / spec.total_points() as f64)
}

/// Count of a student's subtasks per task type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeHistogram {
    pub student_id: String,
    /// Every task type of the project, including those with a zero count.
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
}

pub fn type_histogram(net: &BipartiteNetwork, spec: &ProjectSpec, student_id: &str) -> Result<TypeHistogram> {
    net.check_spec(spec)?;
    let mut counts: BTreeMap<String, usize> =
        spec.type_capacities().keys().map(|t| (t.clone(), 0)).collect();
    let mut total = 0;
    for subtask_id in net.neighbors(student_id)? {
        let subtask = spec.subtask(subtask_id).ok_or_else(|| Error::UnknownSubtaskInteraction {
            subtask_id: subtask_id.to_string(),
            project_id: spec.project_id().to_string(),
        })?;
        *counts.entry(subtask.task_type.clone()).or_insert(0) += 1;
        total += 1;
    }
    Ok(TypeHistogram {
        student_id: student_id.to_string(),
        counts,
        total,
    })
}

/// The most even integer split of `n` items over types with the given
/// capacities: types whose capacity is below the running even share are
/// filled to capacity, the rest share the remainder as floor/ceil counts.
/// The result is aligned with `capacities`.
pub fn max_entropy_composition(n: usize, capacities: &[usize]) -> Result<Vec<usize>> {
    let capacity: usize = capacities.iter().sum();
    if n > capacity {
        return Err(Error::CapacityExceeded { items: n, capacity });
    }
    let mut order: Vec<usize> = (0..capacities.len()).collect();
    order.sort_by_key(|&i| capacities[i]);

    let mut split = vec![0; capacities.len()];
    let mut remaining = n;
    for (pos, &i) in order.iter().enumerate() {
        let open = order.len() - pos;
        if capacities[i] * open <= remaining {
            split[i] = capacities[i];
            remaining -= capacities[i];
            continue;
        }
        // Every type from here on has capacity above the even share, hence
        // at least its ceiling. Extra units go to the largest capacities.
        let share = remaining / open;
        let extra = remaining % open;
        for (k, &idx) in order[pos..].iter().enumerate() {
            split[idx] = share + usize::from(k >= open - extra);
        }
        remaining = 0;
        break;
    }
    debug_assert_eq!(remaining, 0);
    Ok(split)
}

fn entropy_with(counts: &[usize], log: impl Fn(f64) -> f64) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    // Summing in sorted order makes the value independent of type order.
    let mut sorted: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    sorted.sort_unstable();
    let n = n as f64;
    let h: f64 = sorted
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * log(p)
        })
        .sum();
    h
}

/// Shannon entropy (natural log) of the distribution given by `counts`.
pub fn shannon_entropy(counts: &[usize]) -> f64 {
    entropy_with(counts, f64::ln).max(0.0)
}

/// Maximum entropy reachable by `n` items under the per-type capacity caps.
pub fn max_entropy_constant(n: usize, capacities: &[usize]) -> Result<f64> {
    Ok(shannon_entropy(&max_entropy_composition(n, capacities)?))
}

/// Heterogeneity of a student's type mix: its entropy divided by the maximum
/// entropy any split of the same number of subtasks could reach. Zero or one
/// subtask, or a project with a single task type, gives 0.
pub fn heterogeneity(hist: &TypeHistogram, capacities: &BTreeMap<String, usize>) -> Result<f64> {
    heterogeneity_with(hist, capacities, f64::ln)
}

/// [`heterogeneity`] evaluated with logarithms in an arbitrary base.
pub fn heterogeneity_in_base(
    hist: &TypeHistogram,
    capacities: &BTreeMap<String, usize>,
    base: f64,
) -> Result<f64> {
    if !base.is_finite() || base <= 0.0 || base == 1.0 {
        return Err(Error::InvalidLogBase(base));
    }
    heterogeneity_with(hist, capacities, |x| x.log(base))
}

fn heterogeneity_with(
    hist: &TypeHistogram,
    capacities: &BTreeMap<String, usize>,
    log: impl Fn(f64) -> f64 + Copy,
) -> Result<f64> {
    let mut counts = Vec::with_capacity(capacities.len());
    for (task_type, &count) in &hist.counts {
        let cap = capacities.get(task_type).copied().ok_or_else(|| {
            Error::InconsistentHistogram(format!("unknown task type `{task_type}`"))
        })?;
        if count > cap {
            return Err(Error::InconsistentHistogram(format!(
                "{count} subtasks of type `{task_type}` exceed its capacity {cap}"
            )));
        }
        counts.push(count);
    }
    let total: usize = counts.iter().sum();
    if total != hist.total {
        return Err(Error::InconsistentHistogram(format!(
            "counts sum to {total} but total is {}",
            hist.total
        )));
    }
    if total <= 1 {
        return Ok(0.0);
    }
    if capacities.len() == 1 {
        log::warn!(
            "project has a single task type; heterogeneity of `{}` is defined as 0",
            hist.student_id
        );
        return Ok(0.0);
    }
    let caps: Vec<usize> = capacities.values().copied().collect();
    let max = entropy_with(&max_entropy_composition(total, &caps)?, log);
    if max == 0.0 {
        return Ok(0.0);
    }
    Ok((entropy_with(&counts, log) / max).clamp(0.0, 1.0))
}

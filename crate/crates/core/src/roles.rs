//! Emerging-role classification on the (quantity, heterogeneity) unit square
//! and role transitions between two projects.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, BipartiteNetwork};
use crate::model::{ProjectSpec, TeamRoster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RoleLabel {
    /// High quantity, high heterogeneity.
    ComprehensiveContributor,
    /// High quantity, low heterogeneity.
    SpecializedContributor,
    /// Low quantity, high heterogeneity.
    VersatileParticipant,
    /// Low quantity, low heterogeneity.
    FreeRider,
}

impl RoleLabel {
    pub const ALL: [RoleLabel; 4] = [
        RoleLabel::ComprehensiveContributor,
        RoleLabel::SpecializedContributor,
        RoleLabel::VersatileParticipant,
        RoleLabel::FreeRider,
    ];

    pub fn from_levels(high_quantity: bool, high_heterogeneity: bool) -> Self {
        match (high_quantity, high_heterogeneity) {
            (true, true) => RoleLabel::ComprehensiveContributor,
            (true, false) => RoleLabel::SpecializedContributor,
            (false, true) => RoleLabel::VersatileParticipant,
            (false, false) => RoleLabel::FreeRider,
        }
    }

    pub fn high_quantity(self) -> bool {
        matches!(self, RoleLabel::ComprehensiveContributor | RoleLabel::SpecializedContributor)
    }

    pub fn high_heterogeneity(self) -> bool {
        matches!(self, RoleLabel::ComprehensiveContributor | RoleLabel::VersatileParticipant)
    }

    /// The label with the quantity and heterogeneity axes exchanged.
    pub fn transposed(self) -> Self {
        RoleLabel::from_levels(self.high_heterogeneity(), self.high_quantity())
    }

    pub fn display_name(self) -> &'static str {
        match self {
            RoleLabel::ComprehensiveContributor => "Comprehensive contributor",
            RoleLabel::SpecializedContributor => "Specialized contributor",
            RoleLabel::VersatileParticipant => "Versatile participant",
            RoleLabel::FreeRider => "Free rider",
        }
    }
}

impl fmt::Display for RoleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// How a value exactly on a cut is treated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryRule {
    /// A value equal to the cut counts as high.
    #[default]
    HighInclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    quantity_cut: f64,
    heterogeneity_cut: f64,
    boundary_rule: BoundaryRule,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            quantity_cut: 0.5,
            heterogeneity_cut: 0.5,
            boundary_rule: BoundaryRule::HighInclusive,
        }
    }
}

impl Thresholds {
    pub fn new(quantity_cut: f64, heterogeneity_cut: f64) -> Result<Self> {
        for (name, cut) in [("quantity", quantity_cut), ("heterogeneity", heterogeneity_cut)] {
            if !(cut > 0.0 && cut < 1.0) {
                return Err(Error::InvalidThresholds(format!(
                    "{name} cut {cut} must lie strictly inside (0, 1)"
                )));
            }
        }
        Ok(Thresholds {
            quantity_cut,
            heterogeneity_cut,
            boundary_rule: BoundaryRule::HighInclusive,
        })
    }

    pub fn quantity_cut(&self) -> f64 {
        self.quantity_cut
    }

    pub fn heterogeneity_cut(&self) -> f64 {
        self.heterogeneity_cut
    }

    pub fn boundary_rule(&self) -> BoundaryRule {
        self.boundary_rule
    }

    /// The same cuts with the two axes exchanged.
    pub fn swapped(&self) -> Self {
        Thresholds {
            quantity_cut: self.heterogeneity_cut,
            heterogeneity_cut: self.quantity_cut,
            boundary_rule: self.boundary_rule,
        }
    }

    fn is_high(&self, value: f64, cut: f64) -> bool {
        match self.boundary_rule {
            BoundaryRule::HighInclusive => value >= cut,
        }
    }
}

pub fn classify(quantity: f64, heterogeneity: f64, thresholds: &Thresholds) -> Result<RoleLabel> {
    for (what, value) in [("quantity", quantity), ("heterogeneity", heterogeneity)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfUnitRange { what, value });
        }
    }
    Ok(RoleLabel::from_levels(
        thresholds.is_high(quantity, thresholds.quantity_cut),
        thresholds.is_high(heterogeneity, thresholds.heterogeneity_cut),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionProfile {
    pub student_id: String,
    pub project_id: String,
    pub team_id: String,
    pub quantity: f64,
    pub heterogeneity: f64,
    pub is_assigned_leader: bool,
    pub role: RoleLabel,
}

/// One profile per roster member, in student id order. Members with no
/// interactions are included.
pub fn profile_team(
    net: &BipartiteNetwork,
    spec: &ProjectSpec,
    roster: &TeamRoster,
    thresholds: &Thresholds,
) -> Result<Vec<ContributionProfile>> {
    if net.team_id() != roster.team_id || net.project_id() != roster.project_id {
        return Err(Error::ProfileMismatch(format!(
            "network {}/{} does not belong to roster {}/{}",
            net.team_id(),
            net.project_id(),
            roster.team_id,
            roster.project_id
        )));
    }
    roster
        .members
        .iter()
        .map(|student| {
            let quantity = measures::weighted_degree(net, spec, student)?;
            let hist = measures::type_histogram(net, spec, student)?;
            let heterogeneity = measures::heterogeneity(&hist, spec.type_capacities())?;
            Ok(ContributionProfile {
                student_id: student.clone(),
                project_id: roster.project_id.clone(),
                team_id: roster.team_id.clone(),
                quantity,
                heterogeneity,
                is_assigned_leader: roster.is_leader(student),
                role: classify(quantity, heterogeneity, thresholds)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleTransition {
    pub student_id: String,
    pub role_before: RoleLabel,
    pub role_after: RoleLabel,
    pub leader_before: bool,
    pub leader_after: bool,
    pub leadership_changed: bool,
    pub role_changed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSet {
    pub transitions: Vec<RoleTransition>,
    /// Students profiled only in the first project.
    pub only_before: Vec<String>,
    /// Students profiled only in the second project.
    pub only_after: Vec<String>,
}

fn index_profiles(profiles: &[ContributionProfile]) -> Result<BTreeMap<&str, &ContributionProfile>> {
    let mut map = BTreeMap::new();
    for p in profiles {
        if map.insert(p.student_id.as_str(), p).is_some() {
            return Err(Error::DuplicateProfile {
                student_id: p.student_id.clone(),
                project_id: p.project_id.clone(),
            });
        }
    }
    Ok(map)
}

/// Pairs students present in both projects. Leadership changes in either
/// direction (stepping down or taking over) count as a change.
pub fn role_transitions(
    before: &[ContributionProfile],
    after: &[ContributionProfile],
) -> Result<TransitionSet> {
    let before = index_profiles(before)?;
    let after = index_profiles(after)?;
    let mut set = TransitionSet::default();
    for (student, p1) in &before {
        match after.get(student) {
            Some(p2) => set.transitions.push(RoleTransition {
                student_id: student.to_string(),
                role_before: p1.role,
                role_after: p2.role,
                leader_before: p1.is_assigned_leader,
                leader_after: p2.is_assigned_leader,
                leadership_changed: p1.is_assigned_leader != p2.is_assigned_leader,
                role_changed: p1.role != p2.role,
            }),
            None => set.only_before.push(student.to_string()),
        }
    }
    set.only_after = after
        .keys()
        .filter(|s| !before.contains_key(*s))
        .map(|s| s.to_string())
        .collect();
    Ok(set)
}

/// Rows: leadership changed / unchanged. Columns: role changed / unchanged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable2x2 { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn row_sums(&self) -> (u64, u64) {
        (self.a + self.b, self.c + self.d)
    }

    pub fn column_sums(&self) -> (u64, u64) {
        (self.a + self.c, self.b + self.d)
    }

    /// Exchanges both the rows and the columns.
    pub fn rotated(&self) -> Self {
        ContingencyTable2x2::new(self.d, self.c, self.b, self.a)
    }
}

pub fn build_contingency(transitions: &[RoleTransition]) -> ContingencyTable2x2 {
    let mut table = ContingencyTable2x2::default();
    for t in transitions {
        match (t.leadership_changed, t.role_changed) {
            (true, true) => table.a += 1,
            (true, false) => table.b += 1,
            (false, true) => table.c += 1,
            (false, false) => table.d += 1,
        }
    }
    table
}

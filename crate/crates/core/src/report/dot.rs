use std::collections::BTreeMap;
use std::fmt::Write;

use super::style;
use crate::error::{Error, Result};
use crate::measures::BipartiteNetwork;
use crate::model::ProjectSpec;
use crate::roles::ContributionProfile;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn student_node(id: &str) -> String {
    quote(&format!("student:{id}"))
}

fn subtask_node(id: &str) -> String {
    quote(&format!("subtask:{id}"))
}

/// Renders one team's network as an undirected Graphviz graph. Students sit
/// in the left rank as boxes coloured by role, with a double border and bold
/// outline for the assigned leader; subtasks sit in the right rank as
/// ellipses labelled with their type and points.
pub fn export_network_dot(
    net: &BipartiteNetwork,
    spec: &ProjectSpec,
    profiles: &[ContributionProfile],
) -> Result<String> {
    if spec.project_id() != net.project_id() {
        return Err(Error::ProjectMismatch {
            expected: net.project_id().to_string(),
            found: spec.project_id().to_string(),
        });
    }
    let by_student: BTreeMap<&str, &ContributionProfile> = profiles
        .iter()
        .filter(|p| p.team_id == net.team_id() && p.project_id == net.project_id())
        .map(|p| (p.student_id.as_str(), p))
        .collect();
    let missing: Vec<&str> = net
        .students()
        .iter()
        .map(String::as_str)
        .filter(|s| !by_student.contains_key(s))
        .collect();
    if !missing.is_empty() {
        return Err(Error::ProfileMismatch(format!(
            "no profile for {} in {}/{}",
            missing.join(", "),
            net.team_id(),
            net.project_id()
        )));
    }
    let types: Vec<&String> = spec.type_capacities().keys().collect();

    let mut out = String::new();
    let title = format!("{} / {}", net.team_id(), net.project_id());
    writeln!(out, "graph {} {{", quote(&title)).unwrap();
    writeln!(
        out,
        "  graph [rankdir=LR, ranksep=3, nodesep=0.05, label={}, labelloc=t];",
        quote(&title)
    )
    .unwrap();
    writeln!(out, "  node [fontname=Helvetica, fontsize=10];").unwrap();
    writeln!(out, "  edge [color=\"#9e9e9e\"];").unwrap();

    writeln!(out, "  subgraph students {{").unwrap();
    writeln!(out, "    rank=same;").unwrap();
    for student in net.students() {
        let profile = by_student[student.as_str()];
        let mut label = student.clone();
        if profile.is_assigned_leader {
            label.push_str(" (leader)");
        }
        label.push('\n');
        label.push_str(profile.role.display_name());
        let leader_attrs = if profile.is_assigned_leader {
            ", peripheries=2, penwidth=2.5, style=\"filled,bold\""
        } else {
            ", style=filled"
        };
        writeln!(
            out,
            "    {} [shape=box, label={}, fillcolor={}{}];",
            student_node(student),
            quote(&label),
            quote(style::role_color(profile.role)),
            leader_attrs
        )
        .unwrap();
    }
    writeln!(out, "  }}").unwrap();

    writeln!(out, "  subgraph subtasks {{").unwrap();
    writeln!(out, "    rank=same;").unwrap();
    for subtask_id in net.subtasks() {
        let subtask = spec
            .subtask(subtask_id)
            .expect("network subtasks come from the project spec");
        let type_index = types.iter().position(|t| **t == subtask.task_type).unwrap_or(0);
        writeln!(
            out,
            "    {} [shape=ellipse, style=filled, fillcolor={}, label={}];",
            subtask_node(subtask_id),
            quote(style::type_color(type_index)),
            quote(&format!("{}\n{} ({} pts)", subtask_id, subtask.task_type, subtask.points))
        )
        .unwrap();
    }
    writeln!(out, "  }}").unwrap();

    for (student, subtask) in net.edges() {
        writeln!(out, "  {} -- {};", student_node(student), subtask_node(subtask)).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

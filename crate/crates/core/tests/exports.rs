mod common;

use std::collections::BTreeMap;

use collabnet::measures;
use collabnet::model::{Dataset, Format};
use collabnet::pipeline::{self, AnalysisConfig};
use collabnet::report::{self, InputDigest, ReportBundle, ReportMetadata, RunSettings};
use collabnet::roles::{self, ContributionProfile, RoleLabel, Thresholds};

use common::{event, parse_dot, parse_xml, project, roster, study_dataset, translate_of};

fn metadata() -> ReportMetadata {
    let config = AnalysisConfig::default();
    ReportMetadata {
        tool: "collabnet".into(),
        tool_version: "test".into(),
        settings: RunSettings {
            input_format: Format::Csv,
            thresholds: config.thresholds,
            mann_whitney: config.mann_whitney,
            barnard: config.barnard,
        },
        inputs: vec![InputDigest::of_bytes("inline", b"")],
        dataset: BTreeMap::new(),
    }
}

fn team_three_dot() -> String {
    let dataset = study_dataset();
    let analysis = pipeline::analyze(&dataset, &AnalysisConfig::default()).unwrap();
    let tp1 = analysis.project("TP1").unwrap();
    let team = tp1.teams.iter().find(|t| t.roster.team_id == "Team_3").unwrap();
    report::export_network_dot(&team.network, &tp1.spec, &team.profiles).unwrap()
}

#[test]
fn dot_lays_out_students_against_subtasks() {
    let graph = parse_dot(&team_three_dot()).unwrap();
    assert_eq!(graph.subgraphs.len(), 2);
    let students = &graph.subgraphs[0];
    let subtasks = &graph.subgraphs[1];
    assert_eq!(students.attrs.get("rank").map(String::as_str), Some("same"));
    assert_eq!(subtasks.attrs.get("rank").map(String::as_str), Some("same"));
    assert_eq!(students.nodes.len(), 3);
    assert_eq!(subtasks.nodes.len(), 78);
    assert_eq!(graph.nodes.len(), 81);

    let leader = &graph.nodes["student:S16"];
    assert_eq!(leader.get("peripheries").map(String::as_str), Some("2"));
    assert_eq!(leader.get("shape").map(String::as_str), Some("box"));
    for member in ["student:S20", "student:S21"] {
        assert!(!graph.nodes[member].contains_key("peripheries"));
    }
    for (a, b) in &graph.edges {
        assert!(students.nodes.contains(a), "{a}");
        assert!(subtasks.nodes.contains(b), "{b}");
    }
    assert!(!graph.edges.is_empty());
}

#[test]
fn dot_output_is_deterministic() {
    assert_eq!(team_three_dot(), team_three_dot());
}

#[test]
fn dot_of_a_silent_team_has_no_edges() {
    let spec = project("P", &[("A", 1), ("B", 2)]);
    let team = roster("P", "T", &["S1", "S2"], Some("S1"));
    let net = measures::build_network(&team, &spec, &[]).unwrap();
    let profiles = roles::profile_team(&net, &spec, &team, &Thresholds::default()).unwrap();
    let graph = parse_dot(&report::export_network_dot(&net, &spec, &profiles).unwrap()).unwrap();
    assert!(graph.edges.is_empty());
    assert_eq!(graph.nodes.len(), 4);
}

#[test]
fn dot_escapes_identifiers() {
    let spec = project("P", &[("Say \"hi\"", 1)]);
    let team = roster("P", "T", &["a\\b"], None);
    let events = [event(&team, "a\\b", "X01")];
    let net = measures::build_network(&team, &spec, &events).unwrap();
    let profiles = roles::profile_team(&net, &spec, &team, &Thresholds::default()).unwrap();
    let graph = parse_dot(&report::export_network_dot(&net, &spec, &profiles).unwrap()).unwrap();
    assert!(graph.nodes.contains_key("student:a\\b"));
    assert_eq!(graph.edges, vec![("student:a\\b".to_string(), "subtask:X01".to_string())]);
}

#[test]
fn dot_requires_a_profile_per_student() {
    let spec = project("P", &[("A", 1)]);
    let team = roster("P", "T", &["S1"], None);
    let net = measures::build_network(&team, &spec, &[]).unwrap();
    let err = report::export_network_dot(&net, &spec, &[]).unwrap_err();
    assert!(err.to_string().contains("S1"));
}

fn glyphs(svg: &str) -> Vec<(String, String, bool, (f64, f64))> {
    let root = parse_xml(svg).unwrap();
    root.descendants()
        .into_iter()
        .filter(|e| e.name == "g" && e.has_class("point"))
        .map(|e| {
            (
                e.attrs["data-student"].clone(),
                e.attrs["data-role"].clone(),
                e.has_class("leader"),
                translate_of(e),
            )
        })
        .collect()
}

#[test]
fn quadrant_puts_tp1_leaders_top_right() {
    let dataset = study_dataset();
    let analysis = pipeline::analyze(&dataset, &AnalysisConfig::default()).unwrap();
    let tp1 = analysis.project("TP1").unwrap();
    let svg = report::export_quadrant_svg("TP1", &tp1.profiles(), &Thresholds::default(), &[]);
    let root = parse_xml(&svg).unwrap();
    assert_eq!(root.name, "svg");
    let all = glyphs(&svg);
    assert_eq!(all.len(), 21);
    let leaders: Vec<_> = all.iter().filter(|g| g.2).collect();
    assert_eq!(leaders.len(), 7);
    for (student, role, _, (x, y)) in leaders {
        assert!(*x >= 300.0 && *y <= 300.0, "{student} at ({x}, {y})");
        assert_eq!(role, "ComprehensiveContributor");
    }
}

fn profile(student: &str, quantity: f64, heterogeneity: f64, leader: bool) -> ContributionProfile {
    let thresholds = Thresholds::default();
    ContributionProfile {
        student_id: student.into(),
        project_id: "P".into(),
        team_id: "T".into(),
        quantity,
        heterogeneity,
        is_assigned_leader: leader,
        role: roles::classify(quantity, heterogeneity, &thresholds).unwrap(),
    }
}

#[test]
fn quadrant_centre_point_is_comprehensive() {
    let svg = report::export_quadrant_svg("P", &[profile("S1", 0.5, 0.5, false)], &Thresholds::default(), &[]);
    let all = glyphs(&svg);
    assert_eq!(all.len(), 1);
    assert_eq!(all[0].1, RoleLabel::ComprehensiveContributor.to_string());
    assert_eq!(all[0].3, (300.0, 300.0));
    assert_eq!(report::to_canvas(0.0, 0.0), (50.0, 550.0));
    assert_eq!(report::to_canvas(1.0, 1.0), (550.0, 50.0));
}

#[test]
fn quadrant_draws_one_arrow_per_moved_student() {
    let before = [
        profile("S1", 0.2, 0.2, false),
        profile("S2", 0.7, 0.8, true),
        profile("S3", 0.4, 0.9, false),
    ];
    let after = [
        profile("S1", 0.6, 0.9, true),
        profile("S2", 0.7, 0.8, false),
        profile("S4", 0.1, 0.1, false),
    ];
    let arrows = report::transition_arrows(&before, &after);
    assert_eq!(arrows.len(), 1);
    assert_eq!(arrows[0].student_id, "S1");
    let svg = report::export_quadrant_svg("P & Q <2>", &after, &Thresholds::default(), &arrows);
    let root = parse_xml(&svg).unwrap();
    let lines: Vec<_> = root
        .descendants()
        .into_iter()
        .filter(|e| e.name == "line" && e.attrs.contains_key("data-student"))
        .collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].attrs["x1"], "150.00");
    assert_eq!(lines[0].attrs["y2"], "100.00");
    assert_eq!(root.find_all("title")[0].text, "P & Q <2>");
}

#[test]
fn report_json_carries_the_contingency_and_statistic() {
    let dataset = study_dataset();
    let analysis = pipeline::analyze(&dataset, &AnalysisConfig::default()).unwrap();
    let bundle = analysis.report(metadata());
    let value: serde_json::Value = serde_json::from_str(&bundle.to_json_string()).unwrap();
    assert_eq!(value["schema_version"], report::REPORT_SCHEMA_VERSION);
    let transition = &value["transitions"][0];
    let table = &transition["contingency"];
    assert_eq!(
        (&table["a"], &table["b"], &table["c"], &table["d"]),
        (&8.into(), &1.into(), &5.into(), &6.into())
    );
    let t = transition["barnard"][0]["t"].as_f64().unwrap();
    assert!((t - 2.026).abs() < 5e-4);
    assert_eq!(value["tests"].as_array().unwrap().len(), 4);

    let back: ReportBundle = serde_json::from_value(value).unwrap();
    assert_eq!(back, bundle);
}

#[test]
fn report_of_an_empty_dataset_is_valid_json() {
    let empty = Dataset::new(BTreeMap::new(), Vec::new(), Vec::new());
    let analysis = pipeline::analyze(&empty, &AnalysisConfig::default()).unwrap();
    let text = analysis.report(metadata()).to_json_string();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["projects"].as_array().unwrap().len(), 0);
    assert_eq!(value["transitions"].as_array().unwrap().len(), 0);
    assert!(text.ends_with('\n'));
}

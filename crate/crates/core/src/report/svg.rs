use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::style;
use crate::roles::{ContributionProfile, RoleLabel, Thresholds};

pub const CANVAS: f64 = 600.0;
pub const MARGIN: f64 = 50.0;
const PLOT: f64 = CANVAS - 2.0 * MARGIN;

/// A student's movement between two projects on the quadrant chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionArrow {
    pub student_id: String,
    pub from: (f64, f64),
    pub to: (f64, f64),
}

/// Arrows for students profiled in both projects whose position changed.
pub fn transition_arrows(
    before: &[ContributionProfile],
    after: &[ContributionProfile],
) -> Vec<TransitionArrow> {
    let later: BTreeMap<&str, &ContributionProfile> =
        after.iter().map(|p| (p.student_id.as_str(), p)).collect();
    let mut arrows: Vec<TransitionArrow> = before
        .iter()
        .filter_map(|p| {
            let q = later.get(p.student_id.as_str())?;
            let from = (p.quantity, p.heterogeneity);
            let to = (q.quantity, q.heterogeneity);
            (from != to).then(|| TransitionArrow {
                student_id: p.student_id.clone(),
                from,
                to,
            })
        })
        .collect();
    arrows.sort_by(|a, b| a.student_id.cmp(&b.student_id));
    arrows
}

/// Maps a unit-square point to canvas coordinates (y grows downwards).
pub fn to_canvas(quantity: f64, heterogeneity: f64) -> (f64, f64) {
    (MARGIN + quantity * PLOT, CANVAS - MARGIN - heterogeneity * PLOT)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn star_points(outer: f64, inner: f64) -> String {
    (0..10)
        .map(|k| {
            let radius = if k % 2 == 0 { outer } else { inner };
            let angle = std::f64::consts::PI * (k as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
            format!("{:.2},{:.2}", radius * angle.cos(), radius * angle.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Scatter of (quantity, heterogeneity) on the unit square with the role
/// cuts drawn dashed. Members are filled circles, assigned leaders are star
/// outlines; both are coloured by role. Each glyph is a `<g>` carrying
/// `data-student`, `data-role` and a `translate` to its canvas position.
pub fn export_quadrant_svg(
    title: &str,
    profiles: &[ContributionProfile],
    thresholds: &Thresholds,
    arrows: &[TransitionArrow],
) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CANVAS}\" height=\"{CANVAS}\" \
         viewBox=\"0 0 {CANVAS} {CANVAS}\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"11\">"
    )
    .unwrap();
    writeln!(out, "<title>{}</title>", escape(title)).unwrap();
    out.push_str(
        "<defs><marker id=\"arrowhead\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" \
         markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\">\
         <path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#9e9e9e\"/></marker></defs>\n",
    );
    writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{CANVAS}\" height=\"{CANVAS}\" fill=\"#ffffff\"/>"
    )
    .unwrap();
    writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{PLOT}\" height=\"{PLOT}\" fill=\"none\" stroke=\"#000000\"/>"
    )
    .unwrap();

    // Ticks and axis titles.
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        let (x, _) = to_canvas(v, 0.0);
        let (_, y) = to_canvas(0.0, v);
        let bottom = CANVAS - MARGIN;
        writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{bottom:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#000000\"/>\
             <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{v:.2}</text>",
            bottom + 5.0,
            bottom + 17.0
        )
        .unwrap();
        writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{MARGIN:.2}\" y2=\"{y:.2}\" stroke=\"#000000\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.2}</text>",
            MARGIN - 5.0,
            MARGIN - 7.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">Quantity of contribution</text>",
        CANVAS / 2.0,
        CANVAS - 12.0
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"12\" y=\"{0:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 12 {0:.2})\">Heterogeneity of contribution</text>",
        CANVAS / 2.0
    )
    .unwrap();

    // Threshold cuts.
    let (cut_x, cut_y) = to_canvas(thresholds.quantity_cut(), thresholds.heterogeneity_cut());
    writeln!(
        out,
        "<g class=\"cuts\" stroke=\"#616161\" stroke-dasharray=\"6 4\">\
         <line x1=\"{cut_x:.2}\" y1=\"{MARGIN:.2}\" x2=\"{cut_x:.2}\" y2=\"{:.2}\"/>\
         <line x1=\"{MARGIN:.2}\" y1=\"{cut_y:.2}\" x2=\"{:.2}\" y2=\"{cut_y:.2}\"/></g>",
        CANVAS - MARGIN,
        CANVAS - MARGIN
    )
    .unwrap();

    // Quadrant labels, each in the outer corner of its quadrant.
    let right = CANVAS - MARGIN - 6.0;
    let left = MARGIN + 6.0;
    let top = MARGIN + 14.0;
    let bottom = CANVAS - MARGIN - 8.0;
    for (role, x, y, anchor) in [
        (RoleLabel::ComprehensiveContributor, right, top, "end"),
        (RoleLabel::SpecializedContributor, right, bottom, "end"),
        (RoleLabel::VersatileParticipant, left, top, "start"),
        (RoleLabel::FreeRider, left, bottom, "start"),
    ] {
        writeln!(
            out,
            "<text class=\"quadrant\" data-role=\"{role}\" x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" \
             fill=\"{}\" font-weight=\"bold\">{}</text>",
            style::role_color(role),
            role.display_name()
        )
        .unwrap();
    }

    // Legend in the top margin.
    writeln!(
        out,
        "<g class=\"legend\"><circle cx=\"{0:.2}\" cy=\"30\" r=\"5\" fill=\"#bdbdbd\" stroke=\"#000000\"/>\
         <text x=\"{1:.2}\" y=\"34\">group member</text>\
         <polygon transform=\"translate({2:.2},30)\" points=\"{3}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\
         <text x=\"{4:.2}\" y=\"34\">assigned leader</text>\
         <text x=\"{5:.2}\" y=\"34\" text-anchor=\"end\" font-weight=\"bold\">{6}</text></g>",
        MARGIN + 5.0,
        MARGIN + 14.0,
        MARGIN + 115.0,
        star_points(7.0, 3.0),
        MARGIN + 126.0,
        CANVAS - MARGIN,
        escape(title)
    )
    .unwrap();

    if !arrows.is_empty() {
        out.push_str("<g class=\"transitions\" stroke=\"#9e9e9e\" stroke-dasharray=\"4 3\" fill=\"none\">\n");
        for arrow in arrows {
            let (x1, y1) = to_canvas(arrow.from.0, arrow.from.1);
            let (x2, y2) = to_canvas(arrow.to.0, arrow.to.1);
            writeln!(
                out,
                "<line data-student=\"{}\" x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
                 marker-end=\"url(#arrowhead)\"/>",
                escape(&arrow.student_id)
            )
            .unwrap();
        }
        out.push_str("</g>\n");
    }

    let mut ordered: Vec<&ContributionProfile> = profiles.iter().collect();
    ordered.sort_by(|a, b| {
        (a.is_assigned_leader, &a.team_id, &a.student_id).cmp(&(b.is_assigned_leader, &b.team_id, &b.student_id))
    });
    let star = star_points(9.0, 4.0);
    out.push_str("<g class=\"points\">\n");
    for p in ordered {
        let (x, y) = to_canvas(p.quantity, p.heterogeneity);
        let color = style::role_color(p.role);
        let class = if p.is_assigned_leader { "point leader" } else { "point member" };
        write!(
            out,
            "<g class=\"{class}\" data-student=\"{}\" data-team=\"{}\" data-role=\"{}\" transform=\"translate({x:.2},{y:.2})\">",
            escape(&p.student_id),
            escape(&p.team_id),
            p.role
        )
        .unwrap();
        if p.is_assigned_leader {
            write!(
                out,
                "<polygon points=\"{star}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>"
            )
            .unwrap();
        } else {
            write!(
                out,
                "<circle r=\"5\" fill=\"{color}\" stroke=\"#000000\" stroke-width=\"0.5\"/>"
            )
            .unwrap();
        }
        writeln!(
            out,
            "<title>{} ({}): quantity {:.3}, heterogeneity {:.3}, {}</title></g>",
            escape(&p.student_id),
            escape(&p.team_id),
            p.quantity,
            p.heterogeneity,
            p.role.display_name()
        )
        .unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}

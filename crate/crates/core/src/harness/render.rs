use std::fmt::Write;

use crate::geom::Vec2;
use crate::nav_agent::{EventKind, TrialRecord};
use crate::svg::{escape, Canvas};
use crate::world_sim::World;

const PLANNED: &str = "#1f5fbf";
const EXECUTED: &str = "#d62728";

fn marker(canvas: &Canvas, at: Vec2, class: &str, fill: &str, label: &str) -> String {
    let (x, y) = canvas.px(at);
    format!(
        "<circle class=\"marker {class}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"5.0\" fill=\"{fill}\"><title>{}</title></circle>",
        escape(label)
    )
}

/// Walls, rooms, the planned route (blue) and the executed path (red,
/// dashed), with markers at the start and at detection, turn, fork and
/// arrival events.
pub fn render_trajectory(world: &World, record: &TrialRecord) -> String {
    let executed: Vec<Vec2> = record.trajectory.iter().map(|p| p.position()).collect();
    let mut pts = world.bounds();
    pts.extend(&executed);
    pts.extend(&record.planned_route);
    let canvas = Canvas::fit(&pts, 12.0, 2.0);
    let mut body = String::new();

    body.push_str("<g id=\"rooms\" fill=\"#f4efe1\" stroke=\"#b0a27a\" stroke-width=\"1\">\n");
    for (_, r) in &world.rooms {
        let _ = writeln!(body, "{}", canvas.polygon(&r.corners()));
    }
    body.push_str("</g>\n<g id=\"walls\" stroke=\"#333\" stroke-width=\"2\">\n");
    for w in &world.walls {
        let _ = writeln!(body, "{}", canvas.line(w.a, w.b));
    }
    body.push_str("</g>\n");
    if record.planned_route.len() >= 2 {
        let attrs = format!("id=\"planned\" stroke=\"{PLANNED}\" stroke-width=\"3\"");
        let _ = writeln!(body, "{}", canvas.polyline(&record.planned_route, &attrs));
    }
    if executed.len() >= 2 {
        let attrs = format!(
            "id=\"executed\" stroke=\"{EXECUTED}\" stroke-width=\"2\" stroke-dasharray=\"6 3\""
        );
        let _ = writeln!(body, "{}", canvas.polyline(&executed, &attrs));
    }
    body.push_str("<g id=\"markers\">\n");
    let start = record
        .trajectory
        .first()
        .map(|p| p.position())
        .or_else(|| record.planned_route.first().copied())
        .unwrap_or(Vec2::ZERO);
    let _ = writeln!(
        body,
        "{}",
        marker(&canvas, start, "start", "#2ca02c", "start")
    );
    for e in &record.events {
        let at = e.pose.position();
        let m = match &e.kind {
            EventKind::Verify {
                landmark,
                distance: Some(_),
                ..
            } => Some(("detection", "#ff7f0e", format!("detected {landmark}"))),
            EventKind::Turn {
                waypoint, action, ..
            } => Some(("turn", "#9467bd", format!("{action} at {waypoint}"))),
            EventKind::Fork {
                waypoint, action, ..
            } => Some(("turn fork", "#8c564b", format!("{action} at {waypoint}"))),
            EventKind::Arrived { room } => {
                Some(("arrival", "#17becf", format!("arrived at {room}")))
            }
            _ => None,
        };
        if let Some((class, fill, label)) = m {
            let _ = writeln!(body, "{}", marker(&canvas, at, class, fill, &label));
        }
    }
    body.push_str("</g>\n");
    let title = format!("{} to {}", world.name, record.target_room);
    canvas.document(&title, &body)
}

use std::fmt::Write;

use super::NavTask;
use crate::priori_map::{render_semantic_text, SemanticPrioriMap};

/// Prompt asking an external model for a plan in three chained steps.
///
/// The reply grammar is the one accepted by `parse_plan_response`.
pub fn render_hcot_prompt(map: &SemanticPrioriMap, task: &NavTask) -> String {
    let mut out = String::new();
    out.push_str("You are planning a route for an indoor robot on the map below.\n\n");
    out.push_str("Tags:\n");
    out.push_str("- roomN: a room; its door sign is visible from the corridor\n");
    out.push_str("- segN(A\u{2013}B): corridor segment between rooms A and B (empty when the end is not a room)\n");
    out.push_str("- start, turnN, branchN, endN: key waypoints of the corridor network\n\n");
    out.push_str("Map:\n");
    out.push_str(&render_semantic_text(map));
    out.push('\n');
    let _ = writeln!(out, "The robot is on {}.", task.start_segment);
    if let Some(h) = task.initial_heading {
        let _ = writeln!(out, "It is facing {h}.");
    }
    let _ = writeln!(out, "The target is {}.\n", task.target_room);
    out.push_str("Think step by step:\n");
    let _ = writeln!(
        out,
        "1. Work out where {} lies relative to {} and how many segments apart they are.",
        task.target_room, task.start_segment
    );
    out.push_str("2. List the rooms and waypoints the shortest route passes, in order.\n");
    out.push_str(
        "3. For each of them give the action taken there: Go straight, Turn left, Turn right, \
         Take left fork, Take right fork or Stop.\n\n",
    );
    out.push_str("Finish with a line starting with PLAN: followed by the steps, for example\n");
    out.push_str("PLAN: {room3: Go straight} -> {turn1: Turn left}, {room5: Stop}\n");
    out.push_str(
        "Use `-> {waypoint: action}` right after a room when the waypoint cannot be seen from \
         the corridor. The last step must be ",
    );
    let _ = writeln!(out, "{{{}: Stop}}.", task.target_room);
    out
}

use serde::{Deserialize, Serialize};

use super::{action_at, plan_waypoints, Action, NavPlan, NavTask, PlannerConfig, Result};
use crate::priori_map::SemanticPrioriMap;

/// How a plan compares with the shortest route for the same task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    /// Last step is `Stop` at the target room.
    pub reaches_target: bool,
    /// Consecutive landmarks are joined by a segment, starting from an end of
    /// the start segment, and every action matches the route geometry.
    pub route_valid: bool,
    /// Plan length over shortest length, both counted from the far end of the
    /// start segment. `None` when the route is not valid.
    pub length_ratio: Option<f64>,
    pub issues: Vec<String>,
}

/// Check `plan` against the map and the reference route for `task`.
pub fn validate_plan(
    map: &SemanticPrioriMap,
    task: &NavTask,
    plan: &NavPlan,
    cfg: &PlannerConfig,
) -> Result<PlanReport> {
    let reference = plan_waypoints(map, task)?;
    let start = map
        .segment_index(&task.start_segment)
        .expect("checked by plan_waypoints");
    let mut issues = Vec::new();

    let last = plan.steps.last();
    let reaches_target = last.is_some_and(|s| {
        s.landmark == task.target_room && s.action == Action::Stop && s.predicted.is_none()
    });
    if !reaches_target {
        issues.push(format!(
            "plan does not end with {{{}: Stop}}",
            task.target_room
        ));
    }

    // landmark sequence with the action taken at each one
    let mut seq: Vec<(usize, Action)> = Vec::new();
    for s in &plan.steps {
        for (name, action) in std::iter::once((&s.landmark, s.action))
            .chain(s.predicted.iter().map(|p| (&p.waypoint, p.action)))
        {
            match map.node_index(name) {
                Some(n) => seq.push((n, action)),
                None => issues.push(format!("unknown landmark `{name}`")),
            }
        }
    }

    let mut route_valid = issues.len() == usize::from(!reaches_target) && !seq.is_empty();
    let mut nodes = Vec::new();
    if route_valid {
        let (u, v) = map.segments[start].endpoints;
        let first = seq[0].0;
        if first == u || first == v {
            nodes.push(if first == u { v } else { u });
            nodes.extend(seq.iter().map(|s| s.0));
        } else {
            issues.push(format!(
                "`{}` is not an end of {}",
                map.nodes[first].id, task.start_segment
            ));
            route_valid = false;
        }
    }
    let mut length = 0.0;
    if route_valid {
        for w in nodes.windows(2).skip(1) {
            match map.segment_between(w[0], w[1]) {
                Some(s) => length += map.segments[s].length,
                None => {
                    issues.push(format!(
                        "no segment joins `{}` and `{}`",
                        map.nodes[w[0]].id, map.nodes[w[1]].id
                    ));
                    route_valid = false;
                }
            }
        }
    }
    if route_valid {
        for i in 1..nodes.len() - 1 {
            let given = seq[i - 1].1;
            match action_at(map, nodes[i - 1], nodes[i], nodes[i + 1], cfg) {
                Ok(expected) if expected == given => {}
                Ok(expected) => {
                    issues.push(format!(
                        "at `{}`: expected {expected}, got {given}",
                        map.nodes[nodes[i]].id
                    ));
                    route_valid = false;
                }
                Err(e) => {
                    issues.push(e.to_string());
                    route_valid = false;
                }
            }
        }
    }
    let length_ratio = route_valid.then(|| {
        let best = reference.length + reference.start_length;
        (length + reference.start_length) / best
    });
    Ok(PlanReport {
        reaches_target,
        route_valid,
        length_ratio,
        issues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::planner::{parse_plan_response, plan};
    use crate::priori_map::{segment_path, MapConfig};

    #[test]
    fn reference_plan_scores_one() {
        let map = segment_path(&fixtures::load("fig2").unwrap(), &MapConfig::default()).unwrap();
        let task = NavTask {
            start_segment: "seg13".into(),
            target_room: "room17".into(),
            initial_heading: None,
        };
        let cfg = PlannerConfig::default();
        let (_, p) = plan(&map, &task, &cfg).unwrap();
        let r = validate_plan(&map, &task, &p, &cfg).unwrap();
        assert!(r.reaches_target && r.route_valid, "{:?}", r.issues);
        assert_eq!(r.length_ratio, Some(1.0));

        let wrong = parse_plan_response(
            "{room7: Go straight}, {room8: Turn left}, {room17: Stop}",
            &map,
        )
        .unwrap();
        let r = validate_plan(&map, &task, &wrong, &cfg).unwrap();
        assert!(r.reaches_target);
        assert!(!r.route_valid);
    }

    #[test]
    fn detour_is_valid_but_longer() {
        let map = segment_path(&fixtures::load("loop").unwrap(), &MapConfig::default()).unwrap();
        let task = NavTask {
            start_segment: "seg1".into(),
            target_room: "room1".into(),
            initial_heading: None,
        };
        let cfg = PlannerConfig::default();
        let (route, _) = plan(&map, &task, &cfg).unwrap();
        assert_eq!(
            route.ids(&map),
            vec!["start", "branch1", "branch2", "room1"]
        );
        let detour = parse_plan_response(
            "{branch1: Take left fork}, {turn1: Turn right}, {turn2: Turn right}, \
             {branch2: Take left fork}, {room1: Stop}",
            &map,
        )
        .unwrap();
        let r = validate_plan(&map, &task, &detour, &cfg).unwrap();
        assert!(r.reaches_target && r.route_valid, "{:?}", r.issues);
        // reference 8 + 24 = 32, detour 8 + 10 + 20 + 10 + 4 = 52
        assert!((r.length_ratio.unwrap() - 52.0 / 32.0).abs() < 1e-9);
    }
}

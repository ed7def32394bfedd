use super::{Action, NavPlan, PlanError, PlanSource, PlanStep, PlannerConfig, Prediction, Result};
use crate::priori_map::{
    segment_direction, Compass, NodeKind, SemanticPrioriMap, Turn, WaypointKind,
};

/// Action taken at `node` when arriving from `prev` and leaving toward `next`.
///
/// Branch waypoints use the signed angle between incoming and outgoing
/// directions, so diagonal forks resolve by side; every other node uses the
/// compass turn.
pub fn action_at(
    map: &SemanticPrioriMap,
    prev: usize,
    node: usize,
    next: usize,
    cfg: &PlannerConfig,
) -> Result<Action> {
    let (p, c, n) = (
        map.nodes[prev].pos,
        map.nodes[node].pos,
        map.nodes[next].pos,
    );
    let d_in = segment_direction(p, c, map.north)?;
    let d_out = segment_direction(c, n, map.north)?;
    let turn = d_in.turn_to(d_out);
    let reversal = || PlanError::InvalidRoute(map.nodes[node].id.clone());
    if map.nodes[node].kind == NodeKind::Key(WaypointKind::Branch) {
        let (a, b) = (c - p, n - c);
        let angle = a.cross(b).atan2(a.dot(b)).to_degrees();
        if turn == Turn::Reverse || angle.abs() > 179.0 {
            return Err(reversal());
        }
        return Ok(if angle > cfg.fork_angle_deg {
            Action::TakeLeftFork
        } else if angle < -cfg.fork_angle_deg {
            Action::TakeRightFork
        } else {
            Action::GoStraight
        });
    }
    match turn {
        Turn::Straight => Ok(Action::GoStraight),
        Turn::Left => Ok(Action::TurnLeft),
        Turn::Right => Ok(Action::TurnRight),
        Turn::Reverse => Err(reversal()),
    }
}

fn observable(map: &SemanticPrioriMap, node: usize, cfg: &PlannerConfig) -> bool {
    let n = &map.nodes[node];
    n.room.is_some()
        || map
            .nodes
            .iter()
            .any(|o| o.room.is_some() && o.pos.dist(n.pos) <= cfg.sight_link_distance)
}

/// First-person actions for a node route as returned by `plan_waypoints`.
///
/// The robot lines up with the start segment before the first step, so
/// `initial_heading` does not change the emitted actions; it only fixes the
/// frame in which the plan is later replayed.
pub fn plan_actions(
    map: &SemanticPrioriMap,
    waypoints: &[usize],
    initial_heading: Option<Compass>,
    cfg: &PlannerConfig,
) -> Result<NavPlan> {
    let _ = initial_heading;
    if waypoints.len() < 2 {
        return Err(PlanError::EmptyPlan);
    }
    let last = waypoints.len() - 1;
    let mut raw: Vec<(usize, Action)> = Vec::with_capacity(last);
    for i in 1..=last {
        let action = if i == last {
            Action::Stop
        } else {
            action_at(map, waypoints[i - 1], waypoints[i], waypoints[i + 1], cfg)?
        };
        raw.push((waypoints[i], action));
    }

    // fold unobservable key waypoints into the preceding room step
    let mut steps: Vec<PlanStep> = Vec::with_capacity(raw.len());
    for (node, action) in raw {
        let n = &map.nodes[node];
        let foldable = n.room.is_none() && action != Action::Stop && !observable(map, node, cfg);
        if foldable {
            if let Some(prev) = steps.last_mut() {
                let prev_is_room = map
                    .node_index(&prev.landmark)
                    .is_some_and(|p| map.nodes[p].room.is_some());
                if prev_is_room && prev.predicted.is_none() {
                    prev.predicted = Some(Prediction {
                        waypoint: n.id.clone(),
                        action,
                    });
                    continue;
                }
            }
        }
        steps.push(PlanStep {
            landmark: n.landmark().to_string(),
            action,
            predicted: None,
        });
    }
    Ok(NavPlan {
        steps,
        source: PlanSource::Symbolic,
    })
}

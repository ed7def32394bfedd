use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AgentState, EpisodeConfig, EventKind, Outcome, Phase, ReachRule};
use crate::geom::{wrap_180, Vec2};
use crate::perception::{
    quantize_direction, refine_heading, wall_floor_ratio, Detection, Perception, ViewModel,
    NAVIGATION_ANGLES,
};
use crate::planner::{Action, Prediction};
use crate::priori_map::{NodeKind, SemanticPrioriMap, WaypointKind};
use crate::world_sim::{step_robot, Motion, World};

/// Index of the zero-offset ray in a view's forward profile.
const CENTER_RAY: usize = 4;
/// Corridor centring is skipped when the heading is further off than this.
const CENTERING_MAX_MISALIGN: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Place {
    Corridor,
    Corner,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no corridor opening for `{action}`")]
pub struct ForkMismatch {
    pub action: Action,
}

/// View angles for the navigation panorama; positive is left. A turn drops
/// the view on the side the robot came from.
pub fn navigation_views(last_action: Option<Action>) -> Vec<f64> {
    NAVIGATION_ANGLES
        .iter()
        .copied()
        .filter(|&a| match last_action {
            Some(Action::TurnLeft) => a != -90.0,
            Some(Action::TurnRight) => a != 90.0,
            _ => true,
        })
        .collect()
}

pub fn corner_check(view: &ViewModel, cfg: &EpisodeConfig) -> Place {
    if wall_floor_ratio(view, cfg.corner_near_distance) >= cfg.corner_ratio_threshold {
        Place::Corner
    } else {
        Place::Corridor
    }
}

fn side_open(view: &ViewModel, cfg: &EpisodeConfig) -> bool {
    wall_floor_ratio(view, cfg.side_open_distance) <= cfg.side_open_ratio
}

fn mean_range(view: &ViewModel) -> f64 {
    let r = &view.forward_ray_profile;
    r.iter().map(|(_, d)| d).sum::<f64>() / r.len().max(1) as f64
}

/// Heading (absolute, degrees) into the corridor opening on the side named
/// by `action`. Returns the coarse grid direction and the refined one, both
/// relative to the current heading; in coarse mode they are equal.
pub fn fork_select<P: Perception + ?Sized>(
    state: &AgentState,
    world: &World,
    perception: &mut P,
    action: Action,
    cfg: &EpisodeConfig,
) -> Result<(f64, f64), ForkMismatch> {
    let side = match action {
        Action::TakeLeftFork | Action::TurnLeft => 1.0,
        Action::TakeRightFork | Action::TurnRight => -1.0,
        _ => return Err(ForkMismatch { action }),
    };
    let mut best: Option<(f64, f64)> = None;
    for a in [30.0, 60.0, 90.0] {
        let v = perception.range_view(world, state.pose, side * a);
        if side_open(&v, cfg) {
            let m = mean_range(&v);
            if best.is_none_or(|(_, bm)| m > bm + 1e-9) {
                best = Some((side * a, m));
            }
        }
    }
    let Some((coarse, _)) = best else {
        return Err(ForkMismatch { action });
    };
    if !cfg.fine_grained {
        return Ok((coarse, coarse));
    }
    let sweep = perception.ray_sweep(world, state.pose, coarse, 45.0, 0.5);
    let max = sweep.iter().map(|r| r.1).fold(0.0, f64::max);
    let peak = sweep
        .iter()
        .enumerate()
        .min_by(|a, b| {
            b.1 .1
                .total_cmp(&a.1 .1)
                .then((a.1 .0 - coarse).abs().total_cmp(&(b.1 .0 - coarse).abs()))
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let open = |i: usize| sweep[i].1 >= 0.5 * max;
    let (mut lo, mut hi) = (peak, peak);
    while lo > 0 && open(lo - 1) {
        lo -= 1;
    }
    while hi + 1 < sweep.len() && open(hi + 1) {
        hi += 1;
    }
    Ok((coarse, (sweep[lo].0 + sweep[hi].0) / 2.0))
}

/// Rotate toward an absolute heading, on the 5 degree motor grid when fine
/// and on the 30 degree direction grid when coarse.
fn turn_to(state: &mut AgentState, world: &World, heading: f64, cfg: &EpisodeConfig) {
    let rel = wrap_180(heading - state.pose.heading);
    let amount = if cfg.fine_grained {
        let inc = world.motion.turn_increment;
        (rel / inc).round() * inc
    } else {
        quantize_direction(rel)
    };
    if amount.abs() < 1e-9 {
        return;
    }
    let motion = if amount > 0.0 {
        Motion::RotateLeft(amount)
    } else {
        Motion::RotateRight(-amount)
    };
    state.pose = step_robot(world, state.pose, motion).pose;
}

fn forward(state: &mut AgentState, world: &World) {
    let out = step_robot(world, state.pose, Motion::Forward);
    state.steps_used += 1;
    if out.collided {
        state.log(EventKind::Collision);
    } else {
        state.path_length += out.pose.position().dist(state.pose.position());
    }
    state.pose = out.pose;
    state.trajectory.push(state.pose);
}

fn corridor_direction(state: &AgentState, map: &SemanticPrioriMap) -> f64 {
    let (a, b) = state.corridor;
    (map.nodes[b].pos - map.nodes[a].pos).angle_deg()
}

/// Corridor direction nudged back toward the centreline using the side walls.
fn corridor_heading(
    state: &AgentState,
    map: &SemanticPrioriMap,
    left: &ViewModel,
    right: &ViewModel,
    cfg: &EpisodeConfig,
) -> f64 {
    let c = corridor_direction(state, map);
    let mis = wrap_180(state.pose.heading - c);
    // centering reads metric ranges, which only fine mode uses
    if !cfg.fine_grained || mis.abs() > CENTERING_MAX_MISALIGN {
        return c;
    }
    let (Some(&(_, dl)), Some(&(_, dr))) = (
        left.forward_ray_profile.get(CENTER_RAY),
        right.forward_ray_profile.get(CENTER_RAY),
    ) else {
        return c;
    };
    if dl > cfg.side_open_distance || dr > cfg.side_open_distance {
        return c;
    }
    let off_left = (dr - dl) * mis.to_radians().cos() / 2.0;
    c - off_left.atan2(cfg.centering_lookahead).to_degrees()
}

fn expected_junction(state: &AgentState, map: &SemanticPrioriMap) -> Option<(usize, Action, bool)> {
    if let Some(p) = &state.pending_prediction {
        return map.node_index(&p.waypoint).map(|n| (n, p.action, true));
    }
    let step = &state.plan.steps[state.step_index];
    let node = map.node_index(&step.landmark)?;
    (map.nodes[node].room.is_none() || step.action.is_turn()).then_some((node, step.action, false))
}

fn reached(det: &Detection, cfg: &EpisodeConfig) -> bool {
    match cfg.reach_rule {
        ReachRule::Distance => det.distance <= cfg.landmark_reached_radius,
        ReachRule::MaskArea(min) => det.mask_area_fraction >= min,
    }
}

/// Node the robot heads for once the current target is behind it.
fn next_node(state: &AgentState, map: &SemanticPrioriMap) -> Option<usize> {
    if let Some(p) = &state.pending_prediction {
        return map.node_index(&p.waypoint);
    }
    state
        .plan
        .steps
        .get(state.step_index)
        .and_then(|s| map.node_index(&s.landmark))
}

/// Close the current plan step: target update, prediction hand-over and the
/// next corridor. Returns false when the plan is finished.
fn advance(state: &mut AgentState, map: &SemanticPrioriMap, at: usize) -> bool {
    let i = state.step_index;
    let step = state.plan.steps[i].clone();
    state.log(EventKind::TargetUpdate {
        step: i,
        next: state.plan.steps.get(i + 1).map(|s| s.landmark.clone()),
    });
    state.step_index += 1;
    state.pending_prediction = step.predicted.clone();
    state.last_action = Some(step.action);
    if step.action == Action::Stop || state.step_index >= state.plan.steps.len() {
        state.phase = Phase::Done;
        return false;
    }
    if let Some(n) = next_node(state, map) {
        state.corridor = (at, n);
    }
    true
}

fn complete_junction(
    state: &mut AgentState,
    map: &SemanticPrioriMap,
    node: usize,
    action: Action,
    pending: bool,
) -> bool {
    state.junction_armed = false;
    state.at_junction = false;
    if pending {
        let p: Prediction = state.pending_prediction.take().expect("pending prediction");
        state.log(EventKind::PredictionExecuted {
            waypoint: p.waypoint,
            action: p.action,
        });
        state.last_action = Some(action);
        if let Some(n) = next_node(state, map) {
            state.corridor = (node, n);
        }
        return true;
    }
    let landmark = state.plan.steps[state.step_index].landmark.clone();
    state.log(EventKind::Verify {
        step: state.step_index,
        landmark,
        distance: None,
    });
    advance(state, map, node)
}

/// One decision cycle: search, verify, update the target, then move.
pub fn navigate_step<P: Perception + ?Sized>(
    state: &mut AgentState,
    map: &SemanticPrioriMap,
    world: &World,
    perception: &mut P,
    cfg: &EpisodeConfig,
) {
    if state.phase != Phase::Navigating {
        return;
    }
    if state.steps_used >= state.step_budget {
        state.fail(Outcome::BudgetExhausted, "step budget exhausted");
        return;
    }
    state.cycle += 1;

    // search
    let step = state.plan.steps[state.step_index].clone();
    let views = navigation_views(state.last_action);
    let pano = perception
        .capture_panorama(world, state.pose, &views)
        .expect("navigation views are not empty");
    state.detections_made += 1;
    let sighting = pano
        .find(&step.landmark)
        .map(|(v, d)| (v.clone(), d.clone()));
    state.log(EventKind::Search {
        step: state.step_index,
        target: step.landmark.clone(),
        views,
        detected: sighting.is_some(),
    });

    let ahead = perception.range_view(world, state.pose, 0.0);
    let left = perception.range_view(world, state.pose, 90.0);
    let right = perception.range_view(world, state.pose, -90.0);
    let (left_open, right_open) = (side_open(&left, cfg), side_open(&right, cfg));
    if !left_open && !right_open {
        state.junction_armed = true;
    }

    if let Some((node, action, pending)) = expected_junction(state, map) {
        let waypoint = map.nodes[node].id.clone();
        let is_branch = map.nodes[node].kind == NodeKind::Key(WaypointKind::Branch);
        if state.at_junction {
            match fork_select(state, world, perception, action, cfg) {
                Ok((coarse, refined)) => {
                    let target = state.pose.heading + refined;
                    turn_to(state, world, target, cfg);
                    state.log(EventKind::Fork {
                        waypoint,
                        action,
                        coarse,
                        refined,
                    });
                    if !complete_junction(state, map, node, action, pending) {
                        return;
                    }
                }
                Err(e) => {
                    state.fail(Outcome::ForkMismatch, e.to_string());
                    return;
                }
            }
            forward(state, world);
            return;
        }
        // probes only mean something when looking down the corridor
        let aligned = wrap_180(state.pose.heading - corridor_direction(state, map)).abs()
            <= CENTERING_MAX_MISALIGN;
        let opening = aligned && state.junction_armed && (left_open || right_open);
        let corner = aligned && corner_check(&ahead, cfg) == Place::Corner;
        match action {
            Action::TakeLeftFork | Action::TakeRightFork if opening => {
                // one more step brings the robot to the middle of the junction
                state.at_junction = true;
            }
            Action::TurnLeft | Action::TurnRight if is_branch && opening => {
                state.at_junction = true;
            }
            Action::TurnLeft | Action::TurnRight if !is_branch && corner => {
                let ratio = wall_floor_ratio(&ahead, cfg.corner_near_distance);
                state.log(EventKind::Corner {
                    waypoint: waypoint.clone(),
                    ratio,
                });
                if !complete_junction(state, map, node, action, pending) {
                    return;
                }
                let heading = corridor_direction(state, map);
                turn_to(state, world, heading, cfg);
                state.log(EventKind::Turn {
                    waypoint,
                    action,
                    heading: state.pose.heading,
                });
                forward(state, world);
                return;
            }
            Action::GoStraight if !is_branch || opening => {
                if !complete_junction(state, map, node, action, pending) {
                    return;
                }
            }
            Action::Stop if opening || corner => {
                complete_junction(state, map, node, action, pending);
                return;
            }
            _ => {}
        }
        let h = corridor_heading(state, map, &left, &right, cfg);
        turn_to(state, world, h, cfg);
        forward(state, world);
        return;
    }

    // room landmark
    if let Some((view, det)) = sighting {
        if reached(&det, cfg) {
            state.log(EventKind::Verify {
                step: state.step_index,
                landmark: det.label.clone(),
                distance: Some(det.distance),
            });
            let node = map.node_index(&step.landmark).expect("landmark on map");
            if !advance(state, map, node) {
                return;
            }
        } else {
            let heading = if cfg.fine_grained {
                aim_heading(state, map, &view, &det, cfg)
            } else {
                let coarse = quantize_direction(view.view_angle + det.bearing);
                Some(state.pose.heading + coarse)
            };
            if let Some(h) = heading {
                turn_to(state, world, h, cfg);
                forward(state, world);
                return;
            }
        }
    }
    let h = corridor_heading(state, map, &left, &right, cfg);
    turn_to(state, world, h, cfg);
    forward(state, world);
}

/// Heading toward the corridor point opposite a detected sign.
fn aim_heading(
    state: &AgentState,
    map: &SemanticPrioriMap,
    view: &ViewModel,
    det: &Detection,
    cfg: &EpisodeConfig,
) -> Option<f64> {
    let rel = refine_heading(view, det.pixel_center).ok()?;
    let sign = Vec2::from_angle_deg(state.pose.heading + rel) * det.distance;
    let room = map.spec.room(&det.label)?;
    let node = map.node_index(&det.label)?;
    let inward = map.nodes[node].pos - room.door;
    let mut aim = sign + inward;
    if let Some(bias) = cfg.approach_bias {
        if inward.norm() > 1e-9 {
            aim = aim - inward.normalized() * bias;
        }
    }
    (aim.norm() > 0.5).then(|| aim.angle_deg())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn view_sets() {
        assert_eq!(navigation_views(Some(Action::TurnLeft)).len(), 6);
        assert!(!navigation_views(Some(Action::TurnLeft)).contains(&-90.0));
        assert!(!navigation_views(Some(Action::TurnRight)).contains(&90.0));
        assert_eq!(navigation_views(Some(Action::GoStraight)).len(), 7);
        assert_eq!(navigation_views(None).len(), 7);
    }

    #[test]
    fn corner_threshold_is_inclusive() {
        let cfg = EpisodeConfig::default();
        let mk = |walls: usize| ViewModel {
            view_angle: 0.0,
            image_width: 640.0,
            fov: 60.0,
            detections: Vec::new(),
            forward_ray_profile: (0..10)
                .map(|i| (i as f64, if i < walls { 1.0 } else { 9.0 }))
                .collect(),
        };
        assert_eq!(corner_check(&mk(0), &cfg), Place::Corridor);
        assert_eq!(corner_check(&mk(10), &cfg), Place::Corner);
        assert_eq!(corner_check(&mk(6), &cfg), Place::Corner);
        assert_eq!(corner_check(&mk(5), &cfg), Place::Corridor);
    }
}

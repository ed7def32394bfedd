use super::{
    localize, navigate_step, AgentState, EpisodeConfig, EventKind, Outcome, Phase, TrialRecord,
};
use crate::geom::Vec2;
use crate::perception::{Perception, SimulatedPerception};
use crate::planner::{self, NavPlan, NavTask, PlanError, PlanSource};
use crate::priori_map::SemanticPrioriMap;
use crate::world_sim::{Pose, Task, World};

/// Forward primitives allowed for a task with the given oracle step count.
pub fn default_budget(oracle_steps: usize) -> usize {
    (4 * oracle_steps).max(50)
}

/// Fresh navigation state on `start_segment`, heading for the plan's first
/// landmark.
pub fn start_state(
    map: &SemanticPrioriMap,
    start_segment: &str,
    plan: NavPlan,
    pose: Pose,
    step_budget: usize,
) -> Result<AgentState, PlanError> {
    let seg = map
        .segment_index(start_segment)
        .ok_or_else(|| PlanError::UnknownSegment(start_segment.to_string()))?;
    let first = plan.steps.first().ok_or(PlanError::EmptyPlan)?;
    let node = map
        .node_index(&first.landmark)
        .ok_or_else(|| PlanError::UnknownLandmark {
            line: 1,
            landmark: first.landmark.clone(),
        })?;
    for s in &plan.steps {
        if map.node_index(&s.landmark).is_none() {
            return Err(PlanError::UnknownLandmark {
                line: 1,
                landmark: s.landmark.clone(),
            });
        }
    }
    let (u, v) = map.segments[seg].endpoints;
    let from = if node == u { v } else { u };
    Ok(AgentState {
        pose,
        phase: Phase::Navigating,
        plan,
        step_index: 0,
        pending_prediction: None,
        last_action: None,
        steps_used: 0,
        detections_made: 0,
        step_budget,
        path_length: 0.0,
        corridor: (from, node),
        junction_armed: true,
        at_junction: false,
        outcome: None,
        trajectory: vec![pose],
        events: Vec::new(),
        cycle: 0,
    })
}

fn planned_route(map: &SemanticPrioriMap, start: Vec2, plan: &NavPlan) -> Vec<Vec2> {
    let mut out = vec![start];
    out.extend(
        plan.landmark_sequence()
            .into_iter()
            .filter_map(|id| map.node_index(id))
            .map(|n| map.nodes[n].pos),
    );
    out
}

/// Run one task to completion with simulated perception. Without a `plan`
/// the symbolic planner is used on the (possibly localized) start segment.
pub fn run_episode(
    world: &World,
    map: &SemanticPrioriMap,
    task: &Task,
    plan: Option<NavPlan>,
    cfg: &EpisodeConfig,
) -> TrialRecord {
    let mut perception = SimulatedPerception::new(cfg.noise);
    run_episode_with(world, map, task, plan, cfg, &mut perception)
}

pub(crate) fn run_episode_with<P: Perception + ?Sized>(
    world: &World,
    map: &SemanticPrioriMap,
    task: &Task,
    plan: Option<NavPlan>,
    cfg: &EpisodeConfig,
    perception: &mut P,
) -> TrialRecord {
    let budget = cfg
        .step_budget
        .unwrap_or_else(|| default_budget(task.oracle_steps));
    let mut record = TrialRecord {
        target_room: task.target_room.clone(),
        success: false,
        outcome: Outcome::InvalidPlan,
        path_length: 0.0,
        shortest_length: task.shortest_length,
        detections_made: 0,
        steps_used: 0,
        step_budget: budget,
        localized_segment: None,
        plan: plan.clone().unwrap_or(NavPlan {
            steps: Vec::new(),
            source: PlanSource::Symbolic,
        }),
        planned_route: vec![task.start_pose.position()],
        trajectory: vec![task.start_pose],
        events: Vec::new(),
    };

    let mut pose = task.start_pose;
    let mut segment = task.start_segment.clone();
    if cfg.localize {
        match localize(map, world, pose, perception, budget) {
            Ok(l) => {
                pose = l.pose;
                segment = l.segment.clone();
                record.localized_segment = Some(l.segment);
                record.detections_made = l.detections_made;
                record.steps_used = l.steps_used;
                record.path_length = l.path_length;
                record.trajectory = l.trajectory;
                record.events = l.events;
            }
            Err(f) => {
                record.outcome = Outcome::LocalizationFailed;
                record.detections_made = f.detections_made;
                record.steps_used = f.steps_used;
                record.path_length = f.path_length;
                record.trajectory = f.trajectory;
                record.events = f.events;
                return record;
            }
        }
    }

    let plan = match plan {
        Some(p) => p,
        None => {
            let t = NavTask {
                start_segment: segment.clone(),
                target_room: task.target_room.clone(),
                initial_heading: None,
            };
            match planner::plan(map, &t, &cfg.planner) {
                Ok((_, p)) => p,
                Err(_) => return record,
            }
        }
    };
    record.plan = plan.clone();
    record.planned_route = planned_route(map, task.start_pose.position(), &plan);
    let Ok(mut state) = start_state(map, &segment, plan, pose, budget) else {
        return record;
    };
    state.steps_used = record.steps_used;
    state.detections_made = record.detections_made;
    state.path_length = record.path_length;
    state.trajectory = std::mem::take(&mut record.trajectory);
    state.events = std::mem::take(&mut record.events);
    state.cycle = state.events.last().map_or(0, |e| e.cycle + 1);

    let max_cycles = budget * 4 + 20;
    let mut cycles = 0;
    while !state.is_terminal() {
        if cycles >= max_cycles {
            state.fail(Outcome::BudgetExhausted, "decision cycle limit reached");
            break;
        }
        navigate_step(&mut state, map, world, perception, cfg);
        cycles += 1;
    }

    if state.phase == Phase::Done {
        let last = state
            .plan
            .steps
            .last()
            .map(|s| s.landmark.clone())
            .unwrap_or_default();
        let outcome = if last != task.target_room {
            state.log(EventKind::ReachedWrongTarget { room: last });
            Outcome::ReachedWrongTarget
        } else {
            let door = map.spec.room(&task.target_room).map(|r| r.door);
            match door {
                Some(d) if d.dist(state.pose.position()) <= cfg.success_radius => {
                    state.log(EventKind::Arrived { room: last });
                    Outcome::Success
                }
                _ => Outcome::StoppedOutsideRadius,
            }
        };
        state.outcome = Some(outcome);
    }

    record.outcome = state.outcome.unwrap_or(Outcome::BudgetExhausted);
    record.success = record.outcome == Outcome::Success;
    record.detections_made = state.detections_made;
    record.steps_used = state.steps_used;
    record.path_length = state.path_length;
    record.trajectory = state.trajectory;
    record.events = state.events;
    record
}

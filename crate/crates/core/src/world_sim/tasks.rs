use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{visible_from, Pose, World};
use crate::geom::Vec2;
use crate::planner::{distances_to, plan, Action, NavTask, PlanError, PlannerConfig};
use crate::priori_map::{NodeKind, SemanticPrioriMap, WaypointKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        })
    }
}

impl FromStr for Difficulty {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            _ => Err(format!("unknown difficulty `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub start_pose: Pose,
    /// Segment holding the start pose; hidden from an agent that localizes.
    pub start_segment: String,
    pub target_room: String,
    pub difficulty: Difficulty,
    pub oracle_steps: usize,
    /// Start position to entry waypoint, then along the route to the room waypoint.
    pub shortest_length: f64,
}

impl Task {
    pub fn nav_task(&self) -> NavTask {
        NavTask {
            start_segment: self.start_segment.clone(),
            target_room: self.target_room.clone(),
            initial_heading: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaskError {
    #[error("only {found} {difficulty} tasks exist on this map, {requested} requested")]
    Infeasible {
        difficulty: Difficulty,
        requested: usize,
        found: usize,
    },
    #[error("task count must be at least 1")]
    ZeroCount,
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Properties of a start/target pair that decide its difficulty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskFacts {
    pub visible: bool,
    pub turns: usize,
    pub forks: usize,
    pub oracle_steps: usize,
    pub length: f64,
}

pub fn task_difficulty_holds(d: Difficulty, f: &TaskFacts) -> bool {
    match d {
        Difficulty::Easy => f.visible && (3..=5).contains(&f.oracle_steps),
        Difficulty::Medium => !f.visible && f.turns >= 1 && (6..=10).contains(&f.oracle_steps),
        Difficulty::Hard => f.turns >= 2 && f.forks >= 1 && f.oracle_steps > 10,
    }
}

/// Starts closer than this to a turn or branch waypoint are not used.
pub const JUNCTION_CLEARANCE: f64 = 3.0;

fn steps_for(length: f64, step: f64) -> usize {
    (length / step - 1e-9).ceil().max(0.0) as usize
}

/// Length of the planned route from a point on `start_segment`.
pub fn oracle_length(
    map: &SemanticPrioriMap,
    start: Vec2,
    task: &NavTask,
) -> Result<f64, PlanError> {
    let route = crate::planner::plan_waypoints(map, task)?;
    Ok(start.dist(map.nodes[route.nodes[1]].pos) + route.length)
}

/// Every start/target pair of one difficulty, with start points every 0.5 m
/// along segment centrelines and heading 0. Only starts where the planned
/// route is also the geometric shortest path are kept.
pub fn task_pool(world: &World, map: &SemanticPrioriMap, difficulty: Difficulty) -> Vec<Task> {
    let cfg = PlannerConfig::default();
    let step = world.motion.forward_step;
    let rooms: Vec<String> = map.room_ids().map(str::to_string).collect();
    let dist: Vec<Vec<Option<f64>>> = rooms
        .iter()
        .map(|r| distances_to(map, map.node_index(r).expect("room node")))
        .collect();

    // a start inside a junction would show side openings before the first move
    let junctions: Vec<Vec2> = map
        .nodes
        .iter()
        .filter(|n| {
            matches!(
                n.kind,
                NodeKind::Key(WaypointKind::Turn | WaypointKind::Branch)
            )
        })
        .map(|n| n.pos)
        .collect();
    let mut pool: Vec<Task> = Vec::new();
    for (si, seg) in map.segments.iter().enumerate() {
        let geom = map.segment_geometry(si);
        let len = geom.length();
        let offsets: Vec<f64> = (1..)
            .map(|k| k as f64 * 0.5)
            .take_while(|t| *t < len - 1e-9)
            .collect();
        for (ri, room) in rooms.iter().enumerate() {
            let nav = NavTask {
                start_segment: seg.id.clone(),
                target_room: room.clone(),
                initial_heading: None,
            };
            let Ok((route, nav_plan)) = plan(map, &nav, &cfg) else {
                continue;
            };
            let actions: Vec<Action> = nav_plan
                .steps
                .iter()
                .flat_map(|s| std::iter::once(s.action).chain(s.predicted.iter().map(|p| p.action)))
                .collect();
            let turns = actions.iter().filter(|a| a.is_turn()).count();
            let forks = actions.iter().filter(|a| a.is_fork()).count();
            let (other, entry) = (route.nodes[0], route.nodes[1]);
            for &t in &offsets {
                let p = geom.a.lerp(geom.b, t / len);
                if junctions.iter().any(|j| j.dist(p) < JUNCTION_CLEARANCE) {
                    continue;
                }
                let length = p.dist(map.nodes[entry].pos) + route.length;
                if let Some(alt) = dist[ri][other] {
                    if p.dist(map.nodes[other].pos) + alt < length - 1e-9 {
                        continue;
                    }
                }
                let oracle_steps = steps_for(length, step);
                // visibility is the expensive fact; skip it where it cannot matter
                let needs_vis = match difficulty {
                    Difficulty::Easy => (3..=5).contains(&oracle_steps),
                    Difficulty::Medium => turns >= 1 && (6..=10).contains(&oracle_steps),
                    Difficulty::Hard => false,
                };
                let facts = TaskFacts {
                    visible: needs_vis && visible_from(world, p, room),
                    turns,
                    forks,
                    oracle_steps,
                    length,
                };
                if task_difficulty_holds(difficulty, &facts) {
                    pool.push(Task {
                        start_pose: Pose::at(p, 0.0),
                        start_segment: seg.id.clone(),
                        target_room: room.clone(),
                        difficulty,
                        oracle_steps,
                        shortest_length: length,
                    });
                }
            }
        }
    }
    pool
}

/// `n` tasks of one difficulty sampled without replacement from
/// [`task_pool`], each with a uniformly random start heading.
pub fn generate_tasks(
    world: &World,
    map: &SemanticPrioriMap,
    difficulty: Difficulty,
    n: usize,
    seed: u64,
) -> Result<Vec<Task>, TaskError> {
    if n == 0 {
        return Err(TaskError::ZeroCount);
    }
    let mut pool = task_pool(world, map, difficulty);
    if pool.len() < n {
        return Err(TaskError::Infeasible {
            difficulty,
            requested: n,
            found: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(n);
    for t in &mut pool {
        t.start_pose.heading = rng.random_range(0.0..360.0);
    }
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::priori_map::{segment_path, MapConfig};
    use crate::world_sim::{build_world, visible_landmarks};

    #[test]
    fn easy_targets_are_visible_and_seeded() {
        let spec = fixtures::load("fig2").unwrap();
        let world = build_world(&spec, 3.0).unwrap();
        let map = segment_path(&spec, &MapConfig::default()).unwrap();
        let tasks = generate_tasks(&world, &map, Difficulty::Easy, 5, 7).unwrap();
        for t in &tasks {
            assert!((3..=5).contains(&t.oracle_steps));
            let seen = (0..12).any(|k| {
                let pose = Pose::at(t.start_pose.position(), 0.0);
                visible_landmarks(&world, pose, 30.0 * k as f64)
                    .iter()
                    .any(|v| v.room == t.target_room)
            });
            assert!(seen, "{t:?}");
        }
        assert_eq!(
            tasks,
            generate_tasks(&world, &map, Difficulty::Easy, 5, 7).unwrap()
        );
    }

    #[test]
    fn hard_needs_a_branch() {
        let spec = fixtures::load("corner").unwrap();
        let world = build_world(&spec, 3.0).unwrap();
        let map = segment_path(&spec, &MapConfig::default()).unwrap();
        assert!(matches!(
            generate_tasks(&world, &map, Difficulty::Hard, 1, 0),
            Err(TaskError::Infeasible { found: 0, .. })
        ));
    }
}

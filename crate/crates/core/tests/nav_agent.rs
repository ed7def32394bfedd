use pmnav::fixtures;
use pmnav::geom::wrap_180;
use pmnav::nav_agent::*;
use pmnav::perception::{wall_floor_ratio, Perception, SimulatedPerception, ViewModel};
use pmnav::planner::{Action, NavPlan, PlanSource, PlanStep, Prediction};
use pmnav::priori_map::{segment_path, MapConfig, PrioriMapSpec, SemanticPrioriMap};
use pmnav::world_sim::*;

fn load(name: &str) -> (World, SemanticPrioriMap) {
    let spec = fixtures::load(name).unwrap();
    let map = segment_path(&spec, &MapConfig::default()).unwrap();
    (build_world(&spec, DEFAULT_CORRIDOR_WIDTH).unwrap(), map)
}

fn step(lm: &str, action: Action) -> PlanStep {
    PlanStep {
        landmark: lm.into(),
        action,
        predicted: None,
    }
}

fn plan(steps: Vec<PlanStep>) -> NavPlan {
    NavPlan {
        steps,
        source: PlanSource::Symbolic,
    }
}

fn perception() -> SimulatedPerception {
    SimulatedPerception::default()
}

#[test]
fn visible_target_turns_within_quantization_and_moves() {
    let (world, map) = load("fig2");
    let pose = Pose::new(70.0, 0.0, 8.0);
    let mut state = start_state(
        &map,
        "seg13",
        plan(vec![step("room7", Action::Stop)]),
        pose,
        50,
    )
    .unwrap();
    let cfg = EpisodeConfig::default();
    navigate_step(&mut state, &map, &world, &mut perception(), &cfg);
    assert!(matches!(
        state.events[0].kind,
        EventKind::Search { detected: true, .. }
    ));
    assert!(wrap_180(state.pose.heading - 8.0).abs() <= 15.0);
    assert_eq!(state.steps_used, 1);
    assert!((state.path_length - 1.0).abs() < 1e-9);
}

#[test]
fn corner_executes_pending_turn() {
    let (world, map) = load("corner");
    let pose = Pose::new(9.5, 0.0, 0.0);
    let cfg = EpisodeConfig::default();
    let ahead = perception().range_view(&world, pose, 0.0);
    assert!(wall_floor_ratio(&ahead, 2.5) >= 0.6);

    let mut first = step("room1", Action::GoStraight);
    first.predicted = Some(Prediction {
        waypoint: "turn1".into(),
        action: Action::TurnLeft,
    });
    let mut state = start_state(
        &map,
        "seg1",
        plan(vec![first, step("room2", Action::Stop)]),
        pose,
        50,
    )
    .unwrap();
    state.step_index = 1;
    state.pending_prediction = Some(Prediction {
        waypoint: "turn1".into(),
        action: Action::TurnLeft,
    });
    navigate_step(&mut state, &map, &world, &mut perception(), &cfg);
    assert_eq!(state.pending_prediction, None);
    assert!(wrap_180(state.pose.heading - 90.0).abs() < 1e-6);
    assert!(state
        .events
        .iter()
        .any(|e| matches!(e.kind, EventKind::Corner { .. })));
    assert!(state
        .events
        .iter()
        .any(|e| matches!(e.kind, EventKind::PredictionExecuted { .. })));
    assert_eq!(state.last_action, Some(Action::TurnLeft));
}

#[test]
fn corridor_is_not_a_corner() {
    let (world, map) = load("corner");
    let pose = Pose::new(3.0, 0.0, 0.0);
    let cfg = EpisodeConfig::default();
    let view: ViewModel = perception().range_view(&world, pose, 0.0);
    assert_eq!(corner_check(&view, &cfg), Place::Corridor);
    let _ = map;
}

fn at_branch(map: &SemanticPrioriMap, heading: f64) -> AgentState {
    start_state(
        map,
        "seg1",
        plan(vec![step("branch1", Action::TakeLeftFork)]),
        Pose::new(10.0, 0.0, heading),
        50,
    )
    .unwrap()
}

#[test]
fn y_fork_refines_to_the_branch_centreline() {
    let (world, map) = load("y_fork");
    let cfg = EpisodeConfig::default();
    let state = at_branch(&map, 0.0);
    let (coarse, refined) = fork_select(
        &state,
        &world,
        &mut perception(),
        Action::TakeLeftFork,
        &cfg,
    )
    .unwrap();
    assert_eq!(coarse % 30.0, 0.0);
    assert!((refined - 45.0).abs() <= 5.0, "{refined}");
    let (_, right) = fork_select(
        &state,
        &world,
        &mut perception(),
        Action::TakeRightFork,
        &cfg,
    )
    .unwrap();
    assert!((right + 45.0).abs() <= 5.0, "{right}");
    assert!((refined + right).abs() < 1e-6);
}

#[test]
fn coarse_fork_stays_on_the_grid() {
    let (world, map) = load("y_fork");
    let cfg = EpisodeConfig {
        fine_grained: false,
        ..Default::default()
    };
    let (coarse, refined) = fork_select(
        &at_branch(&map, 0.0),
        &world,
        &mut perception(),
        Action::TakeLeftFork,
        &cfg,
    )
    .unwrap();
    assert_eq!(coarse, refined);
    assert!(coarse == 30.0 || coarse == 60.0);
}

#[test]
fn left_fork_at_right_only_branch_is_a_mismatch() {
    let (world, map) = load("right_fork");
    let cfg = EpisodeConfig::default();
    let err = fork_select(
        &at_branch(&map, 0.0),
        &world,
        &mut perception(),
        Action::TakeLeftFork,
        &cfg,
    )
    .unwrap_err();
    assert_eq!(err.action, Action::TakeLeftFork);
    assert!(fork_select(
        &at_branch(&map, 0.0),
        &world,
        &mut perception(),
        Action::TakeRightFork,
        &cfg
    )
    .is_ok());
}

fn task(world: &World, map: &SemanticPrioriMap, d: Difficulty, seed: u64) -> Task {
    generate_tasks(world, map, d, 1, seed).unwrap().remove(0)
}

#[test]
fn small_budget_fails() {
    let (world, map) = load("fig2");
    let t = task(&world, &map, Difficulty::Hard, 3);
    assert!(t.oracle_steps > 10);
    let cfg = EpisodeConfig {
        step_budget: Some(5),
        ..Default::default()
    };
    let r = run_episode(&world, &map, &t, None, &cfg);
    assert!(!r.success);
    assert_eq!(r.outcome, Outcome::BudgetExhausted);
    assert_eq!(r.steps_used, 5);
    assert!(matches!(
        r.events.last().unwrap().kind,
        EventKind::Failed { .. }
    ));
}

#[test]
fn easy_task_succeeds_in_order() {
    let (world, map) = load("fig2");
    for seed in 0..5 {
        let t = task(&world, &map, Difficulty::Easy, seed);
        let r = run_episode(&world, &map, &t, None, &EpisodeConfig::default());
        assert!(r.success, "{t:?} {:?}", r.outcome);
        assert!(closed_loop_order_holds(&r.events, r.plan.steps.len()));
        let door = map.spec.room(&t.target_room).unwrap().door;
        assert!(r.trajectory.last().unwrap().position().dist(door) <= 2.0);
        assert!(r.shortest_length > 0.0 && r.path_length >= 0.0);
    }
}

#[test]
fn episodes_are_deterministic() {
    let (world, map) = load("fig2");
    let t = task(&world, &map, Difficulty::Hard, 11);
    let cfg = EpisodeConfig::default();
    assert_eq!(
        run_episode(&world, &map, &t, None, &cfg),
        run_episode(&world, &map, &t, None, &cfg)
    );
}

#[test]
fn wrong_room_plan_is_recorded() {
    let (world, map) = load("fig2");
    let t = Task {
        start_pose: Pose::new(70.0, 0.0, 0.0),
        start_segment: "seg13".into(),
        target_room: "room8".into(),
        difficulty: Difficulty::Easy,
        oracle_steps: 4,
        shortest_length: 14.0,
    };
    let r = run_episode(
        &world,
        &map,
        &t,
        Some(plan(vec![step("room7", Action::Stop)])),
        &EpisodeConfig::default(),
    );
    assert!(!r.success);
    assert_eq!(r.outcome, Outcome::ReachedWrongTarget);
    assert!(r
        .events
        .iter()
        .any(|e| matches!(&e.kind, EventKind::ReachedWrongTarget { room } if room == "room7")));
}

#[test]
fn step_index_never_decreases() {
    let (world, map) = load("loop");
    let t = task(&world, &map, Difficulty::Hard, 2);
    let r = run_episode(&world, &map, &t, None, &EpisodeConfig::default());
    assert!(r.success);
    let updates: Vec<usize> = r
        .events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::TargetUpdate { step, .. } => Some(step),
            _ => None,
        })
        .collect();
    assert!(updates.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn easy_and_medium_fixture_tasks_all_succeed() {
    for (name, _) in fixtures::ALL {
        let (world, map) = load(name);
        for d in [Difficulty::Easy, Difficulty::Medium] {
            for base in task_pool(&world, &map, d) {
                for h in [0.0, 100.0, 215.0, 290.0] {
                    let mut t = base.clone();
                    t.start_pose.heading = h;
                    let r = run_episode(&world, &map, &t, None, &EpisodeConfig::default());
                    assert!(r.success, "{name} {t:?} {:?}", r.outcome);
                    assert!(r.steps_used <= default_budget(t.oracle_steps));
                }
            }
        }
    }
}

#[test]
fn budget_default() {
    assert_eq!(default_budget(3), 50);
    assert_eq!(default_budget(20), 80);
}

/// Shows only one label on the first panorama.
struct HideOnce {
    inner: SimulatedPerception,
    label: &'static str,
    calls: usize,
}

impl Perception for HideOnce {
    fn capture(&mut self, world: &World, pose: Pose, view_angle: f64) -> ViewModel {
        let mut v = self.inner.capture(world, pose, view_angle);
        if self.calls < 6 {
            v.detections.retain(|d| d.label == self.label);
        }
        self.calls += 1;
        v
    }
}

#[test]
fn localize_from_two_signs() {
    let (world, map) = load("fig2");
    let l = localize(
        &map,
        &world,
        Pose::new(72.0, 0.0, 0.0),
        &mut perception(),
        10,
    )
    .unwrap();
    assert_eq!(l.segment, "seg13");
    assert_eq!(l.detections_made, 1);
}

#[test]
fn second_sign_after_one_step() {
    let (world, map) = load("fig2");
    let mut p = HideOnce {
        inner: perception(),
        label: "room14",
        calls: 0,
    };
    let l = localize(&map, &world, Pose::new(72.0, 0.0, 0.0), &mut p, 10).unwrap();
    assert_eq!(l.segment, "seg13");
    assert_eq!(l.detections_made, 2);
    assert_eq!(l.steps_used, 1);
}

#[test]
fn barren_map_fails_localization() {
    let spec = PrioriMapSpec::from_json(
        r#"{"meta": {"name": "bare"},
            "waypoints": [{"id": "start", "kind": "start", "pos": [0, 0]},
                          {"id": "end1", "kind": "end", "pos": [30, 0]}],
            "path_edges": [["start", "end1"]]}"#,
    )
    .unwrap();
    let map = segment_path(&spec, &MapConfig::default()).unwrap();
    let world = build_world(&spec, DEFAULT_CORRIDOR_WIDTH).unwrap();
    let err = localize(
        &map,
        &world,
        Pose::new(5.0, 0.0, 0.0),
        &mut perception(),
        10,
    )
    .unwrap_err();
    assert_eq!(err.steps_used, 10);
    assert_eq!(err.detections_made, 11);
}

#[test]
fn localizing_episode_uses_found_segment() {
    let (world, map) = load("fig2");
    let t = task(&world, &map, Difficulty::Easy, 4);
    let cfg = EpisodeConfig {
        localize: true,
        ..Default::default()
    };
    let r = run_episode(&world, &map, &t, None, &cfg);
    assert!(r.localized_segment.is_some());
    assert!(r.detections_made >= 1);
    assert!(matches!(r.events[0].kind, EventKind::Localize { .. }));
}

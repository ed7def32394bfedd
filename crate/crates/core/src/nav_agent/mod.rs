//! Closed-loop navigation: localize from room signs, then follow a plan by
//! searching for each landmark, verifying arrival and moving on to the next.
//!
//! The agent knows its heading (odometry plus the map's north) but never its
//! map position; everything positional comes from detections and wall rays.

mod episode;
mod events;
mod localize;
mod navigate;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::perception::NoiseModel;
use crate::planner::{Action, NavPlan, PlannerConfig, Prediction};
use crate::world_sim::Pose;

pub use episode::{default_budget, run_episode, start_state};
pub use events::{closed_loop_order_holds, read_jsonl, write_jsonl, Event, EventKind};
pub use localize::{localize, Localization, LocalizationFailed};
pub use navigate::{
    corner_check, fork_select, navigate_step, navigation_views, ForkMismatch, Place,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Localizing,
    Navigating,
    Done,
    Failed,
}

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    ReachedWrongTarget,
    StoppedOutsideRadius,
    BudgetExhausted,
    LocalizationFailed,
    ForkMismatch,
    InvalidPlan,
}

/// How arrival at a room landmark is decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReachRule {
    /// Detection distance at most `landmark_reached_radius`.
    Distance,
    /// Sign mask covers at least this fraction of the image width.
    MaskArea(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    /// Forward primitives allowed; `None` means max(50, 4 x oracle steps).
    pub step_budget: Option<usize>,
    pub success_radius: f64,
    pub landmark_reached_radius: f64,
    pub reach_rule: ReachRule,
    pub corner_ratio_threshold: f64,
    pub corner_near_distance: f64,
    /// A side view is open when at most `side_open_ratio` of its rays meet a
    /// wall within this distance.
    pub side_open_distance: f64,
    pub side_open_ratio: f64,
    /// Refine directions from the detection pixel; off means every heading
    /// decision is snapped to the 30 degree grid.
    pub fine_grained: bool,
    /// Steer this far off the corridor centre toward a detected sign.
    pub approach_bias: Option<f64>,
    /// Find the start segment from signs instead of taking it from the task.
    pub localize: bool,
    pub noise: NoiseModel,
    pub planner: PlannerConfig,
    /// Distance ahead at which wall-centring aims to be back on the centreline.
    pub centering_lookahead: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            step_budget: None,
            success_radius: 2.0,
            landmark_reached_radius: 2.0,
            reach_rule: ReachRule::Distance,
            corner_ratio_threshold: 0.6,
            corner_near_distance: 2.5,
            side_open_distance: 3.0,
            side_open_ratio: 0.4,
            fine_grained: true,
            approach_bias: None,
            localize: false,
            noise: NoiseModel::default(),
            planner: PlannerConfig::default(),
            centering_lookahead: 3.0,
        }
    }
}

impl EpisodeConfig {
    pub fn is_valid(&self) -> bool {
        self.success_radius > 0.0
            && self.landmark_reached_radius > 0.0
            && self.corner_ratio_threshold > 0.0
            && self.corner_near_distance > 0.0
            && self.side_open_distance > 0.0
            && self.centering_lookahead > 0.0
            && self.step_budget.is_none_or(|b| b > 0)
            && self.noise.is_valid()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub pose: Pose,
    pub phase: Phase,
    pub plan: NavPlan,
    pub step_index: usize,
    pub pending_prediction: Option<Prediction>,
    pub last_action: Option<Action>,
    pub steps_used: usize,
    pub detections_made: usize,
    pub step_budget: usize,
    pub path_length: f64,
    /// Map nodes of the corridor being travelled, from and to.
    pub corridor: (usize, usize),
    /// Set once a side opening has closed again, so one junction is not
    /// counted twice.
    pub junction_armed: bool,
    /// A fork opening was seen last cycle; execute the fork on this one.
    pub at_junction: bool,
    pub outcome: Option<Outcome>,
    pub trajectory: Vec<Pose>,
    pub events: Vec<Event>,
    pub cycle: usize,
}

impl AgentState {
    pub fn log(&mut self, kind: EventKind) {
        self.events.push(Event {
            cycle: self.cycle,
            pose: self.pose,
            kind,
        });
    }

    pub fn fail(&mut self, outcome: Outcome, reason: impl Into<String>) {
        self.phase = Phase::Failed;
        self.outcome = Some(outcome);
        self.log(EventKind::Failed {
            reason: reason.into(),
        });
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.phase, Phase::Done | Phase::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub target_room: String,
    pub success: bool,
    pub outcome: Outcome,
    pub path_length: f64,
    pub shortest_length: f64,
    pub detections_made: usize,
    pub steps_used: usize,
    pub step_budget: usize,
    pub localized_segment: Option<String>,
    pub plan: NavPlan,
    /// Start position followed by the map positions of the planned route.
    pub planned_route: Vec<Vec2>,
    pub trajectory: Vec<Pose>,
    pub events: Vec<Event>,
}

impl TrialRecord {
    pub fn s(&self) -> f64 {
        if self.success {
            1.0
        } else {
            0.0
        }
    }
}

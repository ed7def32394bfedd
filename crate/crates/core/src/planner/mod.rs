//! Global navigation planning over a semantic priori-map.
//!
//! Planning follows three steps: relate the start segment to the target room,
//! pick the waypoints the route must pass, and turn those into first-person
//! actions. The symbolic planner here is the reference; replies from an
//! external model are parsed with [`parse_plan_response`] and scored against
//! it with [`validate_plan`].

mod actions;
mod prompt;
mod response;
mod route;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::priori_map::{Compass, MapError};

pub use actions::{action_at, plan_actions};
pub use prompt::render_hcot_prompt;
pub use response::{format_plan, parse_plan_response};
pub use route::{distances_to, plan_waypoints, relate, Route};
pub use validate::{validate_plan, PlanReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("unknown segment `{0}`")]
    UnknownSegment(String),
    #[error("unknown room `{0}`")]
    UnknownRoom(String),
    #[error("no route from `{from}` to `{to}`")]
    NoRoute { from: String, to: String },
    #[error("route reverses direction at `{0}`")]
    InvalidRoute(String),
    #[error("plan is empty")]
    EmptyPlan,
    #[error("line {line}, column {column}: {message}")]
    Grammar {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: landmark `{landmark}` is not on the map")]
    UnknownLandmark { line: usize, landmark: String },
    #[error(transparent)]
    Map(#[from] MapError),
}

pub type Result<T> = std::result::Result<T, PlanError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    GoStraight,
    TurnLeft,
    TurnRight,
    TakeLeftFork,
    TakeRightFork,
    Stop,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::GoStraight,
        Action::TurnLeft,
        Action::TurnRight,
        Action::TakeLeftFork,
        Action::TakeRightFork,
        Action::Stop,
    ];

    pub fn is_left(self) -> bool {
        matches!(self, Action::TurnLeft | Action::TakeLeftFork)
    }

    pub fn is_right(self) -> bool {
        matches!(self, Action::TurnRight | Action::TakeRightFork)
    }

    pub fn is_fork(self) -> bool {
        matches!(self, Action::TakeLeftFork | Action::TakeRightFork)
    }

    pub fn is_turn(self) -> bool {
        self.is_left() || self.is_right()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::GoStraight => "Go straight",
            Action::TurnLeft => "Turn left",
            Action::TurnRight => "Turn right",
            Action::TakeLeftFork => "Take left fork",
            Action::TakeRightFork => "Take right fork",
            Action::Stop => "Stop",
        })
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .flat_map(char::to_lowercase)
            .collect();
        Ok(match key.as_str() {
            "gostraight" | "straight" => Action::GoStraight,
            "turnleft" => Action::TurnLeft,
            "turnright" => Action::TurnRight,
            "takeleftfork" | "leftfork" => Action::TakeLeftFork,
            "takerightfork" | "rightfork" => Action::TakeRightFork,
            "stop" => Action::Stop,
            _ => return Err(format!("unknown action `{}`", s.trim())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavTask {
    pub start_segment: String,
    pub target_room: String,
    #[serde(default)]
    pub initial_heading: Option<Compass>,
}

/// Follow-up action at a waypoint that cannot be observed directly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub waypoint: String,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub landmark: String,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Prediction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanSource {
    Symbolic,
    ExternalBackend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavPlan {
    pub steps: Vec<PlanStep>,
    pub source: PlanSource,
}

impl NavPlan {
    /// Landmarks in travel order with predicted waypoints spliced in.
    pub fn landmark_sequence(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for s in &self.steps {
            out.push(s.landmark.as_str());
            if let Some(p) = &s.predicted {
                out.push(p.waypoint.as_str());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialRelation {
    pub target_bearing: Compass,
    pub hop_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// A key waypoint with a room waypoint this close counts as observable.
    pub sight_link_distance: f64,
    /// Minimum heading change (degrees) at a branch to count as a fork choice.
    pub fork_angle_deg: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            sight_link_distance: 3.0,
            fork_angle_deg: 20.0,
        }
    }
}

/// Reference planner: waypoints then actions.
pub fn plan(
    map: &crate::priori_map::SemanticPrioriMap,
    task: &NavTask,
    cfg: &PlannerConfig,
) -> Result<(Route, NavPlan)> {
    let route = plan_waypoints(map, task)?;
    let plan = plan_actions(map, &route.nodes, task.initial_heading, cfg)?;
    Ok((route, plan))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_names_round_trip() {
        for a in Action::ALL {
            assert_eq!(a.to_string().parse::<Action>().unwrap(), a);
        }
        assert_eq!(
            "go  STRAIGHT".parse::<Action>().unwrap(),
            Action::GoStraight
        );
        assert_eq!(
            "TakeLeftFork".parse::<Action>().unwrap(),
            Action::TakeLeftFork
        );
        assert!("jump".parse::<Action>().is_err());
    }
}

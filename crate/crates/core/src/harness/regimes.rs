use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{sdf, sr, MetricRecord, SdfMode};
use crate::geom::Vec2;
use crate::nav_agent::localize;
use crate::perception::{NoiseModel, SimulatedPerception};
use crate::priori_map::{
    segment_path, KeyWaypoint, MapConfig, MapMeta, PrioriMapSpec, RoomSpec, SemanticPrioriMap,
    WaypointKind,
};
use crate::world_sim::{build_world, Pose, World, DEFAULT_CORRIDOR_WIDTH};

/// How many room signs surround the localization start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LandmarkRegime {
    /// Two sign pairs around the start.
    Redundant,
    /// One sign on each side of the start; the rest are out of range.
    Minimal,
    /// Both nearby signs lie ahead, the second far enough to need exploration.
    Scarce,
}

impl LandmarkRegime {
    pub const ALL: [LandmarkRegime; 3] = [
        LandmarkRegime::Redundant,
        LandmarkRegime::Minimal,
        LandmarkRegime::Scarce,
    ];

    /// Door positions along the corridor; positive y is the north side.
    fn doors(self) -> &'static [(f64, f64)] {
        match self {
            LandmarkRegime::Redundant => &[(22.0, 1.0), (26.0, -1.0), (34.0, 1.0), (38.0, -1.0)],
            LandmarkRegime::Minimal => &[(5.0, 1.0), (26.0, -1.0), (34.0, 1.0), (55.0, -1.0)],
            LandmarkRegime::Scarce => &[(34.0, 1.0), (58.0, -1.0)],
        }
    }
}

impl fmt::Display for LandmarkRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LandmarkRegime::Redundant => "redundant",
            LandmarkRegime::Minimal => "minimal",
            LandmarkRegime::Scarce => "scarce",
        })
    }
}

impl FromStr for LandmarkRegime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "redundant" => Ok(LandmarkRegime::Redundant),
            "minimal" => Ok(LandmarkRegime::Minimal),
            "scarce" => Ok(LandmarkRegime::Scarce),
            _ => Err(format!("unknown regime `{s}`")),
        }
    }
}

/// Where localization trials start: mid-corridor, facing along it.
pub const REGIME_START: Vec2 = Vec2 { x: 30.0, y: 0.0 };
const CORRIDOR_LENGTH: f64 = 64.0;

/// A straight 64 m corridor with the regime's rooms along it.
pub fn regime_map(regime: LandmarkRegime) -> PrioriMapSpec {
    let half = DEFAULT_CORRIDOR_WIDTH / 2.0;
    let rooms = regime
        .doors()
        .iter()
        .enumerate()
        .map(|(i, &(x, side))| RoomSpec {
            id: format!("room{}", i + 1),
            center: Vec2::new(x, side * (half + 2.0)),
            door: Vec2::new(x, side * half),
            landmark_label: format!("Room {}", i + 1),
        })
        .collect();
    PrioriMapSpec {
        meta: MapMeta {
            name: format!("regime-{regime}"),
            north: Vec2::new(0.0, 1.0),
        },
        rooms,
        waypoints: vec![
            KeyWaypoint {
                id: "start".into(),
                kind: WaypointKind::Start,
                pos: Vec2::new(0.0, 0.0),
            },
            KeyWaypoint {
                id: "end1".into(),
                kind: WaypointKind::End,
                pos: Vec2::new(CORRIDOR_LENGTH, 0.0),
            },
        ],
        path_edges: vec![("start".into(), "end1".into())],
        walls: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeResult {
    pub regime: LandmarkRegime,
    pub trials: usize,
    pub sr: f64,
    pub sdf_as_written: f64,
    pub sdf_penalizing: f64,
    pub mean_detections: f64,
    pub records: Vec<MetricRecord>,
}

fn segment_at(map: &SemanticPrioriMap, p: Vec2) -> Option<&str> {
    (0..map.segments.len())
        .min_by(|&a, &b| {
            map.segment_geometry(a)
                .distance_to(p)
                .total_cmp(&map.segment_geometry(b).distance_to(p))
        })
        .map(|s| map.segments[s].id.as_str())
}

/// One localization trial per seed. A trial succeeds when the reported
/// segment is the one the robot stands on when it stops looking.
pub fn run_regime(
    regime: LandmarkRegime,
    false_negative_rate: f64,
    trials: usize,
    budget: usize,
    seed: u64,
) -> RegimeResult {
    let spec = regime_map(regime);
    let map = segment_path(&spec, &MapConfig::default()).expect("regime map is valid");
    let world = build_world(&spec, DEFAULT_CORRIDOR_WIDTH).expect("regime map builds");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records: Vec<MetricRecord> = (0..trials)
        .map(|_| {
            let noise = NoiseModel {
                false_negative_rate,
                seed: rng.random(),
                ..NoiseModel::default()
            };
            trial(&map, &world, noise, budget)
        })
        .collect();
    let n = records.len() as f64;
    RegimeResult {
        regime,
        trials,
        sr: sr(&records).unwrap_or(0.0),
        sdf_as_written: sdf(&records, SdfMode::AsWritten).unwrap_or(0.0),
        sdf_penalizing: sdf(&records, SdfMode::Penalizing).unwrap_or(0.0),
        mean_detections: records.iter().map(|r| r.detections as f64).sum::<f64>() / n.max(1.0),
        records,
    }
}

fn trial(map: &SemanticPrioriMap, world: &World, noise: NoiseModel, budget: usize) -> MetricRecord {
    let mut perception = SimulatedPerception::new(noise);
    let pose = Pose::at(REGIME_START, 0.0);
    match localize(map, world, pose, &mut perception, budget) {
        Ok(l) => MetricRecord {
            success: segment_at(map, l.pose.position()) == Some(l.segment.as_str()),
            detections: l.detections_made,
            path_length: l.path_length,
            shortest_length: 1.0,
        },
        Err(f) => MetricRecord {
            success: false,
            detections: f.detections_made,
            path_length: f.path_length,
            shortest_length: 1.0,
        },
    }
}

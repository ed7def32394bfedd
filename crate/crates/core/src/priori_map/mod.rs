//! Annotated floor plans and their compilation into segment-based semantic maps.
//!
//! A [`PrioriMapSpec`] is the declarative floor-plan annotation: rooms with
//! door points, key waypoints (start, turn, branch, end) and the corridor
//! skeleton connecting them. [`segment_path`] links every room door to the
//! nearest corridor edge and splits edges at those room waypoints, producing a
//! [`SemanticPrioriMap`] whose segments are named after their flanking rooms,
//! e.g. `seg13(room14–room7)`.

mod link;
mod segment;
mod svg;
mod text;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Segment2, Vec2};

pub use link::{link_room_waypoints, RoomLink};
pub use segment::{
    segment_direction, segment_path, Compass, MapCache, Node, NodeKind, Segment, SemanticPrioriMap,
    Turn,
};
pub use svg::render_annotated_map;
pub use text::render_semantic_text;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("room id `{0}` does not match room<N>")]
    BadRoomId(String),
    #[error("non-finite coordinate in `{0}`")]
    NonFinite(String),
    #[error("north vector must be a unit vector")]
    BadNorth,
    #[error("map has no path edges")]
    EmptyPath,
    #[error("path edge {edge} references unknown waypoint `{id}`")]
    DanglingReference { edge: usize, id: String },
    #[error("path edge {0} has zero length")]
    DegenerateEdge(usize),
    #[error("path skeleton is disconnected: `{0}` is unreachable")]
    Disconnected(String),
    #[error("room `{room}` is {distance:.3} m from the path (limit {limit} m)")]
    UnlinkableRoom {
        room: String,
        distance: f64,
        limit: f64,
    },
    #[error("rooms `{0}` and `{1}` link to the same path point")]
    CoincidentRoomWaypoints(String, String),
    #[error("direction between coincident points is undefined")]
    DegenerateDirection,
}

pub type Result<T> = std::result::Result<T, MapError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaypointKind {
    Start,
    Turn,
    Branch,
    End,
}

impl fmt::Display for WaypointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaypointKind::Start => "start",
            WaypointKind::Turn => "turn",
            WaypointKind::Branch => "branch",
            WaypointKind::End => "end",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub id: String,
    pub center: Vec2,
    pub door: Vec2,
    #[serde(default)]
    pub landmark_label: String,
}

impl RoomSpec {
    /// Square footprint centred on the room with the door on its boundary.
    pub fn footprint(&self) -> crate::geom::Rect {
        let d = self.center - self.door;
        let half = d.norm().max(0.5);
        let axis = if d.norm() > 0.0 {
            d.normalized()
        } else {
            Vec2::new(1.0, 0.0)
        };
        crate::geom::Rect {
            center: self.center,
            axis,
            half_len: half,
            half_width: half,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyWaypoint {
    pub id: String,
    pub kind: WaypointKind,
    pub pos: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub name: String,
    #[serde(default = "default_north")]
    pub north: Vec2,
}

fn default_north() -> Vec2 {
    Vec2::new(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrioriMapSpec {
    pub meta: MapMeta,
    #[serde(default)]
    pub rooms: Vec<RoomSpec>,
    pub waypoints: Vec<KeyWaypoint>,
    pub path_edges: Vec<(String, String)>,
    #[serde(default)]
    pub walls: Vec<Segment2>,
}

/// Tunables for map compilation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    pub max_link_distance: f64,
    pub tie_epsilon: f64,
    pub merge_epsilon: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            max_link_distance: 5.0,
            tie_epsilon: 1e-9,
            merge_epsilon: 1e-6,
        }
    }
}

/// Read and validate a map spec from its JSON text form.
pub fn load_map_spec<R: Read>(mut source: R) -> Result<PrioriMapSpec> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| MapError::Syntax {
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
    PrioriMapSpec::from_json(&text)
}

impl PrioriMapSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PrioriMapSpec = serde_json::from_str(text).map_err(|e| MapError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.validate(&MapConfig::default())?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map spec serializes")
    }

    pub fn waypoint(&self, id: &str) -> Option<&KeyWaypoint> {
        self.waypoints.iter().find(|w| w.id == id)
    }

    pub fn room(&self, id: &str) -> Option<&RoomSpec> {
        self.rooms.iter().find(|r| r.id == id)
    }

    /// Geometry of every path edge, in spec order. Panics on dangling ids,
    /// so only call on validated specs.
    pub fn edge_segments(&self) -> Vec<Segment2> {
        let pos: HashMap<&str, Vec2> = self
            .waypoints
            .iter()
            .map(|w| (w.id.as_str(), w.pos))
            .collect();
        self.path_edges
            .iter()
            .map(|(a, b)| Segment2::new(pos[a.as_str()], pos[b.as_str()]))
            .collect()
    }

    pub fn validate(&self, cfg: &MapConfig) -> Result<()> {
        let n = self.meta.north;
        if !n.is_finite() || (n.norm() - 1.0).abs() > 1e-6 {
            return Err(MapError::BadNorth);
        }
        let mut ids = HashSet::new();
        for w in &self.waypoints {
            if !w.pos.is_finite() {
                return Err(MapError::NonFinite(w.id.clone()));
            }
            if !ids.insert(w.id.as_str()) {
                return Err(MapError::DuplicateId(w.id.clone()));
            }
        }
        for r in &self.rooms {
            if !is_room_id(&r.id) {
                return Err(MapError::BadRoomId(r.id.clone()));
            }
            if !r.center.is_finite() || !r.door.is_finite() {
                return Err(MapError::NonFinite(r.id.clone()));
            }
            if !ids.insert(r.id.as_str()) {
                return Err(MapError::DuplicateId(r.id.clone()));
            }
        }
        for (i, w) in self.walls.iter().enumerate() {
            if !w.a.is_finite() || !w.b.is_finite() {
                return Err(MapError::NonFinite(format!("wall {i}")));
            }
        }
        if self.path_edges.is_empty() {
            return Err(MapError::EmptyPath);
        }
        let index: HashMap<&str, usize> = self
            .waypoints
            .iter()
            .enumerate()
            .map(|(i, w)| (w.id.as_str(), i))
            .collect();
        let mut adj = vec![Vec::new(); self.waypoints.len()];
        for (e, (a, b)) in self.path_edges.iter().enumerate() {
            let ia = *index
                .get(a.as_str())
                .ok_or_else(|| MapError::DanglingReference {
                    edge: e,
                    id: a.clone(),
                })?;
            let ib = *index
                .get(b.as_str())
                .ok_or_else(|| MapError::DanglingReference {
                    edge: e,
                    id: b.clone(),
                })?;
            if self.waypoints[ia].pos.dist(self.waypoints[ib].pos) <= cfg.merge_epsilon {
                return Err(MapError::DegenerateEdge(e));
            }
            adj[ia].push(ib);
            adj[ib].push(ia);
        }
        // every waypoint must belong to the single connected skeleton
        let mut seen = vec![false; self.waypoints.len()];
        let mut queue = VecDeque::from([index[self.path_edges[0].0.as_str()]]);
        seen[queue[0]] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(MapError::Disconnected(self.waypoints[i].id.clone()));
        }
        link_room_waypoints(self, cfg)?;
        Ok(())
    }
}

pub fn is_room_id(id: &str) -> bool {
    id.strip_prefix("room")
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

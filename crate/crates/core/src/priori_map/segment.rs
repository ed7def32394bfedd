use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{link_room_waypoints, MapConfig, MapError, PrioriMapSpec, Result, WaypointKind};
use crate::geom::{Segment2, Vec2};

/// Four-way compass label relative to the map's north vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compass {
    North,
    East,
    South,
    West,
}

/// Relative change between two compass headings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Straight,
    Left,
    Right,
    Reverse,
}

impl Compass {
    pub const ALL: [Compass; 4] = [Compass::North, Compass::East, Compass::South, Compass::West];

    fn index(self) -> i32 {
        match self {
            Compass::North => 0,
            Compass::East => 1,
            Compass::South => 2,
            Compass::West => 3,
        }
    }

    pub fn turn_to(self, next: Compass) -> Turn {
        match (next.index() - self.index()).rem_euclid(4) {
            0 => Turn::Straight,
            1 => Turn::Right,
            2 => Turn::Reverse,
            _ => Turn::Left,
        }
    }

    /// Heading in map degrees (counterclockwise from +x) for a given north vector.
    pub fn map_angle_deg(self, north: Vec2) -> f64 {
        north.angle_deg() - 90.0 * self.index() as f64
    }
}

impl fmt::Display for Compass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Compass::North => "north",
            Compass::East => "east",
            Compass::South => "south",
            Compass::West => "west",
        })
    }
}

impl FromStr for Compass {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "north" => Ok(Compass::North),
            "east" => Ok(Compass::East),
            "south" => Ok(Compass::South),
            "west" => Ok(Compass::West),
            other => Err(format!("unknown compass label `{other}`")),
        }
    }
}

/// Quantize the bearing from `a` to `b` to the nearest cardinal direction.
/// Exact 45 degree ties resolve clockwise.
pub fn segment_direction(a: Vec2, b: Vec2, north: Vec2) -> Result<Compass> {
    let v = b - a;
    if v.norm() == 0.0 {
        return Err(MapError::DegenerateDirection);
    }
    let east = Vec2::new(north.y, -north.x);
    let bearing = v
        .dot(east)
        .atan2(v.dot(north))
        .to_degrees()
        .rem_euclid(360.0);
    let q = bearing / 90.0;
    let mut k = q.floor();
    if q - k > 0.5 - 1e-9 {
        k += 1.0;
    }
    Ok(Compass::ALL[(k as usize) % 4])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type", content = "kind")]
pub enum NodeKind {
    Key(WaypointKind),
    Room,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub pos: Vec2,
    /// Owning room for room waypoints and for key waypoints a door merged into.
    pub room: Option<String>,
}

impl Node {
    /// The name a plan uses for this node: its room when it has one.
    pub fn landmark(&self) -> &str {
        self.room.as_deref().unwrap_or(&self.id)
    }

    pub fn waypoint_kind(&self) -> Option<WaypointKind> {
        match self.kind {
            NodeKind::Key(k) => Some(k),
            NodeKind::Room => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    /// Node indices, ordered along the host edge.
    pub endpoints: (usize, usize),
    pub flanking_rooms: Vec<String>,
    pub direction: Compass,
    pub length: f64,
    pub edge: usize,
}

#[derive(Debug, Clone)]
pub struct SemanticPrioriMap {
    pub name: String,
    pub north: Vec2,
    pub nodes: Vec<Node>,
    pub segments: Vec<Segment>,
    /// Node index → incident segment indices, in segment order.
    pub adjacency: Vec<Vec<usize>>,
    pub spec: Arc<PrioriMapSpec>,
    lookup: HashMap<String, usize>,
}

impl SemanticPrioriMap {
    /// Node index by node id or owning room id.
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn segment_index(&self, id: &str) -> Option<usize> {
        self.segments.iter().position(|s| s.id == id)
    }

    pub fn segment(&self, id: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.id == id)
    }

    pub fn segment_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().copied().find(|&s| {
            let (x, y) = self.segments[s].endpoints;
            (x == a && y == b) || (x == b && y == a)
        })
    }

    /// `(segment, neighbour)` pairs around node `n`.
    pub fn neighbors(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency[n].iter().map(move |&s| {
            let (a, b) = self.segments[s].endpoints;
            (s, if a == n { b } else { a })
        })
    }

    pub fn segment_geometry(&self, s: usize) -> Segment2 {
        let (a, b) = self.segments[s].endpoints;
        Segment2::new(self.nodes[a].pos, self.nodes[b].pos)
    }

    pub fn room_ids(&self) -> impl Iterator<Item = &str> {
        self.spec.rooms.iter().map(|r| r.id.as_str())
    }

    pub fn rooms_by_node(&self, n: usize) -> Option<&str> {
        self.nodes[n].room.as_deref()
    }
}

/// Compile a spec into its segment graph.
pub fn segment_path(spec: &PrioriMapSpec, cfg: &MapConfig) -> Result<SemanticPrioriMap> {
    let links = link_room_waypoints(spec, cfg)?;
    let mut nodes: Vec<Node> = spec
        .waypoints
        .iter()
        .map(|w| Node {
            id: w.id.clone(),
            kind: NodeKind::Key(w.kind),
            pos: w.pos,
            room: None,
        })
        .collect();
    let key_index: HashMap<&str, usize> = spec
        .waypoints
        .iter()
        .enumerate()
        .map(|(i, w)| (w.id.as_str(), i))
        .collect();

    // interior split points per edge: (arc, node)
    let mut splits: Vec<Vec<(f64, usize)>> = vec![Vec::new(); spec.path_edges.len()];
    for link in &links {
        let merged = spec
            .waypoints
            .iter()
            .position(|w| w.pos.dist(link.point) <= cfg.merge_epsilon);
        match merged {
            Some(k) => {
                if let Some(owner) = &nodes[k].room {
                    return Err(MapError::CoincidentRoomWaypoints(
                        owner.clone(),
                        link.room.clone(),
                    ));
                }
                nodes[k].room = Some(link.room.clone());
            }
            None => {
                nodes.push(Node {
                    id: link.room.clone(),
                    kind: NodeKind::Room,
                    pos: link.point,
                    room: Some(link.room.clone()),
                });
                splits[link.edge].push((link.arc, nodes.len() - 1));
            }
        }
    }

    let mut segments = Vec::new();
    for (e, (a, b)) in spec.path_edges.iter().enumerate() {
        let mut chain = vec![key_index[a.as_str()]];
        let mut interior = std::mem::take(&mut splits[e]);
        interior.sort_by(|x, y| x.0.total_cmp(&y.0));
        chain.extend(interior.into_iter().map(|(_, n)| n));
        chain.push(key_index[b.as_str()]);
        for w in chain.windows(2) {
            let (u, v) = (w[0], w[1]);
            let (pu, pv) = (nodes[u].pos, nodes[v].pos);
            let flanking_rooms = [u, v]
                .iter()
                .filter_map(|&n| nodes[n].room.clone())
                .collect();
            segments.push(Segment {
                id: format!("seg{}", segments.len() + 1),
                endpoints: (u, v),
                flanking_rooms,
                direction: segment_direction(pu, pv, spec.meta.north)?,
                length: pu.dist(pv),
                edge: e,
            });
        }
    }

    let mut adjacency = vec![Vec::new(); nodes.len()];
    for (i, s) in segments.iter().enumerate() {
        adjacency[s.endpoints.0].push(i);
        adjacency[s.endpoints.1].push(i);
    }
    let mut lookup = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        lookup.insert(n.id.clone(), i);
        if let Some(r) = &n.room {
            lookup.insert(r.clone(), i);
        }
    }
    Ok(SemanticPrioriMap {
        name: spec.meta.name.clone(),
        north: spec.meta.north,
        nodes,
        segments,
        adjacency,
        spec: Arc::new(spec.clone()),
        lookup,
    })
}

/// Compiled maps keyed by the canonical spec text, so each environment is
/// compiled once.
#[derive(Debug, Default)]
pub struct MapCache {
    maps: Mutex<HashMap<u64, Arc<SemanticPrioriMap>>>,
}

impl MapCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compile(
        &self,
        spec: &PrioriMapSpec,
        cfg: &MapConfig,
    ) -> Result<Arc<SemanticPrioriMap>> {
        let mut h = DefaultHasher::new();
        spec.to_json().hash(&mut h);
        format!("{cfg:?}").hash(&mut h);
        let key = h.finish();
        if let Some(m) = self.maps.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(m));
        }
        let compiled = Arc::new(segment_path(spec, cfg)?);
        self.maps
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| Arc::clone(&compiled));
        Ok(compiled)
    }

    pub fn len(&self) -> usize {
        self.maps.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

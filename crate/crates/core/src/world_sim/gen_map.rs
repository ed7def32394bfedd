use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_world, Corridor, DEFAULT_CORRIDOR_WIDTH};
use crate::geom::{Rect, Segment2, Vec2};
use crate::priori_map::{KeyWaypoint, MapConfig, MapMeta, PrioriMapSpec, RoomSpec, WaypointKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapParams {
    pub rooms: usize,
    #[serde(default)]
    pub branches: usize,
    #[serde(default)]
    pub seed: u64,
}

const HALF_WIDTH: f64 = DEFAULT_CORRIDOR_WIDTH / 2.0;
/// Room depth behind the door (half the square footprint).
const ROOM_HALF: f64 = 2.0;
const ROOM_PITCH: f64 = 4.5;
const ROOM_END_MARGIN: f64 = 4.0;
const SPUR_SPACING: f64 = 12.0;
const SPUR_END_MARGIN: f64 = 8.0;

struct Layout {
    points: Vec<(String, WaypointKind, Vec2)>,
    edges: Vec<(usize, usize)>,
}

impl Layout {
    fn add(&mut self, id: String, kind: WaypointKind, pos: Vec2) -> usize {
        self.points.push((id, kind, pos));
        self.points.len() - 1
    }

    fn segment(&self, e: usize) -> Segment2 {
        let (a, b) = self.edges[e];
        Segment2::new(self.points[a].2, self.points[b].2)
    }
}

fn length(rng: &mut ChaCha8Rng, lo: u32, hi: u32, scale: f64) -> f64 {
    (rng.random_range(lo..=hi) as f64 * scale).round()
}

/// Random rectilinear corridor tree: a staircase trunk of up to three legs,
/// `branches` perpendicular spurs (some ending in a corner) and rooms on both
/// sides. Layouts that collide are redrawn, growing a little every few tries.
pub fn generate_map(params: &MapParams) -> PrioriMapSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut attempt = 0u32;
    loop {
        let scale = 1.0 + 0.2 * f64::from(attempt / 8);
        if let Some(spec) = try_layout(params, &mut rng, scale) {
            return spec;
        }
        attempt += 1;
    }
}

fn try_layout(params: &MapParams, rng: &mut ChaCha8Rng, scale: f64) -> Option<PrioriMapSpec> {
    let legs = rng.random_range(1..=3usize);
    let climb = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut corners = vec![Vec2::ZERO];
    for i in 0..legs {
        let dir = if i % 2 == 0 {
            Vec2::new(1.0, 0.0)
        } else {
            Vec2::new(0.0, climb)
        };
        let last = *corners.last().unwrap();
        corners.push(last + dir * length(rng, 18, 32, scale));
    }

    // spur attachment points: (leg, arc)
    let mut attach: Vec<(usize, f64)> = Vec::new();
    for _ in 0..params.branches {
        let mut placed = false;
        for _ in 0..20 {
            let leg = rng.random_range(0..legs);
            let len = corners[leg].dist(corners[leg + 1]);
            if len < 2.0 * SPUR_END_MARGIN {
                continue;
            }
            let arc = rng
                .random_range(SPUR_END_MARGIN..=len - SPUR_END_MARGIN)
                .round();
            if attach
                .iter()
                .all(|&(l, a)| l != leg || (a - arc).abs() >= SPUR_SPACING)
            {
                attach.push((leg, arc));
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    attach.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut lay = Layout {
        points: Vec::new(),
        edges: Vec::new(),
    };
    let (mut n_turn, mut n_branch, mut n_end) = (0, 0, 0);
    let mut prev = lay.add("start".into(), WaypointKind::Start, corners[0]);
    let mut spurs: Vec<(usize, Vec2)> = Vec::new();
    for leg in 0..legs {
        let (a, b) = (corners[leg], corners[leg + 1]);
        let dir = (b - a).normalized();
        for &(_, arc) in attach.iter().filter(|(l, _)| *l == leg) {
            n_branch += 1;
            let node = lay.add(
                format!("branch{n_branch}"),
                WaypointKind::Branch,
                a + dir * arc,
            );
            lay.edges.push((prev, node));
            prev = node;
            let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            spurs.push((node, dir.perp() * side));
        }
        let node = if leg + 1 == legs {
            n_end += 1;
            lay.add(format!("end{n_end}"), WaypointKind::End, b)
        } else {
            n_turn += 1;
            lay.add(format!("turn{n_turn}"), WaypointKind::Turn, b)
        };
        lay.edges.push((prev, node));
        prev = node;
    }
    for (root, dir) in spurs {
        let from = lay.points[root].2;
        let tip = from + dir * length(rng, 10, 20, scale);
        let mut last = root;
        if rng.random_bool(0.5) {
            n_turn += 1;
            let t = lay.add(format!("turn{n_turn}"), WaypointKind::Turn, tip);
            lay.edges.push((last, t));
            last = t;
            let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let end = tip + dir.perp() * side * length(rng, 8, 16, scale);
            n_end += 1;
            let e = lay.add(format!("end{n_end}"), WaypointKind::End, end);
            lay.edges.push((last, e));
        } else {
            n_end += 1;
            let e = lay.add(format!("end{n_end}"), WaypointKind::End, tip);
            lay.edges.push((last, e));
        }
    }

    let rects: Vec<Rect> = (0..lay.edges.len())
        .map(|e| {
            Corridor {
                centerline: lay.segment(e),
                width: DEFAULT_CORRIDOR_WIDTH,
            }
            .rect()
        })
        .collect();
    // corridors meet only where their edges share a waypoint
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            let (a, b) = (lay.edges[i], lay.edges[j]);
            let share = a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1;
            if !share && rects[i].overlaps(&rects[j], -HALF_WIDTH) {
                return None;
            }
        }
    }

    // room slots, staggered by side so no two doors project to one point
    let mut slots: Vec<(usize, f64, f64, Rect, RoomSpec)> = Vec::new();
    for e in 0..lay.edges.len() {
        let seg = lay.segment(e);
        let len = seg.length();
        let dir = (seg.b - seg.a).normalized();
        for side in [1.0, -1.0] {
            let mut s = ROOM_END_MARGIN + if side > 0.0 { 0.0 } else { ROOM_PITCH / 2.0 };
            while s <= len - ROOM_END_MARGIN + 1e-9 {
                let n = dir.perp() * side;
                let door = seg.a + dir * s + n * HALF_WIDTH;
                let room = RoomSpec {
                    id: String::new(),
                    center: door + n * ROOM_HALF,
                    door,
                    landmark_label: String::new(),
                };
                let fp = room.footprint();
                if rects.iter().all(|r| !r.overlaps(&fp, 1e-6)) {
                    slots.push((e, s, side, fp, room));
                }
                s += ROOM_PITCH;
            }
        }
    }
    slots.shuffle(rng);
    let mut chosen: Vec<(usize, f64, f64, Rect, RoomSpec)> = Vec::new();
    for slot in slots {
        if chosen.len() == params.rooms {
            break;
        }
        if chosen.iter().all(|c| !c.3.overlaps(&slot.3, 1e-6)) {
            chosen.push(slot);
        }
    }
    if chosen.len() < params.rooms {
        return None;
    }
    chosen.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    let mut numbers: Vec<usize> = (1..=chosen.len()).collect();
    numbers.shuffle(rng);
    let rooms: Vec<RoomSpec> = chosen
        .into_iter()
        .zip(numbers)
        .map(|(c, k)| RoomSpec {
            id: format!("room{k}"),
            landmark_label: format!("Room {k}"),
            ..c.4
        })
        .collect();

    let spec = PrioriMapSpec {
        meta: MapMeta {
            name: format!(
                "gen-r{}-b{}-s{}",
                params.rooms, params.branches, params.seed
            ),
            north: Vec2::new(0.0, 1.0),
        },
        rooms,
        waypoints: lay
            .points
            .iter()
            .map(|(id, kind, pos)| KeyWaypoint {
                id: id.clone(),
                kind: *kind,
                pos: *pos,
            })
            .collect(),
        path_edges: lay
            .edges
            .iter()
            .map(|&(a, b)| (lay.points[a].0.clone(), lay.points[b].0.clone()))
            .collect(),
        walls: Vec::new(),
    };
    if spec.validate(&MapConfig::default()).is_err()
        || build_world(&spec, DEFAULT_CORRIDOR_WIDTH).is_err()
    {
        return None;
    }
    Some(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_and_large_maps_validate() {
        for (rooms, branches, seed) in [(1, 0, 0), (30, 3, 1), (12, 2, 5)] {
            let spec = generate_map(&MapParams {
                rooms,
                branches,
                seed,
            });
            assert_eq!(spec.rooms.len(), rooms);
            let n_branch = spec
                .waypoints
                .iter()
                .filter(|w| w.kind == WaypointKind::Branch)
                .count();
            assert_eq!(n_branch, branches);
            let text = spec.to_json();
            PrioriMapSpec::from_json(&text).unwrap();
        }
    }

    #[test]
    fn same_seed_same_map() {
        let p = MapParams {
            rooms: 10,
            branches: 2,
            seed: 42,
        };
        assert_eq!(generate_map(&p), generate_map(&p));
    }
}

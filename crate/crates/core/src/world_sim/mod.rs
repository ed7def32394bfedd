//! 2D corridor world built from a map spec: walls, door signs, robot motion
//! and line-of-sight queries, plus map and task generators.

mod gen_map;
mod tasks;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{wrap_180, wrap_360, Rect, Segment2, Vec2};
use crate::priori_map::{link_room_waypoints, MapConfig, MapError, PrioriMapSpec};

pub use gen_map::{generate_map, MapParams};
pub use tasks::{
    generate_tasks, oracle_length, task_difficulty_holds, task_pool, Difficulty, Task, TaskError,
    TaskFacts, JUNCTION_CLEARANCE,
};

pub const DEFAULT_CORRIDOR_WIDTH: f64 = 3.0;
pub const ROBOT_RADIUS: f64 = 0.3;
/// Ray hits closer than this to a target point count as reaching it.
const OCCLUSION_EPS: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("rooms `{0}` and `{1}` overlap")]
    RoomOverlap(String, String),
    #[error("corridor width {width} m does not fit a robot of radius {radius} m")]
    NarrowCorridor { width: f64, radius: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionConfig {
    pub forward_step: f64,
    pub turn_increment: f64,
    pub fov: f64,
    pub max_range: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            forward_step: 1.0,
            turn_increment: 5.0,
            fov: 60.0,
            max_range: 15.0,
        }
    }
}

/// Position in metres, heading in degrees counterclockwise from map east.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_360(heading),
        }
    }

    pub fn at(p: Vec2, heading: f64) -> Self {
        Self::new(p.x, p.y, heading)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn rotated(&self, deg: f64) -> Self {
        Self::new(self.x, self.y, self.heading + deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Motion {
    Forward,
    RotateLeft(f64),
    RotateRight(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub pose: Pose,
    pub collided: bool,
}

/// A room sign mounted on the corridor wall opposite nothing but its room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub room: String,
    pub pos: Vec2,
    /// Unit normal pointing from the wall into the corridor.
    pub normal: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub centerline: Segment2,
    pub width: f64,
}

impl Corridor {
    /// Footprint, extended by half the width past both ends so joints close.
    pub fn rect(&self) -> Rect {
        let d = self.centerline.b - self.centerline.a;
        Rect {
            center: self.centerline.a.lerp(self.centerline.b, 0.5),
            axis: d.normalized(),
            half_len: d.norm() / 2.0 + self.width / 2.0,
            half_width: self.width / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub name: String,
    pub walls: Vec<Segment2>,
    pub corridors: Vec<Corridor>,
    pub landmarks: Vec<Landmark>,
    pub rooms: Vec<(String, Rect)>,
    pub robot_radius: f64,
    pub motion: MotionConfig,
}

/// Wall pieces of `edges` not strictly inside any rectangle in `cut`.
fn clip_walls(edges: &[Segment2], cut: &[Rect], out: &mut Vec<Segment2>) {
    for e in edges {
        let mut keep = vec![(0.0, 1.0)];
        for r in cut {
            let Some((c0, c1)) = r.clip_interval(e) else {
                continue;
            };
            keep = keep
                .into_iter()
                .flat_map(|(a, b): (f64, f64)| {
                    let mut parts = Vec::new();
                    if c0 > a {
                        parts.push((a, c0.min(b)));
                    }
                    if c1 < b {
                        parts.push((c1.max(a), b));
                    }
                    parts
                })
                .filter(|(a, b)| b - a > 1e-9)
                .collect();
        }
        for (a, b) in keep {
            let s = Segment2::new(e.a.lerp(e.b, a), e.a.lerp(e.b, b));
            if s.length() > 1e-6 {
                out.push(s);
            }
        }
    }
}

/// Extrude corridors around the path edges, wall in the rooms and hang a sign
/// at every door.
pub fn build_world(spec: &PrioriMapSpec, corridor_width: f64) -> Result<World, WorldError> {
    if corridor_width <= 2.0 * ROBOT_RADIUS {
        return Err(WorldError::NarrowCorridor {
            width: corridor_width,
            radius: ROBOT_RADIUS,
        });
    }
    let cfg = MapConfig::default();
    spec.validate(&cfg)?;
    let corridors: Vec<Corridor> = spec
        .edge_segments()
        .into_iter()
        .map(|centerline| Corridor {
            centerline,
            width: corridor_width,
        })
        .collect();
    let rects: Vec<Rect> = corridors.iter().map(Corridor::rect).collect();

    let rooms: Vec<(String, Rect)> = spec
        .rooms
        .iter()
        .map(|r| (r.id.clone(), r.footprint()))
        .collect();
    for (i, (a, ra)) in rooms.iter().enumerate() {
        for (b, rb) in &rooms[i + 1..] {
            if ra.overlaps(rb, 1e-6) {
                return Err(WorldError::RoomOverlap(a.clone(), b.clone()));
            }
        }
    }

    let mut walls = Vec::new();
    for (i, r) in rects.iter().enumerate() {
        let others: Vec<Rect> = rects
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| *r)
            .collect();
        clip_walls(&r.edges(), &others, &mut walls);
    }
    for (_, r) in &rooms {
        clip_walls(&r.edges(), &rects, &mut walls);
    }
    walls.extend(spec.walls.iter().copied());

    let edges = spec.edge_segments();
    let mut landmarks = Vec::new();
    for link in link_room_waypoints(spec, &cfg)? {
        let room = spec.room(&link.room).expect("linked room exists");
        let off = room.door - link.point;
        let n = if off.norm() > 1e-9 {
            off.normalized()
        } else {
            let e = &edges[link.edge];
            (e.b - e.a).normalized().perp()
        };
        landmarks.push(Landmark {
            room: link.room.clone(),
            pos: link.point + n * (corridor_width / 2.0),
            normal: -n,
        });
    }
    landmarks.sort_by(|a, b| a.room.cmp(&b.room));

    Ok(World {
        name: spec.meta.name.clone(),
        walls,
        corridors,
        landmarks,
        rooms,
        robot_radius: ROBOT_RADIUS,
        motion: MotionConfig::default(),
    })
}

impl World {
    pub fn landmark(&self, room: &str) -> Option<&Landmark> {
        self.landmarks.iter().find(|l| l.room == room)
    }

    /// Distance along a ray to the nearest wall, capped at `max_range`.
    pub fn ray_distance(&self, origin: Vec2, bearing_deg: f64) -> f64 {
        let dir = Vec2::from_angle_deg(bearing_deg);
        self.walls
            .iter()
            .filter_map(|w| w.ray_hit(origin, dir))
            .fold(self.motion.max_range, f64::min)
    }

    /// Whether a wall blocks the straight line from `a` to `b`.
    pub fn occluded(&self, a: Vec2, b: Vec2) -> bool {
        let d = b - a;
        let len = d.norm();
        if len < OCCLUSION_EPS {
            return false;
        }
        let dir = d * (1.0 / len);
        self.walls
            .iter()
            .filter_map(|w| w.ray_hit(a, dir))
            .any(|t| t < len - OCCLUSION_EPS)
    }

    /// Inside a corridor and at least a robot radius from every wall.
    pub fn is_free(&self, p: Vec2) -> bool {
        self.corridors.iter().any(|c| c.rect().contains(p, 1e-9))
            && self
                .walls
                .iter()
                .all(|w| w.distance_to(p) >= self.robot_radius - 1e-9)
    }

    pub fn bounds(&self) -> Vec<Vec2> {
        let mut pts: Vec<Vec2> = self.walls.iter().flat_map(|w| [w.a, w.b]).collect();
        for c in &self.corridors {
            pts.extend(c.rect().corners());
        }
        pts
    }
}

/// Apply one motion primitive. A Forward that would bring the robot within
/// its radius of a wall leaves the pose unchanged and sets `collided`.
pub fn step_robot(world: &World, pose: Pose, motion: Motion) -> StepOutcome {
    match motion {
        Motion::RotateLeft(d) => StepOutcome {
            pose: pose.rotated(d),
            collided: false,
        },
        Motion::RotateRight(d) => StepOutcome {
            pose: pose.rotated(-d),
            collided: false,
        },
        Motion::Forward => {
            let from = pose.position();
            let to = from + Vec2::from_angle_deg(pose.heading) * world.motion.forward_step;
            let sweep = Segment2::new(from, to);
            let blocked = world
                .walls
                .iter()
                .any(|w| w.distance_to_segment(&sweep) < world.robot_radius - 1e-9)
                || !world.is_free(to);
            if blocked {
                StepOutcome {
                    pose,
                    collided: true,
                }
            } else {
                StepOutcome {
                    pose: Pose::at(to, pose.heading),
                    collided: false,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleLandmark {
    pub room: String,
    /// Degrees relative to the robot heading, positive to the left.
    pub bearing: f64,
    pub distance: f64,
}

/// Signs inside the view cone centred `view_angle` degrees off the heading.
pub fn visible_landmarks(world: &World, pose: Pose, view_angle: f64) -> Vec<VisibleLandmark> {
    visible_landmarks_with(
        world,
        pose,
        view_angle,
        world.motion.fov,
        world.motion.max_range,
    )
}

pub fn visible_landmarks_with(
    world: &World,
    pose: Pose,
    view_angle: f64,
    fov: f64,
    max_range: f64,
) -> Vec<VisibleLandmark> {
    let p = pose.position();
    let mut out: Vec<VisibleLandmark> = world
        .landmarks
        .iter()
        .filter_map(|l| {
            let ray = l.pos - p;
            let distance = ray.norm();
            if distance > max_range || distance < 1e-9 || l.normal.dot(ray) >= 0.0 {
                return None;
            }
            let bearing = wrap_180(ray.angle_deg() - pose.heading);
            if wrap_180(bearing - view_angle).abs() > fov / 2.0 + 1e-9 {
                return None;
            }
            if world.occluded(p, l.pos) {
                return None;
            }
            Some(VisibleLandmark {
                room: l.room.clone(),
                bearing,
                distance,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.room.cmp(&b.room))
    });
    out
}

/// Whether the sign of `room` can be seen from `p` in some direction.
pub fn visible_from(world: &World, p: Vec2, room: &str) -> bool {
    (0..12).any(|k| {
        visible_landmarks(world, Pose::at(p, 0.0), 30.0 * k as f64)
            .iter()
            .any(|v| v.room == room)
    })
}

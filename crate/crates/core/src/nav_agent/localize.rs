use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Event, EventKind};
use crate::geom::{wrap_180, Vec2};
use crate::perception::{Perception, LOCALIZATION_ANGLES};
use crate::priori_map::SemanticPrioriMap;
use crate::world_sim::{step_robot, Motion, Pose, World};

/// Forward clearance needed to keep exploring in the current heading.
const EXPLORE_CLEARANCE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub segment: String,
    /// Map direction of the segment, oriented toward the sign seen closest
    /// to straight ahead.
    pub heading_estimate: f64,
    pub detections_made: usize,
    pub pose: Pose,
    pub steps_used: usize,
    pub path_length: f64,
    pub trajectory: Vec<Pose>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationFailed {
    pub detections_made: usize,
    pub pose: Pose,
    pub steps_used: usize,
    pub path_length: f64,
    pub trajectory: Vec<Pose>,
    pub events: Vec<Event>,
}

struct Sighting {
    /// Sign position relative to the start of localization.
    rel: Vec2,
    /// |direction| off the heading when seen.
    off_axis: f64,
}

/// Whether the robot at `at` lies between signs `a` and `b` measured along
/// `axis`, the map direction between their room waypoints.
fn brackets(a: Vec2, b: Vec2, at: Vec2, axis: Vec2) -> bool {
    let u = if (b - a).dot(axis) < 0.0 { -axis } else { axis };
    (at - a).dot(u) > 0.0 && (at - b).dot(u) < 0.0
}

fn segment_to_node(map: &SemanticPrioriMap, seg: usize, node: usize) -> f64 {
    map.segment_geometry(seg).distance_to(map.nodes[node].pos)
}

/// Segment flanked by a bracketing sign pair, else the one closest to a pair.
fn pick_segment(
    map: &SemanticPrioriMap,
    seen: &BTreeMap<String, Sighting>,
    at: Vec2,
) -> Option<(usize, bool)> {
    let known: Vec<(&String, &Sighting, usize)> = seen
        .iter()
        .filter_map(|(k, s)| {
            map.node_index(k)
                .filter(|&n| map.nodes[n].room.is_some())
                .map(|n| (k, s, n))
        })
        .collect();
    if known.len() < 2 {
        return None;
    }
    let mut pairs = Vec::new();
    for i in 0..known.len() {
        for j in i + 1..known.len() {
            let d = (known[i].1.rel - at).norm() + (known[j].1.rel - at).norm();
            pairs.push((d, i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let closest = |a: usize, b: usize| {
        (0..map.segments.len()).min_by(|&x, &y| {
            let dx = segment_to_node(map, x, a) + segment_to_node(map, x, b);
            let dy = segment_to_node(map, y, a) + segment_to_node(map, y, b);
            dx.total_cmp(&dy).then(x.cmp(&y))
        })
    };
    let between = |i: usize, j: usize| {
        let axis = map.nodes[known[j].2].pos - map.nodes[known[i].2].pos;
        brackets(known[i].1.rel, known[j].1.rel, at, axis)
    };
    for &(_, i, j) in &pairs {
        if between(i, j) {
            if let Some(s) = map.segment_between(known[i].2, known[j].2) {
                return Some((s, true));
            }
        }
    }
    for &(_, i, j) in &pairs {
        if between(i, j) {
            return closest(known[i].2, known[j].2).map(|s| (s, true));
        }
    }
    let &(_, i, j) = pairs.first()?;
    closest(known[i].2, known[j].2).map(|s| (s, false))
}

/// Find the segment the robot is on from room signs.
///
/// Each attempt captures the six-view panorama; sightings accumulate across
/// attempts with positions carried along by odometry. A segment is accepted
/// once a sign pair brackets the robot. Otherwise the robot moves one step
/// and tries again; when `budget` runs out the best one-sided guess is
/// returned if two signs were seen at all.
pub fn localize<P: Perception + ?Sized>(
    map: &SemanticPrioriMap,
    world: &World,
    pose: Pose,
    perception: &mut P,
    budget: usize,
) -> Result<Localization, LocalizationFailed> {
    let mut pose = pose;
    let mut odo = Vec2::ZERO;
    let mut seen: BTreeMap<String, Sighting> = BTreeMap::new();
    let mut events = Vec::new();
    let mut trajectory = vec![pose];
    let (mut detections_made, mut steps_used, mut path_length) = (0usize, 0usize, 0.0);
    let mut explore_heading: Option<f64> = None;

    loop {
        let pano = perception
            .capture_panorama(world, pose, &LOCALIZATION_ANGLES)
            .expect("angle set is not empty");
        detections_made += 1;
        for v in &pano.views {
            for d in &v.detections {
                let rel_dir = v.view_angle + d.bearing;
                seen.insert(
                    d.label.clone(),
                    Sighting {
                        rel: odo + Vec2::from_angle_deg(pose.heading + rel_dir) * d.distance,
                        off_axis: wrap_180(rel_dir).abs(),
                    },
                );
            }
        }
        let out_of_budget = steps_used >= budget;
        let pick =
            pick_segment(map, &seen, odo).filter(|(_, bracketed)| *bracketed || out_of_budget);
        events.push(Event {
            cycle: detections_made - 1,
            pose,
            kind: EventKind::Localize {
                attempt: detections_made,
                labels: seen.keys().cloned().collect(),
                segment: pick.map(|(s, _)| map.segments[s].id.clone()),
            },
        });
        if let Some((s, _)) = pick {
            let (u, v) = map.segments[s].endpoints;
            let ahead = seen
                .iter()
                .filter(|(k, _)| {
                    [u, v]
                        .iter()
                        .any(|&n| map.nodes[n].room.as_deref() == Some(k.as_str()))
                })
                .min_by(|a, b| a.1.off_axis.total_cmp(&b.1.off_axis))
                .and_then(|(k, _)| map.node_index(k));
            let (from, to) = if ahead == Some(u) { (v, u) } else { (u, v) };
            return Ok(Localization {
                segment: map.segments[s].id.clone(),
                heading_estimate: (map.nodes[to].pos - map.nodes[from].pos).angle_deg(),
                detections_made,
                pose,
                steps_used,
                path_length,
                trajectory,
                events,
            });
        }
        if out_of_budget {
            return Err(LocalizationFailed {
                detections_made,
                pose,
                steps_used,
                path_length,
                trajectory,
                events,
            });
        }

        // explore: keep going while the way ahead is clear, else take the
        // most open of twelve directions
        let ahead = perception.ray_sweep(world, pose, 0.0, 0.0, 1.0)[0].1;
        if explore_heading.is_none() || ahead < EXPLORE_CLEARANCE {
            let best = perception
                .ray_sweep(world, pose, 0.0, 180.0, 30.0)
                .into_iter()
                .take(12)
                .fold((0.0, f64::NEG_INFINITY), |acc, (a, d)| {
                    if d > acc.1 + 1e-9 {
                        (a, d)
                    } else {
                        acc
                    }
                });
            let turn = if ahead >= EXPLORE_CLEARANCE {
                0.0
            } else {
                best.0
            };
            if turn != 0.0 {
                let motion = if turn > 0.0 {
                    Motion::RotateLeft(turn)
                } else {
                    Motion::RotateRight(-turn)
                };
                pose = step_robot(world, pose, motion).pose;
            }
            explore_heading = Some(pose.heading);
        }
        let step = step_robot(world, pose, Motion::Forward);
        steps_used += 1;
        if !step.collided {
            let moved = step.pose.position() - pose.position();
            odo = odo + moved;
            path_length += moved.norm();
        }
        pose = step.pose;
        trajectory.push(pose);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_test() {
        let a = Vec2::new(-4.0, 1.5);
        let b = Vec2::new(4.0, 1.5);
        let x = Vec2::new(1.0, 0.0);
        assert!(brackets(a, b, Vec2::ZERO, x));
        assert!(brackets(b, a, Vec2::ZERO, x));
        assert!(!brackets(a, b, Vec2::new(5.0, 0.0), x));
        assert!(!brackets(b, Vec2::new(8.0, 1.5), Vec2::ZERO, x));
        // opposite walls: a diagonal axis would wrongly accept this
        assert!(!brackets(
            Vec2::new(1.0, 1.5),
            Vec2::new(5.0, -1.5),
            Vec2::ZERO,
            x
        ));
    }
}

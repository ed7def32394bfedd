use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{NavTask, PlanError, Result, SpatialRelation};
use crate::priori_map::{is_room_id, segment_direction, SemanticPrioriMap};

const DIST_EPS: f64 = 1e-9;

/// Node route from the far end of the start segment to the target's room
/// waypoint. `nodes[0]` is the start-segment endpoint the robot leaves
/// behind and `nodes[1]` the endpoint it heads for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub nodes: Vec<usize>,
    /// Summed segment length from `nodes[1]` to the target.
    pub length: f64,
    /// Length of the start segment, not included in `length`.
    pub start_length: f64,
}

impl Route {
    pub fn ids<'m>(&self, map: &'m SemanticPrioriMap) -> Vec<&'m str> {
        self.nodes
            .iter()
            .map(|&n| map.nodes[n].id.as_str())
            .collect()
    }

    pub fn hop_count(&self) -> usize {
        self.nodes.len() - 1
    }
}

#[derive(Clone)]
struct Label {
    dist: f64,
    /// node indices from this node to the target
    path: Vec<usize>,
}

fn compare(map: &SemanticPrioriMap, a: &Label, b: &Label) -> Ordering {
    if (a.dist - b.dist).abs() > DIST_EPS {
        return a.dist.total_cmp(&b.dist);
    }
    a.path.len().cmp(&b.path.len()).then_with(|| {
        let ia = a.path.iter().map(|&n| map.nodes[n].id.as_str());
        let ib = b.path.iter().map(|&n| map.nodes[n].id.as_str());
        ia.cmp(ib)
    })
}

/// Best path from every node to `target` under (length, node count, id order).
fn paths_to(map: &SemanticPrioriMap, target: usize) -> Vec<Option<Label>> {
    let n = map.nodes.len();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut done = vec![false; n];
    best[target] = Some(Label {
        dist: 0.0,
        path: vec![target],
    });
    loop {
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if done[i] {
                continue;
            }
            if let Some(l) = &best[i] {
                let better = match pick {
                    None => true,
                    Some(p) => compare(map, l, best[p].as_ref().unwrap()) == Ordering::Less,
                };
                if better {
                    pick = Some(i);
                }
            }
        }
        let Some(u) = pick else { break };
        done[u] = true;
        let lu = best[u].clone().unwrap();
        for (s, v) in map.neighbors(u) {
            if done[v] {
                continue;
            }
            let mut path = Vec::with_capacity(lu.path.len() + 1);
            path.push(v);
            path.extend_from_slice(&lu.path);
            let cand = Label {
                dist: lu.dist + map.segments[s].length,
                path,
            };
            let replace = match &best[v] {
                None => true,
                Some(cur) => compare(map, &cand, cur) == Ordering::Less,
            };
            if replace {
                best[v] = Some(cand);
            }
        }
    }
    best
}

/// Shortest route length from every node to `target`; `None` if unreachable.
pub fn distances_to(map: &SemanticPrioriMap, target: usize) -> Vec<Option<f64>> {
    paths_to(map, target)
        .into_iter()
        .map(|l| l.map(|l| l.dist))
        .collect()
}

fn resolve_target(map: &SemanticPrioriMap, task: &NavTask) -> Result<usize> {
    if !is_room_id(&task.target_room) || map.spec.room(&task.target_room).is_none() {
        return Err(PlanError::UnknownRoom(task.target_room.clone()));
    }
    map.node_index(&task.target_room)
        .ok_or_else(|| PlanError::UnknownRoom(task.target_room.clone()))
}

/// Shortest route by summed segment length from either end of the start
/// segment to the target room waypoint.
pub fn plan_waypoints(map: &SemanticPrioriMap, task: &NavTask) -> Result<Route> {
    let seg = map
        .segment_index(&task.start_segment)
        .ok_or_else(|| PlanError::UnknownSegment(task.start_segment.clone()))?;
    let target = resolve_target(map, task)?;
    let best = paths_to(map, target);
    let (u, v) = map.segments[seg].endpoints;
    let no_route = || PlanError::NoRoute {
        from: task.start_segment.clone(),
        to: task.target_room.clone(),
    };
    let (entry, other) = match (&best[u], &best[v]) {
        (None, None) => return Err(no_route()),
        (Some(_), None) => (u, v),
        (None, Some(_)) => (v, u),
        (Some(a), Some(b)) => {
            if compare(map, a, b) != Ordering::Greater {
                (u, v)
            } else {
                (v, u)
            }
        }
    };
    let label = best[entry].as_ref().ok_or_else(no_route)?;
    let mut nodes = vec![other];
    nodes.extend_from_slice(&label.path);
    Ok(Route {
        nodes,
        length: label.dist,
        start_length: map.segments[seg].length,
    })
}

/// Where the target lies relative to the start segment, and how many
/// segments separate them.
pub fn relate(map: &SemanticPrioriMap, task: &NavTask) -> Result<SpatialRelation> {
    let route = plan_waypoints(map, task)?;
    let seg = map
        .segment_index(&task.start_segment)
        .expect("checked by plan_waypoints");
    let g = map.segment_geometry(seg);
    let mid = g.a.lerp(g.b, 0.5);
    let room = map
        .spec
        .room(&task.target_room)
        .expect("checked by plan_waypoints");
    Ok(SpatialRelation {
        target_bearing: segment_direction(mid, room.center, map.north)?,
        hop_count: route.hop_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::priori_map::{segment_path, Compass, MapConfig};

    fn fig2() -> SemanticPrioriMap {
        segment_path(&fixtures::load("fig2").unwrap(), &MapConfig::default()).unwrap()
    }

    fn task(seg: &str, room: &str) -> NavTask {
        NavTask {
            start_segment: seg.into(),
            target_room: room.into(),
            initial_heading: None,
        }
    }

    #[test]
    fn adjacent_target_is_single_hop() {
        let map = fig2();
        let r = plan_waypoints(&map, &task("seg13", "room7")).unwrap();
        assert_eq!(r.ids(&map), vec!["room14", "room7"]);
        assert_eq!(r.length, 0.0);
        assert_eq!(relate(&map, &task("seg13", "room7")).unwrap().hop_count, 1);
    }

    #[test]
    fn fig2_route_passes_turn2() {
        let map = fig2();
        let r = plan_waypoints(&map, &task("seg13", "room17")).unwrap();
        assert_eq!(
            r.ids(&map),
            vec!["room14", "room7", "room8", "turn2", "room17"]
        );
        assert!((r.length - 24.0).abs() < 1e-9);
        let rel = relate(&map, &task("seg13", "room17")).unwrap();
        assert_eq!(rel.hop_count, 4);
        // seg13 midpoint (72, 0) to room17 centre (88.5, 8)
        assert_eq!(rel.target_bearing, Compass::East);
    }

    #[test]
    fn unknown_ids_rejected() {
        let map = fig2();
        assert_eq!(
            plan_waypoints(&map, &task("seg99", "room7")),
            Err(PlanError::UnknownSegment("seg99".into()))
        );
        assert_eq!(
            plan_waypoints(&map, &task("seg1", "room99")),
            Err(PlanError::UnknownRoom("room99".into()))
        );
        assert_eq!(
            plan_waypoints(&map, &task("seg1", "turn2")),
            Err(PlanError::UnknownRoom("turn2".into()))
        );
    }
}

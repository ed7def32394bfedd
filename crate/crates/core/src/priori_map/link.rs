use serde::{Deserialize, Serialize};

use super::{MapConfig, MapError, PrioriMapSpec, Result};
use crate::geom::Vec2;

/// A room door projected onto its nearest corridor edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomLink {
    pub room: String,
    pub point: Vec2,
    /// Index of the host edge in `path_edges`.
    pub edge: usize,
    /// Arc length from the host edge's first waypoint.
    pub arc: f64,
    pub distance: f64,
}

/// Link each room to the path by orthogonal projection of its door onto the
/// nearest edge. Output is sorted by host edge, then arc length.
pub fn link_room_waypoints(spec: &PrioriMapSpec, cfg: &MapConfig) -> Result<Vec<RoomLink>> {
    let edges = spec.edge_segments();
    let mut links = Vec::with_capacity(spec.rooms.len());
    for room in &spec.rooms {
        let mut best: Option<RoomLink> = None;
        for (i, e) in edges.iter().enumerate() {
            let (point, arc, distance) = e.project(room.door);
            let better = match &best {
                None => true,
                // ties keep the earlier edge
                Some(b) => distance < b.distance - cfg.tie_epsilon,
            };
            if better {
                best = Some(RoomLink {
                    room: room.id.clone(),
                    point,
                    edge: i,
                    arc,
                    distance,
                });
            }
        }
        let link = best.expect("validated spec has at least one edge");
        if link.distance > cfg.max_link_distance {
            return Err(MapError::UnlinkableRoom {
                room: room.id.clone(),
                distance: link.distance,
                limit: cfg.max_link_distance,
            });
        }
        links.push(link);
    }
    links.sort_by(|a, b| a.edge.cmp(&b.edge).then(a.arc.total_cmp(&b.arc)));
    for (i, a) in links.iter().enumerate() {
        for b in &links[i + 1..] {
            if a.point.dist(b.point) <= cfg.merge_epsilon {
                return Err(MapError::CoincidentRoomWaypoints(
                    a.room.clone(),
                    b.room.clone(),
                ));
            }
        }
    }
    Ok(links)
}

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::planner::Action;
use crate::world_sim::Pose;

/// One record of the episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Decision cycle the event belongs to.
    pub cycle: usize,
    pub pose: Pose,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Localize {
        attempt: usize,
        labels: Vec<String>,
        segment: Option<String>,
    },
    Search {
        step: usize,
        target: String,
        views: Vec<f64>,
        detected: bool,
    },
    Verify {
        step: usize,
        landmark: String,
        distance: Option<f64>,
    },
    TargetUpdate {
        step: usize,
        next: Option<String>,
    },
    Corner {
        waypoint: String,
        ratio: f64,
    },
    Turn {
        waypoint: String,
        action: Action,
        heading: f64,
    },
    Fork {
        waypoint: String,
        action: Action,
        coarse: f64,
        refined: f64,
    },
    PredictionExecuted {
        waypoint: String,
        action: Action,
    },
    Collision,
    ReachedWrongTarget {
        room: String,
    },
    Arrived {
        room: String,
    },
    Failed {
        reason: String,
    },
}

pub fn write_jsonl<W: Write>(events: &[Event], mut out: W) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> io::Result<Vec<Event>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(io::Error::other)?);
    }
    Ok(out)
}

/// Whether every plan step in `0..steps` has a search, then a verification,
/// then a target update, in log order.
pub fn closed_loop_order_holds(events: &[Event], steps: usize) -> bool {
    (0..steps).all(|i| {
        let pos = |f: &dyn Fn(&EventKind) -> bool| events.iter().position(|e| f(&e.kind));
        let search = pos(&|k| matches!(k, EventKind::Search { step, .. } if *step == i));
        let verify = pos(&|k| matches!(k, EventKind::Verify { step, .. } if *step == i));
        let update = pos(&|k| matches!(k, EventKind::TargetUpdate { step, .. } if *step == i));
        matches!((search, verify, update), (Some(s), Some(v), Some(u)) if s < v && v < u)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(kind: EventKind) -> Event {
        Event {
            cycle: 0,
            pose: Pose::new(0.0, 0.0, 0.0),
            kind,
        }
    }

    #[test]
    fn jsonl_round_trip_and_order() {
        let events = vec![
            ev(EventKind::Search {
                step: 0,
                target: "room1".into(),
                views: vec![0.0],
                detected: true,
            }),
            ev(EventKind::Verify {
                step: 0,
                landmark: "room1".into(),
                distance: Some(1.5),
            }),
            ev(EventKind::TargetUpdate {
                step: 0,
                next: None,
            }),
        ];
        let mut buf = Vec::new();
        write_jsonl(&events, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("{\"cycle\":0,"));
        assert_eq!(read_jsonl(&buf[..]).unwrap(), events);
        assert!(closed_loop_order_holds(&events, 1));
        let swapped = vec![events[1].clone(), events[0].clone(), events[2].clone()];
        assert!(!closed_loop_order_holds(&swapped, 1));
    }
}

//! Priori-map guided embodied navigation for functional buildings.
//!
//! The crate compiles annotated floor plans into segment-based semantic maps
//! ([`priori_map`]), plans landmark/action sequences over them ([`planner`]),
//! simulates a 2D building with bearing-based perception ([`world_sim`],
//! [`perception`]), runs a closed-loop landmark-following agent
//! ([`nav_agent`]) and scores episodes ([`harness`]).

pub mod fixtures;
pub mod geom;
pub mod harness;
pub mod nav_agent;
pub mod perception;
pub mod planner;
pub mod priori_map;
pub mod svg;
pub mod world_sim;

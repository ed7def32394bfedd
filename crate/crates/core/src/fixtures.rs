//! Hand-built map specs bundled with the crate.

use crate::priori_map::PrioriMapSpec;

/// Long corridor with five spurs, rooms 14/7/8 before a left turn and room 17
/// after it. Segment 13 lies between room14 and room7.
pub const FIG2: &str = include_str!("../fixtures/fig2.json");
/// T junction with rooms on both branches.
pub const T_FORK: &str = include_str!("../fixtures/t_fork.json");
/// Symmetric Y junction with branches at ±45 degrees.
pub const Y_FORK: &str = include_str!("../fixtures/y_fork.json");
/// Junction that only opens to the right (plus straight ahead).
pub const RIGHT_FORK: &str = include_str!("../fixtures/right_fork.json");
/// Single left-hand corner.
pub const CORNER: &str = include_str!("../fixtures/corner.json");
/// Two routes between a pair of branches: a direct corridor and a longer loop.
pub const LOOP: &str = include_str!("../fixtures/loop.json");

pub const ALL: [(&str, &str); 6] = [
    ("fig2", FIG2),
    ("t_fork", T_FORK),
    ("y_fork", Y_FORK),
    ("right_fork", RIGHT_FORK),
    ("corner", CORNER),
    ("loop", LOOP),
];

pub fn load(name: &str) -> Option<PrioriMapSpec> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| PrioriMapSpec::from_json(text).expect("bundled fixture is valid"))
}

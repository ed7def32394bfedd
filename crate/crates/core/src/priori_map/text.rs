use std::fmt::Write;

use super::SemanticPrioriMap;

/// Structured text form of the semantic map.
///
/// Three blocks: one `segN(roomA–roomB)` line per segment, one adjacency line
/// per node, and one `from X to Y, the direction is D` line per segment.
/// Lines end in LF; output is byte-deterministic.
pub fn render_semantic_text(map: &SemanticPrioriMap) -> String {
    let mut out = String::new();
    out.push_str("# segments\n");
    for s in &map.segments {
        let (a, b) = s.endpoints;
        let left = map.nodes[a].room.as_deref().unwrap_or("");
        let right = map.nodes[b].room.as_deref().unwrap_or("");
        let _ = writeln!(out, "{}({}\u{2013}{})", s.id, left, right);
    }
    out.push_str("# adjacency\n");
    for (i, n) in map.nodes.iter().enumerate() {
        let segs: Vec<&str> = map.adjacency[i]
            .iter()
            .map(|&s| map.segments[s].id.as_str())
            .collect();
        let _ = writeln!(out, "{}: {}", n.id, segs.join(", "));
    }
    out.push_str("# directions\n");
    for s in &map.segments {
        let (a, b) = s.endpoints;
        let _ = writeln!(
            out,
            "from {} to {}, the direction is {}",
            map.nodes[a].id, map.nodes[b].id, s.direction
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priori_map::{segment_path, MapConfig, PrioriMapSpec};

    #[test]
    fn empty_flank_formatting() {
        let spec = PrioriMapSpec::from_json(
            r#"{"meta": {"name": "m"},
                "waypoints": [{"id": "start", "kind": "start", "pos": [0, 0]},
                              {"id": "turn1", "kind": "turn", "pos": [0, -5]}],
                "path_edges": [["start", "turn1"]]}"#,
        )
        .unwrap();
        let map = segment_path(&spec, &MapConfig::default()).unwrap();
        let text = render_semantic_text(&map);
        assert_eq!(
            text,
            "# segments\nseg1(\u{2013})\n# adjacency\nstart: seg1\nturn1: seg1\n# directions\n\
             from start to turn1, the direction is south\n"
        );
    }
}

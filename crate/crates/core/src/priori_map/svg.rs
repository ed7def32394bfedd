use std::fmt::Write;

use super::{NodeKind, SemanticPrioriMap};
use crate::geom::Vec2;
use crate::svg::{escape, Canvas};

/// Annotated priori-map: walls, path polylines, room outlines and a text tag
/// for every room id, segment id and key waypoint id.
pub fn render_annotated_map(map: &SemanticPrioriMap) -> String {
    let mut pts: Vec<Vec2> = map.nodes.iter().map(|n| n.pos).collect();
    for w in &map.spec.walls {
        pts.push(w.a);
        pts.push(w.b);
    }
    for r in &map.spec.rooms {
        pts.extend(r.footprint().corners());
    }
    let canvas = Canvas::fit(&pts, 20.0, 3.0);
    let mut body = String::new();

    body.push_str("<g id=\"walls\" stroke=\"#444\" stroke-width=\"2\">\n");
    for w in &map.spec.walls {
        let _ = writeln!(body, "{}", canvas.line(w.a, w.b));
    }
    body.push_str(
        "</g>\n<g id=\"rooms\" fill=\"#f4efe1\" stroke=\"#8a7a50\" stroke-width=\"1\">\n",
    );
    for r in &map.spec.rooms {
        let _ = writeln!(body, "{}", canvas.polygon(&r.footprint().corners()));
    }
    body.push_str("</g>\n<g id=\"path\" stroke=\"#2f6fb0\" stroke-width=\"3\" fill=\"none\">\n");
    for (i, s) in map.segments.iter().enumerate() {
        let g = map.segment_geometry(i);
        let attr = format!("data-seg=\"{}\"", escape(&s.id));
        let _ = writeln!(body, "{}", canvas.line_with(g.a, g.b, &attr));
    }
    body.push_str("</g>\n<g id=\"tags\" font-family=\"monospace\" font-size=\"11\">\n");
    for r in &map.spec.rooms {
        let _ = writeln!(body, "{}", canvas.text(r.center, &r.id, "#5a4a20"));
    }
    for (i, s) in map.segments.iter().enumerate() {
        let g = map.segment_geometry(i);
        let mid = g.a.lerp(g.b, 0.5);
        let off = (g.b - g.a).normalized().perp() * 0.8;
        let _ = writeln!(body, "{}", canvas.text(mid + off, &s.id, "#2f6fb0"));
    }
    for n in &map.nodes {
        if let NodeKind::Key(_) = n.kind {
            let _ = writeln!(body, "{}", canvas.circle(n.pos, 4.0, "#c0392b"));
            let _ = writeln!(
                body,
                "{}",
                canvas.text(n.pos + Vec2::new(0.4, -0.8), &n.id, "#c0392b")
            );
        }
    }
    body.push_str("</g>\n");
    canvas.document(&map.name, &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priori_map::{segment_path, MapConfig, PrioriMapSpec};

    #[test]
    fn roomless_map_has_only_path_and_waypoint_tags() {
        let spec = PrioriMapSpec::from_json(
            r#"{"meta": {"name": "bare"},
                "waypoints": [{"id": "start", "kind": "start", "pos": [0, 0]},
                              {"id": "end1", "kind": "end", "pos": [8, 0]}],
                "path_edges": [["start", "end1"]]}"#,
        )
        .unwrap();
        let svg = render_annotated_map(&segment_path(&spec, &MapConfig::default()).unwrap());
        assert!(svg.contains(">start</text>"));
        assert!(svg.contains(">end1</text>"));
        assert!(svg.contains(">seg1</text>"));
        assert!(!svg.contains("<polygon"));
        assert!(!svg.contains(">room"));
    }
}

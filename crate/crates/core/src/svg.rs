//! Minimal SVG document writer shared by the map and trajectory renderers.
//!
//! Coordinates are formatted with fixed precision so identical inputs yield
//! byte-identical documents.

use std::fmt::Write;

use crate::geom::Vec2;

/// Maps world meters onto an SVG pixel frame with +y pointing up on screen.
#[derive(Debug, Clone, Copy)]
pub struct Canvas {
    min: Vec2,
    max: Vec2,
    scale: f64,
}

impl Canvas {
    pub fn fit(points: &[Vec2], px_per_m: f64, margin_m: f64) -> Self {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
            max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
        }
        if !min.is_finite() || !max.is_finite() {
            min = Vec2::ZERO;
            max = Vec2::new(1.0, 1.0);
        }
        let m = Vec2::new(margin_m, margin_m);
        Self {
            min: min - m,
            max: max + m,
            scale: px_per_m,
        }
    }

    pub fn width(&self) -> f64 {
        (self.max.x - self.min.x) * self.scale
    }

    pub fn height(&self) -> f64 {
        (self.max.y - self.min.y) * self.scale
    }

    pub fn px(&self, p: Vec2) -> (f64, f64) {
        (
            (p.x - self.min.x) * self.scale,
            (self.max.y - p.y) * self.scale,
        )
    }

    pub fn line(&self, a: Vec2, b: Vec2) -> String {
        self.line_with(a, b, "")
    }

    pub fn line_with(&self, a: Vec2, b: Vec2, attrs: &str) -> String {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        let sep = if attrs.is_empty() { "" } else { " " };
        format!("<line{sep}{attrs} x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>")
    }

    pub fn points_attr(&self, pts: &[Vec2]) -> String {
        let mut s = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.px(*p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s
    }

    pub fn polygon(&self, pts: &[Vec2]) -> String {
        format!("<polygon points=\"{}\"/>", self.points_attr(pts))
    }

    pub fn polyline(&self, pts: &[Vec2], attrs: &str) -> String {
        format!(
            "<polyline {attrs} fill=\"none\" points=\"{}\"/>",
            self.points_attr(pts)
        )
    }

    pub fn circle(&self, c: Vec2, r_px: f64, fill: &str) -> String {
        let (x, y) = self.px(c);
        format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r_px:.1}\" fill=\"{fill}\"/>")
    }

    pub fn text(&self, at: Vec2, label: &str, fill: &str) -> String {
        let (x, y) = self.px(at);
        format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" fill=\"{fill}\">{}</text>",
            escape(label)
        )
    }

    pub fn document(&self, title: &str, body: &str) -> String {
        let (w, h) = (self.width(), self.height());
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n\
             <title>{}</title>\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
            escape(title)
        )
    }
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

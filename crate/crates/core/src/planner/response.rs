use std::fmt::Write;

use super::{Action, NavPlan, PlanError, PlanSource, PlanStep, Prediction, Result};
use crate::priori_map::SemanticPrioriMap;

const MARKER: &str = "PLAN:";

/// One line form of a plan, accepted back by [`parse_plan_response`].
pub fn format_plan(plan: &NavPlan) -> String {
    let mut out = String::from(MARKER);
    for (i, s) in plan.steps.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { ", " });
        let _ = write!(out, "{{{}: {}}}", s.landmark, s.action);
        if let Some(p) = &s.predicted {
            let _ = write!(out, " -> {{{}: {}}}", p.waypoint, p.action);
        }
    }
    out
}

struct Cursor {
    /// (line, column, char) from the parse offset on
    chars: Vec<(usize, usize, char)>,
    pos: usize,
}

impl Cursor {
    fn new(src: &str, offset: usize) -> Self {
        let (mut line, mut col) = (1, 1);
        let mut chars = Vec::new();
        for (i, c) in src.char_indices() {
            if i >= offset {
                chars.push((line, col, c));
            }
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        Self { chars, pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.2)
    }

    fn here(&self) -> (usize, usize) {
        match self.chars.get(self.pos).or(self.chars.last()) {
            Some(&(l, c, _)) => (l, c),
            None => (1, 1),
        }
    }

    fn error(&self, message: impl Into<String>) -> PlanError {
        let (line, column) = self.here();
        PlanError::Grammar {
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_arrow(&mut self) -> bool {
        if self.eat('→') {
            return true;
        }
        if self.peek() == Some('-') && self.chars.get(self.pos + 1).map(|c| c.2) == Some('>') {
            self.pos += 2;
            return true;
        }
        false
    }

    fn take_until(&mut self, stop: char) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c == stop || c == '}' || c == '{' || c == '\n' {
                break;
            }
            s.push(c);
            self.pos += 1;
        }
        s
    }

    /// `{landmark: action}`, returning the line it starts on.
    fn braced(&mut self) -> Result<(usize, String, Action)> {
        let line = self.here().0;
        if !self.eat('{') {
            return Err(self.error("expected `{`"));
        }
        self.skip_ws();
        let name = self.take_until(':').trim().to_string();
        if name.is_empty() {
            return Err(self.error("expected a landmark name"));
        }
        if !self.eat(':') {
            return Err(self.error("expected `:` after landmark"));
        }
        let start = self.here();
        let text = self.take_until('}');
        let action = text.parse::<Action>().map_err(|m| PlanError::Grammar {
            line: start.0,
            column: start.1,
            message: m,
        })?;
        if !self.eat('}') {
            return Err(self.error("expected `}`"));
        }
        Ok((line, name, action))
    }
}

/// Parse a reply of the form `{lm: Action}, {lm: Action} -> {wp: Action}, …`.
///
/// Text up to the last `PLAN:` marker is ignored. Every landmark must name a
/// room or waypoint of `map`. Line and column numbers refer to `text`.
pub fn parse_plan_response(text: &str, map: &SemanticPrioriMap) -> Result<NavPlan> {
    let offset = text.rfind(MARKER).map_or(0, |i| i + MARKER.len());
    let mut cur = Cursor::new(text, offset);
    let known = |line: usize, name: &str| {
        if map.node_index(name).is_some() {
            Ok(())
        } else {
            Err(PlanError::UnknownLandmark {
                line,
                landmark: name.to_string(),
            })
        }
    };
    let mut steps: Vec<PlanStep> = Vec::new();
    loop {
        cur.skip_ws();
        while cur.eat(',') || cur.eat(';') {
            cur.skip_ws();
        }
        if cur.peek().is_none() {
            break;
        }
        let (line, landmark, action) = cur.braced()?;
        known(line, &landmark)?;
        cur.skip_ws();
        let predicted = if cur.eat_arrow() {
            cur.skip_ws();
            let (line, waypoint, action) = cur.braced()?;
            known(line, &waypoint)?;
            Some(Prediction { waypoint, action })
        } else {
            None
        };
        steps.push(PlanStep {
            landmark,
            action,
            predicted,
        });
    }
    if steps.is_empty() {
        return Err(PlanError::EmptyPlan);
    }
    Ok(NavPlan {
        steps,
        source: PlanSource::ExternalBackend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::priori_map::{segment_path, MapConfig};

    fn fig2() -> SemanticPrioriMap {
        segment_path(&fixtures::load("fig2").unwrap(), &MapConfig::default()).unwrap()
    }

    #[test]
    fn parses_reasoning_then_plan() {
        let map = fig2();
        let reply = "Step 1: room17 is east.\nStep 2: {not: a plan}\n\
                     PLAN: {room7: Go straight},\n {room8: go straight} → {turn2: Turn left}, {room17: Stop}";
        let plan = parse_plan_response(reply, &map).unwrap();
        assert_eq!(plan.source, PlanSource::ExternalBackend);
        assert_eq!(
            plan.landmark_sequence(),
            vec!["room7", "room8", "turn2", "room17"]
        );
        assert_eq!(
            format_plan(&plan),
            "PLAN: {room7: Go straight}, {room8: Go straight} -> {turn2: Turn left}, {room17: Stop}"
        );
    }

    #[test]
    fn reports_positions() {
        let map = fig2();
        let err =
            parse_plan_response("PLAN: {room7: Go straight}\n{room8: Fly}", &map).unwrap_err();
        assert_eq!(
            err,
            PlanError::Grammar {
                line: 2,
                column: 8,
                message: "unknown action `Fly`".into()
            }
        );
        let err = parse_plan_response("{room7: Stop} x", &map).unwrap_err();
        assert!(
            matches!(
                err,
                PlanError::Grammar {
                    line: 1,
                    column: 15,
                    ..
                }
            ),
            "{err:?}"
        );
        let err = parse_plan_response("{room7: Stop}\n{room99: Stop}", &map).unwrap_err();
        assert_eq!(
            err,
            PlanError::UnknownLandmark {
                line: 2,
                landmark: "room99".into()
            }
        );
        assert_eq!(
            parse_plan_response("PLAN:  \n", &map),
            Err(PlanError::EmptyPlan)
        );
    }
}

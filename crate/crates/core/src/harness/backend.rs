use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perception::{quantize_direction, PanoramaModel};
use crate::planner::{parse_plan_response, render_hcot_prompt, NavPlan, NavTask, PlanError};
use crate::priori_map::{render_annotated_map, SemanticPrioriMap};

/// One detection as sent to the backend: which view and where in the image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewDetection {
    pub label: String,
    pub pixel_center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewDescriptor {
    pub view_angle: f64,
    pub detections: Vec<ViewDetection>,
}

/// Body of a POST to the backend endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BackendRequest {
    /// Route planning: the prompt text plus the annotated map as SVG.
    Plan { prompt: String, map_svg: String },
    /// Direction of `target` in a panorama, answered on the 30 degree grid.
    CoarseDirection {
        prompt: String,
        target: String,
        panorama: Vec<ViewDescriptor>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendResponse {
    pub reply: String,
    #[serde(default)]
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub url: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    30_000
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend did not answer within {0} ms")]
    Timeout(u64),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed reply: {0}")]
    MalformedReply(String),
    #[error("malformed plan reply: {0}")]
    MalformedPlan(#[from] PlanError),
}

/// POST `request` as JSON and decode the JSON reply.
pub fn call_backend(
    request: &BackendRequest,
    endpoint: &Endpoint,
) -> Result<BackendResponse, BackendError> {
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_millis(endpoint.timeout_ms))
        .build()
        .map_err(|e| BackendError::Transport(e.to_string()))?;
    let started = Instant::now();
    let sent = client.post(&endpoint.url).json(request).send();
    let resp = sent.map_err(|e| classify(e, endpoint))?;
    let status = resp.status();
    let body = resp.text().map_err(|e| classify(e, endpoint))?;
    if !status.is_success() {
        return Err(BackendError::Status {
            status: status.as_u16(),
            body,
        });
    }
    let mut out: BackendResponse =
        serde_json::from_str(&body).map_err(|e| BackendError::MalformedReply(e.to_string()))?;
    if out.latency_ms == 0 {
        out.latency_ms = started.elapsed().as_millis() as u64;
    }
    Ok(out)
}

fn classify(e: reqwest::Error, endpoint: &Endpoint) -> BackendError {
    if e.is_timeout() {
        BackendError::Timeout(endpoint.timeout_ms)
    } else {
        BackendError::Transport(e.to_string())
    }
}

pub fn plan_request(map: &SemanticPrioriMap, task: &NavTask) -> BackendRequest {
    BackendRequest::Plan {
        prompt: render_hcot_prompt(map, task),
        map_svg: render_annotated_map(map),
    }
}

/// Ask the backend for a plan and parse its reply.
pub fn request_plan(
    map: &SemanticPrioriMap,
    task: &NavTask,
    endpoint: &Endpoint,
) -> Result<NavPlan, BackendError> {
    let resp = call_backend(&plan_request(map, task), endpoint)?;
    Ok(parse_plan_response(&resp.reply, map)?)
}

pub fn coarse_direction_request(pano: &PanoramaModel, target: &str) -> BackendRequest {
    BackendRequest::CoarseDirection {
        prompt: format!(
            "The panorama views are labelled by angle, positive to the left. \
             In which direction is the sign of {target}? Answer with one angle that is a multiple of 30, \
             or `not-found`."
        ),
        target: target.to_string(),
        panorama: pano
            .views
            .iter()
            .map(|v| ViewDescriptor {
                view_angle: v.view_angle,
                detections: v
                    .detections
                    .iter()
                    .map(|d| ViewDetection {
                        label: d.label.clone(),
                        pixel_center: d.pixel_center,
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Reply to a coarse-direction request: degrees on the 30 degree grid, or
/// `None` for `not-found`. Off-grid numbers are snapped.
pub fn parse_coarse_reply(reply: &str) -> Result<Option<f64>, BackendError> {
    let t = reply.trim().trim_end_matches(['°', '.']).trim();
    if t.eq_ignore_ascii_case("not-found") || t.eq_ignore_ascii_case("not found") {
        return Ok(None);
    }
    let deg: f64 = t.trim_end_matches("deg").trim().parse().map_err(|_| {
        BackendError::MalformedReply(format!("expected an angle, got `{}`", reply.trim()))
    })?;
    if !deg.is_finite() || deg.abs() > 180.0 {
        return Err(BackendError::MalformedReply(format!(
            "angle {deg} out of range"
        )));
    }
    Ok(Some(quantize_direction(deg)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_replies() {
        assert_eq!(parse_coarse_reply(" 60 ").unwrap(), Some(60.0));
        assert_eq!(parse_coarse_reply("-30°").unwrap(), Some(-30.0));
        assert_eq!(parse_coarse_reply("not-found").unwrap(), None);
        assert_eq!(parse_coarse_reply("44").unwrap(), Some(30.0));
        assert!(matches!(
            parse_coarse_reply("left"),
            Err(BackendError::MalformedReply(_))
        ));
        assert!(parse_coarse_reply("400").is_err());
    }

    #[test]
    fn request_wire_format() {
        let r = BackendRequest::Plan {
            prompt: "p".into(),
            map_svg: "<svg/>".into(),
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["kind"], "plan");
        assert_eq!(v["map_svg"], "<svg/>");
    }
}

//! Simulated camera: sign detections through a pinhole model, forward wall
//! rays, panoramas, and the coarse and fine direction estimates built on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::wrap_180;
use crate::world_sim::{visible_landmarks, Pose, World};

pub const IMAGE_WIDTH: f64 = 640.0;
/// Physical sign width used for the mask area estimate.
pub const SIGN_WIDTH: f64 = 0.35;
pub const LOCALIZATION_ANGLES: [f64; 6] = [30.0, 90.0, 150.0, 210.0, 270.0, 330.0];
pub const NAVIGATION_ANGLES: [f64; 7] = [0.0, 30.0, -30.0, 60.0, -60.0, 90.0, -90.0];
pub const COARSE_STEP: f64 = 30.0;
/// Ray offsets about the view centre for the forward profile.
pub const RAY_OFFSETS: [f64; 9] = [-10.0, -7.5, -5.0, -2.5, 0.0, 2.5, 5.0, 7.5, 10.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("pixel {pixel} outside image of width {width}")]
    PixelOutOfRange { pixel: f64, width: f64 },
    #[error("panorama needs at least one view angle")]
    EmptyAngleSet,
}

pub fn focal_length(image_width: f64, fov_deg: f64) -> f64 {
    (image_width / 2.0) / (fov_deg / 2.0).to_radians().tan()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    pub pixel_center: f64,
    /// Degrees from the view centre, positive to the left.
    pub bearing: f64,
    pub distance: f64,
    pub mask_area_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewModel {
    /// Degrees relative to the robot heading.
    pub view_angle: f64,
    pub image_width: f64,
    pub fov: f64,
    pub detections: Vec<Detection>,
    /// (offset from view centre in degrees, wall distance in metres)
    pub forward_ray_profile: Vec<(f64, f64)>,
}

impl ViewModel {
    pub fn focal(&self) -> f64 {
        focal_length(self.image_width, self.fov)
    }

    pub fn find(&self, label: &str) -> Option<&Detection> {
        self.detections.iter().find(|d| d.label == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub false_negative_rate: f64,
    pub bearing_noise_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            false_negative_rate: 0.0,
            bearing_noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.false_negative_rate) && self.bearing_noise_sigma >= 0.0
    }
}

/// Per-episode noise generator.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    pub model: NoiseModel,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(model: NoiseModel) -> Self {
        Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(model.seed),
        }
    }

    fn drop_detection(&mut self) -> bool {
        let p = self.model.false_negative_rate;
        p > 0.0 && self.rng.random_bool(p.min(1.0))
    }

    fn jitter(&mut self) -> f64 {
        let s = self.model.bearing_noise_sigma;
        if s > 0.0 {
            Normal::new(0.0, s)
                .expect("sigma is positive")
                .sample(&mut self.rng)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanoramaModel {
    pub angles: Vec<f64>,
    pub views: Vec<ViewModel>,
}

impl PanoramaModel {
    /// Distinct labels seen in any view, sorted.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .views
            .iter()
            .flat_map(|v| v.detections.iter().map(|d| d.label.as_str()))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Best sighting of `label`: the one nearest its view centre.
    pub fn find(&self, label: &str) -> Option<(&ViewModel, &Detection)> {
        self.views
            .iter()
            .filter_map(|v| v.find(label).map(|d| (v, d)))
            .min_by(|a, b| a.1.bearing.abs().total_cmp(&b.1.bearing.abs()))
    }

    pub fn view(&self, angle: f64) -> Option<&ViewModel> {
        self.views
            .iter()
            .find(|v| (v.view_angle - angle).abs() < 1e-9)
    }
}

/// One camera frame `view_angle` degrees off the robot heading.
pub fn capture(world: &World, pose: Pose, view_angle: f64, noise: &mut NoiseStream) -> ViewModel {
    let fov = world.motion.fov;
    let f = focal_length(IMAGE_WIDTH, fov);
    let mut detections = Vec::new();
    for v in visible_landmarks(world, pose, view_angle) {
        if noise.drop_detection() {
            continue;
        }
        let bearing =
            (wrap_180(v.bearing - view_angle) + noise.jitter()).clamp(-fov / 2.0, fov / 2.0);
        let pixel_center = IMAGE_WIDTH / 2.0 + f * bearing.to_radians().tan();
        if !(0.0..IMAGE_WIDTH).contains(&pixel_center) {
            continue;
        }
        detections.push(Detection {
            label: v.room,
            pixel_center,
            bearing,
            distance: v.distance,
            mask_area_fraction: (SIGN_WIDTH * f / v.distance / IMAGE_WIDTH).min(1.0),
        });
    }
    ViewModel {
        detections,
        ..range_view(world, pose, view_angle)
    }
}

pub fn capture_panorama(
    world: &World,
    pose: Pose,
    angles: &[f64],
    noise: &mut NoiseStream,
) -> Result<PanoramaModel, PerceptionError> {
    if angles.is_empty() {
        return Err(PerceptionError::EmptyAngleSet);
    }
    Ok(PanoramaModel {
        angles: angles.to_vec(),
        views: angles
            .iter()
            .map(|&a| capture(world, pose, a, noise))
            .collect(),
    })
}

/// Nearest multiple of 30 degrees, halves rounded toward zero.
pub fn quantize_direction(deg: f64) -> f64 {
    let x = wrap_180(deg) / COARSE_STEP;
    let q = if (x.abs() - x.abs().trunc() - 0.5).abs() < 1e-9 {
        x.trunc()
    } else {
        x.round()
    };
    wrap_180(q * COARSE_STEP)
}

/// Direction of `label` relative to the heading on the 30 degree grid, or
/// `None` when no view shows it.
pub fn coarse_direction(pano: &PanoramaModel, label: &str) -> Option<f64> {
    pano.find(label)
        .map(|(v, d)| quantize_direction(v.view_angle + d.bearing))
}

/// Inverse pinhole: heading offset of a pixel column within `view`.
pub fn refine_heading(view: &ViewModel, pixel_center: f64) -> Result<f64, PerceptionError> {
    if !(0.0..view.image_width).contains(&pixel_center) {
        return Err(PerceptionError::PixelOutOfRange {
            pixel: pixel_center,
            width: view.image_width,
        });
    }
    Ok(view.view_angle
        + ((pixel_center - view.image_width / 2.0) / view.focal())
            .atan()
            .to_degrees())
}

/// Share of forward rays meeting a wall within `near_distance`. An empty
/// profile yields 0.
pub fn wall_floor_ratio(view: &ViewModel, near_distance: f64) -> f64 {
    let rays = &view.forward_ray_profile;
    if rays.is_empty() {
        return 0.0;
    }
    rays.iter().filter(|(_, d)| *d <= near_distance).count() as f64 / rays.len() as f64
}

/// Source of views and direction estimates for the agent.
pub trait Perception {
    fn capture(&mut self, world: &World, pose: Pose, view_angle: f64) -> ViewModel;

    fn capture_panorama(
        &mut self,
        world: &World,
        pose: Pose,
        angles: &[f64],
    ) -> Result<PanoramaModel, PerceptionError> {
        if angles.is_empty() {
            return Err(PerceptionError::EmptyAngleSet);
        }
        Ok(PanoramaModel {
            angles: angles.to_vec(),
            views: angles
                .iter()
                .map(|&a| self.capture(world, pose, a))
                .collect(),
        })
    }

    fn coarse_direction(&mut self, pano: &PanoramaModel, label: &str) -> Option<f64> {
        coarse_direction(pano, label)
    }

    /// Wall rays only, no sign detection: the floor/wall mask of one view.
    fn range_view(&mut self, world: &World, pose: Pose, view_angle: f64) -> ViewModel {
        range_view(world, pose, view_angle)
    }

    /// Wall distances for rays `center ± half_span` (degrees off the heading)
    /// every `step` degrees.
    fn ray_sweep(
        &mut self,
        world: &World,
        pose: Pose,
        center: f64,
        half_span: f64,
        step: f64,
    ) -> Vec<(f64, f64)> {
        let n = (2.0 * half_span / step).round() as i64;
        (0..=n)
            .map(|k| {
                let a = center - half_span + k as f64 * step;
                (a, world.ray_distance(pose.position(), pose.heading + a))
            })
            .collect()
    }
}

pub fn range_view(world: &World, pose: Pose, view_angle: f64) -> ViewModel {
    let p = pose.position();
    ViewModel {
        view_angle,
        image_width: IMAGE_WIDTH,
        fov: world.motion.fov,
        detections: Vec::new(),
        forward_ray_profile: RAY_OFFSETS
            .iter()
            .map(|&o| (o, world.ray_distance(p, pose.heading + view_angle + o)))
            .collect(),
    }
}

/// Geometric ground truth passed through a [`NoiseStream`].
#[derive(Debug, Clone)]
pub struct SimulatedPerception {
    pub noise: NoiseStream,
}

impl SimulatedPerception {
    pub fn new(model: NoiseModel) -> Self {
        Self {
            noise: NoiseStream::new(model),
        }
    }
}

impl Default for SimulatedPerception {
    fn default() -> Self {
        Self::new(NoiseModel::default())
    }
}

impl Perception for SimulatedPerception {
    fn capture(&mut self, world: &World, pose: Pose, view_angle: f64) -> ViewModel {
        capture(world, pose, view_angle, &mut self.noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::world_sim::build_world;

    fn view_with(bearing: f64, view_angle: f64) -> ViewModel {
        let f = focal_length(IMAGE_WIDTH, 60.0);
        ViewModel {
            view_angle,
            image_width: IMAGE_WIDTH,
            fov: 60.0,
            detections: vec![Detection {
                label: "room1".into(),
                pixel_center: 320.0 + f * bearing.to_radians().tan(),
                bearing,
                distance: 5.0,
                mask_area_fraction: 0.05,
            }],
            forward_ray_profile: Vec::new(),
        }
    }

    #[test]
    fn pinhole_values() {
        let f = focal_length(640.0, 60.0);
        assert!((f - 554.256).abs() < 1e-3);
        let v = view_with(16.1, 0.0);
        assert!((v.detections[0].pixel_center - 480.0).abs() < 0.5);
        assert_eq!(refine_heading(&v, 320.0).unwrap(), 0.0);
        assert!((refine_heading(&v, 480.0).unwrap() - 16.1).abs() < 0.05);
        let v30 = view_with(16.1, 30.0);
        assert!((refine_heading(&v30, 480.0).unwrap() - 46.1).abs() < 0.05);
        assert!(refine_heading(&v, 640.0).is_err());
        assert!(refine_heading(&v, -1.0).is_err());
    }

    #[test]
    fn quantization() {
        assert_eq!(quantize_direction(47.0), 60.0);
        assert_eq!(quantize_direction(0.0), 0.0);
        assert_eq!(quantize_direction(15.0), 0.0);
        assert_eq!(quantize_direction(-15.0), 0.0);
        assert_eq!(quantize_direction(45.0), 30.0);
        assert_eq!(quantize_direction(-46.0), -60.0);
        assert_eq!(quantize_direction(179.0), 180.0);
        let pano = PanoramaModel {
            angles: vec![0.0],
            views: vec![view_with(5.0, 0.0)],
        };
        assert_eq!(coarse_direction(&pano, "room1"), Some(0.0));
        assert_eq!(coarse_direction(&pano, "room2"), None);
    }

    #[test]
    fn full_dropout_sees_nothing() {
        let w = build_world(&fixtures::load("fig2").unwrap(), 3.0).unwrap();
        let pose = Pose::new(70.0, 0.0, 0.0);
        let mut clean = NoiseStream::new(NoiseModel::default());
        assert!(!capture(&w, pose, 0.0, &mut clean).detections.is_empty());
        let mut blind = NoiseStream::new(NoiseModel {
            false_negative_rate: 1.0,
            ..NoiseModel::default()
        });
        assert!(capture(&w, pose, 0.0, &mut blind).detections.is_empty());
        assert!(matches!(
            capture_panorama(&w, pose, &[], &mut clean),
            Err(PerceptionError::EmptyAngleSet)
        ));
        assert_eq!(
            capture_panorama(&w, pose, &NAVIGATION_ANGLES, &mut clean)
                .unwrap()
                .views
                .len(),
            7
        );
    }

    #[test]
    fn wall_ratios() {
        let w = build_world(&fixtures::load("corner").unwrap(), 3.0).unwrap();
        let mut n = NoiseStream::new(NoiseModel::default());
        // long open corridor ahead
        let v = capture(&w, Pose::new(0.0, 0.0, 0.0), 0.0, &mut n);
        assert_eq!(wall_floor_ratio(&v, 2.5), 0.0);
        // outer wall of the corner 1.5 m ahead
        let v = capture(&w, Pose::new(10.0, 0.0, 0.0), 0.0, &mut n);
        assert_eq!(wall_floor_ratio(&v, 2.5), 1.0);
    }
}

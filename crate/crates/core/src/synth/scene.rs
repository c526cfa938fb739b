use serde::{Deserialize, Serialize};

use crate::geometry::{point_serde, LabeledPointSet, Point3, RigidTransform, Vec3};
use crate::probe::{PhantomModel, ProbeModel};

/// Spherical stand-in for the phantom's outer surface, CT frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSphere {
    #[serde(with = "point_serde")]
    pub center: Point3,
    pub radius: f64,
}

impl SurfaceSphere {
    /// Closest surface point to `p` (both in the same frame as `center`).
    pub fn project(&self, p: &Point3) -> Point3 {
        let d = p - self.center;
        let n = d.norm();
        let dir = if n > 0.0 { d / n } else { Vec3::z() };
        self.center + dir * self.radius
    }
}

/// Models plus the generative parameters of a synthetic session.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub probe: ProbeModel,
    pub phantom: PhantomModel,
    /// Per-axis tracker noise on every marker (mm).
    pub marker_noise_sd: f64,
    /// Frames per fiducial dwell.
    pub tip_window_length: usize,
    /// Hologram registration error, expressed in the phantom CT frame.
    pub hologram_displacement: RigidTransform,
    pub seed: u64,
    /// Pose of the phantom CT frame in the lab.
    pub phantom_in_lab: RigidTransform,
    pub surface: SurfaceSphere,
    /// Frames spent moving between fiducials.
    pub transit_frames: usize,
    pub frame_rate_hz: f64,
    /// Per-frame tip jitter when the tip has no surface to rest on (mm).
    pub hand_tremor_sd: f64,
    /// Lab-frame direction the user looks along; carries the depth bias.
    pub view_direction: Vec3,
}

pub const DEFAULT_MARKER_NOISE_SD: f64 = 0.25;
pub const DEFAULT_TIP_WINDOW: usize = 50;
pub const DEFAULT_TRANSIT_FRAMES: usize = 5;
pub const DEFAULT_FRAME_RATE_HZ: f64 = 100.0;

pub fn default_view_direction() -> Vec3 {
    Vec3::y()
}

impl SceneConfig {
    /// Scene with default generative parameters around the given models.
    pub fn with_models(probe: ProbeModel, phantom: PhantomModel) -> Self {
        Self {
            probe,
            phantom,
            marker_noise_sd: DEFAULT_MARKER_NOISE_SD,
            tip_window_length: DEFAULT_TIP_WINDOW,
            hologram_displacement: RigidTransform::identity(),
            seed: 0,
            phantom_in_lab: RigidTransform::identity(),
            surface: SurfaceSphere {
                center: Point3::origin(),
                radius: HEAD_RADIUS,
            },
            transit_frames: DEFAULT_TRANSIT_FRAMES,
            frame_rate_hz: DEFAULT_FRAME_RATE_HZ,
            hand_tremor_sd: 0.0,
            view_direction: default_view_direction(),
        }
    }

    /// Built-in synthetic scene: a 5-marker probe with a 125 mm shaft, a
    /// 90 mm-radius head carrying 9 markers and 16 fiducials, placed about a
    /// meter from the tracker origin.
    pub fn synthetic_default() -> Self {
        let mut scene = Self::with_models(default_probe(), default_phantom());
        scene.hologram_displacement = RigidTransform::from_translation(Vec3::new(5.0, 0.0, 0.0));
        scene.phantom_in_lab = RigidTransform::from_axis_angle(
            &Vec3::new(0.1, 0.0, 1.0),
            25f64.to_radians(),
            Vec3::new(350.0, 200.0, 900.0),
        );
        scene.hand_tremor_sd = 0.5;
        scene
    }
}

const HEAD_RADIUS: f64 = 90.0;
/// Marker centers sit on short posts above the skin.
const MARKER_STANDOFF: f64 = 8.0;

pub fn default_probe() -> ProbeModel {
    let markers = LabeledPointSet::new([
        ("P1", Point3::new(0.0, 0.0, 0.0)),
        ("P2", Point3::new(55.0, 10.0, 0.0)),
        ("P3", Point3::new(-10.0, 70.0, 0.0)),
        ("P4", Point3::new(-50.0, 25.0, 10.0)),
        ("P5", Point3::new(25.0, 45.0, 35.0)),
    ])
    .expect("static layout");
    ProbeModel::new(markers, Point3::new(0.0, -125.0, 5.0), 5).expect("static layout")
}

fn direction(elevation_deg: f64, azimuth_deg: f64) -> Vec3 {
    let (el, az) = (elevation_deg.to_radians(), azimuth_deg.to_radians());
    Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
}

pub fn default_phantom() -> PhantomModel {
    let marker_dirs = [
        (10.0, 0.0),
        (10.0, 120.0),
        (10.0, 240.0),
        (40.0, 60.0),
        (40.0, 180.0),
        (40.0, 300.0),
        (-20.0, 60.0),
        (-20.0, 300.0),
        (80.0, 30.0),
    ];
    let markers = LabeledPointSet::new(marker_dirs.iter().enumerate().map(|(i, &(el, az))| {
        (
            format!("M{}", i + 1),
            Point3::from(direction(el, az) * (HEAD_RADIUS + MARKER_STANDOFF)),
        )
    }))
    .expect("static layout");

    // Golden-angle spiral over the upper part of the head.
    let golden = 180.0 * (3.0 - 5f64.sqrt());
    let fiducials = LabeledPointSet::new((0..16).map(|i| {
        let z = 0.95 - 1.1 * (i as f64 + 0.5) / 16.0;
        let el = z.asin().to_degrees();
        let az = golden * i as f64;
        (
            format!("F{:02}", i + 1),
            Point3::from(direction(el, az) * HEAD_RADIUS),
        )
    }))
    .expect("static layout");
    PhantomModel::new(markers, fiducials, 9, 16).expect("static layout")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scene_counts() {
        let s = SceneConfig::synthetic_default();
        assert_eq!(s.probe.markers_ct().len(), 5);
        assert_eq!(s.phantom.markers_ct().len(), 9);
        assert_eq!(s.phantom.fiducials_ct().len(), 16);
        for (_, f) in s.phantom.fiducials_ct().iter() {
            assert!(((f - s.surface.center).norm() - s.surface.radius).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_lands_on_surface() {
        let s = SurfaceSphere { center: Point3::new(1.0, 2.0, 3.0), radius: 10.0 };
        let p = s.project(&Point3::new(30.0, -4.0, 8.0));
        assert!(((p - s.center).norm() - 10.0).abs() < 1e-12);
    }
}

//! Synthetic pointing sessions with a ground-truth ledger.
//!
//! For every fiducial the user aims at the hologram's copy of it, which sits
//! where the (possibly displaced) registration put it, and misses by an
//! isotropic Gaussian error. Without physical contact the tip stays where the
//! user put it; with contact it is stopped on the true surface at the point
//! nearest to where the user aimed.

use std::path::Path;

use nalgebra::{Rotation3, Unit};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{centroid, point_serde, LabeledPoint, Point3, RigidTransform, Vec3};
use crate::io::frames::{write_frames_file, MarkerFrame, MarkerFrameStream};
use crate::io::write_json_file;
use crate::metrics::{Annotation, AnnotationSet, ExperimentKind};
use crate::synth::rng::SeededRng;
use crate::synth::scene::SceneConfig;

const STREAM_USER: u64 = 0;
const STREAM_MARKERS: u64 = 1;
const STREAM_POSE: u64 = 2;
const STREAM_TREMOR: u64 = 3;

/// Offset of the approach point above the first fiducial (mm).
const APPROACH_DISTANCE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserErrorModel {
    /// Depth bias along the view direction (mm); applied without feedback only.
    pub bias: f64,
    /// Per-axis SD of the aiming error (mm).
    pub sd: f64,
}

impl Default for UserErrorModel {
    /// Illustrative synthetic defaults, not fitted to any measurement.
    fn default() -> Self {
        Self { bias: 0.0, sd: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerFiducial {
    pub label: String,
    #[serde(with = "point_serde")]
    pub true_lab: Point3,
    #[serde(with = "point_serde")]
    pub hologram_lab: Point3,
    /// Where the tip rests during the dwell, before tremor and tracker noise.
    #[serde(with = "point_serde")]
    pub tip_lab: Point3,
    pub true_error: f64,
    pub start_frame: i64,
    pub end_frame: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub schema_version: u32,
    pub trial_id: String,
    pub experiment_kind: ExperimentKind,
    pub seed: u64,
    pub user_error: UserErrorModel,
    pub marker_noise_sd: f64,
    pub hologram_displacement: RigidTransform,
    pub phantom_in_lab: RigidTransform,
    pub fiducials: Vec<LedgerFiducial>,
    pub true_error_mean: f64,
    pub true_error_sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub frames: MarkerFrameStream,
    pub annotations: AnnotationSet,
    pub ledger: Ledger,
}

impl Session {
    /// Writes `frames.csv`, `annotations.json` and `ledger.json` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        write_frames_file(&self.frames, dir.join("frames.csv"))?;
        crate::io::scene::write_annotations_file(&self.annotations, dir.join("annotations.json"))?;
        write_json_file(&self.ledger, dir.join("ledger.json"))
    }
}

pub fn generate_session(config: &SceneConfig, kind: ExperimentKind, user: &UserErrorModel) -> Session {
    let mut user_rng = SeededRng::new(config.seed, STREAM_USER);
    let mut marker_rng = SeededRng::new(config.seed, STREAM_MARKERS);
    let mut pose_rng = SeededRng::new(config.seed, STREAM_POSE);
    let mut tremor_rng = SeededRng::new(config.seed, STREAM_TREMOR);

    let phantom_lab = config.phantom.markers_ct().transformed(&config.phantom_in_lab);
    let hologram = config.phantom_in_lab.compose(&config.hologram_displacement);
    let surface_center = config.phantom_in_lab.apply(&config.surface.center);
    let surface_lab = crate::synth::scene::SurfaceSphere {
        center: surface_center,
        radius: config.surface.radius,
    };
    let view = config.view_direction.try_normalize(0.0).unwrap_or_else(Vec3::y);

    let probe_markers = config.probe.markers_ct();
    let tip_ct = *config.probe.tip_ct();
    let shaft_ct = (tip_ct - centroid(probe_markers.points()).expect("non-empty")).normalize();

    let frame_period = 1.0 / config.frame_rate_hz;
    let mut frames = Vec::new();
    let mut annotations = Vec::new();
    let mut ledger_fiducials = Vec::new();
    let mut previous_tip: Option<Point3> = None;

    for (label, f_ct) in config.phantom.fiducials_ct().iter() {
        let true_lab = config.phantom_in_lab.apply(f_ct);
        let hologram_lab = hologram.apply(f_ct);

        // Drawn for every kind so the streams stay aligned across kinds.
        let aim_error = user_rng.normal_vec3(user.sd);
        let aimed = hologram_lab + aim_error;
        let tip = match kind {
            ExperimentKind::PhysicalFeedback => surface_lab.project(&aimed),
            ExperimentKind::HolographicFeedback => aimed,
            ExperimentKind::NoFeedback => aimed + view * user.bias,
        };

        // Shaft points into the head along the local normal, random twist.
        let outward = (tip - surface_center).try_normalize(0.0).unwrap_or_else(Vec3::z);
        let twist = pose_rng.uniform() * std::f64::consts::TAU;
        let align = Rotation3::rotation_between(&shaft_ct, &-outward)
            .unwrap_or_else(|| Rotation3::from_axis_angle(&Unit::new_normalize(shaft_ct.cross(&Vec3::x()).try_normalize(0.0).unwrap_or_else(Vec3::y)), std::f64::consts::PI));
        let rotation = Rotation3::from_axis_angle(&Unit::new_normalize(-outward), twist) * align;
        let rotation = *rotation.matrix();
        let pose_at = |tip_lab: Point3| {
            RigidTransform::from_parts_unchecked(rotation, tip_lab.coords - rotation * tip_ct.coords)
        };

        let start_tip = previous_tip.unwrap_or(tip + outward * APPROACH_DISTANCE);
        for k in 0..config.transit_frames {
            let s = (k + 1) as f64 / (config.transit_frames + 1) as f64;
            let p = start_tip + (tip - start_tip) * s;
            frames.push(make_frame(frames.len(), frame_period, &phantom_lab, &pose_at(p), config, &mut marker_rng));
        }
        let start_frame = frames.len() as i64;
        for _ in 0..config.tip_window_length {
            let tremor = tremor_rng.normal_vec3(config.hand_tremor_sd);
            let p = match kind {
                ExperimentKind::PhysicalFeedback => tip,
                _ => tip + tremor,
            };
            frames.push(make_frame(frames.len(), frame_period, &phantom_lab, &pose_at(p), config, &mut marker_rng));
        }
        let end_frame = frames.len() as i64 - 1;

        annotations.push(Annotation {
            fiducial: label.to_string(),
            start_frame,
            end_frame,
        });
        ledger_fiducials.push(LedgerFiducial {
            label: label.to_string(),
            true_lab,
            hologram_lab,
            tip_lab: tip,
            true_error: (tip - true_lab).norm(),
            start_frame,
            end_frame,
        });
        previous_tip = Some(tip);
    }

    let errors: Vec<f64> = ledger_fiducials.iter().map(|f| f.true_error).collect();
    let (true_error_mean, var) = crate::stability::mean_and_variance(&errors);
    let trial_id = format!("{}-seed{}", kind.as_str(), config.seed);
    Session {
        frames: MarkerFrameStream { frames },
        annotations: AnnotationSet {
            trial_id: trial_id.clone(),
            experiment_kind: kind,
            annotations,
        },
        ledger: Ledger {
            schema_version: crate::io::SCHEMA_VERSION,
            trial_id,
            experiment_kind: kind,
            seed: config.seed,
            user_error: *user,
            marker_noise_sd: config.marker_noise_sd,
            hologram_displacement: config.hologram_displacement,
            phantom_in_lab: config.phantom_in_lab,
            fiducials: ledger_fiducials,
            true_error_mean,
            true_error_sd: var.sqrt(),
        },
    }
}

fn make_frame(
    index: usize,
    frame_period: f64,
    phantom_lab: &crate::geometry::LabeledPointSet,
    probe_pose: &RigidTransform,
    config: &SceneConfig,
    rng: &mut SeededRng,
) -> MarkerFrame {
    let mut observations = Vec::with_capacity(phantom_lab.len() + config.probe.markers_ct().len());
    for (label, p) in phantom_lab.iter() {
        observations.push(LabeledPoint {
            label: label.to_string(),
            position: p + rng.normal_vec3(config.marker_noise_sd),
        });
    }
    for (label, p) in config.probe.markers_ct().iter() {
        observations.push(LabeledPoint {
            label: label.to_string(),
            position: probe_pose.apply(p) + rng.normal_vec3(config.marker_noise_sd),
        });
    }
    MarkerFrame {
        frame_id: index as i64,
        time: index as f64 * frame_period,
        observations,
    }
}

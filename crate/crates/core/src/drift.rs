//! Hologram anchoring: a fixed hologram-to-anchor transform recorded at
//! registration time restores the hologram whenever the anchor is re-observed,
//! whatever the device's world frame has drifted to.
//!
//! Traces are expressed in the anchor's frame at bind time, so the true anchor
//! starts at the identity. World drift composes on the left; a noiseless
//! detection therefore reports the accumulated drift itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vec3};
use crate::synth::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorBinding {
    pub hologram_in_anchor: RigidTransform,
}

pub fn bind(anchor_in_world: &RigidTransform, hologram_in_world: &RigidTransform) -> AnchorBinding {
    AnchorBinding {
        hologram_in_anchor: anchor_in_world.invert().compose(hologram_in_world),
    }
}

pub fn relocalize(binding: &AnchorBinding, anchor_in_world_now: &RigidTransform) -> RigidTransform {
    anchor_in_world_now.compose(&binding.hologram_in_anchor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoseEventKind {
    /// `pose` is the observed anchor pose in the device world frame.
    AnchorDetected,
    /// `pose` is a world-frame perturbation, composed on the left.
    DriftStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseEvent {
    /// Seconds.
    pub time: f64,
    pub kind: PoseEventKind,
    #[serde(flatten)]
    pub pose: RigidTransform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    pub time: f64,
    pub kind: PoseEventKind,
    /// Distance between displayed and true hologram origins (mm).
    pub translation_mm: f64,
    /// Geodesic angle between displayed and true orientations (degrees).
    pub rotation_deg: f64,
}

/// Replays a trace and reports, after each event, how far the displayed
/// hologram sits from where it belongs.
pub fn run_drift_trace(
    events: &[PoseEvent],
    binding: &AnchorBinding,
    true_hologram_in_anchor: &RigidTransform,
) -> Result<Vec<Displacement>> {
    if let Some(i) = events.windows(2).position(|w| w[1].time < w[0].time) {
        return Err(Error::UnorderedEvents(i + 1));
    }
    let mut drift = RigidTransform::identity();
    let mut displayed = relocalize(binding, &RigidTransform::identity());
    let mut out = Vec::with_capacity(events.len());
    for event in events {
        match event.kind {
            PoseEventKind::DriftStep => drift = event.pose.compose(&drift),
            PoseEventKind::AnchorDetected => displayed = relocalize(binding, &event.pose),
        }
        let truth = drift.compose(true_hologram_in_anchor);
        let (translation_mm, angle) = displayed.distance_to(&truth);
        out.push(Displacement {
            time: event.time,
            kind: event.kind,
            translation_mm,
            rotation_deg: angle.to_degrees(),
        });
    }
    Ok(out)
}

/// Random-walk drift with periodic anchor detections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSimConfig {
    pub steps: usize,
    /// A detection follows every `detect_every`-th drift step; 0 disables.
    pub detect_every: usize,
    /// Translation magnitude of each drift step (mm), random direction.
    pub step_translation: f64,
    /// Rotation magnitude of each drift step (degrees), random axis.
    pub step_rotation_deg: f64,
    /// Per-axis SD of anchor position noise (mm).
    pub anchor_noise_sd: f64,
    /// Per-axis SD of anchor orientation noise (degrees, rotation vector).
    pub anchor_noise_rot_deg: f64,
    /// Seconds between drift steps.
    pub dt: f64,
    pub seed: u64,
}

impl Default for DriftSimConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            detect_every: 50,
            step_translation: 0.2,
            step_rotation_deg: 0.05,
            anchor_noise_sd: 0.0,
            anchor_noise_rot_deg: 0.0,
            dt: 1.0 / 30.0,
            seed: 0,
        }
    }
}

/// Generates a trace; detections observe the accumulated drift, perturbed in
/// the anchor frame when noise is configured.
pub fn simulate_drift_trace(config: &DriftSimConfig) -> Vec<PoseEvent> {
    let mut steps = SeededRng::new(config.seed, 0);
    let mut noise = SeededRng::new(config.seed, 1);
    let mut drift = RigidTransform::identity();
    let mut events = Vec::with_capacity(config.steps + config.steps / config.detect_every.max(1));
    for i in 1..=config.steps {
        let time = i as f64 * config.dt;
        let axis = steps.unit_vector();
        let direction = steps.unit_vector();
        let step = RigidTransform::from_axis_angle(
            &axis,
            config.step_rotation_deg.to_radians(),
            direction * config.step_translation,
        );
        drift = step.compose(&drift);
        events.push(PoseEvent {
            time,
            kind: PoseEventKind::DriftStep,
            pose: step,
        });
        if config.detect_every > 0 && i % config.detect_every == 0 {
            let mut observed = drift;
            if config.anchor_noise_sd > 0.0 || config.anchor_noise_rot_deg > 0.0 {
                let rot = noise.normal_vec3(config.anchor_noise_rot_deg.to_radians());
                let shift = noise.normal_vec3(config.anchor_noise_sd);
                let n = RigidTransform::from_axis_angle(&rot, rot.norm(), shift);
                observed = drift.compose(&n);
            }
            events.push(PoseEvent {
                time,
                kind: PoseEventKind::AnchorDetected,
                pose: observed,
            });
        }
    }
    events
}

/// Default hologram offset from its anchor used by the simulator front end:
/// a QR code beside the head, hologram centered 120 mm away.
pub fn default_hologram_in_anchor() -> RigidTransform {
    RigidTransform::from_axis_angle(&Vec3::new(0.0, 0.0, 1.0), 0.35, Vec3::new(120.0, 40.0, -30.0))
}

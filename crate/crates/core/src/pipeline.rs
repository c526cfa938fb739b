//! One trial end to end: ground truth from the phantom markers, tip
//! positions inside each annotated window, target errors and the summary row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::frames::MarkerFrameStream;
use crate::metrics::{measure_fiducial, summarize_trial, AnnotationSet, FiducialMeasurement, TipAggregate, TrialResult};
use crate::probe::{ground_truth_fiducials, locate_tip, GroundTruth, GroundTruthOptions, PhantomModel, ProbeModel};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AssessOptions {
    pub ground_truth: GroundTruthOptions,
    pub tip_aggregate: TipAggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialAssessment {
    pub result: TrialResult,
    pub measurements: Vec<FiducialMeasurement>,
    pub ground_truth: GroundTruth,
    /// Mean probe registration FRE over every frame used (mm).
    pub probe_fre_mean: f64,
}

pub fn assess_trial(
    probe: &ProbeModel,
    phantom: &PhantomModel,
    frames: &MarkerFrameStream,
    annotations: &AnnotationSet,
    options: &AssessOptions,
) -> Result<TrialAssessment> {
    annotations.validate()?;
    let ground_truth = ground_truth_fiducials(frames, phantom, &options.ground_truth)?;

    let mut measurements = Vec::with_capacity(annotations.annotations.len());
    let (mut fre_sum, mut fre_n) = (0.0, 0usize);
    for (i, a) in annotations.annotations.iter().enumerate() {
        let truth = ground_truth.fiducials.get(&a.fiducial).ok_or_else(|| {
            Error::schema(
                format!("/annotations/{i}/fiducial"),
                format!("unknown fiducial {:?}", a.fiducial),
            )
        })?;
        let mut observations = Vec::new();
        for frame in frames.window(a.start_frame, a.end_frame) {
            match locate_tip(frame, probe) {
                Ok(o) => observations.push(o),
                Err(Error::InsufficientCorrespondence { common, .. }) => {
                    log::warn!("frame {}: {common} probe markers visible, skipped", frame.frame_id);
                }
                Err(e) => return Err(e),
            }
        }
        fre_sum += observations.iter().map(|o| o.registration_fre).sum::<f64>();
        fre_n += observations.len();
        measurements.push(measure_fiducial(&a.fiducial, &observations, truth)?);
    }

    let result = summarize_trial(
        &annotations.trial_id,
        annotations.experiment_kind,
        &measurements,
        ground_truth.max_uncertainty(),
        options.tip_aggregate,
    )?;
    Ok(TrialAssessment {
        result,
        measurements,
        ground_truth,
        probe_fre_mean: if fre_n > 0 { fre_sum / fre_n as f64 } else { 0.0 },
    })
}

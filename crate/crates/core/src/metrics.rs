//! Target errors per fiducial, per trial and per experiment.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_serde, Point3, Vec3};
use crate::probe::TipObservation;
use crate::stability::mean_and_variance;

/// The three annotation conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Depth judged by eye on the floating hologram.
    NoFeedback,
    /// Proximity cue rendered on the hologram surface.
    HolographicFeedback,
    /// Tip stopped by the physical phantom surface.
    PhysicalFeedback,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 3] = [
        ExperimentKind::NoFeedback,
        ExperimentKind::HolographicFeedback,
        ExperimentKind::PhysicalFeedback,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::NoFeedback => "no_feedback",
            ExperimentKind::HolographicFeedback => "holographic_feedback",
            ExperimentKind::PhysicalFeedback => "physical_feedback",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ExperimentKind::NoFeedback => "No feedback",
            ExperimentKind::HolographicFeedback => "Holographic feedback",
            ExperimentKind::PhysicalFeedback => "Physical feedback",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_feedback" | "none" => Ok(ExperimentKind::NoFeedback),
            "holographic_feedback" | "holographic" => Ok(ExperimentKind::HolographicFeedback),
            "physical_feedback" | "physical" => Ok(ExperimentKind::PhysicalFeedback),
            other => Err(Error::InvalidArgument(format!("unknown experiment kind {other:?}"))),
        }
    }
}

/// Frames during which the user held the tip on one fiducial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub fiducial: String,
    pub start_frame: i64,
    /// Inclusive.
    pub end_frame: i64,
}

/// All annotations of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub trial_id: String,
    pub experiment_kind: ExperimentKind,
    pub annotations: Vec<Annotation>,
}

impl AnnotationSet {
    /// Checks window order and one annotation per fiducial. Errors carry
    /// JSON-pointer paths into the annotation document.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, a) in self.annotations.iter().enumerate() {
            if a.start_frame > a.end_frame {
                return Err(Error::schema(
                    format!("/annotations/{i}"),
                    format!("start_frame {} after end_frame {}", a.start_frame, a.end_frame),
                ));
            }
            if !seen.insert(a.fiducial.as_str()) {
                return Err(Error::schema(
                    format!("/annotations/{i}/fiducial"),
                    format!("fiducial {:?} annotated twice", a.fiducial),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiducialMeasurement {
    pub fiducial: String,
    #[serde(with = "point_serde")]
    pub tip_mean_lab: Point3,
    /// 3D RMS sample SD of the tip over the window (mm).
    pub tip_sd: f64,
    pub target_error: f64,
    pub n_observations: usize,
    /// Set when the window held a single observation, so `tip_sd` carries no
    /// information.
    pub single_observation: bool,
}

/// Mean tip position over a dwell window and its distance to ground truth.
pub fn measure_fiducial(
    fiducial: &str,
    observations: &[TipObservation],
    ground_truth: &Point3,
) -> Result<FiducialMeasurement> {
    if observations.is_empty() {
        return Err(Error::EmptyWindow(fiducial.to_string()));
    }
    let n = observations.len() as f64;
    let mean = observations.iter().map(|o| o.tip_lab.coords).sum::<Vec3>() / n;
    let tip_sd = if observations.len() < 2 {
        log::warn!("fiducial {fiducial}: single observation in window, tip SD set to 0");
        0.0
    } else {
        let ss: f64 = observations
            .iter()
            .map(|o| (o.tip_lab.coords - mean).norm_squared())
            .sum();
        (ss / (n - 1.0)).sqrt()
    };
    let tip_mean_lab = Point3::from(mean);
    Ok(FiducialMeasurement {
        fiducial: fiducial.to_string(),
        tip_mean_lab,
        tip_sd,
        target_error: (tip_mean_lab - ground_truth).norm(),
        n_observations: observations.len(),
        single_observation: observations.len() < 2,
    })
}

/// How per-window tip SDs collapse into one trial value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TipAggregate {
    #[default]
    Max,
    Mean,
}

impl FromStr for TipAggregate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(TipAggregate::Max),
            "mean" => Ok(TipAggregate::Mean),
            other => Err(Error::InvalidArgument(format!("unknown tip aggregate {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_id: String,
    pub experiment_kind: ExperimentKind,
    pub error_mean: f64,
    pub error_sd: f64,
    pub tip_error: f64,
    pub gt_error: f64,
    pub n_fiducials: usize,
    /// Fiducial-level target errors, empty when the trial was entered as a
    /// summary only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub target_errors: Vec<f64>,
}

pub fn summarize_trial(
    trial_id: &str,
    kind: ExperimentKind,
    measurements: &[FiducialMeasurement],
    gt_uncertainty: f64,
    tip_aggregate: TipAggregate,
) -> Result<TrialResult> {
    if measurements.len() < 2 {
        return Err(Error::InsufficientMeasurements(measurements.len()));
    }
    let errors: Vec<f64> = measurements.iter().map(|m| m.target_error).collect();
    let (error_mean, var) = mean_and_variance(&errors);
    let tip_error = match tip_aggregate {
        TipAggregate::Max => measurements.iter().map(|m| m.tip_sd).fold(0.0, f64::max),
        TipAggregate::Mean => {
            measurements.iter().map(|m| m.tip_sd).sum::<f64>() / measurements.len() as f64
        }
    };
    Ok(TrialResult {
        trial_id: trial_id.to_string(),
        experiment_kind: kind,
        error_mean,
        error_sd: var.sqrt(),
        tip_error,
        gt_error: gt_uncertainty,
        n_fiducials: measurements.len(),
        target_errors: errors,
    })
}

/// Table-style per-experiment averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnAverages {
    pub error: f64,
    /// Pooled within-trial SD: `sqrt(Σ(nᵢ − 1)·sdᵢ² / Σ(nᵢ − 1))`, the root
    /// mean square of the trial SDs when trials have equal size.
    pub sd: f64,
    pub tip_error: f64,
    pub gt_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledStats {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
    /// True when computed from fiducial-level errors rather than trial
    /// summaries.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment_kind: ExperimentKind,
    pub trials: Vec<TrialResult>,
    pub averages: ColumnAverages,
    pub pooled: PooledStats,
}

impl ExperimentSummary {
    /// Pooled statistics from trial summaries alone: mean of trial means and
    /// the averaged SD column, with n the total fiducial count.
    pub fn pooled_from_summaries(&self) -> PooledStats {
        PooledStats {
            mean: self.averages.error,
            sd: self.averages.sd,
            n: self.trials.iter().map(|t| t.n_fiducials).sum(),
            exact: false,
        }
    }

    /// Pooled statistics over all fiducial-level errors, when every trial
    /// carries them.
    pub fn pooled_exact(&self) -> Option<PooledStats> {
        let complete = self
            .trials
            .iter()
            .all(|t| !t.target_errors.is_empty() && t.target_errors.len() == t.n_fiducials);
        if !complete {
            return None;
        }
        let all: Vec<f64> = self.trials.iter().flat_map(|t| t.target_errors.iter().copied()).collect();
        let (mean, var) = mean_and_variance(&all);
        Some(PooledStats {
            mean,
            sd: var.sqrt(),
            n: all.len(),
            exact: true,
        })
    }
}

pub fn summarize_experiment(trials: &[TrialResult]) -> Result<ExperimentSummary> {
    let first = trials.first().ok_or(Error::InsufficientMeasurements(0))?;
    let kind = first.experiment_kind;
    if trials.iter().any(|t| t.experiment_kind != kind) {
        return Err(Error::MixedExperimentKinds);
    }
    let n = trials.len() as f64;
    let mean_of = |f: fn(&TrialResult) -> f64| trials.iter().map(f).sum::<f64>() / n;

    let dof: f64 = trials.iter().map(|t| t.n_fiducials.saturating_sub(1) as f64).sum();
    let sd = if dof > 0.0 {
        (trials
            .iter()
            .map(|t| t.n_fiducials.saturating_sub(1) as f64 * t.error_sd * t.error_sd)
            .sum::<f64>()
            / dof)
            .sqrt()
    } else {
        0.0
    };
    let averages = ColumnAverages {
        error: mean_of(|t| t.error_mean),
        sd,
        tip_error: mean_of(|t| t.tip_error),
        gt_error: mean_of(|t| t.gt_error),
    };
    let mut summary = ExperimentSummary {
        experiment_kind: kind,
        trials: trials.to_vec(),
        averages,
        pooled: PooledStats {
            mean: 0.0,
            sd: 0.0,
            n: 0,
            exact: false,
        },
    };
    summary.pooled = summary.pooled_exact().unwrap_or_else(|| summary.pooled_from_summaries());
    Ok(summary)
}

/// Groups trials by kind and summarizes each group, in kind order.
pub fn summarize_by_kind(trials: &[TrialResult]) -> Result<Vec<ExperimentSummary>> {
    ExperimentKind::ALL
        .iter()
        .filter_map(|&kind| {
            let group: Vec<TrialResult> = trials.iter().filter(|t| t.experiment_kind == kind).cloned().collect();
            (!group.is_empty()).then(|| summarize_experiment(&group))
        })
        .collect()
}

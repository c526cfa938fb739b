//! Probe and phantom models: tip localization per frame and lab-frame ground
//! truth for the phantom fiducials.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_serde, LabeledPoint, LabeledPointSet, Point3, Vec3};
use crate::io::frames::{MarkerFrame, MarkerFrameStream};
use crate::registration::solve_rigid;

pub const DEFAULT_PROBE_MARKERS: usize = 5;
pub const DEFAULT_PHANTOM_MARKERS: usize = 9;
pub const DEFAULT_PHANTOM_FIDUCIALS: usize = 16;
/// Minimum clearance between the tip vertex and any probe marker center.
pub const MIN_TIP_CLEARANCE: f64 = 1.0;

/// CT-frame layout of the tracked probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeModel {
    markers_ct: LabeledPointSet,
    #[serde(with = "point_serde")]
    tip_ct: Point3,
}

impl ProbeModel {
    /// `expected_markers` is the configured marker count (5 by default, at
    /// least 3). Errors carry JSON-pointer paths relative to the probe object.
    pub fn new(markers_ct: LabeledPointSet, tip_ct: Point3, expected_markers: usize) -> Result<Self> {
        if expected_markers < 3 {
            return Err(Error::schema(
                "/expected_markers",
                format!("at least 3 markers are required, configured {expected_markers}"),
            ));
        }
        if markers_ct.len() != expected_markers {
            return Err(Error::schema(
                "/markers",
                format!("expected {expected_markers} markers, found {}", markers_ct.len()),
            ));
        }
        if !crate::geometry::is_finite(&tip_ct) {
            return Err(Error::schema("/tip", "tip is not finite"));
        }
        for (label, p) in markers_ct.iter() {
            let d = (p - tip_ct).norm();
            if d <= MIN_TIP_CLEARANCE {
                return Err(Error::schema(
                    "/tip",
                    format!("tip lies {d:.3} mm from marker {label}, must exceed {MIN_TIP_CLEARANCE} mm"),
                ));
            }
        }
        Ok(Self { markers_ct, tip_ct })
    }

    pub fn markers_ct(&self) -> &LabeledPointSet {
        &self.markers_ct
    }

    pub fn tip_ct(&self) -> &Point3 {
        &self.tip_ct
    }
}

/// CT-frame layout of the phantom markers and target fiducials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomModel {
    markers_ct: LabeledPointSet,
    fiducials_ct: LabeledPointSet,
}

impl PhantomModel {
    pub fn new(
        markers_ct: LabeledPointSet,
        fiducials_ct: LabeledPointSet,
        expected_markers: usize,
        expected_fiducials: usize,
    ) -> Result<Self> {
        if expected_markers < 3 {
            return Err(Error::schema(
                "/expected_markers",
                format!("at least 3 markers are required, configured {expected_markers}"),
            ));
        }
        if markers_ct.len() != expected_markers {
            return Err(Error::schema(
                "/markers",
                format!("expected {expected_markers} markers, found {}", markers_ct.len()),
            ));
        }
        if fiducials_ct.len() != expected_fiducials {
            return Err(Error::schema(
                "/fiducials",
                format!("expected {expected_fiducials} fiducials, found {}", fiducials_ct.len()),
            ));
        }
        if let Some(shared) = fiducials_ct.labels().find(|l| markers_ct.contains(l)) {
            return Err(Error::schema(
                "/fiducials",
                format!("label {shared:?} is used by both a marker and a fiducial"),
            ));
        }
        Ok(Self {
            markers_ct,
            fiducials_ct,
        })
    }

    pub fn markers_ct(&self) -> &LabeledPointSet {
        &self.markers_ct
    }

    pub fn fiducials_ct(&self) -> &LabeledPointSet {
        &self.fiducials_ct
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipObservation {
    pub frame_id: i64,
    #[serde(with = "point_serde")]
    pub tip_lab: Point3,
    pub registration_fre: f64,
}

/// Registers the probe's CT markers onto the frame's lab markers and carries
/// the tip vertex through.
pub fn locate_tip(frame: &MarkerFrame, probe: &ProbeModel) -> Result<TipObservation> {
    let lab = frame
        .subset(probe.markers_ct.labels())
        .ok_or_else(|| Error::InsufficientCorrespondence {
            common: 0,
            unmatched_source: probe.markers_ct.labels().map(str::to_string).collect(),
            unmatched_target: Vec::new(),
        })?;
    let reg = solve_rigid(&probe.markers_ct, &lab)?;
    if reg.matched() < probe.markers_ct.len() {
        log::warn!(
            "frame {}: probe registered on {} of {} markers",
            frame.frame_id,
            reg.matched(),
            probe.markers_ct.len()
        );
    }
    Ok(TipObservation {
        frame_id: frame.frame_id,
        tip_lab: reg.transform.apply(&probe.tip_ct),
        registration_fre: reg.fre_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthOptions {
    /// Expected per-axis tracker noise SD (mm).
    pub noise_sd: f64,
    /// A marker whose running median (9 observations) strays further than
    /// `static_factor · noise_sd` from its overall median on any axis flags a
    /// moved phantom.
    pub static_factor: f64,
}

impl Default for GroundTruthOptions {
    fn default() -> Self {
        Self {
            noise_sd: 0.25,
            static_factor: 5.0,
        }
    }
}

/// Floor for the static-phantom limit so noiseless input tolerates rounding.
const MIN_STATIC_LIMIT: f64 = 1e-6;
/// Consecutive observations whose median is compared against the track median.
const STATIC_WINDOW: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiducialUncertainty {
    pub label: String,
    /// 3D RMS sample SD of the transformed fiducial across frames (mm).
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Lab-frame fiducials, averaged over frames.
    pub fiducials: LabeledPointSet,
    pub uncertainty: Vec<FiducialUncertainty>,
    pub n_frames: usize,
    /// Mean over frames of the per-frame phantom registration FRE (mm).
    pub registration_fre: f64,
}

impl GroundTruth {
    pub fn max_uncertainty(&self) -> f64 {
        self.uncertainty.iter().map(|u| u.sd).fold(0.0, f64::max)
    }
}

/// Projects the phantom fiducials into the lab frame once per frame and
/// averages the results.
pub fn ground_truth_fiducials(
    frames: &MarkerFrameStream,
    phantom: &PhantomModel,
    options: &GroundTruthOptions,
) -> Result<GroundTruth> {
    if frames.is_empty() {
        return Err(Error::InsufficientFrames("phantom ground truth".into()));
    }
    check_static(frames, phantom, options)?;

    let n_fid = phantom.fiducials_ct.len();
    let mut per_frame: Vec<Vec<Point3>> = Vec::with_capacity(frames.len());
    let mut fre_sum = 0.0;
    for frame in frames.iter() {
        let lab = frame.subset(phantom.markers_ct.labels()).ok_or_else(|| {
            Error::InsufficientCorrespondence {
                common: 0,
                unmatched_source: phantom.markers_ct.labels().map(str::to_string).collect(),
                unmatched_target: Vec::new(),
            }
        })?;
        let reg = solve_rigid(&phantom.markers_ct, &lab)?;
        if reg.matched() < phantom.markers_ct.len() {
            log::warn!(
                "frame {}: phantom registered on {} of {} markers",
                frame.frame_id,
                reg.matched(),
                phantom.markers_ct.len()
            );
        }
        fre_sum += reg.fre_mean;
        per_frame.push(phantom.fiducials_ct.points().map(|p| reg.transform.apply(p)).collect());
    }

    let n = per_frame.len() as f64;
    let mut entries = Vec::with_capacity(n_fid);
    let mut uncertainty = Vec::with_capacity(n_fid);
    for (k, label) in phantom.fiducials_ct.labels().enumerate() {
        let mean = per_frame.iter().map(|f| f[k].coords).sum::<Vec3>() / n;
        let sd = if per_frame.len() < 2 {
            0.0
        } else {
            let ss: f64 = per_frame.iter().map(|f| (f[k].coords - mean).norm_squared()).sum();
            (ss / (n - 1.0)).sqrt()
        };
        entries.push(LabeledPoint {
            label: label.to_string(),
            position: Point3::from(mean),
        });
        uncertainty.push(FiducialUncertainty {
            label: label.to_string(),
            sd,
        });
    }
    Ok(GroundTruth {
        fiducials: LabeledPointSet::try_from(entries)?,
        uncertainty,
        n_frames: per_frame.len(),
        registration_fre: fre_sum / n,
    })
}

fn check_static(
    frames: &MarkerFrameStream,
    phantom: &PhantomModel,
    options: &GroundTruthOptions,
) -> Result<()> {
    let limit = (options.static_factor * options.noise_sd).max(MIN_STATIC_LIMIT);
    let wanted: HashSet<&str> = phantom.markers_ct.labels().collect();
    let mut tracks: BTreeMap<&str, Vec<(i64, Point3)>> = BTreeMap::new();
    for frame in frames.iter() {
        for o in &frame.observations {
            if let Some(&label) = wanted.get(o.label.as_str()) {
                tracks.entry(label).or_default().push((frame.frame_id, o.position));
            }
        }
    }
    for (label, track) in tracks {
        let global = [0, 1, 2].map(|axis| median(track.iter().map(|(_, p)| p[axis])));
        // Short tracks are checked frame by frame.
        let window = if track.len() < STATIC_WINDOW { 1 } else { STATIC_WINDOW };
        for (start, block) in track.windows(window).enumerate() {
            let displacement = (0..3)
                .map(|axis| (median(block.iter().map(|(_, p)| p[axis])) - global[axis]).abs())
                .fold(0.0, f64::max);
            if displacement > limit {
                return Err(Error::NonStaticPhantom {
                    label: label.to_string(),
                    frame_id: track[start + window / 2].0,
                    displacement,
                    limit,
                });
            }
        }
    }
    Ok(())
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

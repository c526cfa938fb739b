//! Tracker repeatability: static-marker spread and rigid-body distance
//! constancy. Sample statistics use the (n − 1) estimator throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Vec3};
use crate::io::frames::MarkerFrameStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerSd {
    pub label: String,
    pub n_frames: usize,
    /// Per-axis sample SD (mm).
    pub axis_sd: [f64; 3],
    /// `sqrt(sdx² + sdy² + sdz²)` (mm).
    pub rms_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseSpread {
    pub labels: (String, String),
    pub n_frames: usize,
    pub distance_mean: f64,
    pub distance_sd: f64,
    /// mm².
    pub distance_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub n_frames: usize,
    pub per_marker_sd: Vec<MarkerSd>,
    pub pairwise: Vec<PairwiseSpread>,
    pub max_pairwise_sd: f64,
    pub max_pairwise_variance: f64,
}

/// Two-pass sample mean and variance.
pub(crate) fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, ss / (n - 1.0))
}

/// Per-axis sample SD of each requested marker across the frames in which it
/// is observed.
pub fn static_marker_sd(frames: &MarkerFrameStream, labels: &[&str]) -> Result<Vec<MarkerSd>> {
    labels
        .iter()
        .map(|&label| {
            let track: Vec<Point3> = frames.iter().filter_map(|f| f.get(label).copied()).collect();
            if track.len() < 2 {
                return Err(Error::InsufficientFrames(format!("marker {label}")));
            }
            let axis = |k: usize| -> f64 {
                let v: Vec<f64> = track.iter().map(|p| p[k]).collect();
                mean_and_variance(&v).1.sqrt()
            };
            let axis_sd = [axis(0), axis(1), axis(2)];
            Ok(MarkerSd {
                label: label.to_string(),
                n_frames: track.len(),
                axis_sd,
                rms_sd: Vec3::from(axis_sd).norm(),
            })
        })
        .collect()
}

/// Spread of every inter-marker distance among `body_labels` across frames.
pub fn rigid_body_distance_spread(
    frames: &MarkerFrameStream,
    body_labels: &[&str],
) -> Result<Vec<PairwiseSpread>> {
    let mut out = Vec::new();
    for (i, &a) in body_labels.iter().enumerate() {
        for &b in &body_labels[i + 1..] {
            let distances: Vec<f64> = frames
                .iter()
                .filter_map(|f| Some((f.get(a)? - f.get(b)?).norm()))
                .collect();
            if distances.len() < 2 {
                return Err(Error::InsufficientFrames(format!("pair {a}–{b}")));
            }
            let (mean, var) = mean_and_variance(&distances);
            out.push(PairwiseSpread {
                labels: (a.to_string(), b.to_string()),
                n_frames: distances.len(),
                distance_mean: mean,
                distance_sd: var.sqrt(),
                distance_variance: var,
            });
        }
    }
    Ok(out)
}

/// Runs both analyses. Either label list may be empty.
pub fn stability_report(
    frames: &MarkerFrameStream,
    static_labels: &[&str],
    body_labels: &[&str],
) -> Result<StabilityReport> {
    if frames.len() < 2 {
        return Err(Error::InsufficientFrames("stability analysis".into()));
    }
    let per_marker_sd = static_marker_sd(frames, static_labels)?;
    let pairwise = rigid_body_distance_spread(frames, body_labels)?;
    Ok(StabilityReport {
        n_frames: frames.len(),
        max_pairwise_sd: pairwise.iter().map(|p| p.distance_sd).fold(0.0, f64::max),
        max_pairwise_variance: pairwise.iter().map(|p| p.distance_variance).fold(0.0, f64::max),
        per_marker_sd,
        pairwise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LabeledPoint;
    use crate::io::frames::MarkerFrame;
    use approx::assert_abs_diff_eq;

    fn stream(points: &[&[(&str, [f64; 3])]]) -> MarkerFrameStream {
        MarkerFrameStream::new(
            points
                .iter()
                .enumerate()
                .map(|(i, obs)| MarkerFrame {
                    frame_id: i as i64,
                    time: i as f64,
                    observations: obs
                        .iter()
                        .map(|(l, p)| LabeledPoint {
                            label: l.to_string(),
                            position: Point3::from(*p),
                        })
                        .collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_marker_has_zero_sd() {
        let frame: &[(&str, [f64; 3])] = &[("S", [1.0, 2.0, 3.0])];
        let s = stream(&vec![frame; 100]);
        let sd = static_marker_sd(&s, &["S"]).unwrap();
        assert_eq!(sd[0].axis_sd, [0.0, 0.0, 0.0]);
        assert_eq!(sd[0].n_frames, 100);
    }

    #[test]
    fn two_frame_sd_by_hand() {
        let s = stream(&[&[("S", [0.0, 0.0, 0.0])], &[("S", [1.0, 0.0, 0.0])]]);
        let sd = static_marker_sd(&s, &["S"]).unwrap();
        assert_abs_diff_eq!(sd[0].axis_sd[0], 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(sd[0].rms_sd, 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn pair_distance_by_hand() {
        let s = stream(&[
            &[("A", [0.0, 0.0, 0.0]), ("B", [10.0, 0.0, 0.0])],
            &[("A", [0.0, 0.0, 0.0]), ("B", [0.0, 11.0, 0.0])],
        ]);
        let pairs = rigid_body_distance_spread(&s, &["A", "B"]).unwrap();
        assert_abs_diff_eq!(pairs[0].distance_mean, 10.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pairs[0].distance_sd, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(pairs[0].distance_variance, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn insufficient_frames() {
        let s = stream(&[&[("A", [0.0, 0.0, 0.0])], &[("B", [0.0, 0.0, 0.0])]]);
        assert!(matches!(static_marker_sd(&s, &["A"]), Err(Error::InsufficientFrames(_))));
        assert!(matches!(
            rigid_body_distance_spread(&s, &["A", "B"]),
            Err(Error::InsufficientFrames(_))
        ));
    }

    #[test]
    fn report_maxima() {
        let s = stream(&[
            &[("A", [0.0, 0.0, 0.0]), ("B", [10.0, 0.0, 0.0]), ("C", [0.0, 5.0, 0.0])],
            &[("A", [0.0, 0.0, 0.0]), ("B", [12.0, 0.0, 0.0]), ("C", [0.0, 5.0, 0.0])],
        ]);
        let r = stability_report(&s, &["A"], &["A", "B", "C"]).unwrap();
        assert_eq!(r.pairwise.len(), 3);
        assert_abs_diff_eq!(r.max_pairwise_variance, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.max_pairwise_sd, 2.0f64.sqrt(), epsilon = 1e-12);
    }
}

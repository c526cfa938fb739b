//! Labeled point-to-point rigid registration (Kabsch, no scale).

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{centroid, LabeledPointSet, Point3, RigidTransform, Vec3};

/// Ratio of the second to the first principal spread below which the matched
/// points are treated as collinear.
pub const COLLINEAR_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledResidual {
    pub label: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationResult {
    pub transform: RigidTransform,
    /// Mean corresponding-point distance after alignment (mm).
    pub fre_mean: f64,
    pub fre_rms: f64,
    pub per_point_residuals: Vec<LabeledResidual>,
    /// Labels present only in the source set.
    pub unmatched_source: Vec<String>,
    /// Labels present only in the target set.
    pub unmatched_target: Vec<String>,
}

impl RegistrationResult {
    pub fn matched(&self) -> usize {
        self.per_point_residuals.len()
    }

    /// Sum of squared residuals, the quantity the solver minimizes.
    pub fn sum_of_squares(&self) -> f64 {
        self.per_point_residuals
            .iter()
            .map(|r| r.distance * r.distance)
            .sum()
    }
}

/// Solves the proper rigid transform taking `source` onto `target` over their
/// common labels, in source order.
pub fn solve_rigid(source: &LabeledPointSet, target: &LabeledPointSet) -> Result<RegistrationResult> {
    let mut labels = Vec::new();
    let mut src = Vec::new();
    let mut dst = Vec::new();
    let mut unmatched_source = Vec::new();
    for (label, p) in source.iter() {
        match target.get(label) {
            Some(q) => {
                labels.push(label.to_string());
                src.push(*p);
                dst.push(*q);
            }
            None => unmatched_source.push(label.to_string()),
        }
    }
    let unmatched_target: Vec<String> = target
        .labels()
        .filter(|l| !source.contains(l))
        .map(str::to_string)
        .collect();
    if labels.len() < 3 {
        return Err(Error::InsufficientCorrespondence {
            common: labels.len(),
            unmatched_source,
            unmatched_target,
        });
    }

    let transform = kabsch(&src, &dst)?;

    let per_point_residuals: Vec<LabeledResidual> = labels
        .into_iter()
        .zip(src.iter().zip(&dst))
        .map(|(label, (s, t))| LabeledResidual {
            label,
            distance: (transform.apply(s) - t).norm(),
        })
        .collect();
    let n = per_point_residuals.len() as f64;
    let fre_mean = per_point_residuals.iter().map(|r| r.distance).sum::<f64>() / n;
    let fre_rms = (per_point_residuals
        .iter()
        .map(|r| r.distance * r.distance)
        .sum::<f64>()
        / n)
        .sqrt();
    // Power-mean inequality, up to rounding.
    debug_assert!(fre_rms + 1e-12 >= fre_mean);

    Ok(RegistrationResult {
        transform,
        fre_mean,
        fre_rms,
        per_point_residuals,
        unmatched_source,
        unmatched_target,
    })
}

/// Least-squares rotation and translation mapping `src[i]` to `dst[i]`.
fn kabsch(src: &[Point3], dst: &[Point3]) -> Result<RigidTransform> {
    let src_c = centroid(src).expect("non-empty");
    let dst_c = centroid(dst).expect("non-empty");

    let mut cross = Matrix3::<f64>::zeros();
    let mut scatter = Matrix3::<f64>::zeros();
    for (s, d) in src.iter().zip(dst) {
        let a: Vec3 = s - src_c;
        let b: Vec3 = d - dst_c;
        cross += a * b.transpose();
        scatter += a * a.transpose();
    }

    // Collinear (or coincident) source points leave the rotation about their
    // common line unobservable.
    let spread = scatter.symmetric_eigenvalues();
    let mut sorted = [spread[0], spread[1], spread[2]];
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted[0] <= 0.0 || (sorted[1].max(0.0) / sorted[0]).sqrt() < COLLINEAR_RATIO {
        return Err(Error::DegenerateConfiguration(
            "matched points are collinear; rotation about their line is unobservable".into(),
        ));
    }

    // cross = U Σ Vᵀ, R = V D Uᵀ with D flipping the smallest singular direction
    // when V Uᵀ would be a reflection.
    let svd = cross.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").transpose();
    let mut rotation = v * u.transpose();
    if rotation.determinant() < 0.0 {
        let k = svd.singular_values.imin();
        let mut flip = Matrix3::identity();
        flip[(k, k)] = -1.0;
        rotation = v * flip * u.transpose();
    }
    let translation = dst_c.coords - rotation * src_c.coords;
    Ok(RigidTransform::from_parts_unchecked(rotation, translation))
}

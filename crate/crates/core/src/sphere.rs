//! Sphere-center estimation from surface vertices.
//!
//! [`fit_sphere_algebraic`] solves the linearized problem in one step and seeds
//! [`refine_sphere_geometric`], a damped Gauss–Newton on the true geometric
//! distances. The refinement matters for partial caps, where the linear fit is
//! biased.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{centroid, point_serde, Point3, Vec3};

/// Largest normal-matrix condition number accepted by the linear fit.
pub const MAX_CONDITION: f64 = 1e12;
pub const MAX_ITERATIONS: usize = 100;
pub const STEP_TOLERANCE: f64 = 1e-10;
const MAX_HALVINGS: usize = 20;
const FLAT_STEP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereFit {
    #[serde(with = "point_serde")]
    pub center: Point3,
    pub radius: f64,
    pub rms_residual: f64,
    pub n_points: usize,
}

/// RMS of the geometric residuals `|pᵢ − c| − r`.
pub fn rms_geometric_residual(points: &[Point3], center: &Point3, radius: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let ss: f64 = points
        .iter()
        .map(|p| ((p - center).norm() - radius).powi(2))
        .sum();
    (ss / points.len() as f64).sqrt()
}

/// Linear least-squares sphere through `points`.
///
/// Minimizes `Σ(|p − c|² − r²)²` by writing `|p|² = 2p·c + (r² − |c|²)` and
/// solving the 4×4 normal equations. Points are centered and scaled to unit
/// RMS spread first, so the conditioning test does not depend on where the
/// sphere sits or how large it is.
pub fn fit_sphere_algebraic(points: &[Point3]) -> Result<SphereFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateInput(format!(
            "{} points given, a sphere needs at least 4",
            points.len()
        )));
    }
    if let Some(bad) = points.iter().position(|p| !crate::geometry::is_finite(p)) {
        return Err(Error::DegenerateInput(format!("point {bad} is not finite")));
    }
    let origin = centroid(points).expect("non-empty");
    let spread = (points
        .iter()
        .map(|p| (p - origin).norm_squared())
        .sum::<f64>()
        / points.len() as f64)
        .sqrt();
    if spread == 0.0 {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }

    let mut normal = Matrix4::<f64>::zeros();
    let mut rhs = Vector4::<f64>::zeros();
    for p in points {
        let q = (p - origin) / spread;
        let row = Vector4::new(2.0 * q.x, 2.0 * q.y, 2.0 * q.z, 1.0);
        normal += row * row.transpose();
        rhs += row * q.norm_squared();
    }

    let eigen = SymmetricEigen::new(normal);
    let (lo, hi) = (eigen.eigenvalues.min(), eigen.eigenvalues.max());
    if lo <= 0.0 || hi / lo > MAX_CONDITION {
        return Err(Error::DegenerateInput(format!(
            "points are coplanar or collinear (condition number {:.3e})",
            if lo <= 0.0 { f64::INFINITY } else { hi / lo }
        )));
    }
    let solution = normal
        .cholesky()
        .ok_or_else(|| Error::DegenerateInput("normal equations not positive definite".into()))?
        .solve(&rhs);

    let center_q = Vec3::new(solution[0], solution[1], solution[2]);
    let radius_sq = solution[3] + center_q.norm_squared();
    if radius_sq <= 0.0 {
        return Err(Error::DegenerateInput("negative squared radius".into()));
    }
    let center = origin + center_q * spread;
    let radius = radius_sq.sqrt() * spread;
    Ok(SphereFit {
        center,
        radius,
        rms_residual: rms_geometric_residual(points, &center, radius),
        n_points: points.len(),
    })
}

/// Gauss–Newton refinement of `Σ(|pᵢ − c| − r)²` starting from `init`.
///
/// A step that raises the cost is halved up to 20 times; if no halving helps
/// the current estimate is already a minimum at working precision and is
/// returned. Apart from rounding-level moves next to the minimum the cost
/// never increases.
pub fn refine_sphere_geometric(points: &[Point3], init: &SphereFit) -> Result<SphereFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateInput(format!(
            "{} points given, a sphere needs at least 4",
            points.len()
        )));
    }
    if init.radius.is_nan() || init.radius <= 0.0 || !crate::geometry::is_finite(&init.center) {
        return Err(Error::InvalidArgument(
            "initial sphere must have a finite center and positive radius".into(),
        ));
    }

    // Work relative to the centroid to keep the residuals well scaled.
    let origin = centroid(points).expect("non-empty");
    let local: Vec<Vec3> = points.iter().map(|p| p - origin).collect();
    let cost = |c: &Vec3, r: f64| -> f64 {
        local.iter().map(|q| ((q - c).norm() - r).powi(2)).sum()
    };

    let mut center = init.center - origin;
    let mut radius = init.radius;
    let mut current = cost(&center, radius);
    let mut last_step = f64::INFINITY;

    for _ in 0..MAX_ITERATIONS {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for q in &local {
            let d = q - center;
            let dist = d.norm();
            if dist == 0.0 {
                continue;
            }
            let row = Vector4::new(-d.x / dist, -d.y / dist, -d.z / dist, -1.0);
            let residual = dist - radius;
            jtj += row * row.transpose();
            jtr += row * residual;
        }
        let Some(chol) = jtj.cholesky() else {
            return Err(Error::DegenerateInput(
                "geometric normal equations are singular".into(),
            ));
        };
        let delta = -chol.solve(&jtr);

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let c = center + Vec3::new(delta[0], delta[1], delta[2]) * scale;
            let r = radius + delta[3] * scale;
            let trial = cost(&c, r);
            // Near the minimum the cost is flat to rounding; small full steps
            // are taken on the Gauss–Newton model alone.
            let tiny = scale == 1.0 && delta.norm() <= FLAT_STEP * (1.0 + radius);
            if r > 0.0 && (trial <= current || tiny) {
                accepted = Some((c, r, trial, delta.norm() * scale));
                break;
            }
            scale *= 0.5;
        }
        let Some((c, r, trial, step)) = accepted else {
            // No descent along the Gauss–Newton direction: at the minimum.
            last_step = 0.0;
            break;
        };
        center = c;
        radius = r;
        current = trial;
        last_step = step;
        if step <= STEP_TOLERANCE {
            break;
        }
    }

    if last_step > STEP_TOLERANCE {
        return Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            last_step,
        });
    }
    let center = origin + center;
    Ok(SphereFit {
        center,
        radius,
        rms_residual: (current / points.len() as f64).sqrt(),
        n_points: points.len(),
    })
}

/// Algebraic fit refined geometrically, falling back to the algebraic result
/// when the refinement does not converge.
pub fn fit_sphere(points: &[Point3]) -> Result<SphereFit> {
    let init = fit_sphere_algebraic(points)?;
    match refine_sphere_geometric(points, &init) {
        Ok(fit) => Ok(fit),
        Err(Error::NoConvergence { last_step, .. }) => {
            log::warn!("geometric sphere refinement did not converge (step {last_step:.3e} mm); using algebraic fit");
            Ok(init)
        }
        Err(e) => Err(e),
    }
}

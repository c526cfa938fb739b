//! Points, labeled point sets and proper rigid transforms.
//!
//! All lengths are millimeters. Rotations are stored as 3×3 matrices and are
//! checked for orthonormality and unit determinant on construction.

use std::collections::HashSet;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = Vector3<f64>;

/// Tolerance for exact-algebra checks (mm, or dimensionless for rotations).
pub const EXACT_TOL: f64 = 1e-9;

/// Orthonormality drift above which `compose` projects back onto SO(3).
const RENORMALIZE_TOL: f64 = 1e-12;

pub fn is_finite(p: &Point3) -> bool {
    p.coords.iter().all(|c| c.is_finite())
}

/// Serde helper: points as `[x, y, z]`.
pub(crate) mod point_serde {
    use super::Point3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &Point3, s: S) -> Result<S::Ok, S::Error> {
        [p.x, p.y, p.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Point3, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(d)?;
        Ok(Point3::new(x, y, z))
    }
}

/// A labeled marker, fiducial or sphere center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub label: String,
    #[serde(with = "point_serde")]
    pub position: Point3,
}

/// Non-empty list of points with unique labels, in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<LabeledPoint>", into = "Vec<LabeledPoint>")]
pub struct LabeledPointSet {
    entries: Vec<LabeledPoint>,
}

impl LabeledPointSet {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Point3)>,
        S: Into<String>,
    {
        let entries: Vec<LabeledPoint> = entries
            .into_iter()
            .map(|(label, position)| LabeledPoint {
                label: label.into(),
                position,
            })
            .collect();
        Self::try_from(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; sets are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Point3)> {
        self.entries.iter().map(|e| (e.label.as_str(), &e.position))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }

    pub fn points(&self) -> impl Iterator<Item = &Point3> {
        self.entries.iter().map(|e| &e.position)
    }

    pub fn get(&self, label: &str) -> Option<&Point3> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| &e.position)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.get(label).is_some()
    }

    pub fn entries(&self) -> &[LabeledPoint] {
        &self.entries
    }

    /// Applies `t` to every point, keeping labels and order.
    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| LabeledPoint {
                    label: e.label.clone(),
                    position: t.apply(&e.position),
                })
                .collect(),
        }
    }
}

impl TryFrom<Vec<LabeledPoint>> for LabeledPointSet {
    type Error = Error;

    fn try_from(entries: Vec<LabeledPoint>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidPointSet("point set is empty".into()));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if !seen.insert(e.label.as_str()) {
                return Err(Error::InvalidPointSet(format!(
                    "duplicate label {:?}",
                    e.label
                )));
            }
            if !is_finite(&e.position) {
                return Err(Error::InvalidPointSet(format!(
                    "non-finite coordinate for {:?}",
                    e.label
                )));
            }
        }
        Ok(Self { entries })
    }
}

impl From<LabeledPointSet> for Vec<LabeledPoint> {
    fn from(set: LabeledPointSet) -> Self {
        set.entries
    }
}

/// Proper rigid motion `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTransform", into = "RawTransform")]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vec3,
}

/// JSON shape: row-major rotation followed by translation.
#[derive(Serialize, Deserialize)]
struct RawTransform {
    rotation: [f64; 9],
    translation: [f64; 3],
}

impl TryFrom<RawTransform> for RigidTransform {
    type Error = Error;

    fn try_from(raw: RawTransform) -> Result<Self> {
        RigidTransform::new(
            Matrix3::from_row_slice(&raw.rotation),
            Vec3::from(raw.translation),
        )
    }
}

impl From<RigidTransform> for RawTransform {
    fn from(t: RigidTransform) -> Self {
        let r = &t.rotation;
        RawTransform {
            rotation: [
                r[(0, 0)],
                r[(0, 1)],
                r[(0, 2)],
                r[(1, 0)],
                r[(1, 1)],
                r[(1, 2)],
                r[(2, 0)],
                r[(2, 1)],
                r[(2, 2)],
            ],
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    /// Validating constructor: `rotation` must be orthonormal with det +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        if !rotation.iter().all(|v| v.is_finite()) || !translation.iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidTransform("non-finite entry".into()));
        }
        let drift = orthonormality_error(&rotation);
        if drift > EXACT_TOL {
            return Err(Error::InvalidTransform(format!(
                "rotation not orthonormal (max |RᵀR − I| = {drift:.3e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidTransform(format!(
                "rotation determinant {det} is not +1"
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Rotation of `angle` radians about `axis` followed by `translation`.
    pub fn from_axis_angle(axis: &Vec3, angle: f64, translation: Vec3) -> Self {
        let rotation = if axis.norm() == 0.0 || angle == 0.0 {
            Matrix3::identity()
        } else {
            *Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle).matrix()
        };
        Self {
            rotation,
            translation,
        }
    }

    /// Wraps a rotation that is already known to be proper, e.g. the product
    /// of an SVD solve. Callers are responsible for the invariant.
    pub(crate) fn from_parts_unchecked(rotation: Matrix3<f64>, translation: Vec3) -> Self {
        debug_assert!(orthonormality_error(&rotation) < 1e-8);
        Self {
            rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        let mut rotation = self.rotation * other.rotation;
        if orthonormality_error(&rotation) > RENORMALIZE_TOL {
            rotation = nearest_rotation(&rotation);
        }
        RigidTransform {
            rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn invert(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Geodesic rotation angle in radians, in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        rotation_angle(&self.rotation)
    }

    /// Rotation angle and translation distance between two poses.
    pub fn distance_to(&self, other: &RigidTransform) -> (f64, f64) {
        let relative = self.rotation.transpose() * other.rotation;
        (
            (self.translation - other.translation).norm(),
            rotation_angle(&relative),
        )
    }
}

/// Largest absolute entry of `RᵀR − I`.
pub fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).amax()
}

/// Geodesic angle of a rotation matrix.
///
/// Equal to `arccos((tr R − 1) / 2)`, evaluated through `atan2` of the sine and
/// cosine parts so that angles near zero keep full precision.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let cos = (r.trace() - 1.0) / 2.0;
    let sin = 0.5
        * Vec3::new(
            r[(2, 1)] - r[(1, 2)],
            r[(0, 2)] - r[(2, 0)],
            r[(1, 0)] - r[(0, 1)],
        )
        .norm();
    sin.atan2(cos)
}

/// Projects a nearly orthonormal matrix onto SO(3).
fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut d = Matrix3::identity();
        let k = svd.singular_values.imin();
        d[(k, k)] = -1.0;
        r = u * d * v_t;
    }
    r
}

pub fn centroid<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Option<Point3> {
    let mut sum = Vec3::zeros();
    let mut n = 0usize;
    for p in points {
        sum += p.coords;
        n += 1;
    }
    (n > 0).then(|| Point3::from(sum / n as f64))
}

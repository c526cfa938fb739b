//! Reference computations for the test suites, written independently of the
//! library: different algorithms, plain nalgebra types.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, UnitQuaternion, Vector3, Vector4};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Horn's closed-form absolute orientation via the 4×4 quaternion matrix.
/// Returns `(R, t)` minimizing `Σ |R·src + t − dst|²`.
pub fn horn(src: &[Vector3<f64>], dst: &[Vector3<f64>]) -> (Matrix3<f64>, Vector3<f64>) {
    assert_eq!(src.len(), dst.len());
    let n = src.len() as f64;
    let cs = src.iter().sum::<Vector3<f64>>() / n;
    let cd = dst.iter().sum::<Vector3<f64>>() / n;
    let mut s = Matrix3::zeros();
    for (a, b) in src.iter().zip(dst) {
        s += (a - cs) * (b - cd).transpose();
    }
    let (sxx, sxy, sxz) = (s[(0, 0)], s[(0, 1)], s[(0, 2)]);
    let (syx, syy, syz) = (s[(1, 0)], s[(1, 1)], s[(1, 2)]);
    let (szx, szy, szz) = (s[(2, 0)], s[(2, 1)], s[(2, 2)]);
    let nmat = Matrix4::new(
        sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
        syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
        szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
        sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz,
    );
    let eig = SymmetricEigen::new(nmat);
    let k = eig.eigenvalues.imax();
    let q: Vector4<f64> = eig.eigenvectors.column(k).into();
    let rot = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
    let r = rot.to_rotation_matrix().into_inner();
    (r, cd - r * cs)
}

/// Root mean square of `|R·src + t − dst|`.
pub fn rms_residual(r: &Matrix3<f64>, t: &Vector3<f64>, src: &[Vector3<f64>], dst: &[Vector3<f64>]) -> f64 {
    let ss: f64 = src.iter().zip(dst).map(|(a, b)| (r * a + t - b).norm_squared()).sum();
    (ss / src.len() as f64).sqrt()
}

/// Geodesic angle between two rotations, via the quaternion of `Aᵀ·B`.
pub fn rotation_distance(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let rel = nalgebra::Rotation3::from_matrix_unchecked(a.transpose() * b);
    UnitQuaternion::from_rotation_matrix(&rel).angle()
}

/// Geometric sphere fit by Nelder–Mead over the center, with the radius
/// eliminated as the mean distance to the center.
pub fn sphere_nelder_mead(points: &[Vector3<f64>], start: Vector3<f64>) -> (Vector3<f64>, f64) {
    let radius_for = |c: &Vector3<f64>| points.iter().map(|p| (p - c).norm()).sum::<f64>() / points.len() as f64;
    let cost = |c: &Vector3<f64>| {
        let r = radius_for(c);
        points.iter().map(|p| ((p - c).norm() - r).powi(2)).sum::<f64>()
    };
    let scale = points.iter().map(|p| (p - start).norm()).fold(0.0, f64::max).max(1.0) * 0.1;
    let mut simplex: Vec<(Vector3<f64>, f64)> = (0..4)
        .map(|i| {
            let mut v = start;
            if i > 0 {
                v[i - 1] += scale;
            }
            (v, cost(&v))
        })
        .collect();
    for _ in 0..20_000 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (simplex[3].0 - simplex[0].0).norm();
        if spread < 1e-11 * (1.0 + simplex[0].0.norm()) {
            break;
        }
        let centroid = (simplex[0].0 + simplex[1].0 + simplex[2].0) / 3.0;
        let worst = simplex[3];
        let reflect = centroid + (centroid - worst.0);
        let fr = cost(&reflect);
        if fr < simplex[0].1 {
            let expand = centroid + 2.0 * (centroid - worst.0);
            let fe = cost(&expand);
            simplex[3] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflect, fr);
        } else {
            let contract = if fr < worst.1 {
                centroid + 0.5 * (reflect - centroid)
            } else {
                centroid + 0.5 * (worst.0 - centroid)
            };
            let fc = cost(&contract);
            if fc < worst.1.min(fr) {
                simplex[3] = (contract, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    s.0 = best + 0.5 * (s.0 - best);
                    s.1 = cost(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let c = simplex[0].0;
    (c, radius_for(&c))
}

/// Homogeneous-matrix drift replay. Each event is `(is_detection, pose)`;
/// returns `(translation, angle in radians)` of displayed versus true
/// hologram after every event.
pub fn replay_drift(events: &[(bool, Matrix4<f64>)], hologram_in_anchor: &Matrix4<f64>) -> Vec<(f64, f64)> {
    let mut world = Matrix4::identity();
    let mut displayed = *hologram_in_anchor;
    events
        .iter()
        .map(|(detect, pose)| {
            if *detect {
                displayed = pose * hologram_in_anchor;
            } else {
                world = pose * world;
            }
            let truth = world * hologram_in_anchor;
            let dt = (displayed.fixed_view::<3, 1>(0, 3) - truth.fixed_view::<3, 1>(0, 3)).norm();
            let ra: Matrix3<f64> = displayed.fixed_view::<3, 3>(0, 0).into();
            let rb: Matrix3<f64> = truth.fixed_view::<3, 3>(0, 0).into();
            (dt, rotation_distance(&ra, &rb))
        })
        .collect()
}

pub fn homogeneous(r: &Matrix3<f64>, t: &Vector3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(t);
    m
}

/// Standard normal CDF by composite Simpson quadrature of the density from 0.
pub fn normal_cdf_simpson(z: f64) -> f64 {
    let n = 20_000;
    let h = z / n as f64;
    let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(z);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * pdf(i as f64 * h);
    }
    0.5 + s * h / 3.0
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic 1% critical value of the two-sample KS statistic.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// Two-sided interval for a sample SD of `n` normal draws with true SD
/// `sigma`, at the given confidence.
pub fn sd_chi_square_interval(sigma: f64, n: usize, confidence: f64) -> (f64, f64) {
    let dof = (n - 1) as f64;
    let chi = ChiSquared::new(dof).expect("positive dof");
    let alpha = 1.0 - confidence;
    let lo = chi.inverse_cdf(alpha / 2.0);
    let hi = chi.inverse_cdf(1.0 - alpha / 2.0);
    (sigma * (lo / dof).sqrt(), sigma * (hi / dof).sqrt())
}

/// First-order prediction of the RMS target registration error for a point
/// registration with isotropic per-axis localization noise `sigma`:
/// `TRE² = (3σ²/N)·(1 + ⅓·Σₖ dₖ²/fₖ²)`, with `dₖ` the target's distance from
/// principal axis `k` of the markers and `fₖ` the markers' RMS distance from it.
pub fn predicted_tre_rms(markers: &[Vector3<f64>], target: &Vector3<f64>, sigma: f64) -> f64 {
    let n = markers.len() as f64;
    let c = markers.iter().sum::<Vector3<f64>>() / n;
    let mut cov = Matrix3::zeros();
    for m in markers {
        cov += (m - c) * (m - c).transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut ratio = 0.0;
    for k in 0..3 {
        let axis: Vector3<f64> = eig.eigenvectors.column(k).into();
        let off_axis = |p: &Vector3<f64>| {
            let d = p - c;
            (d - axis * axis.dot(&d)).norm_squared()
        };
        let f2 = markers.iter().map(off_axis).sum::<f64>() / n;
        ratio += off_axis(target) / f2;
    }
    (3.0 * sigma * sigma / n * (1.0 + ratio / 3.0)).sqrt()
}

/// One reference trial summary: kind, trial number, error mean, error SD,
/// tip error, ground-truth error (mm).
pub type ReferenceRow = (&'static str, u32, f64, f64, f64, f64);

pub const REFERENCE_TRIALS: [ReferenceRow; 9] = [
    ("no_feedback", 1, 14.42, 3.30, 1.82, 1.51),
    ("no_feedback", 2, 11.81, 2.31, 1.85, 1.50),
    ("no_feedback", 3, 12.01, 3.11, 2.07, 1.49),
    ("holographic_feedback", 1, 10.01, 2.12, 1.78, 1.51),
    ("holographic_feedback", 2, 14.50, 2.95, 1.78, 1.50),
    ("holographic_feedback", 3, 11.47, 3.71, 1.52, 1.51),
    ("physical_feedback", 1, 6.86, 2.19, 0.85, 0.91),
    ("physical_feedback", 2, 7.67, 3.50, 1.02, 1.01),
    ("physical_feedback", 3, 6.40, 3.28, 1.09, 1.01),
];

/// Reference averages per kind: error, SD, tip error, gt error.
pub const REFERENCE_AVERAGES: [(&str, [f64; 4]); 3] = [
    ("no_feedback", [12.75, 2.94, 1.92, 1.50]),
    ("holographic_feedback", [11.99, 2.99, 1.70, 1.51]),
    ("physical_feedback", [6.98, 3.04, 0.99, 0.98]),
];

/// `n` values with exactly the given sample mean and sample SD (up to
/// rounding): an evenly spaced ramp, standardized and rescaled.
pub fn values_with_moments(mean: f64, sd: f64, n: usize) -> Vec<f64> {
    let ramp: Vec<f64> = (0..n).map(|i| i as f64 - (n as f64 - 1.0) / 2.0).collect();
    let ss: f64 = ramp.iter().map(|x| x * x).sum();
    let s = (ss / (n as f64 - 1.0)).sqrt();
    ramp.iter().map(|x| mean + sd * x / s).collect()
}

/// Per-window tip SDs whose maximum is `max`.
pub fn tip_sds_with_max(max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| max * (0.5 + 0.5 * i as f64 / (n as f64 - 1.0))).collect()
}

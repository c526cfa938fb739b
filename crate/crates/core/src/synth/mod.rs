//! Seeded generators with known ground truth.

pub mod rng;
pub mod scene;
pub mod session;

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{Point3, Vec3};
use rng::SeededRng;

pub use scene::{default_phantom, default_probe, SceneConfig, SurfaceSphere};
pub use session::{generate_session, Ledger, LedgerFiducial, Session, UserErrorModel};

/// Part of the sphere the samples cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coverage {
    Full,
    /// Polar cap around +z with the given half-angle in degrees.
    Cap(f64),
}

/// Uniform samples over the covered surface, each moved by isotropic
/// Gaussian noise.
pub fn generate_sphere_cloud(
    center: &Point3,
    radius: f64,
    n: usize,
    coverage: Coverage,
    noise_sd: f64,
    seed: u64,
) -> Result<Vec<Point3>> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 points, got {n}")));
    }
    if radius.is_nan() || radius <= 0.0 || noise_sd.is_nan() || noise_sd < 0.0 {
        return Err(Error::InvalidArgument("radius must be positive and noise non-negative".into()));
    }
    let half_angle = match coverage {
        Coverage::Full => std::f64::consts::PI,
        Coverage::Cap(deg) if deg > 0.0 && deg <= 180.0 => deg.to_radians(),
        Coverage::Cap(deg) => {
            return Err(Error::InvalidArgument(format!("cap half-angle {deg} outside (0, 180]")))
        }
    };
    let min_z = half_angle.cos();
    let mut surface = SeededRng::new(seed, 0);
    let mut noise = SeededRng::new(seed, 1);
    Ok((0..n)
        .map(|_| {
            let z = 1.0 - (1.0 - min_z) * surface.uniform();
            let phi = TAU * surface.uniform();
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let dir = Vec3::new(rho * phi.cos(), rho * phi.sin(), z);
            center + dir * radius + noise.normal_vec3(noise_sd)
        })
        .collect())
}

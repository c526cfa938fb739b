//! Seeded random source for the simulators.
//!
//! ChaCha20 in counter mode. The 256-bit key is the 64-bit seed in
//! little-endian order followed by 24 zero bytes; each purpose (user error,
//! marker noise, …) reads its own ChaCha stream so that changing how many
//! draws one purpose makes leaves the others untouched. Words are taken with
//! `next_u64` (two consecutive 32-bit outputs, low word first).
//!
//! Derived variates:
//! - uniform `[0, 1)`: top 53 bits of a word times 2⁻⁵³;
//! - standard normal: Box–Muller cosine branch, `sqrt(−2 ln(1 − u₁))·cos(2π u₂)`,
//!   one normal per two uniforms;
//! - unit vector: three normals, normalized.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::geometry::Vec3;

pub struct SeededRng {
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Isotropic Gaussian vector with per-axis SD `sd`.
    pub fn normal_vec3(&mut self, sd: f64) -> Vec3 {
        Vec3::new(self.normal(), self.normal(), self.normal()) * sd
    }

    pub fn unit_vector(&mut self) -> Vec3 {
        loop {
            let v = self.normal_vec3(1.0);
            let n = v.norm();
            if n > 1e-12 {
                return v / n;
            }
        }
    }
}

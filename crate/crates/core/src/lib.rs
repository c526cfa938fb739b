//! Error assessment for AR-assisted neuronavigation measured with an external
//! optical tracker.
//!
//! A tracked probe touches phantom fiducials where the user believes they
//! are; the phantom's own markers give the true fiducial positions. Target
//! error, tip and ground-truth jitter, tracker stability and between-condition
//! statistics follow from those two registrations.

pub mod drift;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod probe;
pub mod registration;
pub mod sphere;
pub mod stability;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{LabeledPoint, LabeledPointSet, Point3, RigidTransform, Vec3};
pub use io::frames::{MarkerFrame, MarkerFrameStream};
pub use registration::{solve_rigid, RegistrationResult};
pub use sphere::{fit_sphere, SphereFit};

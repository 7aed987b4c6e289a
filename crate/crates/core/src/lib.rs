//! Minimal surfaces from Weierstrass data.
//!
//! The crate builds minimal surfaces from a holomorphic pair `(f, g)`,
//! transforms them to canonical principal parameters by integrating a
//! complex ODE, and decides whether two minimal surfaces are congruent,
//! recovering the rigid motion between them. The degree-6 polynomial
//! families used as test instances live in [`families`].
//!
//! Module map:
//!
//! - [`analytic`]: holomorphic expressions (parse, print, evaluate, differentiate)
//! - [`weierstrass`]: Weierstrass curves, charts, closed-form metric and normal curvature
//! - [`surfgeom`]: numerical fundamental forms, curvature, minimality checks, Ganchev PDE residual
//! - [`canonical`]: canonical principal parameters via the complex ODE
//! - [`congruence`]: curvature and gauge matching, rigid-motion recovery
//! - [`families`]: degree-6 polynomial charts, the 22-equation system, shape-parameter families

pub mod analytic;
pub mod canonical;
pub mod chart;
pub mod congruence;
pub mod export;
pub mod families;
pub mod lsq;
pub mod ode;
pub mod quad;
pub mod surd;
pub mod surfgeom;
pub mod weierstrass;

pub use num_complex::Complex64 as C64;

pub use analytic::{AnalyticExpr, Branch, Jet};
pub use canonical::{CanonicalForm, NuField};
pub use chart::{Chart, ChartJet, Provenance};
pub use congruence::{CongruenceReport, GaugeParams};
pub use families::Degree6Coeffs;
pub use weierstrass::WeierstrassPair;

/// Three-vector used for points of surfaces in space.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 real matrix (rotations, covariance).
pub type Mat3 = nalgebra::Matrix3<f64>;

//! Goursat's lemma, checked numerically: exact-rational triangles,
//! exceptional sets, certified decompositions and contour quadrature.

// errors and nodes carry exact points by value; they are cold paths
#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod decomposition;
pub mod exceptional;
pub mod functions;
pub mod geometry;
pub mod harness;
pub mod point;
pub mod quadrature;

/// Version string recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use decomposition::{decompose, verify_certificate, BoundMode, Certificate};
pub use exceptional::{characteristic_system, restrict_to_triangle, CharacteristicSystem, Cluster, ExceptionalSet};
pub use functions::{FunctionSpec, Family, BaseFunction};
pub use geometry::Triangle;
pub use point::{ComplexPoint, Point, Rational};
pub use quadrature::{integrate_contour, integrate_segment, integrate_triangle, IntegralResult};

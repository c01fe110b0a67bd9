//! Classical fields of topological line defects built from boson condensation functions.
//!
//! A defect line `y(σ)` carries a multivalued condensation function `f` whose
//! gradient is single valued. From `∇f` and the line geometry this crate
//! computes the screened magnetic field, the vacuum current and the vector
//! potential of the resulting flux tube, together with the topological
//! charge and the consistency checks tying them together. For the infinite
//! straight line every observable has a closed form in terms of `K₀` and
//! `K₁`, which the generic line-quadrature pipeline is checked against.
//!
//! Natural units (ħ = c = 1) are used throughout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod condensate;
pub mod contour;
pub mod curve;
pub mod curve_io;
pub mod error;
pub mod fields;
pub mod greens;
pub mod grid;
pub mod params;
pub mod quadrature;

/// Spatial 3-vector.
pub type Vec3 = nalgebra::Vector3<f64>;

pub use contour::Contour;
pub use curve::{resample_curve, DefectCurve, Polyline};
pub use error::{DefectError, Result};
pub use grid::{FieldGrid, Grid3, Rank};
pub use params::{make_params, params_from_microscopic, PhysicalParams};
pub use quadrature::{GaussOrder, QuadraturePolicy};

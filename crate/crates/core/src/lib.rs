//! Steklov and sloshing eigenvalues of planar domains, disk automorphisms,
//! hyperbolic caps and the folding/rearrangement calculus for measures on
//! the unit circle.

// NaN-rejecting range checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caps;
pub mod conformal;
pub mod disk;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod geometry;
pub mod measure;
pub mod mesher;
pub mod moebius;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{ArcSegment, Corner, Density, Family, MixedDomain, PlanarDomain, Point};
pub use caps::{CapMap, HyperbolicCap};
pub use disk::BoundaryFunction;
pub use measure::{CircleMeasure, ProjectiveDirection, QuadForm2};
pub use moebius::MoebiusAut;

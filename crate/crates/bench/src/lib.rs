//! Inputs shared by the benchmarks.

use steklov_core::caps::normalize_measure;
use steklov_core::geometry::make_double_disk;
use steklov_core::{CircleMeasure, PlanarDomain};

pub fn double_disk() -> PlanarDomain {
    make_double_disk(0.05).expect("valid eps")
}

/// Centered, rotation-normalized density `1 + 0.3 cos 2θ`.
pub fn anisotropic_measure(nodes: usize) -> CircleMeasure {
    let mu = CircleMeasure::from_density(nodes, |t| 1.0 + 0.3 * (2.0 * t).cos()).expect("positive density");
    normalize_measure(&mu).expect("normalizable")
}

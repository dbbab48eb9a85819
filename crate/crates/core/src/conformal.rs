//! Explicit conformal maps from the disk onto domains bounded by two
//! circular arcs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{ArcSegment, PlanarDomain, Point};
use crate::measure::{BoundaryMap, CircleMeasure};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `φ: 𝔻 → Ω` as disk → upper half-plane → sector of angle `A` → `Ω`, the
/// last step inverting `z ↦ (z − c₁)/(z − c₂)`. The corner `c₁` is the image
/// of `−1` and `c₂` the image of `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoArcMap {
    pub c1: Point,
    pub c2: Point,
    /// Direction of the sector's first ray.
    pub alpha0: f64,
    /// Interior corner angle.
    pub angle: f64,
}

pub fn two_arc_map(domain: &PlanarDomain) -> Result<TwoArcMap> {
    if domain.arcs.len() != 2 || !domain.arcs.iter().all(ArcSegment::is_arc) {
        return Err(Error::Shape(format!(
            "domain {} is not bounded by exactly two circular arcs",
            domain.id
        )));
    }
    let c1 = domain.arcs[0].start();
    let c2 = domain.arcs[0].end();
    if (c1 - c2).norm() < 1e-12 {
        return Err(Error::Shape("the two arcs meet in a single point".into()));
    }
    let m = |z: Point| (z - c1) / (z - c2);
    let mid = |a: &ArcSegment| a.point_at(0.5 * a.length());
    let r0 = m(mid(&domain.arcs[0])).arg();
    let r1 = m(mid(&domain.arcs[1])).arg();
    let a0 = &domain.arcs[0];
    let scale = (c1 - c2).norm();
    let inside = mid(a0) + I * a0.tangent_at(0.5 * a0.length()) * (1e-6 * scale);
    let ti = m(inside).arg();
    let span01 = (r1 - r0).rem_euclid(TAU);
    let (alpha0, angle) = if (ti - r0).rem_euclid(TAU) < span01 {
        (r0, span01)
    } else {
        (r1, (r0 - r1).rem_euclid(TAU))
    };
    if !(angle > 0.0 && angle < TAU) {
        return Err(Error::Shape(format!("corner angle {angle} outside (0, 2π)")));
    }
    Ok(TwoArcMap { c1, c2, alpha0, angle })
}

impl TwoArcMap {
    fn exponent(&self) -> f64 {
        self.angle / PI
    }

    fn sector_to_point(&self, s: Complex64) -> Point {
        self.c2 + (self.c1 - self.c2) / (ONE - s)
    }

    pub fn apply(&self, zeta: Complex64) -> Point {
        let w = I * (ONE + zeta) / (ONE - zeta);
        let mut arg = w.arg();
        if arg < 0.0 {
            arg = if arg < -0.5 * PI { PI } else { 0.0 };
        }
        let s = Complex64::from_polar(w.norm().powf(self.exponent()), self.alpha0 + self.exponent() * arg);
        self.sector_to_point(s)
    }

    fn boundary_sector(&self, theta: f64) -> (Complex64, f64) {
        // on the circle the half-plane coordinate is real: w = −cot(θ/2)
        let half = 0.5 * theta.rem_euclid(TAU);
        let w = -half.cos() / half.sin();
        let ray = if w < 0.0 { self.alpha0 + self.angle } else { self.alpha0 };
        (Complex64::from_polar(w.abs().powf(self.exponent()), ray), w)
    }
}

impl BoundaryMap for TwoArcMap {
    fn point(&self, theta: f64) -> Complex64 {
        let (s, w) = self.boundary_sector(theta);
        if w.is_infinite() || s.norm().is_infinite() {
            return self.c2;
        }
        self.sector_to_point(s)
    }

    fn speed(&self, theta: f64) -> f64 {
        let (s, w) = self.boundary_sector(theta);
        let half = 0.5 * theta.rem_euclid(TAU);
        let dw = 0.5 / (half.sin() * half.sin());
        let e = self.exponent();
        let ds = e * w.abs().powf(e - 1.0);
        let dz = (self.c1 - self.c2).norm() / (ONE - s).norm_sqr();
        dz * ds * dw
    }

    fn singular_angles(&self) -> Vec<f64> {
        vec![0.0, PI]
    }
}

/// Pullback of the boundary density of a two-arc domain to the circle.
pub fn pullback_domain(domain: &PlanarDomain, n: usize) -> Result<CircleMeasure> {
    let map = two_arc_map(domain)?;
    let rho = |z: Point| {
        let (piece, s, _) = domain.closest_boundary_point(z);
        domain.density.value(piece, s)
    };
    Ok(CircleMeasure::pullback(&map, rho, n)?.with_provenance(format!("two-arc map of {}", domain.id)))
}

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = Complex64;

/// One boundary piece: a circular arc traversed from `start_angle` to
/// `end_angle` (counter-clockwise when `end_angle > start_angle`), or a
/// straight segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcSegment {
    CircularArc {
        center: Point,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
    LineSegment {
        start: Point,
        end: Point,
    },
}

impl ArcSegment {
    pub fn arc(center: Point, radius: f64, start_angle: f64, end_angle: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Geometry(format!("arc radius must be positive, got {radius}")));
        }
        if !(end_angle - start_angle).is_finite() || end_angle == start_angle {
            return Err(Error::Geometry("arc has zero angular extent".into()));
        }
        if (end_angle - start_angle).abs() > 2.0 * PI + 1e-12 {
            return Err(Error::Geometry("arc wraps more than once".into()));
        }
        Ok(ArcSegment::CircularArc {
            center,
            radius,
            start_angle,
            end_angle,
        })
    }

    pub fn segment(start: Point, end: Point) -> Result<Self> {
        if (end - start).norm() == 0.0 || !(end - start).norm().is_finite() {
            return Err(Error::Geometry("segment has zero length".into()));
        }
        Ok(ArcSegment::LineSegment { start, end })
    }

    pub fn is_arc(&self) -> bool {
        matches!(self, ArcSegment::CircularArc { .. })
    }

    pub fn length(&self) -> f64 {
        match *self {
            ArcSegment::CircularArc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius * (end_angle - start_angle).abs(),
            ArcSegment::LineSegment { start, end } => (end - start).norm(),
        }
    }

    /// Radius of curvature (infinite for segments).
    pub fn radius(&self) -> f64 {
        match *self {
            ArcSegment::CircularArc { radius, .. } => radius,
            ArcSegment::LineSegment { .. } => f64::INFINITY,
        }
    }

    /// Point at arclength `s` from the start.
    pub fn point_at(&self, s: f64) -> Point {
        match *self {
            ArcSegment::CircularArc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let dir = (end_angle - start_angle).signum();
                let t = start_angle + dir * s / radius;
                center + Complex64::from_polar(radius, t)
            }
            ArcSegment::LineSegment { start, end } => {
                let len = (end - start).norm();
                start + (end - start) * (s / len)
            }
        }
    }

    /// Unit tangent in the direction of traversal at arclength `s`.
    pub fn tangent_at(&self, s: f64) -> Complex64 {
        match *self {
            ArcSegment::CircularArc {
                radius,
                start_angle,
                end_angle,
                ..
            } => {
                let dir = (end_angle - start_angle).signum();
                let t = start_angle + dir * s / radius;
                Complex64::new(0.0, dir) * Complex64::from_polar(1.0, t)
            }
            ArcSegment::LineSegment { start, end } => (end - start) / (end - start).norm(),
        }
    }

    pub fn start(&self) -> Point {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point {
        match *self {
            ArcSegment::CircularArc {
                center,
                radius,
                end_angle,
                ..
            } => center + Complex64::from_polar(radius, end_angle),
            ArcSegment::LineSegment { end, .. } => end,
        }
    }

    /// Sub-piece between arclengths `s0 < s1`.
    pub fn sub(&self, s0: f64, s1: f64) -> Result<Self> {
        match *self {
            ArcSegment::CircularArc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let dir = (end_angle - start_angle).signum();
                ArcSegment::arc(
                    center,
                    radius,
                    start_angle + dir * s0 / radius,
                    start_angle + dir * s1 / radius,
                )
            }
            ArcSegment::LineSegment { .. } => ArcSegment::segment(self.point_at(s0), self.point_at(s1)),
        }
    }

    /// Contribution of this piece to the Green integral `∮ (x dy − y dx)`.
    pub fn green_integral(&self) -> f64 {
        match *self {
            ArcSegment::CircularArc {
                center,
                radius,
                start_angle: a,
                end_angle: b,
            } => {
                radius * radius * (b - a)
                    + radius * (center.re * (b.sin() - a.sin()) - center.im * (b.cos() - a.cos()))
            }
            ArcSegment::LineSegment { start, end } => start.re * end.im - end.re * start.im,
        }
    }

    /// Arclength parameter of the closest point on the piece together with
    /// the distance to it.
    pub fn project(&self, z: Point) -> (f64, f64) {
        match *self {
            ArcSegment::CircularArc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let dir = (end_angle - start_angle).signum();
                let span = (end_angle - start_angle).abs();
                let ang = (z - center).arg();
                // angular offset from the start in the traversal direction
                let off = (dir * (ang - start_angle)).rem_euclid(2.0 * PI);
                let len = radius * span;
                if off <= span {
                    let s = off * radius;
                    (s, (self.point_at(s) - z).norm())
                } else {
                    let d0 = (self.start() - z).norm();
                    let d1 = (self.end() - z).norm();
                    if d0 <= d1 {
                        (0.0, d0)
                    } else {
                        (len, d1)
                    }
                }
            }
            ArcSegment::LineSegment { start, end } => {
                let d = end - start;
                let len = d.norm();
                let t = (((z - start) * d.conj()).re / (len * len)).clamp(0.0, 1.0);
                (t * len, (start + d * t - z).norm())
            }
        }
    }

    /// Arclength parameters where the vertical line `Re z = x` meets the
    /// piece (interior points and endpoints alike).
    pub fn vertical_crossings(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match *self {
            ArcSegment::CircularArc { center, radius, .. } => {
                let dx = x - center.re;
                if dx.abs() > radius {
                    return out;
                }
                let dy = (radius * radius - dx * dx).max(0.0).sqrt();
                for y in [center.im + dy, center.im - dy] {
                    let (s, dist) = self.project(Complex64::new(x, y));
                    if dist < 1e-10 * radius.max(1.0) {
                        out.push(s);
                    }
                }
            }
            ArcSegment::LineSegment { start, end } => {
                let d = end.re - start.re;
                if d.abs() < 1e-15 {
                    return out;
                }
                let t = (x - start.re) / d;
                if (-1e-12..=1.0 + 1e-12).contains(&t) {
                    out.push(t.clamp(0.0, 1.0) * self.length());
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        out
    }

    /// Image under the similarity `z ↦ a·z + b` (`a ≠ 0`).
    pub fn similarity(&self, a: Complex64, b: Complex64) -> Self {
        match *self {
            ArcSegment::CircularArc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let rot = a.arg();
                ArcSegment::CircularArc {
                    center: a * center + b,
                    radius: radius * a.norm(),
                    start_angle: start_angle + rot,
                    end_angle: end_angle + rot,
                }
            }
            ArcSegment::LineSegment { start, end } => ArcSegment::LineSegment {
                start: a * start + b,
                end: a * end + b,
            },
        }
    }
}

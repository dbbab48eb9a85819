//! Boundary representation of planar domains: oriented arc/segment loops,
//! corners, a piecewise polynomial boundary density, and the domain
//! families used throughout the workbench.

mod arc;
mod cut;
mod families;

pub use arc::{ArcSegment, Point};
pub use cut::cut_half;
pub use families::{
    disk, disk_two_arcs, half_disk, make_double_disk, make_dumbbell, make_necklace,
    double_disk_corner_angle,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;

pub const DOMAIN_FORMAT_VERSION: u32 = 1;

/// Boundary density: one polynomial in local arclength per boundary piece,
/// `ρ(s) = Σ c_j s^j` with `s` measured from the start of the piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub coefficients: Vec<Vec<f64>>,
}

impl Density {
    pub fn constant(value: f64, pieces: usize) -> Self {
        Density {
            coefficients: vec![vec![value]; pieces],
        }
    }

    pub fn value(&self, piece: usize, s: f64) -> f64 {
        self.coefficients[piece]
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * s + c)
    }

    /// Coefficients of `s ↦ ρ(s0 + s)` on the given piece.
    pub(crate) fn shifted(&self, piece: usize, s0: f64) -> Vec<f64> {
        let c = &self.coefficients[piece];
        let n = c.len();
        let mut out = vec![0.0; n];
        for (j, &cj) in c.iter().enumerate() {
            // (s0 + s)^j = Σ_i binom(j, i) s0^(j-i) s^i
            let mut binom = 1.0;
            for (i, slot) in out.iter_mut().enumerate().take(j + 1) {
                *slot += cj * binom * s0.powi((j - i) as i32);
                binom *= (j - i) as f64 / (i + 1) as f64;
            }
        }
        out
    }

    fn is_constant(&self) -> bool {
        self.coefficients.iter().all(|c| c.iter().skip(1).all(|&v| v == 0.0))
    }
}

/// A boundary vertex where the tangent jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub point: Point,
    /// Index of the boundary piece that starts at this corner.
    pub arc_index: usize,
    pub interior_angle: f64,
}

/// Which construction produced a domain; recorded in the serialized
/// document so results can be regenerated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Disk { radius: f64 },
    HalfDisk,
    DoubleDisk { eps: f64 },
    Necklace { n: usize, eps: f64 },
    Dumbbell { eps: f64, passage_length: f64, passage_width: f64 },
    Piece { parent: Box<Family>, region: usize },
    Custom,
}

impl Family {
    pub fn eps(&self) -> Option<f64> {
        match self {
            Family::DoubleDisk { eps } | Family::Necklace { eps, .. } | Family::Dumbbell { eps, .. } => {
                Some(*eps)
            }
            Family::Piece { parent, .. } => parent.eps(),
            _ => None,
        }
    }

    /// Narrowest feature the mesher has to resolve, if the family has one.
    pub fn passage_width(&self) -> Option<f64> {
        match self {
            Family::Dumbbell { passage_width, .. } => Some(*passage_width),
            Family::Piece { parent, .. } => parent.passage_width(),
            _ => None,
        }
    }
}

/// Simply connected planar domain bounded by one positively oriented loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarDomain {
    pub id: String,
    pub family: Family,
    pub arcs: Vec<ArcSegment>,
    pub corners: Vec<Corner>,
    pub density: Density,
}

#[derive(Serialize, Deserialize)]
struct DomainDocument {
    version: u32,
    #[serde(flatten)]
    domain: PlanarDomain,
}

impl PlanarDomain {
    /// Validates the loop and computes its corners.
    pub fn new(id: impl Into<String>, family: Family, arcs: Vec<ArcSegment>, density: Density) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::Geometry("empty boundary".into()));
        }
        if density.coefficients.len() != arcs.len() {
            return Err(Error::Geometry(format!(
                "density table has {} entries for {} boundary pieces",
                density.coefficients.len(),
                arcs.len()
            )));
        }
        check_closure(&arcs)?;
        check_simple(&arcs)?;
        let area = 0.5 * arcs.iter().map(ArcSegment::green_integral).sum::<f64>();
        if !(area > 0.0) {
            return Err(Error::Geometry(format!(
                "boundary is not positively oriented (signed area {area:e})"
            )));
        }
        let corners = find_corners(&arcs)?;
        let domain = PlanarDomain {
            id: id.into(),
            family,
            arcs,
            corners,
            density,
        };
        domain.check_density()?;
        Ok(domain)
    }

    fn check_density(&self) -> Result<()> {
        let mut total = 0.0;
        for (k, arc) in self.arcs.iter().enumerate() {
            let len = arc.length();
            for i in 0..=32 {
                let v = self.density.value(k, len * i as f64 / 32.0);
                if v < -1e-14 || !v.is_finite() {
                    return Err(Error::Geometry(format!("density is negative on piece {k}")));
                }
            }
            total += self.piece_mass(k);
        }
        if !(total > 0.0) {
            return Err(Error::Geometry("density vanishes identically".into()));
        }
        Ok(())
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(ArcSegment::length).sum()
    }

    pub fn piece_mass(&self, k: usize) -> f64 {
        let len = self.arcs[k].length();
        if self.density.coefficients[k].len() == 1 {
            return self.density.coefficients[k][0] * len;
        }
        quadrature::adaptive(0.0, len, 1e-12, &|s| self.density.value(k, s))
    }

    /// `(∫ρ ds, area)`; mass by adaptive quadrature per piece, area by the
    /// Green integral `½∮(x dy − y dx)`.
    pub fn mass_and_area(&self) -> (f64, f64) {
        let mass = (0..self.arcs.len())
            .map(|k| quadrature::adaptive(0.0, self.arcs[k].length(), 1e-12, &|s| self.density.value(k, s)))
            .sum();
        let area = 0.5 * self.arcs.iter().map(ArcSegment::green_integral).sum::<f64>();
        (mass, area)
    }

    /// Image under `z ↦ a z + b`; the density keeps its values pointwise.
    pub fn similarity(&self, a: Complex64, b: Complex64) -> Result<Self> {
        let scale = a.norm();
        if !(scale > 0.0) {
            return Err(Error::Parameter("similarity factor must be nonzero".into()));
        }
        let arcs = self.arcs.iter().map(|arc| arc.similarity(a, b)).collect();
        let coefficients = self
            .density
            .coefficients
            .iter()
            .map(|c| c.iter().enumerate().map(|(j, v)| v / scale.powi(j as i32)).collect())
            .collect();
        PlanarDomain::new(self.id.clone(), Family::Custom, arcs, Density { coefficients })
    }

    pub fn with_density(&self, density: Density) -> Result<Self> {
        PlanarDomain::new(self.id.clone(), self.family.clone(), self.arcs.clone(), density)
    }

    pub fn has_constant_density(&self) -> bool {
        self.density.is_constant()
    }

    /// Distance from `z` to the boundary and the closest (piece, arclength).
    pub fn closest_boundary_point(&self, z: Point) -> (usize, f64, f64) {
        let mut best = (0, 0.0, f64::INFINITY);
        for (k, arc) in self.arcs.iter().enumerate() {
            let (s, d) = arc.project(z);
            if d < best.2 {
                best = (k, s, d);
            }
        }
        best
    }

    pub fn vertices(&self) -> Vec<Point> {
        self.arcs.iter().map(ArcSegment::start).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = DomainDocument {
            version: DOMAIN_FORMAT_VERSION,
            domain: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses a domain document and re-validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DomainDocument = serde_json::from_str(text)?;
        if doc.version != DOMAIN_FORMAT_VERSION {
            return Err(Error::Input(format!("unsupported domain document version {}", doc.version)));
        }
        let d = doc.domain;
        PlanarDomain::new(d.id, d.family, d.arcs, d.density)
    }
}

/// A domain whose boundary pieces are split into Steklov and Neumann parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedDomain {
    pub domain: PlanarDomain,
    /// `true` for Steklov pieces, `false` for Neumann pieces.
    pub steklov: Vec<bool>,
}

impl MixedDomain {
    pub fn new(domain: PlanarDomain, steklov: Vec<bool>) -> Result<Self> {
        if steklov.len() != domain.arcs.len() {
            return Err(Error::Geometry("boundary labels do not cover the boundary".into()));
        }
        let mass: f64 = (0..steklov.len())
            .filter(|&k| steklov[k])
            .map(|k| domain.piece_mass(k))
            .sum();
        if !(mass > 0.0) {
            return Err(Error::Geometry("Steklov part has zero mass".into()));
        }
        Ok(MixedDomain { domain, steklov })
    }

    /// Every piece Steklov, except pieces of zero density where the
    /// Steklov condition reduces to a Neumann one.
    pub fn all_steklov(domain: PlanarDomain) -> Self {
        let steklov = (0..domain.arcs.len()).map(|k| domain.piece_mass(k) > 0.0).collect();
        MixedDomain { domain, steklov }
    }

    pub fn steklov_mass(&self) -> f64 {
        (0..self.steklov.len())
            .filter(|&k| self.steklov[k])
            .map(|k| self.domain.piece_mass(k))
            .sum()
    }

    pub fn neumann_count(&self) -> usize {
        self.steklov.iter().filter(|s| !**s).count()
    }
}

fn check_closure(arcs: &[ArcSegment]) -> Result<()> {
    let n = arcs.len();
    for k in 0..n {
        let e = arcs[k].end();
        let s = arcs[(k + 1) % n].start();
        let tol = 1e-12 * e.norm().max(1.0);
        if (e - s).norm() > tol {
            return Err(Error::Geometry(format!(
                "boundary does not close between pieces {k} and {} (gap {:e})",
                (k + 1) % n,
                (e - s).norm()
            )));
        }
    }
    Ok(())
}

fn find_corners(arcs: &[ArcSegment]) -> Result<Vec<Corner>> {
    let n = arcs.len();
    let mut corners = Vec::new();
    for k in 0..n {
        let prev = &arcs[(k + n - 1) % n];
        let t_in = prev.tangent_at(prev.length());
        let t_out = arcs[k].tangent_at(0.0);
        let turn = (t_out / t_in).arg();
        if turn.abs() < 1e-9 {
            continue;
        }
        let interior_angle = PI - turn;
        if !(interior_angle > 1e-9 && interior_angle < 2.0 * PI - 1e-9) {
            return Err(Error::Geometry(format!("cusp at the start of piece {k}")));
        }
        corners.push(Corner {
            point: arcs[k].start(),
            arc_index: k,
            interior_angle,
        });
    }
    Ok(corners)
}

/// Polyline samples of each piece, fine enough that chords stay close to
/// the true curve relative to the loop size.
fn sample_loop(arcs: &[ArcSegment]) -> Vec<(usize, Point)> {
    let mut out = Vec::new();
    for (k, arc) in arcs.iter().enumerate() {
        let m = match arc {
            ArcSegment::LineSegment { .. } => 1,
            ArcSegment::CircularArc {
                start_angle, end_angle, ..
            } => ((end_angle - start_angle).abs() / (2.0 * PI) * 256.0).ceil() as usize + 2,
        };
        let len = arc.length();
        for i in 0..m {
            out.push((k, arc.point_at(len * i as f64 / m as f64)));
        }
    }
    out
}

fn check_simple(arcs: &[ArcSegment]) -> Result<()> {
    let pts = sample_loop(arcs);
    let n = pts.len();
    if n < 3 {
        return Ok(());
    }
    for i in 0..n {
        let a0 = pts[i].1;
        let a1 = pts[(i + 1) % n].1;
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let b0 = pts[j].1;
            let b1 = pts[(j + 1) % n].1;
            if segments_cross(a0, a1, b0, b1) {
                return Err(Error::Geometry(format!(
                    "boundary self-intersects between pieces {} and {}",
                    pts[i].0, pts[j].0
                )));
            }
        }
    }
    Ok(())
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    ((b - a).conj() * (c - a)).im
}

fn segments_cross(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = orient(a0, a1, b0);
    let d2 = orient(a0, a1, b1);
    let d3 = orient(b0, b1, a0);
    let d4 = orient(b0, b1, a1);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

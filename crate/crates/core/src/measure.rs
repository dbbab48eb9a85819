//! Finite measures on the unit circle represented by quadrature atoms.
//!
//! Each atom carries a node angle, a weight, and a cell: an arc of the circle
//! over which the weight is spread uniformly when the measure is read as a
//! density. Pushforwards move nodes and cell endpoints together, so integrals
//! `Σ wᵢ f(θᵢ)` transform exactly while distances use the density reading.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Ratio of successive cell widths approaching a singular angle.
pub const GRADING_RATIO: f64 = 0.75;
/// Number of graded layers on each side of a singular angle.
pub const GRADING_LAYERS: usize = 12;
/// Relative gap below which a quadratic form is isotropic.
pub const MULTIPLICITY_TOLERANCE: f64 = 1e-6;

const MERGE_TOL: f64 = 1e-14;
const CELL_QUADRATURE: usize = 16;

/// Arc `[start, start + width)` taken counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub start: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleMeasure {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cells: Vec<Cell>,
    singular: Vec<f64>,
    provenance: Vec<String>,
    mass: f64,
}

/// Boundary correspondence of a conformal map `φ: 𝔻 → Ω`.
pub trait BoundaryMap {
    fn point(&self, theta: f64) -> Complex64;
    /// `|φ'(e^{iθ})|`.
    fn speed(&self, theta: f64) -> f64;
    /// Angles where `|φ'|` is singular or vanishes.
    fn singular_angles(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `φ = id`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl BoundaryMap for IdentityMap {
    fn point(&self, theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, theta)
    }
    fn speed(&self, _theta: f64) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MeasureHeader {
    version: u32,
    mass: f64,
    singular_angles: Vec<f64>,
    provenance: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureRow {
    theta: f64,
    weight: f64,
    cell_start: Option<f64>,
    cell_width: Option<f64>,
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed angle in `(−π, π]`.
pub fn signed_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

impl CircleMeasure {
    /// Builds a measure from atoms, sorting by node and merging coincident
    /// nodes.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, cells: Vec<Cell>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() != cells.len() {
            return Err(Error::Measure("node, weight and cell counts differ".into()));
        }
        if nodes.is_empty() {
            return Err(Error::Measure("measure has no atoms".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Measure("weights must be finite and nonnegative".into()));
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::Measure("node angles must be finite".into()));
        }
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        let nodes: Vec<f64> = nodes.into_iter().map(wrap).collect();
        order.sort_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
        let mut out_n: Vec<f64> = Vec::with_capacity(order.len());
        let mut out_w: Vec<f64> = Vec::with_capacity(order.len());
        let mut out_c: Vec<Cell> = Vec::with_capacity(order.len());
        for i in order {
            let cell = Cell {
                start: wrap(cells[i].start),
                width: cells[i].width.clamp(0.0, TAU),
            };
            if let Some(&last) = out_n.last() {
                if nodes[i] - last <= MERGE_TOL {
                    let k = out_w.len() - 1;
                    out_w[k] += weights[i];
                    out_c[k] = merge_cells(out_c[k], cell);
                    continue;
                }
            }
            out_n.push(nodes[i]);
            out_w.push(weights[i]);
            out_c.push(cell);
        }
        // a node merged across 2π
        if out_n.len() > 1 && out_n[0] + TAU - out_n[out_n.len() - 1] <= MERGE_TOL {
            let last = out_n.len() - 1;
            out_w[0] += out_w[last];
            out_c[0] = merge_cells(out_c[0], out_c[last]);
            out_n.pop();
            out_w.pop();
            out_c.pop();
        }
        let mass: f64 = out_w.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::Measure("total mass must be positive".into()));
        }
        Ok(CircleMeasure {
            nodes: out_n,
            weights: out_w,
            cells: out_c,
            singular: Vec::new(),
            provenance: Vec::new(),
            mass,
        })
    }

    /// Atoms with cells from the midpoints between neighbouring nodes.
    pub fn from_atoms(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let mut idx: Vec<usize> = (0..nodes.len()).collect();
        idx.sort_by(|&a, &b| wrap(nodes[a]).total_cmp(&wrap(nodes[b])));
        let sorted: Vec<f64> = idx.iter().map(|&i| wrap(nodes[i])).collect();
        let w: Vec<f64> = idx.iter().map(|&i| weights[i]).collect();
        let n = sorted.len();
        let cells = (0..n)
            .map(|i| {
                if n == 1 {
                    return Cell { start: 0.0, width: TAU };
                }
                let prev = sorted[(i + n - 1) % n];
                let next = sorted[(i + 1) % n];
                let lo = sorted[i] - 0.5 * (sorted[i] - prev).rem_euclid(TAU);
                let hi = sorted[i] + 0.5 * (next - sorted[i]).rem_euclid(TAU);
                Cell { start: lo, width: hi - lo }
            })
            .collect();
        Self::from_parts(sorted, w, cells)
    }

    pub fn uniform(n: usize) -> Self {
        Self::from_density(n, |_| 1.0).expect("uniform measure")
    }

    /// Bins `ρ(θ) dθ` on `n` uniform cells; weights are exact cell integrals
    /// to quadrature accuracy and nodes sit at the cell centroids.
    pub fn from_density(n: usize, rho: impl Fn(f64) -> f64) -> Result<Self> {
        let h = TAU / n as f64;
        let breaks: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        Self::from_breaks(&breaks, rho)
    }

    fn from_breaks(breaks: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        let gl = GaussLegendre::new(CELL_QUADRATURE);
        let mut nodes = Vec::with_capacity(breaks.len());
        let mut weights = Vec::with_capacity(breaks.len());
        let mut cells = Vec::with_capacity(breaks.len());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut bad = false;
            let m0 = gl.integrate(a, b, |t| {
                let v = f(t);
                if !(v >= 0.0) || !v.is_finite() {
                    bad = true;
                }
                v
            });
            if bad {
                return Err(Error::Map(format!(
                    "density or boundary speed is negative or not finite on [{a:.6}, {b:.6}]"
                )));
            }
            let m1 = gl.integrate(a, b, |t| t * f(t));
            let node = if m0 > 0.0 { (m1 / m0).clamp(a, b) } else { 0.5 * (a + b) };
            nodes.push(node);
            weights.push(m0);
            cells.push(Cell { start: a, width: b - a });
        }
        Self::from_parts(nodes, weights, cells)
    }

    /// Pullback `μ(𝒪) = ∫_{φ(𝒪)} ρ ds` on `n` base cells, graded toward the
    /// singular angles of the map.
    pub fn pullback(map: &impl BoundaryMap, rho: impl Fn(Complex64) -> f64, n: usize) -> Result<Self> {
        let singular: Vec<f64> = map.singular_angles().into_iter().map(wrap).collect();
        let h = TAU / n as f64;
        let mut breaks: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        for &s in &singular {
            breaks.push(s);
            let mut d = h;
            for _ in 0..GRADING_LAYERS {
                d *= GRADING_RATIO;
                breaks.push(s - d);
                breaks.push(s + d);
            }
        }
        // fold everything into [0, 2π] and drop near-duplicates
        let mut breaks: Vec<f64> = breaks
            .into_iter()
            .map(|t| if (0.0..=TAU).contains(&t) { t } else { t.rem_euclid(TAU) })
            .collect();
        breaks.push(0.0);
        breaks.push(TAU);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        *breaks.last_mut().unwrap() = TAU;
        let mut m = Self::from_breaks(&breaks, |t| rho(map.point(t)) * map.speed(t))?;
        m.singular = singular;
        m.provenance.push(format!("pullback n={n}"));
        Ok(m)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn singular_angles(&self) -> &[f64] {
        &self.singular
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn with_provenance(mut self, step: impl Into<String>) -> Self {
        self.provenance.push(step.into());
        self
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.clone();
        m.weights.iter_mut().for_each(|w| *w *= c);
        m.mass *= c;
        m
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// `∫ z dμ`.
    pub fn center_of_mass(&self) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| Complex64::from_polar(w, t))
            .sum()
    }

    /// Pushforward under a circle homeomorphism given on angles.
    pub fn pushforward(&self, f: impl Fn(f64) -> f64, preserves_orientation: bool) -> Result<Self> {
        let mut nodes = Vec::with_capacity(self.len());
        let mut cells = Vec::with_capacity(self.len());
        for (t, c) in self.nodes.iter().zip(&self.cells) {
            nodes.push(f(*t));
            cells.push(map_cell(*c, &f, preserves_orientation));
        }
        let mut m = Self::from_parts(nodes, self.weights.clone(), cells)?;
        m.singular = self.singular.iter().map(|&s| wrap(f(s))).collect();
        m.provenance = self.provenance.clone();
        Ok(m)
    }

    pub fn rotated(&self, angle: f64) -> Result<Self> {
        Ok(self.pushforward(|t| t + angle, true)?.with_provenance(format!("rotate {angle:.17e}")))
    }

    /// Pushforward under the reflection `x ↦ x − 2(x·p)p` with `p = e^{iθp}`.
    pub fn reflect(&self, theta_p: f64) -> Result<Self> {
        Ok(self
            .pushforward(|t| 2.0 * theta_p + PI - t, false)?
            .with_provenance(format!("reflect p={theta_p:.17e}")))
    }

    pub fn quad_form(&self) -> QuadForm2 {
        let (mut q11, mut q12, mut q22) = (0.0, 0.0, 0.0);
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            let (s, c) = t.sin_cos();
            q11 += w * c * c;
            q12 += w * c * s;
            q22 += w * s * s;
        }
        QuadForm2 { q11, q12, q22 }
    }

    /// Splits every atom whose cell contains one of `angles` in its interior
    /// into pieces with weights proportional to length. The pieces keep the
    /// atom's offset from its cell midpoint, so first moments are preserved.
    pub fn split_at(&self, angles: &[f64]) -> Result<Self> {
        let mut nodes = Vec::with_capacity(self.len() + 2 * angles.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut cells = Vec::with_capacity(nodes.capacity());
        for ((&t, &w), c) in self.nodes.iter().zip(&self.weights).zip(&self.cells) {
            let mut cuts: Vec<f64> = angles
                .iter()
                .map(|&x| (x - c.start).rem_euclid(TAU))
                .filter(|&o| o > 1e-13 && o < c.width - 1e-13)
                .collect();
            if cuts.is_empty() {
                nodes.push(t);
                weights.push(w);
                cells.push(*c);
                continue;
            }
            cuts.sort_by(f64::total_cmp);
            cuts.insert(0, 0.0);
            cuts.push(c.width);
            let shift = signed_angle(t - (c.start + 0.5 * c.width));
            for p in cuts.windows(2) {
                let (a, b) = (c.start + p[0], c.start + p[1]);
                nodes.push((0.5 * (a + b) + shift).clamp(a, b));
                weights.push(w * (p[1] - p[0]) / c.width);
                cells.push(Cell { start: a, width: b - a });
            }
        }
        let mut m = Self::from_parts(nodes, weights, cells)?;
        m.singular = self.singular.clone();
        m.provenance = self.provenance.clone();
        Ok(m)
    }

    pub fn restricted_to(&self, pred: impl Fn(f64) -> bool) -> Result<Self> {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| pred(self.nodes[i])).collect();
        Self::from_parts(
            keep.iter().map(|&i| self.nodes[i]).collect(),
            keep.iter().map(|&i| self.weights[i]).collect(),
            keep.iter().map(|&i| self.cells[i]).collect(),
        )
    }

    /// Cumulative distribution `μ([0, θ))` under the density reading.
    pub fn cdf(&self, theta: f64) -> f64 {
        let x = theta.clamp(0.0, TAU);
        let mut acc = 0.0;
        for (c, &w) in self.cells.iter().zip(&self.weights) {
            for (a, b, d) in cell_pieces(*c, w) {
                if d.is_infinite() {
                    if a < x {
                        acc += w;
                    }
                } else if x > a {
                    acc += d * (x.min(b) - a);
                }
            }
        }
        acc
    }

    pub fn to_csv(&self, w: &mut impl Write) -> Result<()> {
        let header = MeasureHeader {
            version: 1,
            mass: self.mass,
            singular_angles: self.singular.clone(),
            provenance: self.provenance.clone(),
        };
        writeln!(w, "# {}", serde_json::to_string(&header)?)?;
        let mut csv = csv::Writer::from_writer(w);
        for i in 0..self.len() {
            csv.serialize(MeasureRow {
                theta: self.nodes[i],
                weight: self.weights[i],
                cell_start: Some(self.cells[i].start),
                cell_width: Some(self.cells[i].width),
            })?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Reads the format written by [`CircleMeasure::to_csv`]; the cell
    /// columns and the header line are optional.
    pub fn from_csv(r: impl BufRead) -> Result<Self> {
        let mut header: Option<MeasureHeader> = None;
        let mut body = String::new();
        for line in r.lines() {
            let line = line?;
            if let Some(json) = line.strip_prefix('#') {
                header = Some(serde_json::from_str(json.trim())?);
            } else {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let mut rows = Vec::new();
        for rec in csv::Reader::from_reader(body.as_bytes()).deserialize() {
            let row: MeasureRow = rec?;
            rows.push(row);
        }
        let mut m = if rows.iter().all(|r| r.cell_start.is_some() && r.cell_width.is_some()) {
            Self::from_parts(
                rows.iter().map(|r| r.theta).collect(),
                rows.iter().map(|r| r.weight).collect(),
                rows.iter()
                    .map(|r| Cell {
                        start: r.cell_start.unwrap(),
                        width: r.cell_width.unwrap(),
                    })
                    .collect(),
            )?
        } else {
            Self::from_atoms(rows.iter().map(|r| r.theta).collect(), rows.iter().map(|r| r.weight).collect())?
        };
        if let Some(h) = header {
            if (h.mass - m.mass).abs() > 1e-9 * h.mass.abs().max(1.0) {
                return Err(Error::Data(format!("header mass {} disagrees with weights {}", h.mass, m.mass)));
            }
            m.singular = h.singular_angles;
            m.provenance = h.provenance;
        }
        Ok(m)
    }
}

fn merge_cells(a: Cell, b: Cell) -> Cell {
    // smallest arc containing both, measured from a.start
    let b0 = signed_angle(b.start - a.start);
    let lo = b0.min(0.0);
    let hi = (b0 + b.width).max(a.width);
    Cell {
        start: wrap(a.start + lo),
        width: (hi - lo).min(TAU),
    }
}

fn map_cell(c: Cell, f: &impl Fn(f64) -> f64, preserves_orientation: bool) -> Cell {
    if c.width >= TAU {
        return Cell { start: wrap(f(c.start)), width: TAU };
    }
    let a = f(c.start);
    let b = f(c.start + c.width);
    let (lo, hi) = if preserves_orientation { (a, b) } else { (b, a) };
    let mut width = (hi - lo).rem_euclid(TAU);
    if width > TAU - 1e-9 && c.width < 1e-6 {
        width = 0.0;
    }
    Cell { start: wrap(lo), width }
}

/// Pieces `(a, b, density)` of a cell inside `[0, 2π]`; a zero-width cell
/// is a point mass reported with infinite density.
fn cell_pieces(c: Cell, w: f64) -> Vec<(f64, f64, f64)> {
    if c.width <= 1e-300 {
        return vec![(c.start, c.start, f64::INFINITY)];
    }
    let d = w / c.width;
    let end = c.start + c.width;
    if end <= TAU {
        vec![(c.start, end, d)]
    } else {
        vec![(c.start, TAU, d), (0.0, end - TAU, d)]
    }
}

/// Distances between two measures under the density reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureDistance {
    /// `∫ |ρ₁ − ρ₂| dθ` plus atom differences.
    pub tv: f64,
    /// `sup_θ |μ₁([0,θ)) − μ₂([0,θ))|`.
    pub weak: f64,
}

pub fn measure_distance(m1: &CircleMeasure, m2: &CircleMeasure) -> MeasureDistance {
    // events: (position, density change, jump)
    let mut events: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * (m1.len() + m2.len()) + 4);
    for (m, sign) in [(m1, 1.0), (m2, -1.0)] {
        for (c, &w) in m.cells.iter().zip(&m.weights) {
            for (a, b, d) in cell_pieces(*c, w) {
                if d.is_infinite() {
                    events.push((a, 0.0, sign * w));
                } else {
                    events.push((a, sign * d, 0.0));
                    events.push((b, -sign * d, 0.0));
                }
            }
        }
    }
    events.push((TAU, 0.0, 0.0));
    events.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (mut pos, mut dens, mut cdf) = (0.0, 0.0, 0.0);
    let (mut tv, mut weak) = (0.0f64, 0.0f64);
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        cdf += dens * (x - pos);
        tv += dens.abs() * (x - pos);
        weak = weak.max(cdf.abs());
        pos = x;
        let mut jump = 0.0;
        while i < events.len() && events[i].0 == x {
            dens += events[i].1;
            jump += events[i].2;
            i += 1;
        }
        cdf += jump;
        tv += jump.abs();
        weak = weak.max(cdf.abs());
    }
    MeasureDistance { tv, weak }
}

/// Symmetric form `Q_ij = ∫ x_i x_j dν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadForm2 {
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
}

impl QuadForm2 {
    pub fn trace(&self) -> f64 {
        self.q11 + self.q22
    }

    /// `V(t) = tᵀQt`.
    pub fn value(&self, t: Complex64) -> f64 {
        self.q11 * t.re * t.re + 2.0 * self.q12 * t.re * t.im + self.q22 * t.im * t.im
    }

    /// `(Q11 − Q22) + 2iQ12`; vanishes exactly when the form is isotropic
    /// and has argument twice the top eigenvector angle.
    pub fn anisotropy(&self) -> Complex64 {
        Complex64::new(self.q11 - self.q22, 2.0 * self.q12)
    }

    /// `λ₁ − λ₂`.
    pub fn gap(&self) -> f64 {
        self.anisotropy().norm()
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let g = 0.5 * self.gap();
        (m + g, m - g)
    }

    pub fn top_direction(&self) -> ProjectiveDirection {
        let f = self.anisotropy();
        let angle = if f.norm() <= 1e-14 * self.trace().abs() { 0.0 } else { 0.5 * f.arg() };
        ProjectiveDirection::from_angle(angle)
    }

    pub fn is_multiple(&self) -> bool {
        self.gap() <= MULTIPLICITY_TOLERANCE * self.trace()
    }
}

/// Line through the origin, stored by its angle in `[0, π)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProjectiveDirection {
    angle: f64,
}

impl ProjectiveDirection {
    pub fn from_angle(angle: f64) -> Self {
        let mut a = angle.rem_euclid(PI);
        if a >= PI {
            a = 0.0;
        }
        ProjectiveDirection { angle: a }
    }

    pub fn from_vector(v: Complex64) -> Self {
        Self::from_angle(v.arg())
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn unit(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }

    /// Angle between the lines, in `[0, π/2]`.
    pub fn distance(&self, other: &ProjectiveDirection) -> f64 {
        let d = (self.angle - other.angle).rem_euclid(PI);
        d.min(PI - d)
    }
}

impl PartialEq for ProjectiveDirection {
    fn eq(&self, other: &Self) -> bool {
        self.distance(other) < 1e-12
    }
}

/// `Q`, its top direction and the gap.
pub fn quad_form_and_direction(nu: &CircleMeasure) -> (QuadForm2, ProjectiveDirection, f64) {
    let q = nu.quad_form();
    (q, q.top_direction(), q.gap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_measure_basics() {
        let mu = CircleMeasure::uniform(1024);
        assert!((mu.mass() - TAU).abs() < 1e-12);
        assert!(mu.center_of_mass().norm() < 1e-12);
        let (q, _, gap) = quad_form_and_direction(&mu);
        assert!((q.q11 - PI).abs() < 1e-12 && (q.q22 - PI).abs() < 1e-12 && q.q12.abs() < 1e-12);
        assert!(gap < 1e-12 && q.is_multiple());
        assert_eq!(q.top_direction().angle(), 0.0);
    }

    #[test]
    fn anisotropic_density_form() {
        let mu = CircleMeasure::from_density(1024, |t| 1.0 + 0.3 * (2.0 * t).cos()).unwrap();
        let (q, m, gap) = quad_form_and_direction(&mu);
        assert!((q.q11 - 1.15 * PI).abs() < 1e-5, "{q:?}");
        assert!((q.q22 - 0.85 * PI).abs() < 1e-5);
        assert!((gap - 0.3 * PI).abs() < 1e-5);
        assert_eq!(m, ProjectiveDirection::from_angle(PI));
        assert!(m.distance(&ProjectiveDirection::from_angle(0.0)) < 1e-6);
    }

    #[test]
    fn binned_density_is_close_to_analytic() {
        let rho = |t: f64| 1.0 + 0.3 * (2.0 * t).cos();
        let mu = CircleMeasure::from_density(1024, rho).unwrap();
        let fine = CircleMeasure::from_density(1 << 15, rho).unwrap();
        let d = measure_distance(&mu, &fine);
        assert!(d.weak < 1e-3, "{d:?}");
        let exact = |t: f64| t + 0.15 * (2.0 * t).sin();
        for t in [0.3, 2.0, 5.5] {
            assert!((mu.cdf(t) - exact(t)).abs() < 1e-4);
        }
    }

    #[test]
    fn distances_of_proportional_measures() {
        let a = CircleMeasure::uniform(256);
        let b = a.scaled(2.0);
        let d = measure_distance(&a, &b);
        assert!((d.weak - TAU).abs() < 1e-10 && (d.tv - TAU).abs() < 1e-10);
        let z = measure_distance(&a, &a);
        assert!(z.weak < 1e-14 && z.tv < 1e-14);
    }

    #[test]
    fn reflection_of_cosine_density() {
        let mu = CircleMeasure::from_density(512, |t| 1.0 + 0.5 * t.cos()).unwrap();
        let r = mu.reflect(0.0).unwrap();
        let expect = CircleMeasure::from_density(512, |t| 1.0 - 0.5 * t.cos()).unwrap();
        assert!(measure_distance(&r, &expect).weak < 1e-10);
        let back = r.reflect(0.0).unwrap();
        for (a, b) in back.nodes().iter().zip(mu.nodes()) {
            assert!((a - b).abs() < 1e-12);
        }
        let u = CircleMeasure::uniform(512);
        assert!(measure_distance(&u.reflect(1.1).unwrap(), &u).weak < 1e-10);
    }

    #[test]
    fn reflected_direction_follows_reflection() {
        let mu = CircleMeasure::from_density(1024, |t| 1.0 + 0.3 * (2.0 * (t - 0.4)).cos()).unwrap();
        let tp = 1.0f64;
        let m = mu.quad_form().top_direction();
        let r = mu.reflect(tp).unwrap().quad_form().top_direction();
        let p = Complex64::from_polar(1.0, tp);
        let v = m.unit();
        let rv = v - 2.0 * (v.re * p.re + v.im * p.im) * p;
        assert!(r.distance(&ProjectiveDirection::from_vector(rv)) < 1e-8);
    }

    #[test]
    fn pullback_of_identity() {
        let mu = CircleMeasure::pullback(&IdentityMap, |_| 1.0, 256).unwrap();
        assert!((mu.mass() - TAU).abs() < 1e-12);
        let z = CircleMeasure::pullback(&IdentityMap, |z| 1.0 + 0.3 * (2.0 * z.arg()).cos(), 256).unwrap();
        assert!((z.mass() - TAU).abs() < 1e-10);
        assert!(z.center_of_mass().norm() < 1e-10);
    }

    struct Backwards;
    impl BoundaryMap for Backwards {
        fn point(&self, t: f64) -> Complex64 {
            Complex64::from_polar(1.0, -t)
        }
        fn speed(&self, _t: f64) -> f64 {
            -1.0
        }
    }

    #[test]
    fn non_monotone_map_is_rejected() {
        assert!(matches!(CircleMeasure::pullback(&Backwards, |_| 1.0, 64), Err(Error::Map(_))));
    }

    #[test]
    fn csv_round_trip() {
        let mu = CircleMeasure::from_density(64, |t| 2.0 + t.sin()).unwrap().with_provenance("test");
        let mut buf = Vec::new();
        mu.to_csv(&mut buf).unwrap();
        let back = CircleMeasure::from_csv(&buf[..]).unwrap();
        assert_eq!(back, mu);
        let plain = "theta,weight\n0.5,1.0\n2.0,2.0\n4.0,1.0\n";
        let m = CircleMeasure::from_csv(plain.as_bytes()).unwrap();
        assert_eq!(m.len(), 3);
        assert!((m.cells().iter().map(|c| c.width).sum::<f64>() - TAU).abs() < 1e-12);
    }

    #[test]
    fn invalid_measures() {
        assert!(CircleMeasure::from_atoms(vec![1.0], vec![-1.0]).is_err());
        assert!(CircleMeasure::from_atoms(vec![1.0], vec![0.0]).is_err());
        assert!(CircleMeasure::from_atoms(vec![], vec![]).is_err());
    }

    proptest! {
        #[test]
        fn pushforward_preserves_mass_and_integrals(shift in -7.0f64..7.0, amp in 0.0f64..0.9) {
            let mu = CircleMeasure::from_density(256, |t| 1.0 + amp * (3.0 * t).sin()).unwrap();
            let r = mu.rotated(shift).unwrap();
            prop_assert!((r.mass() - mu.mass()).abs() < 1e-10);
            let lhs = r.integrate(|t| (2.0 * t).cos());
            let rhs = mu.integrate(|t| (2.0 * (t + shift)).cos());
            prop_assert!((lhs - rhs).abs() < 1e-10);
            let q = r.quad_form();
            prop_assert!((q.trace() - r.mass()).abs() < 1e-10);
            prop_assert!(r.nodes().windows(2).all(|w| w[1] > w[0]));
        }

        #[test]
        fn weak_distance_is_a_metric(a in 0.0f64..0.9, b in 0.0f64..0.9, c in 0.0f64..0.9) {
            let m = |x: f64| CircleMeasure::from_density(128, move |t| 1.0 + x * t.cos()).unwrap();
            let (ma, mb, mc) = (m(a), m(b), m(c));
            let ab = measure_distance(&ma, &mb).weak;
            let ba = measure_distance(&mb, &ma).weak;
            let ac = measure_distance(&ma, &mc).weak;
            let cb = measure_distance(&mc, &mb).weak;
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(ab <= ac + cb + 1e-12);
            prop_assert!(measure_distance(&ma, &mb).tv + 1e-12 >= ab);
        }
    }
}

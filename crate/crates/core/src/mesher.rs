//! Corner-graded triangulation of planar domains with labeled boundary
//! edges. Boundary nodes are placed exactly on the curved boundary; the
//! interior is filled by constrained Delaunay refinement.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};
use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{ArcSegment, MixedDomain, PlanarDomain, Point};

pub const DEFAULT_GRADING: f64 = 0.7;
pub const GRADED_LAYERS: i32 = 8;
pub const MIN_ANGLE_DEG: f64 = 20.0;
const REFINE_ANGLE_DEG: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Steklov,
    Neumann,
}

/// Boundary edge `a → b` (boundary orientation) with the density at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    pub piece: usize,
    pub rho: [f64; 2],
}

impl BoundaryEdge {
    pub fn rho_average(&self) -> f64 {
        0.5 * (self.rho[0] + self.rho[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub id: String,
    pub h: f64,
    pub grading: f64,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Vertices sitting on domain corners; triangles touching them are
    /// exempt from the angle bound.
    pub corner_vertices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshMetrics {
    pub min_angle_deg: f64,
    pub vertex_count: usize,
    pub boundary_length: f64,
}

struct BoundaryNode {
    z: Point,
    piece: usize,
    s: f64,
}

/// Local target edge length along the boundary: grows linearly away from
/// both ends of the piece so that consecutive edges have ratio `grading`.
fn place_nodes(arc: &ArcSegment, hb: f64, a0: f64, a1: f64, grading: f64) -> Vec<f64> {
    let len = arc.length();
    let kappa = -grading.ln();
    let size = |s: f64| hb.min(a0 + kappa * s).min(a1 + kappa * (len - s));
    let smallest = a0.min(a1).min(hb);
    let m = ((len / smallest) * 8.0).ceil().clamp(64.0, 400_000.0) as usize;
    let ds = len / m as f64;
    let mut cum = vec![0.0; m + 1];
    for i in 0..m {
        let s0 = i as f64 * ds;
        cum[i + 1] = cum[i] + ds * (1.0 / size(s0) + 4.0 / size(s0 + 0.5 * ds) + 1.0 / size(s0 + ds)) / 6.0;
    }
    let total = cum[m];
    let n = total.ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut i = 0;
    for j in 1..n {
        let target = total * j as f64 / n as f64;
        while cum[i + 1] < target {
            i += 1;
        }
        let t = (target - cum[i]) / (cum[i + 1] - cum[i]);
        out.push((i as f64 + t) * ds);
    }
    out.push(len);
    out
}

fn corner_size(h: f64, grading: f64, feature: Option<f64>) -> f64 {
    let a = h * grading.powi(GRADED_LAYERS);
    match feature {
        Some(w) => a.min(w),
        None => a,
    }
}

fn piece_size(arc: &ArcSegment, h: f64, feature: Option<f64>) -> f64 {
    match arc {
        ArcSegment::CircularArc { radius, .. } => h * radius.sqrt().min(1.0),
        ArcSegment::LineSegment { .. } => match feature {
            Some(w) => h.min(w),
            None => h,
        },
    }
}

fn boundary_nodes(domain: &PlanarDomain, h: f64, grading: f64) -> Vec<BoundaryNode> {
    let n = domain.arcs.len();
    let feature = domain.family.passage_width();
    let hb: Vec<f64> = domain.arcs.iter().map(|a| piece_size(a, h, feature)).collect();
    let corner_at: HashSet<usize> = domain.corners.iter().map(|c| c.arc_index).collect();
    let vsize: Vec<f64> = (0..n)
        .map(|k| {
            let smooth = hb[k].min(hb[(k + n - 1) % n]);
            if corner_at.contains(&k) {
                corner_size(h, grading, feature).min(smooth)
            } else {
                smooth
            }
        })
        .collect();
    let mut nodes = Vec::new();
    for (k, arc) in domain.arcs.iter().enumerate() {
        let s = place_nodes(arc, hb[k], vsize[k], vsize[(k + 1) % n], grading);
        for &sk in &s[..s.len() - 1] {
            nodes.push(BoundaryNode {
                z: arc.point_at(sk),
                piece: k,
                s: sk,
            });
        }
    }
    nodes
}

fn feature_check(domain: &PlanarDomain, h: f64, grading: f64) -> Result<()> {
    if let Some(w) = domain.family.passage_width() {
        let local = h * grading.powi(GRADED_LAYERS);
        if local > 2.0 * w {
            return Err(Error::FeatureResolution(format!(
                "mesh size {h} grades down to {local:.3e} at the passage, wider than twice its width {w:.3e}"
            )));
        }
    }
    Ok(())
}

/// Triangulates a domain with every boundary piece labeled Steklov.
pub fn triangulate_domain(domain: &PlanarDomain, h: f64, grading: f64) -> Result<TriMesh> {
    triangulate(&MixedDomain::all_steklov(domain.clone()), h, grading)
}

pub fn triangulate(mixed: &MixedDomain, h: f64, grading: f64) -> Result<TriMesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Parameter(format!("mesh size must be positive, got {h}")));
    }
    if !(grading > 0.0 && grading <= 1.0) {
        return Err(Error::Parameter(format!("grading must lie in (0, 1], got {grading}")));
    }
    let domain = &mixed.domain;
    feature_check(domain, h, grading)?;
    let nodes = boundary_nodes(domain, h, grading);
    let nb = nodes.len();
    if nb < 3 {
        return Err(Error::Mesh("fewer than three boundary nodes".into()));
    }

    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let mut handles = Vec::with_capacity(nb);
    for node in &nodes {
        let hnd = cdt
            .insert(Point2::new(node.z.re, node.z.im))
            .map_err(|e| Error::Mesh(format!("boundary insertion failed: {e:?}")))?;
        handles.push(hnd);
    }
    let distinct: HashSet<usize> = handles.iter().map(|v| v.index()).collect();
    if distinct.len() != nb {
        return Err(Error::Mesh("boundary nodes coincide".into()));
    }
    for i in 0..nb {
        let a = handles[i];
        let b = handles[(i + 1) % nb];
        if !cdt.can_add_constraint(a, b) {
            return Err(Error::Mesh("boundary polyline self-intersects".into()));
        }
        cdt.add_constraint(a, b);
    }

    let (_, area) = domain.mass_and_area();
    let target_area = 0.433 * h * h;
    let budget = (40.0 * area / target_area) as usize + 40 * nb + 10_000;
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEG))
            .with_max_allowed_area(target_area)
            .with_max_additional_vertices(budget),
    );
    if !result.refinement_complete {
        return Err(Error::Mesh("Delaunay refinement exhausted its vertex budget".into()));
    }
    let excluded: HashSet<_> = result.excluded_faces.iter().copied().collect();

    // collect inner triangles and renumber the vertices they use
    let mut index_of: HashMap<usize, usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let vs = face.vertices();
        let mut tri = [0usize; 3];
        for (slot, v) in tri.iter_mut().zip(vs.iter()) {
            let key = v.fix().index();
            let next = vertices.len();
            *slot = *index_of.entry(key).or_insert_with(|| {
                let p = v.position();
                vertices.push(Complex64::new(p.x, p.y));
                next
            });
        }
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(Error::Mesh("no interior triangles".into()));
    }

    // boundary loop: directed triangle edges whose reverse is absent
    let mut directed: HashSet<(usize, usize)> = HashSet::new();
    for t in &triangles {
        for e in 0..3 {
            directed.insert((t[e], t[(e + 1) % 3]));
        }
    }
    let mut succ: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) && succ.insert(a, b).is_some() {
            return Err(Error::Mesh("boundary is not a single loop".into()));
        }
    }

    // locate original boundary nodes in the new numbering
    let mut original: HashMap<usize, usize> = HashMap::new();
    for (i, hnd) in handles.iter().enumerate() {
        let key = hnd.index();
        let vi = *index_of
            .get(&key)
            .ok_or_else(|| Error::Mesh("boundary node missing from the triangulation".into()))?;
        original.insert(vi, i);
    }
    let start = *original
        .keys()
        .min()
        .ok_or_else(|| Error::Mesh("empty boundary".into()))?;
    let mut boundary_loop = vec![start];
    let mut cur = start;
    loop {
        cur = *succ
            .get(&cur)
            .ok_or_else(|| Error::Mesh("open boundary loop".into()))?;
        if cur == start {
            break;
        }
        boundary_loop.push(cur);
        if boundary_loop.len() > succ.len() {
            return Err(Error::Mesh("boundary loop does not close".into()));
        }
    }
    if boundary_loop.len() != succ.len() {
        return Err(Error::Mesh("boundary has more than one component".into()));
    }

    // (piece, s) for every boundary vertex; Steiner points are placed on the
    // true curve at the parameter matching their position on the chord
    let mut param: HashMap<usize, (usize, f64)> = HashMap::new();
    let len = boundary_loop.len();
    let mut i = 0;
    while i < len {
        let va = boundary_loop[i];
        let na = &nodes[original[&va]];
        param.insert(va, (na.piece, na.s));
        let mut j = i + 1;
        while j < len && !original.contains_key(&boundary_loop[j]) {
            j += 1;
        }
        let nb_node = &nodes[original[&boundary_loop[j % len]]];
        let arc = &domain.arcs[na.piece];
        let sb = if nb_node.piece == na.piece && nb_node.s > na.s { nb_node.s } else { arc.length() };
        let chord = nb_node.z - na.z;
        for &v in &boundary_loop[i + 1..j] {
            let t = ((vertices[v] - na.z) * chord.conj()).re / chord.norm_sqr();
            let s = na.s + t.clamp(0.0, 1.0) * (sb - na.s);
            vertices[v] = arc.point_at(s);
            param.insert(v, (na.piece, s));
        }
        i = j;
    }

    let mut boundary_edges = Vec::with_capacity(len);
    for k in 0..len {
        let a = boundary_loop[k];
        let b = boundary_loop[(k + 1) % len];
        let (piece, sa) = param[&a];
        let (pb, sb_raw) = param[&b];
        let sb = if pb == piece && sb_raw > sa { sb_raw } else { domain.arcs[piece].length() };
        let kind = if mixed.steklov[piece] { EdgeKind::Steklov } else { EdgeKind::Neumann };
        boundary_edges.push(BoundaryEdge {
            a,
            b,
            kind,
            piece,
            rho: [domain.density.value(piece, sa), domain.density.value(piece, sb)],
        });
    }

    let corner_vertices: Vec<usize> = domain
        .corners
        .iter()
        .filter_map(|c| {
            boundary_loop
                .iter()
                .copied()
                .find(|&v| (vertices[v] - c.point).norm() < 1e-12 * c.point.norm().max(1.0))
        })
        .collect();

    let mesh = TriMesh {
        id: format!("{}_h{h}", domain.id),
        h,
        grading,
        vertices,
        triangles,
        boundary_edges,
        corner_vertices,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn signed_area(p: [Point; 3]) -> f64 {
    0.5 * ((p[1] - p[0]).conj() * (p[2] - p[0])).im
}

fn triangle_angles(p: [Point; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let u = p[(i + 1) % 3] - p[i];
        let v = p[(i + 2) % 3] - p[i];
        out[i] = (u.conj() * v).arg().abs();
    }
    out
}

impl TriMesh {
    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    fn validate(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            if !(signed_area(self.triangle_points(t)) > 0.0) {
                return Err(Error::Mesh(format!("triangle {t} is not positively oriented")));
            }
        }
        let min_angle = self.min_angle_deg(true);
        if min_angle < MIN_ANGLE_DEG {
            return Err(Error::Mesh(format!(
                "minimum angle {min_angle:.2} degrees is below {MIN_ANGLE_DEG}"
            )));
        }
        Ok(())
    }

    /// Smallest triangle angle; with `exempt_corners` the triangles touching a
    /// domain corner are skipped.
    pub fn min_angle_deg(&self, exempt_corners: bool) -> f64 {
        let corners: HashSet<usize> = if exempt_corners {
            self.corner_vertices.iter().copied().collect()
        } else {
            HashSet::new()
        };
        let mut min = f64::INFINITY;
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|v| corners.contains(v)) {
                continue;
            }
            for a in triangle_angles(self.triangle_points(t)) {
                min = min.min(a);
            }
        }
        min * 180.0 / PI
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| (self.vertices[e.b] - self.vertices[e.a]).norm())
            .sum()
    }

    /// `Σ |e| · (ρ_a + ρ_b)/2` over Steklov edges.
    pub fn steklov_mass(&self) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Steklov)
            .map(|e| (self.vertices[e.b] - self.vertices[e.a]).norm() * e.rho_average())
            .sum()
    }

    pub fn metrics(&self) -> MeshMetrics {
        MeshMetrics {
            min_angle_deg: self.min_angle_deg(true),
            vertex_count: self.vertices.len(),
            boundary_length: self.boundary_length(),
        }
    }

    pub fn edge_count(&self) -> usize {
        let mut edges = HashSet::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn mesh_metrics(mesh: &TriMesh) -> MeshMetrics {
    mesh.metrics()
}

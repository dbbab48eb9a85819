//! P1 finite elements for the Steklov and sloshing eigenproblems via the
//! discrete Dirichlet-to-Neumann operator (Schur complement of the
//! stiffness matrix onto the Steklov boundary nodes).

use faer::linalg::solvers::Solve;
use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par, Side};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{MixedDomain, PlanarDomain, Point};
use crate::mesher::{self, EdgeKind, TriMesh};

const BLOCK: usize = 64;
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Compressed sparse row matrix with sorted, unique column indices.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut values: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    fn from_mat(m: &Mat<f64>) -> Self {
        let n = m.nrows();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = m[(i, j)];
            }
        }
        SymMatrix { n, data }
    }

    fn to_mat(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.n, |i, j| self.data[i * self.n + j])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `max |S_ij − S_ji| / max |S_ij|`.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut d = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                d = d.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        d / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// P1 stiffness matrix of the mesh.
pub fn stiffness(mesh: &TriMesh) -> CsrMatrix {
    let n = mesh.vertices.len();
    let mut trip = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.triangle_points(t);
        let area2 = ((p[1] - p[0]).conj() * (p[2] - p[0])).im;
        // gradients of the hat functions are i·(opposite edge)/(2A) rotated
        let e = [p[2] - p[1], p[0] - p[2], p[1] - p[0]];
        for i in 0..3 {
            for j in 0..3 {
                let k = (e[i].re * e[j].re + e[i].im * e[j].im) / (2.0 * area2);
                trip.push((tri[i], tri[j], k));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, trip)
}

/// Vertices touching at least one Steklov edge, in boundary order.
pub fn steklov_nodes(mesh: &TriMesh) -> Vec<usize> {
    let mut seen = vec![false; mesh.vertices.len()];
    let mut out = Vec::new();
    for e in mesh.boundary_edges.iter().filter(|e| e.kind == EdgeKind::Steklov) {
        for v in [e.a, e.b] {
            if !seen[v] {
                seen[v] = true;
                out.push(v);
            }
        }
    }
    out
}

/// ρ-weighted boundary mass matrix on the Steklov nodes, exact for ρ linear
/// along each edge.
pub fn boundary_mass(mesh: &TriMesh, nodes: &[usize]) -> SymMatrix {
    let local: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = nodes.len();
    let mut data = vec![0.0; n * n];
    for e in mesh.boundary_edges.iter().filter(|e| e.kind == EdgeKind::Steklov) {
        let len = (mesh.vertices[e.b] - mesh.vertices[e.a]).norm();
        let (ra, rb) = (e.rho[0], e.rho[1]);
        let (i, j) = (local[&e.a], local[&e.b]);
        data[i * n + i] += len * (3.0 * ra + rb) / 12.0;
        data[j * n + j] += len * (ra + 3.0 * rb) / 12.0;
        let off = len * (ra + rb) / 12.0;
        data[i * n + j] += off;
        data[j * n + i] += off;
    }
    SymMatrix { n, data }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InteriorSolver {
    Direct,
    ConjugateGradient,
}

/// Discrete Dirichlet-to-Neumann operator on the Steklov nodes.
#[derive(Debug, Clone)]
pub struct DtnOperator {
    pub nodes: Vec<usize>,
    pub matrix: SymMatrix,
}

struct Blocks {
    a_bb: Vec<f64>,
    a_ii: CsrMatrix,
    a_ib: CsrMatrix,
    nb: usize,
}

fn split_blocks(mesh: &TriMesh, nodes: &[usize]) -> Blocks {
    let a = stiffness(mesh);
    let n = mesh.vertices.len();
    let mut bidx = vec![usize::MAX; n];
    for (i, &v) in nodes.iter().enumerate() {
        bidx[v] = i;
    }
    let mut iidx = vec![usize::MAX; n];
    let mut ni = 0;
    for v in 0..n {
        if bidx[v] == usize::MAX {
            iidx[v] = ni;
            ni += 1;
        }
    }
    let nb = nodes.len();
    let mut a_bb = vec![0.0; nb * nb];
    let mut t_ii = Vec::new();
    let mut t_ib = Vec::new();
    for r in 0..n {
        for (c, v) in a.row(r) {
            match (bidx[r] != usize::MAX, bidx[c] != usize::MAX) {
                (true, true) => a_bb[bidx[r] * nb + bidx[c]] += v,
                (false, false) => t_ii.push((iidx[r], iidx[c], v)),
                (false, true) => t_ib.push((iidx[r], bidx[c], v)),
                (true, false) => {}
            }
        }
    }
    Blocks {
        a_bb,
        a_ii: CsrMatrix::from_triplets(ni, ni, t_ii),
        a_ib: CsrMatrix::from_triplets(ni, nb, t_ib),
        nb,
    }
}

/// Column `c` of `A_ib` as a dense vector.
fn dense_columns(a_ib: &CsrMatrix, cols: std::ops::Range<usize>) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(a_ib.n_rows, cols.len());
    for r in 0..a_ib.n_rows {
        for (c, v) in a_ib.row(r) {
            if cols.contains(&c) {
                m[(r, c - cols.start)] = v;
            }
        }
    }
    m
}

fn pcg(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = b.len();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..10 * n + 100 {
        a.matvec(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    Err(Error::solver("conjugate gradient did not converge", rnorm / bnorm))
}

/// `S = A_bb − A_bi A_ii⁻¹ A_ib` on the Steklov nodes; nodes on Neumann
/// edges only are part of the interior block.
pub fn dtn_matrix(mesh: &TriMesh, solver: InteriorSolver) -> Result<DtnOperator> {
    let nodes = steklov_nodes(mesh);
    if nodes.is_empty() {
        return Err(Error::Input("mesh has no Steklov boundary nodes".into()));
    }
    let blocks = split_blocks(mesh, &nodes);
    let nb = blocks.nb;
    let ni = blocks.a_ii.n_rows;
    let mut s = Mat::<f64>::from_fn(nb, nb, |i, j| blocks.a_bb[i * nb + j]);
    if ni > 0 {
        let direct = match solver {
            InteriorSolver::Direct => {
                let trip: Vec<Triplet<usize, usize, f64>> = (0..ni)
                    .flat_map(|r| blocks.a_ii.row(r).map(move |(c, v)| Triplet::new(r, c, v)))
                    .collect();
                let a_ii = SparseColMat::<usize, f64>::try_new_from_triplets(ni, ni, &trip)
                    .map_err(|e| Error::solver(format!("interior block assembly failed: {e:?}"), f64::NAN))?;
                Some(
                    a_ii.sp_cholesky(Side::Lower)
                        .map_err(|e| Error::solver(format!("interior block is not positive definite: {e:?}"), f64::NAN))?,
                )
            }
            InteriorSolver::ConjugateGradient => None,
        };
        let mut start = 0;
        while start < nb {
            let end = (start + BLOCK).min(nb);
            let rhs = dense_columns(&blocks.a_ib, start..end);
            let x = match &direct {
                Some(llt) => {
                    let mut x = rhs;
                    llt.solve_in_place(x.as_mut());
                    x
                }
                None => {
                    let mut x = Mat::<f64>::zeros(ni, end - start);
                    for c in 0..end - start {
                        let b: Vec<f64> = (0..ni).map(|r| rhs[(r, c)]).collect();
                        let sol = pcg(&blocks.a_ii, &b, 1e-14)?;
                        for r in 0..ni {
                            x[(r, c)] = sol[r];
                        }
                    }
                    x
                }
            };
            // S[:, block] -= A_bi X, with A_bi = A_ibᵀ
            for r in 0..ni {
                for (bcol, v) in blocks.a_ib.row(r) {
                    for c in 0..end - start {
                        s[(bcol, start + c)] -= v * x[(r, c)];
                    }
                }
            }
            start = end;
        }
    }
    // symmetrize away rounding
    let s = Mat::<f64>::from_fn(nb, nb, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    Ok(DtnOperator {
        nodes,
        matrix: SymMatrix::from_mat(&s),
    })
}

/// Eigenvalues, `B`-orthonormal eigenvectors and relative residuals.
pub type Eigenpairs = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>);

/// Lowest `count` eigenpairs of `S u = σ B u` with `B` positive definite.
pub fn generalized_eigen(s: &SymMatrix, b: &SymMatrix, count: usize) -> Result<Eigenpairs> {
    let n = s.n;
    if count > n {
        return Err(Error::Input(format!("asked for {count} eigenpairs of a {n}×{n} problem")));
    }
    let bm = b.to_mat();
    let llt = bm
        .llt(Side::Lower)
        .map_err(|e| Error::solver(format!("boundary mass is not positive definite: {e:?}"), f64::NAN))?;
    let l = llt.L();
    let mut x = s.to_mat();
    solve_lower_triangular_in_place(l, x.as_mut(), Par::Seq);
    let mut c = x.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let c = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let eig = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::solver(format!("symmetric eigensolver failed: {e:?}"), f64::NAN))?;
    let vals = eig.S().column_vector();
    let mut y = eig.U().subcols(0, count).to_owned();
    solve_upper_triangular_in_place(l.transpose(), y.as_mut(), Par::Seq);

    let mut sigmas = Vec::with_capacity(count);
    let mut vecs = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for k in 0..count {
        let sigma = vals[k];
        let u: Vec<f64> = (0..n).map(|i| y[(i, k)]).collect();
        let su = s.matvec(&u);
        let bu = b.matvec(&u);
        let res = su
            .iter()
            .zip(&bu)
            .map(|(a, b)| (a - sigma * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let unorm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = res / unorm;
        if !(rel <= RESIDUAL_TOL * (1.0 + s.max_abs())) {
            return Err(Error::solver(format!("eigenpair {k} failed the residual check"), rel));
        }
        sigmas.push(sigma);
        vecs.push(u);
        residuals.push(rel);
    }
    Ok((sigmas, vecs, residuals))
}

/// Eigenpairs on one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpectrum {
    pub mesh_id: String,
    pub h: f64,
    pub eigenvalues: Vec<f64>,
    /// Boundary positions of the Steklov nodes.
    pub trace_points: Vec<Point>,
    /// Nodal values of each eigenfunction at `trace_points`, `B`-orthonormal.
    pub eigentraces: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub boundary_nodes: usize,
}

pub fn solve_mesh(mesh: &TriMesh, count: usize, solver: InteriorSolver) -> Result<MeshSpectrum> {
    let dtn = dtn_matrix(mesh, solver)?;
    if count > dtn.nodes.len() / 4 {
        return Err(Error::Input(format!(
            "{count} eigenvalues requested but the mesh has only {} Steklov nodes",
            dtn.nodes.len()
        )));
    }
    let b = boundary_mass(mesh, &dtn.nodes);
    let (eigenvalues, eigentraces, residuals) = generalized_eigen(&dtn.matrix, &b, count)?;
    Ok(MeshSpectrum {
        mesh_id: mesh.id.clone(),
        h: mesh.h,
        eigenvalues,
        trace_points: dtn.nodes.iter().map(|&v| mesh.vertices[v]).collect(),
        eigentraces,
        residuals,
        boundary_nodes: dtn.nodes.len(),
    })
}

/// Spectrum at mesh size `h`, its refinement at `h/2`, and the Richardson
/// extrapolation of the two assuming second-order convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteklovSpectrum {
    pub domain_id: String,
    pub eps: Option<f64>,
    pub h: f64,
    pub raw: Vec<f64>,
    pub refined: Vec<f64>,
    pub extrapolated: Vec<f64>,
    pub error_estimate: Vec<f64>,
    pub fine: MeshSpectrum,
}

pub const RICHARDSON_ORDER: f64 = 2.0;

impl SteklovSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.extrapolated
    }

    pub fn sigma(&self, k: usize) -> f64 {
        self.extrapolated[k]
    }

    pub fn error(&self, k: usize) -> f64 {
        self.error_estimate[k]
    }

    pub fn count(&self) -> usize {
        self.extrapolated.len()
    }

    /// Empirical convergence order from the two raw levels against a
    /// reference value.
    pub fn observed_order(&self, k: usize, exact: f64) -> f64 {
        ((self.raw[k] - exact).abs() / (self.refined[k] - exact).abs()).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub h: f64,
    pub grading: f64,
    pub count: usize,
    pub solver: InteriorSolver,
}

impl SolveOptions {
    pub fn new(h: f64, count: usize) -> Self {
        SolveOptions {
            h,
            grading: mesher::DEFAULT_GRADING,
            count,
            solver: InteriorSolver::Direct,
        }
    }
}

pub fn richardson(coarse: f64, fine: f64) -> (f64, f64) {
    let f = 2f64.powf(RICHARDSON_ORDER);
    let ext = (f * fine - coarse) / (f - 1.0);
    (ext, (ext - fine).abs())
}

pub fn mixed_spectrum(mixed: &MixedDomain, opts: SolveOptions) -> Result<SteklovSpectrum> {
    let coarse_mesh = mesher::triangulate(mixed, opts.h, opts.grading)?;
    let fine_mesh = mesher::triangulate(mixed, 0.5 * opts.h, opts.grading)?;
    let coarse = solve_mesh(&coarse_mesh, opts.count, opts.solver)?;
    let fine = solve_mesh(&fine_mesh, opts.count, opts.solver)?;
    let mut extrapolated = Vec::with_capacity(opts.count);
    let mut error_estimate = Vec::with_capacity(opts.count);
    for k in 0..opts.count {
        let (e, err) = richardson(coarse.eigenvalues[k], fine.eigenvalues[k]);
        extrapolated.push(e);
        error_estimate.push(err);
    }
    Ok(SteklovSpectrum {
        domain_id: mixed.domain.id.clone(),
        eps: mixed.domain.family.eps(),
        h: opts.h,
        raw: coarse.eigenvalues.clone(),
        refined: fine.eigenvalues.clone(),
        extrapolated,
        error_estimate,
        fine,
    })
}

pub fn steklov_spectrum(domain: &PlanarDomain, h: f64, count: usize) -> Result<SteklovSpectrum> {
    mixed_spectrum(&MixedDomain::all_steklov(domain.clone()), SolveOptions::new(h, count))
}

pub fn sloshing_spectrum(mixed: &MixedDomain, h: f64, count: usize) -> Result<SteklovSpectrum> {
    mixed_spectrum(mixed, SolveOptions::new(h, count))
}

/// CSV rows `domain_id, eps, h, k, sigma_raw, sigma_extrap, err_est`.
pub fn write_spectrum_csv<W: std::io::Write>(out: W, spectra: &[SteklovSpectrum]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["domain_id", "eps", "h", "k", "sigma_raw", "sigma_extrap", "err_est"])?;
    for sp in spectra {
        for k in 0..sp.count() {
            w.write_record([
                sp.domain_id.clone(),
                sp.eps.map_or(String::new(), |e| e.to_string()),
                sp.h.to_string(),
                k.to_string(),
                sp.raw[k].to_string(),
                sp.extrapolated[k].to_string(),
                sp.error_estimate[k].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{disk, half_disk};
    use crate::mesher::triangulate_domain;

    #[test]
    fn stiffness_kills_constants() {
        let mesh = triangulate_domain(&disk(1.0).unwrap(), 0.2, 0.7).unwrap();
        let a = stiffness(&mesh);
        let ones = vec![1.0; a.n_rows];
        let mut y = vec![0.0; a.n_rows];
        a.matvec(&ones, &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dtn_annihilates_constants_and_solvers_agree() {
        let mesh = triangulate_domain(&disk(1.0).unwrap(), 0.1, 0.7).unwrap();
        let direct = dtn_matrix(&mesh, InteriorSolver::Direct).unwrap();
        let cg = dtn_matrix(&mesh, InteriorSolver::ConjugateGradient).unwrap();
        let ones = vec![1.0; direct.matrix.n];
        assert!(direct.matrix.matvec(&ones).iter().all(|v| v.abs() < 1e-10));
        let diff = direct
            .matrix
            .data
            .iter()
            .zip(&cg.matrix.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-8, "solver mismatch {diff}");
        assert!(direct.matrix.symmetry_defect() < 1e-12);
    }

    #[test]
    fn boundary_mass_integrates_density() {
        let mesh = triangulate_domain(&disk(1.0).unwrap(), 0.1, 0.7).unwrap();
        let nodes = steklov_nodes(&mesh);
        let b = boundary_mass(&mesh, &nodes);
        let total: f64 = b.data.iter().sum();
        assert!((total - mesh.steklov_mass()).abs() < 1e-12);
    }

    #[test]
    fn half_disk_sloshing_first_eigenvalue() {
        let hd = half_disk().unwrap();
        let mixed = MixedDomain::new(hd, vec![true, false]).unwrap();
        let sp = sloshing_spectrum(&mixed, 0.05, 3).unwrap();
        assert!(sp.sigma(0).abs() < 1e-8);
        assert!((sp.sigma(1) - 1.0).abs() < 0.02, "{:?}", sp.extrapolated);
        assert!((sp.sigma(2) - 2.0).abs() < 0.04, "{:?}", sp.extrapolated);
    }

    #[test]
    fn eigentraces_are_b_orthonormal() {
        let mesh = triangulate_domain(&disk(1.0).unwrap(), 0.1, 0.7).unwrap();
        let sp = solve_mesh(&mesh, 5, InteriorSolver::Direct).unwrap();
        let dtn = dtn_matrix(&mesh, InteriorSolver::Direct).unwrap();
        let b = boundary_mass(&mesh, &dtn.nodes);
        for i in 0..5 {
            let bi = b.matvec(&sp.eigentraces[i]);
            for j in 0..5 {
                let ip: f64 = bi.iter().zip(&sp.eigentraces[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-10);
            }
            let su = dtn.matrix.matvec(&sp.eigentraces[i]);
            let rq: f64 = su.iter().zip(&sp.eigentraces[i]).map(|(a, b)| a * b).sum();
            assert!((rq - sp.eigenvalues[i]).abs() <= 1e-8 * sp.eigenvalues[i].abs().max(1.0));
        }
    }

    #[test]
    fn too_many_eigenvalues_requested() {
        let mesh = triangulate_domain(&disk(1.0).unwrap(), 0.5, 0.7).unwrap();
        assert!(matches!(solve_mesh(&mesh, 50, InteriorSolver::Direct), Err(Error::Input(_))));
    }

    #[test]
    fn richardson_cancels_quadratic_error() {
        let (e, err) = richardson(1.0 + 0.04, 1.0 + 0.01);
        assert!((e - 1.0).abs() < 1e-14);
        assert!((err - 0.01).abs() < 1e-14);
    }

    #[test]
    fn csv_rows() {
        let sp = steklov_spectrum(&disk(1.0).unwrap(), 0.2, 3).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &[sp]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "domain_id,eps,h,k,sigma_raw,sigma_extrap,err_est");
        assert_eq!(lines.len(), 4);
    }
}

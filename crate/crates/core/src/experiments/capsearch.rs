use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::caps::{rearranged, CapMap, HyperbolicCap};
use crate::error::{Error, Result};
use crate::measure::{measure_distance, CircleMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub grid_l: usize,
    pub grid_p: usize,
    /// Distance of the outer grid rows from `l = 0` and `l = 2π`.
    pub delta: f64,
    /// Target `gap/trace`.
    pub gap_tolerance: f64,
    pub max_depth: usize,
    /// Bisection depth per edge when tracking the argument of the anisotropy.
    pub edge_depth: usize,
    /// Random phase of the `p` grid.
    pub seed: Option<u64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid_l: 40,
            grid_p: 40,
            delta: 0.05,
            gap_tolerance: 1e-6,
            max_depth: 60,
            edge_depth: 14,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CapCertificate {
    /// `μ` itself has an isotropic second-moment form.
    MeasureIsMultiple,
    Cap { cap: HyperbolicCap },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapSearch {
    pub certificate: CapCertificate,
    pub gap: f64,
    pub relative_gap: f64,
    /// Winding of the maximizing direction along `l = 2π − δ` and `l = δ`.
    pub winding_large: Option<f64>,
    pub winding_small: Option<f64>,
    pub grid_min_relative_gap: Option<f64>,
    pub evaluations: usize,
    /// Serialized `ψ_a` chain of the found cap.
    pub chain: Option<serde_json::Value>,
}

impl CapSearch {
    pub fn cap(&self) -> Option<HyperbolicCap> {
        match self.certificate {
            CapCertificate::Cap { cap } => Some(cap),
            CapCertificate::MeasureIsMultiple => None,
        }
    }
}

struct Field<'a> {
    mu: &'a CircleMeasure,
    count: AtomicUsize,
}

impl Field<'_> {
    /// Anisotropy `Q₁₁ − Q₂₂ + 2iQ₁₂` of the rearranged measure.
    fn eval(&self, l: f64, p: f64) -> Result<Complex64> {
        self.count.fetch_add(1, Ordering::Relaxed);
        let cap = HyperbolicCap::new(l, p)?;
        Ok(rearranged(self.mu, &cap)?.rearranged.quad_form().anisotropy())
    }

    /// Change of `arg F` along the segment `a → b`, bisecting until each
    /// step turns by less than `π/4`.
    fn arg_change(&self, a: (f64, f64), fa: Complex64, b: (f64, f64), fb: Complex64, depth: usize) -> Result<f64> {
        let d = (fb / fa).arg();
        if d.abs() < 0.25 * PI || depth == 0 {
            return Ok(d);
        }
        let m = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        let fm = self.eval(m.0, m.1)?;
        Ok(self.arg_change(a, fa, m, fm, depth - 1)? + self.arg_change(m, fm, b, fb, depth - 1)?)
    }
}

fn check_normalized(mu: &CircleMeasure) -> Result<()> {
    let mass = mu.mass();
    let c = mu.center_of_mass();
    if c.norm() > 1e-8 * mass {
        return Err(Error::Input(format!("measure is not centered: center of mass {c}")));
    }
    let f = mu.quad_form().anisotropy();
    if f.im.abs() > 1e-8 * mass || f.re < -1e-8 * mass {
        return Err(Error::Input(format!("measure is not rotation-normalized: anisotropy {f}")));
    }
    Ok(())
}

/// Winding of `p ↦ [m(l, p)]` on `ℝP¹`, counted in full turns of the
/// direction angle, from `samples` equally spaced values of `p` refined
/// adaptively.
pub fn loop_winding(mu: &CircleMeasure, l: f64, samples: usize, edge_depth: usize) -> Result<f64> {
    let field = Field {
        mu,
        count: AtomicUsize::new(0),
    };
    let ps: Vec<f64> = (0..=samples).map(|j| TAU * j as f64 / samples as f64).collect();
    let fs: Vec<Complex64> = ps.par_iter().map(|&p| field.eval(l, p)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for j in 0..samples {
        total += field.arg_change((l, ps[j]), fs[j], (l, ps[j + 1]), fs[j + 1], edge_depth)?;
    }
    Ok(total / (2.0 * TAU))
}

/// Searches the cylinder of caps for one whose rearranged measure is
/// multiple. The boundary rows carry different windings, so some grid cell
/// between them has a nonzero index; that cell is quadrisected by index and
/// the zero polished by Newton steps.
pub fn find_multiple_cap(mu: &CircleMeasure, opts: &SearchOptions) -> Result<CapSearch> {
    check_normalized(mu)?;
    let trace = mu.mass();
    let own_gap = mu.quad_form().gap();
    if own_gap <= opts.gap_tolerance * trace {
        return Ok(CapSearch {
            certificate: CapCertificate::MeasureIsMultiple,
            gap: own_gap,
            relative_gap: own_gap / trace,
            winding_large: None,
            winding_small: None,
            grid_min_relative_gap: None,
            evaluations: 0,
            chain: None,
        });
    }
    if opts.grid_l < 2 || opts.grid_p < 3 || !(opts.delta > 0.0 && opts.delta < PI) {
        return Err(Error::Input("cap grid too coarse or delta out of range".into()));
    }
    let field = Field {
        mu,
        count: AtomicUsize::new(0),
    };
    let phase = opts
        .seed
        .map_or(0.0, |s| ChaCha8Rng::seed_from_u64(s).gen::<f64>() * TAU / opts.grid_p as f64);
    let (nl, np) = (opts.grid_l, opts.grid_p);
    let ls: Vec<f64> = (0..nl)
        .map(|i| TAU - opts.delta - (TAU - 2.0 * opts.delta) * i as f64 / (nl - 1) as f64)
        .collect();
    let ps: Vec<f64> = (0..=np).map(|j| phase + TAU * j as f64 / np as f64).collect();
    let grid: Vec<Vec<Complex64>> = ls
        .par_iter()
        .map(|&l| ps.iter().map(|&p| field.eval(l, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let grid_min = grid
        .iter()
        .flatten()
        .map(|f| f.norm())
        .fold(f64::INFINITY, f64::min)
        / trace;

    // arg changes along the p edges of every row
    let row_edges: Vec<Vec<f64>> = (0..nl)
        .into_par_iter()
        .map(|i| {
            (0..np)
                .map(|j| field.arg_change((ls[i], ps[j]), grid[i][j], (ls[i], ps[j + 1]), grid[i][j + 1], opts.edge_depth))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let windings: Vec<f64> = row_edges.iter().map(|r| r.iter().sum::<f64>() / (2.0 * TAU)).collect();
    let winding_large = windings[0];
    let winding_small = windings[nl - 1];

    let found = match (0..nl - 1).find(|&i| (windings[i] - windings[i + 1]).abs() > 0.25) {
        Some(i) => {
            let cell = band_cell(&field, &ls, &ps, &grid, &row_edges, i, opts)?;
            refine(&field, cell, trace, opts)?
        }
        None => None,
    };
    // a zero can sit away from any winding change; polish the best grid node
    let found = match found {
        Some(f) => Some(f),
        None => {
            let (i, j) = (0..nl)
                .flat_map(|i| (0..np).map(move |j| (i, j)))
                .min_by(|a, b| grid[a.0][a.1].norm().total_cmp(&grid[b.0][b.1].norm()))
                .expect("nonempty grid");
            newton(&field, ls[i], ps[j], trace, opts.gap_tolerance)
        }
    };
    let evaluations = field.count.load(Ordering::Relaxed);
    match found {
        Some((l, p, f)) => {
            let cap = HyperbolicCap::new(l, p)?;
            let stage = rearranged(mu, &cap)?;
            let gap = stage.rearranged.quad_form().gap();
            let chain: serde_json::Value = serde_json::from_str(&stage.map.to_json()?)?;
            debug_assert!((gap - f.norm()).abs() <= 1e-9 * trace);
            Ok(CapSearch {
                certificate: CapCertificate::Cap { cap },
                gap,
                relative_gap: gap / trace,
                winding_large: Some(winding_large),
                winding_small: Some(winding_small),
                grid_min_relative_gap: Some(grid_min),
                evaluations,
                chain: Some(chain),
            })
        }
        None => Err(Error::SearchFailure(format!(
            "no cap with gap <= {:e}·trace; windings {winding_large:.3} (l = 2π − δ) and {winding_small:.3} (l = δ), \
             smallest grid gap {grid_min:.3e}·trace",
            opts.gap_tolerance
        ))),
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    l0: f64,
    l1: f64,
    p0: f64,
    p1: f64,
}

impl Rect {
    fn corners(&self) -> [(f64, f64); 4] {
        [(self.l0, self.p0), (self.l0, self.p1), (self.l1, self.p1), (self.l1, self.p0)]
    }

    fn center(&self) -> (f64, f64) {
        (0.5 * (self.l0 + self.l1), 0.5 * (self.p0 + self.p1))
    }

    fn size(&self) -> f64 {
        (self.l1 - self.l0).abs().max((self.p1 - self.p0).abs())
    }

    fn quarters(&self) -> [Rect; 4] {
        let (lm, pm) = self.center();
        [
            Rect { l0: self.l0, l1: lm, p0: self.p0, p1: pm },
            Rect { l0: self.l0, l1: lm, p0: pm, p1: self.p1 },
            Rect { l0: lm, l1: self.l1, p0: self.p0, p1: pm },
            Rect { l0: lm, l1: self.l1, p0: pm, p1: self.p1 },
        ]
    }
}

/// Index of `F` around a rectangle, in turns.
fn index(field: &Field, r: &Rect, depth: usize) -> Result<(f64, Vec<Complex64>)> {
    let c = r.corners();
    let f: Vec<Complex64> = c.iter().map(|&(l, p)| field.eval(l, p)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for k in 0..4 {
        total += field.arg_change(c[k], f[k], c[(k + 1) % 4], f[(k + 1) % 4], depth)?;
    }
    Ok((total / TAU, f))
}

/// A grid cell between rows `i` and `i + 1` with nonzero index.
fn band_cell(
    field: &Field,
    ls: &[f64],
    ps: &[f64],
    grid: &[Vec<Complex64>],
    row_edges: &[Vec<f64>],
    i: usize,
    opts: &SearchOptions,
) -> Result<Option<Rect>> {
    let np = ps.len() - 1;
    let verticals: Vec<f64> = (0..=np)
        .into_par_iter()
        .map(|j| field.arg_change((ls[i], ps[j]), grid[i][j], (ls[i + 1], ps[j]), grid[i + 1][j], opts.edge_depth))
        .collect::<Result<_>>()?;
    for j in 0..np {
        // boundary walked as (i, j) → (i, j+1) → (i+1, j+1) → (i+1, j)
        let idx = (row_edges[i][j] + verticals[j + 1] - row_edges[i + 1][j] - verticals[j]) / TAU;
        if idx.abs() > 0.5 {
            return Ok(Some(Rect {
                l0: ls[i],
                l1: ls[i + 1],
                p0: ps[j],
                p1: ps[j + 1],
            }));
        }
    }
    Ok(None)
}

fn refine(field: &Field, cell: Option<Rect>, trace: f64, opts: &SearchOptions) -> Result<Option<(f64, f64, Complex64)>> {
    let Some(mut cell) = cell else {
        return Ok(None);
    };
    for _ in 0..opts.max_depth {
        let (lc, pc) = cell.center();
        if let Some(hit) = newton(field, lc, pc, trace, opts.gap_tolerance) {
            let slack = 2.0 * cell.size();
            if (hit.0 - lc).abs() <= slack && signed_diff(hit.1, pc).abs() <= slack {
                return Ok(Some(hit));
            }
        }
        let quarters = cell.quarters();
        let indexed: Vec<(f64, Vec<Complex64>)> = quarters
            .par_iter()
            .map(|q| index(field, q, opts.edge_depth))
            .collect::<Result<_>>()?;
        let next = indexed.iter().position(|(k, _)| k.abs() > 0.5).unwrap_or_else(|| {
            // no sub-rectangle carries the index (a zero on an edge): keep the
            // one with the smallest corner value
            (0..4)
                .min_by(|&a, &b| {
                    let m = |k: usize| indexed[k].1.iter().map(|f| f.norm()).fold(f64::INFINITY, f64::min);
                    m(a).total_cmp(&m(b))
                })
                .expect("four quarters")
        });
        cell = quarters[next];
        if cell.size() < 1e-13 {
            break;
        }
    }
    let (lc, pc) = cell.center();
    let f = field.eval(lc, pc)?;
    Ok((f.norm() <= opts.gap_tolerance * trace).then_some((lc, pc, f)))
}

fn signed_diff(a: f64, b: f64) -> f64 {
    crate::measure::signed_angle(a - b)
}

/// Newton iteration on `F(l, p) = 0` with a central-difference Jacobian.
fn newton(field: &Field, mut l: f64, mut p: f64, trace: f64, tol: f64) -> Option<(f64, f64, Complex64)> {
    let target = 0.1 * tol * trace;
    let lmin = 1e-4;
    let mut best: Option<(f64, f64, Complex64)> = None;
    for _ in 0..30 {
        let f = field.eval(l, p).ok()?;
        if best.is_none_or(|b| f.norm() < b.2.norm()) {
            best = Some((l, p, f));
        }
        if f.norm() <= target {
            break;
        }
        let h: f64 = 1e-6;
        let hl = h.min(0.5 * l).min(0.5 * (TAU - l));
        let dl = (field.eval(l + hl, p).ok()? - field.eval(l - hl, p).ok()?) / (2.0 * hl);
        let dp = (field.eval(l, p + h).ok()? - field.eval(l, p - h).ok()?) / (2.0 * h);
        let det = dl.re * dp.im - dp.re * dl.im;
        if det.abs() < 1e-300 {
            break;
        }
        let mut sl = -(dp.im * f.re - dp.re * f.im) / det;
        let mut sp = -(-dl.im * f.re + dl.re * f.im) / det;
        let norm = sl.hypot(sp);
        if norm > 0.2 {
            sl *= 0.2 / norm;
            sp *= 0.2 / norm;
        }
        l = (l + sl).clamp(lmin, TAU - lmin);
        p += sp;
    }
    best.filter(|b| b.2.norm() <= tol * trace)
        .map(|(l, p, f)| (l, p.rem_euclid(TAU), f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapGridStats {
    pub caps: usize,
    /// `max |mass(·) − mass(μ)| / mass(μ)` over the grid.
    pub folded_mass: f64,
    pub rearranged_mass: f64,
    pub trace: f64,
    /// `max |center of mass(ν_a)| / mass(μ)`.
    pub center: f64,
}

impl CapGridStats {
    pub fn worst(&self) -> f64 {
        self.folded_mass.max(self.rearranged_mass).max(self.trace)
    }
}

/// Conservation and centering of the fold/rearrange pipeline over an
/// `nl × np` grid of caps.
pub fn cap_grid_stats(mu: &CircleMeasure, nl: usize, np: usize) -> Result<CapGridStats> {
    let m = mu.mass();
    let cells: Vec<[f64; 4]> = (0..nl * np)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / np, k % np);
            let cap = HyperbolicCap::new(TAU * (i as f64 + 0.5) / nl as f64, TAU * j as f64 / np as f64)?;
            let st = rearranged(mu, &cap)?;
            let nu = &st.rearranged;
            Ok([
                (st.folded.mass() - m).abs() / m,
                (nu.mass() - m).abs() / m,
                (nu.quad_form().trace() - m).abs() / m,
                nu.center_of_mass().norm() / m,
            ])
        })
        .collect::<Result<_>>()?;
    let max = |k: usize| cells.iter().map(|c| c[k]).fold(0.0, f64::max);
    Ok(CapGridStats {
        caps: cells.len(),
        folded_mass: max(0),
        rearranged_mass: max(1),
        trace: max(2),
        center: max(3),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub delta: f64,
    /// `max_p weak(ν_a, μ)` at `l = 2π − δ`.
    pub full_weak: f64,
    pub full_tv: f64,
    /// `max_p weak(ν_a, R_p^*μ)` at `l = δ`.
    pub small_weak: f64,
    pub small_tv: f64,
}

/// Distances of the rearranged measures from their limits as the cap
/// fills the disk and as it shrinks to a point, maximized over the cap
/// centres `centers`.
pub fn limit_laws(mu: &CircleMeasure, delta: f64, centers: &[f64]) -> Result<LimitReport> {
    if centers.is_empty() {
        return Err(Error::Input("no cap centres given".into()));
    }
    let rows: Vec<[f64; 4]> = centers
        .par_iter()
        .map(|&p| {
            let full = rearranged(mu, &HyperbolicCap::new(TAU - delta, p)?)?;
            let d_full = measure_distance(&full.rearranged, mu);
            let small = rearranged(mu, &HyperbolicCap::new(delta, p)?)?;
            let d_small = measure_distance(&small.rearranged, &mu.reflect(p)?);
            Ok([d_full.weak, d_full.tv, d_small.weak, d_small.tv])
        })
        .collect::<Result<_>>()?;
    let max = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    Ok(LimitReport {
        delta,
        full_weak: max(0),
        full_tv: max(1),
        small_weak: max(2),
        small_tv: max(3),
    })
}

/// Fold and rearrangement of `μ` at the found cap.
pub(crate) fn cap_stage(mu: &CircleMeasure, search: &CapSearch) -> Result<Option<crate::caps::CapStage>> {
    search.cap().map(|cap| rearranged(mu, &cap)).transpose()
}

/// The `ψ_a` chain stored with the search result.
pub fn map_of(search: &CapSearch) -> Result<Option<CapMap>> {
    search
        .chain
        .as_ref()
        .map(|c| CapMap::from_json(&c.to_string()))
        .transpose()
}

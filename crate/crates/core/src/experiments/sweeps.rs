use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::FamilyKind;
use crate::error::{Error, Result};
use crate::fem::{mixed_spectrum, SolveOptions, SteklovSpectrum};
use crate::geometry::{cut_half, Family, MixedDomain, PlanarDomain};
use crate::quadrature::GaussLegendre;

/// A sweep cell that could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub eps: f64,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloshingRow {
    pub eps: f64,
    /// `σ₁` of each cut piece with Neumann conditions on the cuts, left to right.
    pub pieces: Vec<f64>,
    pub piece_errors: Vec<f64>,
    pub min: f64,
    pub min_error: f64,
    /// `σ_n` of the uncut domain.
    pub sigma_n: f64,
    pub sigma_n_error: f64,
    /// `σ_n ≥ min − 3·err`
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub eps: f64,
    pub h: f64,
    pub sigma_n: f64,
    pub sigma_n1: f64,
    pub err_n: f64,
    pub err_n1: f64,
    pub mass: f64,
    /// `σ_nM/(2πn)`
    pub ratio8: f64,
    /// `σ_nσ_{n+1}M²/(4π²n²)`
    pub ratio9: f64,
    pub ratio8_err: f64,
    pub ratio9_err: f64,
    pub sloshing: Option<SloshingRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub n: usize,
    pub family: FamilyKind,
    /// Rows in the order of the (decreasing) eps grid.
    pub rows: Vec<SharpnessRow>,
    pub failures: Vec<CellFailure>,
    pub ratio8_increasing: bool,
    pub ratio9_increasing: bool,
    /// Two-point extrapolation in `√eps` from the two smallest eps.
    pub ratio8_limit: Option<f64>,
    pub ratio9_limit: Option<f64>,
    /// Every ratio is `≤ 1 + 3·err`.
    pub ratios_bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloshingReport {
    pub n: usize,
    pub rows: Vec<SloshingRow>,
    /// The piece minimum does not decrease beyond `3·err` as eps decreases.
    pub nondecreasing: bool,
    pub all_hold: bool,
}

impl SloshingReport {
    pub fn from_sharpness(report: &SharpnessReport) -> Self {
        let rows: Vec<SloshingRow> = report.rows.iter().filter_map(|r| r.sloshing.clone()).collect();
        let nondecreasing = rows
            .windows(2)
            .all(|w| w[1].min >= w[0].min - 3.0 * (w[0].min_error + w[1].min_error));
        let all_hold = !rows.is_empty() && rows.iter().all(|r| r.holds);
        SloshingReport {
            n: report.n,
            rows,
            nondecreasing,
            all_hold,
        }
    }
}

/// Vertical lines separating the disks of a family member.
pub fn sloshing_cuts(domain: &PlanarDomain) -> Result<Vec<f64>> {
    match &domain.family {
        Family::DoubleDisk { .. } | Family::Dumbbell { .. } => Ok(vec![0.0]),
        Family::Necklace { n, .. } => Ok((1..*n).map(|k| (2 * k - 1) as f64).collect()),
        f => Err(Error::Input(format!("no sloshing cuts defined for {f:?}"))),
    }
}

fn check_grid(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::Input("empty eps grid".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Input(format!("eps grid {eps:?} is not strictly decreasing")));
    }
    Ok(())
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.len() >= 2 && v.windows(2).all(|w| w[1] > w[0])
}

/// Linear extrapolation to `eps = 0` in the variable `√eps`.
fn sqrt_extrapolate(e: &[f64], r: &[f64]) -> Option<f64> {
    let k = e.len();
    if k < 2 {
        return None;
    }
    let (xa, xb) = (e[k - 2].sqrt(), e[k - 1].sqrt());
    Some(r[k - 1] - (r[k - 2] - r[k - 1]) * xb / (xa - xb))
}

fn sloshing_row(domain: &PlanarDomain, eps: f64, opts: SolveOptions, sp: &SteklovSpectrum, n: usize) -> Result<SloshingRow> {
    let pieces = cut_half(domain, &sloshing_cuts(domain)?)?;
    let spectra: Vec<SteklovSpectrum> = pieces
        .par_iter()
        .map(|p| mixed_spectrum(p, SolveOptions { count: 3, ..opts }))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = spectra.iter().map(|s| s.sigma(1)).collect();
    let errors: Vec<f64> = spectra.iter().map(|s| s.error(1)).collect();
    let (imin, &min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one piece");
    let min_error = errors[imin];
    Ok(SloshingRow {
        eps,
        pieces: values,
        piece_errors: errors,
        min,
        min_error,
        sigma_n: sp.sigma(n),
        sigma_n_error: sp.error(n),
        holds: sp.sigma(n) >= min - 3.0 * (sp.error(n) + min_error),
    })
}

fn sharpness_cell(family: FamilyKind, n: usize, eps: f64, opts: SolveOptions) -> Result<(SharpnessRow, Option<CellFailure>)> {
    let domain = family.build(n, eps)?;
    let sp = mixed_spectrum(
        &MixedDomain::all_steklov(domain.clone()),
        SolveOptions { count: opts.count.max(n + 2), ..opts },
    )?;
    let (mass, _) = domain.mass_and_area();
    let (s, s1, e, e1) = (sp.sigma(n), sp.sigma(n + 1), sp.error(n), sp.error(n + 1));
    let nf = n as f64;
    let ratio8 = s * mass / (2.0 * PI * nf);
    let ratio9 = s * s1 * mass * mass / (4.0 * PI * PI * nf * nf);
    let (sloshing, failure) = match sloshing_row(&domain, eps, opts, &sp, n) {
        Ok(r) => (Some(r), None),
        Err(err) => (
            None,
            Some(CellFailure {
                eps,
                stage: "sloshing".into(),
                message: err.to_string(),
            }),
        ),
    };
    Ok((
        SharpnessRow {
            eps,
            h: opts.h,
            sigma_n: s,
            sigma_n1: s1,
            err_n: e,
            err_n1: e1,
            mass,
            ratio8,
            ratio9,
            ratio8_err: e * mass / (2.0 * PI * nf),
            ratio9_err: (e * s1 + s * e1) * mass * mass / (4.0 * PI * PI * nf * nf),
            sloshing,
        },
        failure,
    ))
}

/// `σ_n` and `σ_{n+1}` of the family converging to `n` disks, the
/// normalized ratios and the sloshing lower bound, for each eps. Cells that
/// fail are recorded and skipped.
pub fn sweep_sharpness(n: usize, eps: &[f64], opts: SolveOptions) -> Result<SharpnessReport> {
    if n < 2 {
        return Err(Error::Input(format!("sharpness sweep needs n >= 2, got {n}")));
    }
    check_grid(eps)?;
    let family = FamilyKind::for_sharpness(n);
    let cells: Vec<_> = eps.par_iter().map(|&e| (e, sharpness_cell(family, n, e, opts))).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (e, cell) in cells {
        match cell {
            Ok((row, f)) => {
                rows.push(row);
                failures.extend(f);
            }
            Err(err) => failures.push(CellFailure {
                eps: e,
                stage: "steklov".into(),
                message: err.to_string(),
            }),
        }
    }
    let es: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let r8: Vec<f64> = rows.iter().map(|r| r.ratio8).collect();
    let r9: Vec<f64> = rows.iter().map(|r| r.ratio9).collect();
    Ok(SharpnessReport {
        n,
        family,
        ratio8_increasing: strictly_increasing(&r8),
        ratio9_increasing: strictly_increasing(&r9),
        ratio8_limit: sqrt_extrapolate(&es, &r8),
        ratio9_limit: sqrt_extrapolate(&es, &r9),
        ratios_bounded: rows
            .iter()
            .all(|r| r.ratio8 <= 1.0 + 3.0 * r.ratio8_err && r.ratio9 <= 1.0 + 3.0 * r.ratio9_err),
        rows,
        failures,
    })
}

/// Sloshing comparison alone, over the same family as [`sweep_sharpness`].
pub fn sweep_sloshing(n: usize, eps: &[f64], opts: SolveOptions) -> Result<SloshingReport> {
    Ok(SloshingReport::from_sharpness(&sweep_sharpness(n, eps, opts)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseRow {
    pub eps: f64,
    pub h: f64,
    /// `σ₁ … σ_{n_max}`
    pub sigmas: Vec<f64>,
    pub errors: Vec<f64>,
    /// Rayleigh quotient of the `k`-th passage test function, `k = 1 … n_max`.
    pub quotients: Vec<f64>,
    /// `σ_k ≤ max_{j ≤ k} quotient_j + 3·err` for each `k`.
    pub below_quotient: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub n_max: usize,
    pub rows: Vec<CollapseRow>,
    pub skipped: Vec<CellFailure>,
    /// Least-squares slope of `log σ_k` against `log eps`, `k = 1 … n_max`.
    pub slopes: Vec<Option<f64>>,
    pub sigma1_decreasing: bool,
    pub notes: Vec<String>,
}

impl CollapseReport {
    /// `σ₂/σ₁` per row, when both are available.
    pub fn ratio21(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.sigmas.len() >= 2)
            .map(|r| (r.eps, r.sigmas[1] / r.sigmas[0]))
            .collect()
    }
}

pub const NEUMANN_NOTE: &str = "the Neumann-Laplace eigenvalues of the same domains converge to those of two \
     disjoint disks and do not collapse; they are not computed here";

/// Rayleigh quotient of `sin(2πk s/L)` on the dumbbell passage (zero in
/// the disks), by quadrature over the passage of the actual domain.
pub fn test_function_quotient(domain: &PlanarDomain, k: usize) -> Result<f64> {
    if !matches!(domain.family, Family::Dumbbell { .. }) || k == 0 {
        return Err(Error::Input(format!("{} is not a dumbbell or k = 0", domain.id)));
    }
    let sides: Vec<_> = domain.arcs.iter().filter(|a| !a.is_arc()).collect();
    if sides.len() != 2 {
        return Err(Error::Shape("dumbbell passage must have two straight sides".into()));
    }
    let len = sides[0].length();
    let width = (sides[0].start().im - sides[1].start().im).abs();
    let omega = 2.0 * PI * k as f64 / len;
    let gl = GaussLegendre::new(16);
    let panels = 4 * k;
    let integrate = |l: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        (0..panels)
            .map(|i| {
                let a = l * i as f64 / panels as f64;
                gl.integrate(a, a + l / panels as f64, f)
            })
            .sum()
    };
    // the test function depends on x only, so the area integral factors
    let energy = width * integrate(len, &|s| (omega * (omega * s).cos()).powi(2));
    let boundary: f64 = sides
        .iter()
        .map(|side| integrate(side.length(), &|s| (omega * s).sin().powi(2)))
        .sum();
    Ok(energy / boundary)
}

fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn collapse_cell(n_max: usize, eps: f64, opts: SolveOptions) -> Result<CollapseRow> {
    let domain = FamilyKind::Dumbbell.build(2, eps)?;
    let sp = mixed_spectrum(
        &MixedDomain::all_steklov(domain.clone()),
        SolveOptions { count: opts.count.max(n_max + 1), ..opts },
    )?;
    let sigmas: Vec<f64> = (1..=n_max).map(|k| sp.sigma(k)).collect();
    let errors: Vec<f64> = (1..=n_max).map(|k| sp.error(k)).collect();
    let quotients = (1..=n_max).map(|k| test_function_quotient(&domain, k)).collect::<Result<Vec<_>>>()?;
    let below_quotient = (0..n_max)
        .map(|k| sigmas[k] <= quotients[..=k].iter().cloned().fold(0.0, f64::max) + 3.0 * errors[k])
        .collect();
    Ok(CollapseRow {
        eps,
        h: opts.h,
        sigmas,
        errors,
        quotients,
        below_quotient,
    })
}

/// `σ₁ … σ_{n_max}` of the dumbbell family with the passage test-function
/// bounds. Eps values the mesher cannot resolve are skipped with a note.
pub fn sweep_collapse(n_max: usize, eps: &[f64], opts: SolveOptions) -> Result<CollapseReport> {
    if n_max == 0 {
        return Err(Error::Input("n_max must be positive".into()));
    }
    check_grid(eps)?;
    let cells: Vec<_> = eps.par_iter().map(|&e| (e, collapse_cell(n_max, e, opts))).collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut notes = vec![NEUMANN_NOTE.to_string()];
    for (e, cell) in cells {
        match cell {
            Ok(r) => rows.push(r),
            Err(err) => {
                notes.push(format!("eps = {e} skipped: {err}"));
                skipped.push(CellFailure {
                    eps: e,
                    stage: "steklov".into(),
                    message: err.to_string(),
                });
            }
        }
    }
    let es: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let slopes = (0..n_max)
        .map(|k| log_slope(&es, &rows.iter().map(|r| r.sigmas[k]).collect::<Vec<_>>()))
        .collect();
    let s1: Vec<f64> = rows.iter().map(|r| r.sigmas[0]).collect();
    Ok(CollapseReport {
        n_max,
        sigma1_decreasing: s1.len() >= 2 && s1.windows(2).all(|w| w[1] < w[0]),
        rows,
        skipped,
        slopes,
        notes,
    })
}

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::capsearch::{cap_stage, find_multiple_cap, CapSearch, SearchOptions};
use crate::caps::{comparison_data, lift_boundary_data, normalize_measure, CapMap, HyperbolicCap};
use crate::conformal::pullback_domain;
use crate::disk::{BoundaryFunction, EnergyReport, DEFAULT_CUTOFF, MAX_CUTOFF};
use crate::error::{Error, Result};
use crate::fem::steklov_spectrum;
use crate::geometry::PlanarDomain;
use crate::measure::CircleMeasure;

/// What the strict `σ₂` bound is verified for.
#[derive(Debug, Clone)]
pub enum Sigma2Target {
    /// Two-arc domain: its pulled-back boundary measure, plus a FEM check.
    Domain(PlanarDomain),
    Measure { name: String, measure: CircleMeasure },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionSample {
    pub angle: f64,
    /// Dirichlet energy of the harmonic extension of the lifted data,
    /// including the Fourier truncation bound.
    pub energy: f64,
    /// `2π − energy`
    pub margin: f64,
    /// `∫ w_t dμ`
    pub mean: f64,
    /// `∫ w_t² dμ`
    pub second_moment: f64,
    /// `∫ (w_t − w̄_t)² dμ`, the denominator after projecting out constants.
    pub denominator: f64,
    /// `tᵀQ(ν_a)t`
    pub form_value: f64,
    pub rayleigh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sigma2Report {
    pub name: String,
    pub mass: f64,
    pub route: String,
    pub cap: Option<HyperbolicCap>,
    pub relative_gap: f64,
    /// `e₁`, `e₂` and sixteen intermediate directions.
    pub directions: Vec<DirectionSample>,
    pub min_energy_margin: f64,
    pub energy_ok: bool,
    pub max_denominator: f64,
    pub denominator_ok: bool,
    /// `max |∫ w_t² dμ − tᵀQ(ν_a)t| / M` over the sampled directions.
    pub denominator_form_defect: f64,
    /// `max |∫ w_t dμ| / M`.
    pub orthogonality_defect: f64,
    pub span_max_rayleigh: f64,
    /// `4π/M`
    pub span_bound: f64,
    pub span_ok: bool,
    /// `2π/M`, reached when `μ` itself is multiple.
    pub multiple_bound: Option<f64>,
    pub fem_sigma2: Option<f64>,
    pub fem_error: Option<f64>,
    /// `4π − σ₂M`
    pub fem_margin: Option<f64>,
    pub fem_ok: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma2Options {
    pub measure_nodes: usize,
    pub search: SearchOptions,
    pub h: f64,
    pub span_directions: usize,
}

impl Default for Sigma2Options {
    fn default() -> Self {
        Sigma2Options {
            measure_nodes: 1024,
            search: SearchOptions::default(),
            h: 0.05,
            span_directions: 64,
        }
    }
}

fn energy_with_bound(f: impl Fn(usize) -> Result<BoundaryFunction>) -> Result<EnergyReport> {
    let mut cutoff = DEFAULT_CUTOFF;
    loop {
        match f(cutoff)?.harmonic_energy() {
            Ok(r) => return Ok(r),
            Err(e) if cutoff >= MAX_CUTOFF => return Err(e),
            Err(_) => cutoff *= 2,
        }
    }
}

/// Test functions of one direction: the boundary values of `w_t` and the
/// sampled quantities.
struct TestFamily<'a> {
    mu: &'a CircleMeasure,
    map: Option<CapMap>,
    nu_form: crate::measure::QuadForm2,
}

impl TestFamily<'_> {
    fn boundary(&self, t: Complex64) -> Box<dyn Fn(f64) -> f64 + Sync + '_> {
        match &self.map {
            None => Box::new(move |th: f64| th.cos() * t.re + th.sin() * t.im),
            Some(map) => {
                let cap = map.cap;
                let tau = cap.reflection();
                let u = comparison_data(map, t);
                Box::new(move |th| if cap.contains_angle(th) { u(th) } else { u(tau.apply_angle(th)) })
            }
        }
    }

    fn sample(&self, angle: f64) -> Result<DirectionSample> {
        let t = Complex64::from_polar(1.0, angle);
        let report = match &self.map {
            None => energy_with_bound(|c| Ok(BoundaryFunction::from_fn(c, |th| th.cos() * t.re + th.sin() * t.im)))?,
            Some(map) => energy_with_bound(|c| lift_boundary_data(comparison_data(map, t), &map.cap, c))?,
        };
        let energy = report.energy + report.truncation_bound;
        let w = self.boundary(t);
        let mean = self.mu.integrate(&w);
        let second_moment = self.mu.integrate(|th| w(th).powi(2));
        let denominator = second_moment - mean * mean / self.mu.mass();
        Ok(DirectionSample {
            angle,
            mean,
            second_moment,
            energy,
            margin: TAU - energy,
            denominator,
            form_value: self.nu_form.value(t),
            rayleigh: energy / denominator,
        })
    }
}

/// Checks the ingredients of `σ₂M < 4π` for a centered, rotation-normalized
/// `μ` and the result of the multiple-cap search on it. `fem` is `(σ₂, err)`
/// of the domain `μ` was pulled back from.
pub fn verify_with_search(
    name: &str,
    mu: &CircleMeasure,
    search: &CapSearch,
    fem: Option<(f64, f64)>,
    span_directions: usize,
) -> Result<Sigma2Report> {
    let mass = mu.mass();
    let stage = cap_stage(mu, search)?;
    let (map, nu_form, route) = match &stage {
        Some(st) => (Some(st.map), st.rearranged.quad_form(), "cap"),
        None => (None, mu.quad_form(), "multiple_measure"),
    };
    let family = TestFamily { mu, map, nu_form };
    let mut angles = vec![0.0, 0.5 * PI];
    angles.extend((0..16).map(|k| PI * (k as f64 + 0.5) / 16.0));
    let directions: Vec<DirectionSample> = angles.par_iter().map(|&a| family.sample(a)).collect::<Result<_>>()?;
    let span: Vec<DirectionSample> = (0..span_directions)
        .into_par_iter()
        .map(|k| family.sample(PI * k as f64 / span_directions as f64))
        .collect::<Result<_>>()?;

    let min_energy_margin = directions.iter().chain(&span).map(|d| d.margin).fold(f64::INFINITY, f64::min);
    // w₁² + w₂² = 1 on the circle, so the two second moments add up to M
    let max_denominator = directions[0].second_moment.max(directions[1].second_moment);
    let denominator_form_defect = directions
        .iter()
        .map(|d| (d.second_moment - d.form_value).abs() / mass)
        .fold(0.0, f64::max);
    let orthogonality_defect = directions.iter().map(|d| d.mean.abs() / mass).fold(0.0, f64::max);
    let span_max_rayleigh = span.iter().map(|d| d.rayleigh).fold(0.0, f64::max);
    let span_bound = 2.0 * TAU / mass;

    let energy_ok = min_energy_margin > 0.0;
    let denominator_ok = max_denominator >= 0.5 * mass * (1.0 - 1e-12);
    let span_ok = span_max_rayleigh <= span_bound + 1e-8;
    let (fem_sigma2, fem_error, fem_margin, fem_ok) = match fem {
        Some((s, e)) => {
            let margin = 2.0 * TAU - s * mass;
            (Some(s), Some(e), Some(margin), Some(margin - 3.0 * e * mass > 0.0))
        }
        None => (None, None, None, None),
    };
    Ok(Sigma2Report {
        name: name.to_string(),
        mass,
        route: route.to_string(),
        cap: search.cap(),
        relative_gap: search.relative_gap,
        directions,
        min_energy_margin,
        energy_ok,
        max_denominator,
        denominator_ok,
        denominator_form_defect,
        orthogonality_defect,
        span_max_rayleigh,
        span_bound,
        span_ok,
        multiple_bound: (route == "multiple_measure").then_some(TAU / mass),
        pass: energy_ok && denominator_ok && span_ok && fem_ok.unwrap_or(true),
        fem_sigma2,
        fem_error,
        fem_margin,
        fem_ok,
    })
}

/// Normalizes the target measure, searches for a multiple cap and checks
/// the energy, denominator and span bounds; for a two-arc domain also
/// compares with the FEM value of `σ₂M`.
pub fn verify_sigma2_strict(target: &Sigma2Target, opts: &Sigma2Options) -> Result<(CapSearch, Sigma2Report)> {
    let (name, raw, fem) = match target {
        Sigma2Target::Domain(d) => {
            let mu = pullback_domain(d, opts.measure_nodes)?;
            let sp = steklov_spectrum(d, opts.h, 4)?;
            (d.id.clone(), mu, Some((sp.sigma(2), sp.error(2))))
        }
        Sigma2Target::Measure { name, measure } => (name.clone(), measure.clone(), None),
    };
    if raw.is_empty() {
        return Err(Error::Input("empty measure".into()));
    }
    let mu = normalize_measure(&raw)?;
    let search = find_multiple_cap(&mu, &opts.search)?;
    let report = verify_with_search(&name, &mu, &search, fem, opts.span_directions)?;
    Ok((search, report))
}

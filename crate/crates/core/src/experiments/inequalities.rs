use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::SteklovSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `σ₁M ≤ 2π`
    Weinstock,
    /// `σ_mσ_nM² ≤ (m+n−1)²π²` (odd `m+n`) or `(m+n)²π²` (even)
    Product,
    /// `σ_nM ≤ 2πn`
    Linear,
    /// `σ_nσ_{n+1}M² ≤ 4π²n²`
    Consecutive,
    /// `σ_n√Area < n√π`
    Isoareal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub kind: InequalityKind,
    pub m: usize,
    pub n: usize,
    pub sigma_m: f64,
    pub sigma_n: f64,
    pub mass: f64,
    pub quantity: f64,
    pub bound: f64,
    pub slack: f64,
    /// `slack / bound`
    pub relative_slack: f64,
    /// Propagated extrapolation error of `quantity`.
    pub error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub domain_id: String,
    pub mass: f64,
    pub area: f64,
    pub error_factor: f64,
    pub rows: Vec<InequalityRow>,
}

impl InequalityReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn rows_of(&self, kind: InequalityKind) -> impl Iterator<Item = &InequalityRow> {
        self.rows.iter().filter(move |r| r.kind == kind)
    }
}

/// Checks every bound for `1 ≤ m ≤ n ≤ max_n`. The consecutive-product bound
/// is evaluated for those `n` whose `σ_{n+1}` is in the spectrum.
pub fn check_inequalities(
    spectrum: &SteklovSpectrum,
    mass: f64,
    area: f64,
    max_n: usize,
) -> Result<InequalityReport> {
    check_with_factor(spectrum, mass, area, max_n, 3.0)
}

/// As [`check_inequalities`], passing a row when `slack ≥ −factor·error`.
pub fn check_with_factor(
    spectrum: &SteklovSpectrum,
    mass: f64,
    area: f64,
    max_n: usize,
    factor: f64,
) -> Result<InequalityReport> {
    if max_n == 0 || spectrum.count() < max_n + 1 {
        return Err(Error::Input(format!(
            "max_n = {max_n} needs {} eigenvalues, spectrum has {}",
            max_n + 1,
            spectrum.count()
        )));
    }
    if !(mass > 0.0 && area > 0.0) {
        return Err(Error::Input(format!("mass {mass} and area {area} must be positive")));
    }
    let s = |k: usize| spectrum.sigma(k);
    let e = |k: usize| spectrum.error(k);
    let mut rows = Vec::new();
    let mut push = |kind, m, n, quantity: f64, bound: f64, error: f64| {
        let slack = bound - quantity;
        rows.push(InequalityRow {
            kind,
            m,
            n,
            sigma_m: s(m),
            sigma_n: s(n),
            mass,
            quantity,
            bound,
            slack,
            relative_slack: slack / bound,
            error,
            pass: slack >= -factor * error,
        });
    };
    push(InequalityKind::Weinstock, 1, 1, s(1) * mass, 2.0 * PI, e(1) * mass);
    for m in 1..=max_n {
        for n in m..=max_n {
            let k = (m + n) as f64;
            let bound = if (m + n) % 2 == 1 { (k - 1.0).powi(2) } else { k * k } * PI * PI;
            let err = mass * mass * (s(m) * e(n) + s(n) * e(m));
            push(InequalityKind::Product, m, n, s(m) * s(n) * mass * mass, bound, err);
        }
    }
    for n in 1..=max_n {
        push(InequalityKind::Linear, n, n, s(n) * mass, 2.0 * PI * n as f64, e(n) * mass);
    }
    for n in (1..=max_n).filter(|n| n + 1 < spectrum.count()) {
        let q = s(n) * s(n + 1) * mass * mass;
        let err = mass * mass * (s(n) * e(n + 1) + s(n + 1) * e(n));
        let bound = 4.0 * PI * PI * (n * n) as f64;
        push(InequalityKind::Consecutive, n, n + 1, q, bound, err);
    }
    let root = area.sqrt();
    for n in 2..=max_n {
        push(
            InequalityKind::Isoareal,
            n,
            n,
            s(n) * root,
            n as f64 * PI.sqrt(),
            e(n) * root,
        );
    }
    Ok(InequalityReport {
        domain_id: spectrum.domain_id.clone(),
        mass,
        area,
        error_factor: factor,
        rows,
    })
}

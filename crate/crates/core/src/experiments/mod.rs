//! Numerical experiments built on the solvers: inequality checks, ε-sweeps
//! over the domain families, the search for a multiple cap and the strict
//! σ₂ bound, plus report files.

mod capsearch;
mod inequalities;
mod report;
mod sigma2;
mod sweeps;

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::caps::normalize_measure;
use crate::conformal::pullback_domain;
use crate::error::{Error, Result};
use crate::geometry::{make_double_disk, make_dumbbell, make_necklace, PlanarDomain};
use crate::measure::CircleMeasure;

pub use capsearch::{
    cap_grid_stats, find_multiple_cap, limit_laws, loop_winding, map_of, CapCertificate, CapGridStats, CapSearch,
    LimitReport, SearchOptions,
};
pub use inequalities::{check_inequalities, check_with_factor, InequalityKind, InequalityReport, InequalityRow};
pub use report::{emit_report, param_hash, Report, ReportFormat};
pub use sigma2::{verify_sigma2_strict, verify_with_search, DirectionSample, Sigma2Options, Sigma2Report, Sigma2Target};
pub use sweeps::{
    sloshing_cuts, sweep_collapse, sweep_sharpness, sweep_sloshing, test_function_quotient, CellFailure,
    CollapseReport, CollapseRow, SharpnessReport, SharpnessRow, SloshingReport, SloshingRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    DoubleDisk,
    Necklace,
    Dumbbell,
}

impl FamilyKind {
    /// Domain of the family with `n` components.
    pub fn build(self, n: usize, eps: f64) -> Result<PlanarDomain> {
        match self {
            FamilyKind::DoubleDisk => make_double_disk(eps),
            FamilyKind::Necklace => make_necklace(n, eps),
            FamilyKind::Dumbbell => make_dumbbell(eps),
        }
    }

    /// Family whose ε → 0 limit is `n` disks.
    pub fn for_sharpness(n: usize) -> Self {
        if n <= 2 {
            FamilyKind::DoubleDisk
        } else {
            FamilyKind::Necklace
        }
    }
}

/// Parameters shared by every experiment. Deserializes from a flat
/// `key = value` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub family: FamilyKind,
    pub n: usize,
    pub eps: Vec<f64>,
    pub h: f64,
    pub grading: f64,
    /// Eigenvalues per solve, `σ₀` included.
    pub count: usize,
    pub cap_grid_l: usize,
    pub cap_grid_p: usize,
    /// Atoms per circle measure.
    pub measure_nodes: usize,
    /// Target `gap/trace` of the cap search.
    pub gap_tolerance: f64,
    /// Multiple of the error estimate tolerated by inequality checks.
    pub error_factor: f64,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            id: "experiment".into(),
            family: FamilyKind::DoubleDisk,
            n: 2,
            eps: vec![0.1, 0.05, 0.025],
            h: 0.05,
            grading: crate::mesher::DEFAULT_GRADING,
            count: 6,
            cap_grid_l: 40,
            cap_grid_p: 40,
            measure_nodes: 1024,
            gap_tolerance: 1e-6,
            error_factor: 3.0,
            output_dir: PathBuf::from("out"),
            seed: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(msg));
        if self.eps.is_empty() {
            return bad("eps grid is empty".into());
        }
        if let Some(e) = self.eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return bad(format!("eps value {e} is not positive"));
        }
        if self.cap_grid_l < 2 || self.cap_grid_p < 3 {
            return bad(format!("cap grid {}×{} is too coarse", self.cap_grid_l, self.cap_grid_p));
        }
        for (name, v) in [
            ("h", self.h),
            ("gap_tolerance", self.gap_tolerance),
            ("error_factor", self.error_factor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.grading > 0.0 && self.grading <= 1.0) {
            return bad(format!("grading {} outside (0, 1]", self.grading));
        }
        if self.measure_nodes < 16 || self.count < 2 || self.n == 0 {
            return bad("measure_nodes, count and n are too small".into());
        }
        Ok(())
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            grid_l: self.cap_grid_l,
            grid_p: self.cap_grid_p,
            gap_tolerance: self.gap_tolerance,
            seed: self.seed,
            ..SearchOptions::default()
        }
    }
}

/// A normalized measure of the test battery together with the domain it
/// was pulled back from, if any.
#[derive(Debug, Clone)]
pub struct TestMeasure {
    pub name: String,
    pub measure: CircleMeasure,
    pub domain: Option<PlanarDomain>,
}

type Density = fn(f64) -> f64;

const SYNTHETIC: [(&str, Density); 5] = [
    ("cos2", |t| 1.0 + 0.3 * (2.0 * t).cos()),
    ("cos1", |t| 1.0 + 0.5 * t.cos()),
    ("sin2_cos3", |t| 1.0 + 0.3 * (2.0 * t).sin() + 0.2 * (3.0 * t).cos()),
    ("exp_cos", |t| (0.8 * t.cos()).exp() + 0.2 * (2.0 * t).sin()),
    ("cos2_cos5", |t| 1.0 + 0.4 * (2.0 * t).cos() + 0.3 * (5.0 * t).cos()),
];

pub const PULLBACK_EPS: [f64; 3] = [0.1, 0.05, 0.025];

/// Five smooth densities and the pullbacks of three double disks, each
/// centered and rotation-normalized.
pub fn test_battery(nodes: usize) -> Result<Vec<TestMeasure>> {
    let mut out = Vec::new();
    for (name, rho) in SYNTHETIC {
        let mu = CircleMeasure::from_density(nodes, rho)?.with_provenance(format!("density {name}"));
        out.push(TestMeasure {
            name: name.to_string(),
            measure: normalize_measure(&mu)?,
            domain: None,
        });
    }
    for eps in PULLBACK_EPS {
        let d = make_double_disk(eps)?;
        let mu = pullback_domain(&d, nodes)?;
        out.push(TestMeasure {
            name: d.id.clone(),
            measure: normalize_measure(&mu)?,
            domain: Some(d),
        });
    }
    Ok(out)
}

/// Synthetic density by battery name, or `uniform`.
pub fn synthetic_density(name: &str) -> Option<Density> {
    if name == "uniform" {
        return Some(|_| 1.0);
    }
    SYNTHETIC.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

pub fn synthetic_names() -> Vec<&'static str> {
    SYNTHETIC.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_grid_and_bad_tolerances_rejected() {
        let mut c = ExperimentConfig {
            eps: vec![],
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(Error::Input(_))));
        c.eps = vec![0.1];
        c.gap_tolerance = 0.0;
        assert!(c.validate().is_err());
        c.gap_tolerance = 1e-6;
        c.grading = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn battery_is_normalized() {
        for tm in test_battery(512).unwrap() {
            let mu = &tm.measure;
            assert!(mu.center_of_mass().norm() < 1e-10 * mu.mass(), "{}", tm.name);
            let f = mu.quad_form().anisotropy();
            assert!(f.im.abs() < 1e-10 * mu.mass() && f.re > 0.0, "{} {f}", tm.name);
        }
    }
}

//! `steklov`: command-line front end for the experiments in `steklov-core`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use steklov_core::caps::normalize_measure;
use steklov_core::conformal::pullback_domain;
use steklov_core::experiments::{
    check_with_factor, emit_report, find_multiple_cap, param_hash, sweep_collapse, sweep_sharpness,
    synthetic_density, synthetic_names, verify_with_search, ExperimentConfig, FamilyKind, Report, ReportFormat,
    SloshingReport,
};
use steklov_core::fem::{mixed_spectrum, write_spectrum_csv, SolveOptions};
use steklov_core::geometry::half_disk;
use steklov_core::{CircleMeasure, Error, MixedDomain, PlanarDomain};

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "Steklov eigenvalue experiments on planar domains and circle measures")]
struct Cli {
    /// `key = value` file with experiment settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Fixes the phase of the cap-search grid.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment id, used in output paths.
    #[arg(long, global = true)]
    id: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct MeshArgs {
    /// Comma-separated eps grid.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Coarse mesh size; the solve also runs at h/2.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    grading: Option<f64>,
    /// Eigenvalues per solve, including sigma_0.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Synthetic density by name (`uniform`, `cos2`, `cos1`, `sin2_cos3`, `exp_cos`, `cos2_cos5`).
    #[arg(long, conflicts_with_all = ["measure_file", "geometry", "double_disk"])]
    measure: Option<String>,
    /// Measure CSV (`theta, weight[, cell_start, cell_width]`).
    #[arg(long)]
    measure_file: Option<PathBuf>,
    /// Two-arc domain JSON to pull back.
    #[arg(long)]
    geometry: Option<PathBuf>,
    /// Pull back the double disk with this eps.
    #[arg(long)]
    double_disk: Option<f64>,
    /// Atoms of the discretized measure.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    grid_l: Option<usize>,
    #[arg(long)]
    grid_p: Option<usize>,
    /// Target gap/trace of the rearranged measure.
    #[arg(long)]
    gap_tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steklov spectrum of one domain and the eigenvalue inequalities.
    Solve {
        /// `disk`, `double-disk`, `necklace`, `dumbbell` or `half-disk`.
        #[arg(long, default_value = "double-disk")]
        domain: String,
        /// Domain JSON instead of a named family.
        #[arg(long, conflicts_with = "domain")]
        geometry: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// Largest index in the inequality table.
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// sigma_n M and sigma_n sigma_{n+1} M^2 along an eps grid.
    Sharpness {
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Sloshing comparison for the pieces of the cut domain.
    Sloshing {
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Low eigenvalues of dumbbells with a thinning passage.
    Collapse {
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Search for a cap whose rearranged measure is multiple.
    Capsearch(MeasureArgs),
    /// Check the ingredients of the strict sigma_2 bound.
    Sigma2 {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, default_value_t = 64)]
        span_directions: usize,
        /// Mesh size of the FEM cross-check for domains.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Render stored JSON reports as csv, svg or md.
    Report {
        /// `report.json` files written by the other subcommands.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "md")]
        format: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Sharpness { .. } => "sharpness",
            Command::Sloshing { .. } => "sloshing",
            Command::Collapse { .. } => "collapse",
            Command::Capsearch(_) => "capsearch",
            Command::Sigma2 { .. } => "sigma2",
            Command::Report { .. } => "report",
        }
    }
}

/// What a finished run found.
enum Verdict {
    Pass,
    /// An inequality or assertion failed beyond error bars.
    Violation(String),
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(i) = &cli.id {
        cfg.id = i.clone();
    }
    Ok(cfg)
}

impl MeshArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(e) = &self.eps {
            cfg.eps = e.clone();
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if let Some(g) = self.grading {
            cfg.grading = g;
        }
        if let Some(c) = self.count {
            cfg.count = c;
        }
    }
}

fn solve_options(cfg: &ExperimentConfig) -> SolveOptions {
    SolveOptions {
        grading: cfg.grading,
        ..SolveOptions::new(cfg.h, cfg.count)
    }
}

impl MeasureArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(n) = self.nodes {
            cfg.measure_nodes = n;
        }
        if let Some(l) = self.grid_l {
            cfg.cap_grid_l = l;
        }
        if let Some(p) = self.grid_p {
            cfg.cap_grid_p = p;
        }
        if let Some(t) = self.gap_tolerance {
            cfg.gap_tolerance = t;
        }
    }

    /// Name, raw measure and the two-arc domain it came from.
    fn load(&self, nodes: usize) -> anyhow::Result<(String, CircleMeasure, Option<PlanarDomain>)> {
        if let Some(name) = &self.measure {
            let rho = synthetic_density(name).ok_or_else(|| {
                Error::Input(format!("unknown density {name}; known: uniform, {}", synthetic_names().join(", ")))
            })?;
            return Ok((name.clone(), CircleMeasure::from_density(nodes, rho)?, None));
        }
        if let Some(p) = &self.measure_file {
            let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let mu = CircleMeasure::from_csv(std::io::BufReader::new(f))?;
            let name = p.file_stem().map_or("measure".into(), |s| s.to_string_lossy().into_owned());
            return Ok((name, mu, None));
        }
        let domain = match (&self.geometry, self.double_disk) {
            (Some(p), _) => PlanarDomain::from_json(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
            (None, Some(eps)) => FamilyKind::DoubleDisk.build(2, eps)?,
            (None, None) => bail!(Error::Input("give --measure, --measure-file, --geometry or --double-disk".into())),
        };
        let mu = pullback_domain(&domain, nodes)?;
        Ok((domain.id.clone(), mu, Some(domain)))
    }
}

fn named_domain(name: &str, n: usize, eps: f64) -> anyhow::Result<PlanarDomain> {
    Ok(match name {
        "disk" => steklov_core::geometry::disk(1.0)?,
        "half-disk" => half_disk()?,
        "double-disk" => FamilyKind::DoubleDisk.build(2, eps)?,
        "necklace" => FamilyKind::Necklace.build(n, eps)?,
        "dumbbell" => FamilyKind::Dumbbell.build(2, eps)?,
        other => bail!(Error::Input(format!("unknown domain {other}"))),
    })
}

/// Writes `report.json` and the CSV tables under `out/id/hash/`.
fn write_outputs(cfg: &ExperimentConfig, key: &impl Serialize, reports: &[Report]) -> anyhow::Result<PathBuf> {
    let hash = param_hash(key)?;
    let files = emit_report(reports, ReportFormat::Csv, &cfg.output_dir, &cfg.id, &hash)?;
    let dir = files
        .first()
        .and_then(|f| f.parent())
        .map(Path::to_path_buf)
        .context("no files written")?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(reports)?)?;
    Ok(dir)
}

fn run(cli: Cli) -> anyhow::Result<Verdict> {
    let mut cfg = load_config(&cli)?;
    // extra files written next to the reports
    let mut extras: Vec<(String, Vec<u8>)> = Vec::new();
    let (reports, key_extra, verdict) = match &cli.command {
        Command::Solve {
            domain,
            geometry,
            n,
            max_n,
            mesh,
        } => {
            mesh.apply(&mut cfg);
            if let Some(n) = n {
                cfg.n = *n;
            }
            cfg.count = cfg.count.max(max_n + 1);
            cfg.validate()?;
            let d = match geometry {
                Some(p) => PlanarDomain::from_json(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
                None => named_domain(domain, cfg.n, cfg.eps[0])?,
            };
            let sp = mixed_spectrum(&MixedDomain::all_steklov(d.clone()), solve_options(&cfg))?;
            let (m, a) = d.mass_and_area();
            let report = check_with_factor(&sp, m, a, *max_n, cfg.error_factor)?;
            println!("{}: M = {m:.6}, area = {a:.6}", d.id);
            for k in 0..sp.count() {
                println!("  sigma_{k} = {:.8} +- {:.1e}", sp.sigma(k), sp.error(k));
            }
            let failures: Vec<String> = report
                .failures()
                .map(|r| format!("{:?} m={} n={} slack {:.3e}", r.kind, r.m, r.n, r.slack))
                .collect();
            let verdict = if failures.is_empty() {
                Verdict::Pass
            } else {
                Verdict::Violation(failures.join("; "))
            };
            let mut spectrum_csv = Vec::new();
            write_spectrum_csv(&mut spectrum_csv, std::slice::from_ref(&sp))?;
            extras.push(("spectrum.csv".into(), spectrum_csv));
            (vec![Report::Inequalities(report)], serde_json::to_value(&d)?, verdict)
        }
        Command::Sharpness { n, mesh } | Command::Sloshing { n, mesh } => {
            mesh.apply(&mut cfg);
            if let Some(n) = n {
                cfg.n = *n;
            }
            cfg.validate()?;
            let r = sweep_sharpness(cfg.n, &cfg.eps, solve_options(&cfg))?;
            for f in &r.failures {
                eprintln!("eps {}: {} failed: {}", f.eps, f.stage, f.message);
            }
            for row in &r.rows {
                println!("eps {:<8} sigma_n M/(2 pi n) = {:.6}  sigma_n sigma_n+1 M^2/(4 pi^2 n^2) = {:.6}", row.eps, row.ratio8, row.ratio9);
            }
            let slosh = SloshingReport::from_sharpness(&r);
            let verdict = if !r.ratios_bounded {
                Verdict::Violation("a ratio exceeds 1 beyond error bars".into())
            } else if !slosh.all_hold {
                Verdict::Violation("sloshing comparison fails beyond error bars".into())
            } else if !r.failures.is_empty() {
                bail!(Error::Solver {
                    message: format!("{} sweep cells failed", r.failures.len()),
                    residual: f64::NAN,
                });
            } else {
                Verdict::Pass
            };
            let reports = if matches!(cli.command, Command::Sloshing { .. }) {
                vec![Report::Sloshing(slosh)]
            } else {
                vec![Report::Sharpness(r), Report::Sloshing(slosh)]
            };
            (reports, serde_json::Value::Null, verdict)
        }
        Command::Collapse { n, mesh } => {
            cfg.family = FamilyKind::Dumbbell;
            let defaults = ExperimentConfig::default();
            if mesh.eps.is_none() && cfg.eps == defaults.eps {
                cfg.eps = vec![0.3, 0.2, 0.15];
            }
            if mesh.h.is_none() && cfg.h == defaults.h {
                cfg.h = 0.1;
            }
            mesh.apply(&mut cfg);
            let n_max = n.unwrap_or(2);
            cfg.count = cfg.count.max(n_max + 1);
            cfg.validate()?;
            let r = sweep_collapse(n_max, &cfg.eps, solve_options(&cfg))?;
            for s in &r.skipped {
                eprintln!("eps {} skipped: {}", s.eps, s.message);
            }
            for row in &r.rows {
                println!("eps {:<8} sigma = {:.6?}  quotients = {:.6?}", row.eps, row.sigmas, row.quotients);
            }
            for note in &r.notes {
                println!("note: {note}");
            }
            let verdict = if r.rows.iter().all(|w| w.below_quotient.iter().all(|b| *b)) {
                Verdict::Pass
            } else {
                Verdict::Violation("an eigenvalue exceeds its test-function quotient".into())
            };
            (vec![Report::Collapse(r)], serde_json::Value::Null, verdict)
        }
        Command::Capsearch(m) => {
            m.apply(&mut cfg);
            cfg.validate()?;
            let (name, raw, _) = m.load(cfg.measure_nodes)?;
            let mu = normalize_measure(&raw)?;
            let s = find_multiple_cap(&mu, &cfg.search_options())?;
            match s.cap() {
                Some(cap) => println!(
                    "{name}: cap l = {:.10}, theta_p = {:.10}, gap/trace = {:.2e}, {} evaluations",
                    cap.l, cap.theta_p, s.relative_gap, s.evaluations
                ),
                None => println!("{name}: measure is already multiple (gap/trace {:.2e})", s.relative_gap),
            }
            (vec![Report::CapSearch { name: name.clone(), search: s }], serde_json::json!({"measure": name}), Verdict::Pass)
        }
        Command::Sigma2 {
            measure: m,
            span_directions,
            h,
        } => {
            m.apply(&mut cfg);
            if let Some(h) = h {
                cfg.h = *h;
            }
            cfg.validate()?;
            let (name, raw, domain) = m.load(cfg.measure_nodes)?;
            let mu = normalize_measure(&raw)?;
            let s = find_multiple_cap(&mu, &cfg.search_options())?;
            let fem = match &domain {
                Some(d) => {
                    let sp = mixed_spectrum(&MixedDomain::all_steklov(d.clone()), SolveOptions { count: 4, ..solve_options(&cfg) })?;
                    Some((sp.sigma(2), sp.error(2)))
                }
                None => None,
            };
            let r = verify_with_search(&name, &mu, &s, fem, *span_directions)?;
            println!(
                "{name}: route {}, energy margin {:.3e}, span max {:.6} <= 4 pi/M = {:.6}",
                r.route, r.min_energy_margin, r.span_max_rayleigh, r.span_bound
            );
            if let (Some(s2), Some(margin)) = (r.fem_sigma2, r.fem_margin) {
                println!("  FEM sigma_2 M = {:.6}, 4 pi - sigma_2 M = {margin:.4}", s2 * r.mass);
            }
            let verdict = if r.pass {
                Verdict::Pass
            } else {
                Verdict::Violation(format!(
                    "energy {} denominator {} span {} fem {:?}",
                    r.energy_ok, r.denominator_ok, r.span_ok, r.fem_ok
                ))
            };
            (
                vec![Report::CapSearch { name: name.clone(), search: s }, Report::Sigma2(r)],
                serde_json::json!({"measure": name, "span": span_directions}),
                verdict,
            )
        }
        Command::Report { inputs, format } => {
            let format: ReportFormat = format.parse()?;
            let mut reports = Vec::new();
            for p in inputs {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let mut batch: Vec<Report> =
                    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
                reports.append(&mut batch);
            }
            let hash = param_hash(&reports)?;
            for f in emit_report(&reports, format, &cfg.output_dir, &cfg.id, &hash)? {
                println!("{}", f.display());
            }
            return Ok(Verdict::Pass);
        }
    };
    // where results go is not part of what was computed
    let mut params = cfg.clone();
    params.output_dir = PathBuf::new();
    params.id = String::new();
    let key = serde_json::json!({
        "command": cli.command.name(),
        "config": params,
        "extra": key_extra,
    });
    let dir = write_outputs(&cfg, &key, &reports)?;
    for (name, bytes) in extras {
        fs::write(dir.join(name), bytes)?;
    }
    println!("wrote {}", dir.display());
    Ok(verdict)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::Solver { .. }
            | Error::SearchFailure(_)
            | Error::Mesh(_)
            | Error::FeatureResolution(_)
            | Error::Accuracy(_)
            | Error::Normalization(_),
        ) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

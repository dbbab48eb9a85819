use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::capsearch::{CapCertificate, CapSearch};
use super::inequalities::InequalityReport;
use super::sigma2::Sigma2Report;
use super::sweeps::{CollapseReport, SharpnessReport, SloshingReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Svg,
    Md,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "svg" => Ok(ReportFormat::Svg),
            "md" => Ok(ReportFormat::Md),
            _ => Err(Error::Input(format!("unknown report format {s}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum Report {
    Inequalities(InequalityReport),
    Sharpness(SharpnessReport),
    Sloshing(SloshingReport),
    Collapse(CollapseReport),
    CapSearch { name: String, search: CapSearch },
    Sigma2(Sigma2Report),
}

struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

struct Chart {
    name: String,
    title: String,
    x: Vec<f64>,
    series: Vec<(String, Vec<f64>)>,
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), num)
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}

impl Report {
    fn table(&self) -> Table {
        match self {
            Report::Inequalities(r) => Table {
                name: format!("inequalities_{}", slug(&r.domain_id)),
                header: ["kind", "m", "n", "sigma_m", "sigma_n", "mass", "quantity", "bound", "slack", "relative_slack", "err", "pass"]
                    .map(String::from)
                    .to_vec(),
                rows: r
                    .rows
                    .iter()
                    .map(|w| {
                        vec![
                            serde_json::to_value(w.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                            w.m.to_string(),
                            w.n.to_string(),
                            num(w.sigma_m),
                            num(w.sigma_n),
                            num(w.mass),
                            num(w.quantity),
                            num(w.bound),
                            num(w.slack),
                            num(w.relative_slack),
                            num(w.error),
                            w.pass.to_string(),
                        ]
                    })
                    .collect(),
            },
            Report::Sharpness(r) => Table {
                name: format!("sharpness_n{}", r.n),
                header: vec![
                    "eps".into(),
                    "h".into(),
                    format!("sigma{}", r.n),
                    format!("sigma{}", r.n + 1),
                    "mass".into(),
                    "ratio8".into(),
                    "ratio9".into(),
                    "err".into(),
                ],
                rows: r
                    .rows
                    .iter()
                    .map(|w| {
                        [w.eps, w.h, w.sigma_n, w.sigma_n1, w.mass, w.ratio8, w.ratio9, w.ratio8_err]
                            .map(num)
                            .to_vec()
                    })
                    .collect(),
            },
            Report::Sloshing(r) => Table {
                name: format!("sloshing_n{}", r.n),
                header: ["eps", "sigma1_neumann_min", "err_min", "sigma_n", "err_n", "pieces", "holds"]
                    .map(String::from)
                    .to_vec(),
                rows: r
                    .rows
                    .iter()
                    .map(|w| {
                        vec![
                            num(w.eps),
                            num(w.min),
                            num(w.min_error),
                            num(w.sigma_n),
                            num(w.sigma_n_error),
                            w.pieces.iter().map(|p| num(*p)).collect::<Vec<_>>().join(" "),
                            w.holds.to_string(),
                        ]
                    })
                    .collect(),
            },
            Report::Collapse(r) => {
                let mut header = vec!["eps".to_string(), "h".to_string()];
                for k in 1..=r.n_max {
                    header.extend([format!("sigma{k}"), format!("err{k}"), format!("quotient{k}")]);
                }
                Table {
                    name: format!("collapse_n{}", r.n_max),
                    header,
                    rows: r
                        .rows
                        .iter()
                        .map(|w| {
                            let mut row = vec![num(w.eps), num(w.h)];
                            for k in 0..r.n_max {
                                row.extend([num(w.sigmas[k]), num(w.errors[k]), num(w.quotients[k])]);
                            }
                            row
                        })
                        .collect(),
                }
            }
            Report::CapSearch { name, search } => {
                let (l, p) = match search.certificate {
                    CapCertificate::Cap { cap } => (Some(cap.l), Some(cap.theta_p)),
                    CapCertificate::MeasureIsMultiple => (None, None),
                };
                Table {
                    name: format!("capsearch_{}", slug(name)),
                    header: ["measure", "l", "theta_p", "gap", "relative_gap", "winding_large", "winding_small", "evaluations"]
                        .map(String::from)
                        .to_vec(),
                    rows: vec![vec![
                        name.clone(),
                        opt(l),
                        opt(p),
                        num(search.gap),
                        num(search.relative_gap),
                        opt(search.winding_large),
                        opt(search.winding_small),
                        search.evaluations.to_string(),
                    ]],
                }
            }
            Report::Sigma2(r) => Table {
                name: format!("sigma2_{}", slug(&r.name)),
                header: ["angle", "energy", "margin", "denominator", "form_value", "rayleigh"]
                    .map(String::from)
                    .to_vec(),
                rows: r
                    .directions
                    .iter()
                    .map(|d| [d.angle, d.energy, d.margin, d.denominator, d.form_value, d.rayleigh].map(num).to_vec())
                    .collect(),
            },
        }
    }

    fn chart(&self) -> Option<Chart> {
        match self {
            Report::Sharpness(r) => Some(Chart {
                name: format!("sharpness_n{}", r.n),
                title: format!("normalized σ{} against eps", r.n),
                x: r.rows.iter().map(|w| w.eps).collect(),
                series: vec![
                    ("ratio8".into(), r.rows.iter().map(|w| w.ratio8).collect()),
                    ("ratio9".into(), r.rows.iter().map(|w| w.ratio9).collect()),
                ],
            }),
            Report::Sloshing(r) => Some(Chart {
                name: format!("sloshing_n{}", r.n),
                title: "sloshing lower bound against eps".into(),
                x: r.rows.iter().map(|w| w.eps).collect(),
                series: vec![
                    ("sigma1_neumann_min".into(), r.rows.iter().map(|w| w.min).collect()),
                    ("sigma_n".into(), r.rows.iter().map(|w| w.sigma_n).collect()),
                ],
            }),
            Report::Collapse(r) => Some(Chart {
                name: format!("collapse_n{}", r.n_max),
                title: "collapsing eigenvalues against eps".into(),
                x: r.rows.iter().map(|w| w.eps).collect(),
                series: (0..r.n_max)
                    .map(|k| (format!("sigma{}", k + 1), r.rows.iter().map(|w| w.sigmas[k]).collect()))
                    .collect(),
            }),
            _ => None,
        }
    }

    fn summary(&self) -> String {
        match self {
            Report::Inequalities(r) => format!(
                "{}: {} of {} bounds hold (M = {}, area = {})",
                r.domain_id,
                r.rows.iter().filter(|w| w.pass).count(),
                r.rows.len(),
                r.mass,
                r.area
            ),
            Report::Sharpness(r) => format!(
                "n = {}: ratio8 increasing {}, limit {}; ratio9 increasing {}, limit {}; {} failed cells",
                r.n,
                r.ratio8_increasing,
                opt(r.ratio8_limit),
                r.ratio9_increasing,
                opt(r.ratio9_limit),
                r.failures.len()
            ),
            Report::Sloshing(r) => format!(
                "n = {}: lower bound holds everywhere {}, nondecreasing {}",
                r.n, r.all_hold, r.nondecreasing
            ),
            Report::Collapse(r) => format!(
                "sigma1 decreasing {}, slopes {:?}; {}",
                r.sigma1_decreasing,
                r.slopes,
                r.notes.join("; ")
            ),
            Report::CapSearch { name, search } => format!(
                "{name}: {:?}, relative gap {:e}, {} evaluations",
                search.certificate, search.relative_gap, search.evaluations
            ),
            Report::Sigma2(r) => format!(
                "{}: route {}, min energy margin {}, span max {} vs bound {}, FEM margin {}, pass {}",
                r.name,
                r.route,
                r.min_energy_margin,
                r.span_max_rayleigh,
                r.span_bound,
                opt(r.fem_margin),
                r.pass
            ),
        }
    }
}

/// First twelve hex digits of the SHA-256 of the serialized parameters.
pub fn param_hash<T: Serialize>(params: &T) -> Result<String> {
    let bytes = serde_json::to_vec(params)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(6).map(|b| format!("{b:02x}")).collect())
}

fn csv_bytes(t: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn markdown(reports: &[Report]) -> String {
    let mut s = String::from("# Results\n");
    for r in reports {
        let t = r.table();
        let _ = write!(s, "\n## {}\n\n{}\n\n", t.name, r.summary());
        let _ = writeln!(s, "| {} |", t.header.join(" | "));
        let _ = writeln!(s, "|{}", "---|".repeat(t.header.len()));
        for row in &t.rows {
            let _ = writeln!(s, "| {} |", row.join(" | "));
        }
    }
    s
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line chart with a logarithmic x axis.
fn svg(c: &Chart) -> String {
    let (w, h, pad) = (640.0, 400.0, 60.0);
    let lx: Vec<f64> = c.x.iter().map(|x| x.log10()).collect();
    let (x0, x1) = lx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let ys = c.series.iter().flat_map(|s| s.1.iter().copied());
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
    let ((x0, x1), (y0, y1)) = (span(x0, x1), span(y0, y1));
    let px = |v: f64| pad + (v - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |v: f64| h - pad - (v - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"{}\" y=\"20\" text-anchor=\"middle\">{}</text>", w / 2.0, c.title);
    let _ = writeln!(
        s,
        "<path d=\"M{pad} {pad} V{} H{}\" stroke=\"black\" fill=\"none\"/>",
        h - pad,
        w - pad
    );
    for (v, x) in c.x.iter().zip(&lx) {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{v}</text>",
            px(*x),
            h - pad + 18.0
        );
    }
    for k in 0..=4 {
        let v = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{v:.4}</text>", pad - 6.0, py(v) + 4.0);
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">eps (log scale)</text>", w / 2.0, h - 15.0);
    for (i, (name, ys)) in c.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = lx.iter().zip(ys).map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" stroke=\"{color}\" fill=\"none\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{name}</text>",
            w - pad - 120.0,
            pad + 16.0 * i as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `reports` under `dir/<experiment_id>/<param_hash>/`: one CSV per
/// report, one SVG per sweep, or a single `report.md`. Returns the paths
/// written.
pub fn emit_report(
    reports: &[Report],
    format: ReportFormat,
    dir: &Path,
    experiment_id: &str,
    params_hash: &str,
) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::Input("no reports to emit".into()));
    }
    let base = dir.join(slug(experiment_id)).join(params_hash);
    fs::create_dir_all(&base)?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Csv => {
            for r in reports {
                let t = r.table();
                let path = base.join(format!("{}.csv", t.name));
                fs::write(&path, csv_bytes(&t)?)?;
                written.push(path);
            }
        }
        ReportFormat::Svg => {
            for c in reports.iter().filter_map(Report::chart) {
                let path = base.join(format!("{}.svg", c.name));
                fs::write(&path, svg(&c))?;
                written.push(path);
            }
        }
        ReportFormat::Md => {
            let path = base.join("report.md");
            fs::write(&path, markdown(reports))?;
            written.push(path);
        }
    }
    Ok(written)
}

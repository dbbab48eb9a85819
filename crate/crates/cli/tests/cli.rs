use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn steklov(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files_under(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn named<'a>(files: &'a [PathBuf], name: &str) -> &'a PathBuf {
    files.iter().find(|f| f.file_name().unwrap() == name).unwrap_or_else(|| panic!("{name} in {files:?}"))
}

#[test]
fn solve_disk_writes_spectrum_and_inequalities() {
    let tmp = tempfile::tempdir().unwrap();
    let out = steklov(tmp.path(), &["solve", "--domain", "disk", "--h", "0.1", "--out", "o", "--id", "disk"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let files = files_under(&tmp.path().join("o/disk"));
    let spectrum = fs::read_to_string(named(&files, "spectrum.csv")).unwrap();
    assert!(spectrum.lines().count() >= 6);
    let reports: serde_json::Value = serde_json::from_str(&fs::read_to_string(named(&files, "report.json")).unwrap()).unwrap();
    assert_eq!(reports[0]["report"], "inequalities");
    assert!(files.iter().any(|f| f.to_string_lossy().ends_with("inequalities_disk_r1.csv")));
}

#[test]
fn config_file_and_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.toml"), "id = \"from_config\"\nh = 0.1\ncount = 4\nseed = 3\n").unwrap();
    let out = steklov(tmp.path(), &["--config", "run.toml", "solve", "--domain", "half-disk", "--count", "5", "--max-n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("sigma_4"), "{stdout}");
    assert!(tmp.path().join("out/from_config").is_dir());
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "mesh_size = 0.1\n").unwrap();
    let out = steklov(tmp.path(), &["--config", "bad.toml", "solve"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mesh_size"));
}

#[test]
fn usage_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(steklov(tmp.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(steklov(tmp.path(), &["capsearch", "--measure", "nope"]).status.code(), Some(1));
    assert_eq!(steklov(tmp.path(), &["sharpness", "--eps", "0.1,-1"]).status.code(), Some(1));
    assert_eq!(steklov(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn inequality_violation_beyond_error_bars_exits_with_two() {
    // the disk is the equality case of σ₁M ≤ 2π, so a tiny error factor
    // turns discretization error into a violation
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("strict.toml"), "error_factor = 1e-9\n").unwrap();
    let out = steklov(tmp.path(), &["--config", "strict.toml", "solve", "--domain", "disk", "--h", "0.1"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("violation"));
}

#[test]
fn unresolvable_passage_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = steklov(tmp.path(), &["solve", "--domain", "dumbbell", "--eps", "0.05", "--h", "0.1"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn capsearch_is_deterministic_under_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["capsearch", "--measure", "cos2", "--nodes", "512", "--grid-l", "12", "--grid-p", "12", "--seed", "11"];
    let a = steklov(tmp.path(), &[&args[..], &["--out", "a"]].concat());
    let b = steklov(tmp.path(), &[&args[..], &["--out", "b"]].concat());
    for r in [&a, &b] {
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let (fa, fb) = (files_under(&tmp.path().join("a")), files_under(&tmp.path().join("b")));
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.strip_prefix(tmp.path().join("a")).unwrap(), y.strip_prefix(tmp.path().join("b")).unwrap());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn sigma2_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = steklov(
        tmp.path(),
        &[
            "sigma2", "--measure", "cos1", "--nodes", "512", "--grid-l", "12", "--grid-p", "12",
            "--span-directions", "16", "--out", "runs", "--id", "s2",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let files = files_under(&tmp.path().join("runs/s2"));
    let json = named(&files, "report.json").to_string_lossy().into_owned();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v[1]["report"], "sigma2");
    assert_eq!(v[1]["pass"], true);

    for (fmt, ext) in [("md", "md"), ("csv", "csv")] {
        let out = steklov(tmp.path(), &["report", &json, "--format", fmt, "--out", "rendered"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let rendered = files_under(&tmp.path().join("rendered"));
        assert!(rendered.iter().any(|f| f.extension().unwrap() == ext));
    }
    let out = steklov(tmp.path(), &["report", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn collapse_sweep_with_svg_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = steklov(tmp.path(), &["collapse", "--eps", "0.3,0.2", "--out", "c"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let files = files_under(&tmp.path().join("c"));
    let csv = fs::read_to_string(named(&files, "collapse_n2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let json = named(&files, "report.json").to_string_lossy().into_owned();
    let out = steklov(tmp.path(), &["report", &json, "--format", "svg", "--out", "svg"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = files_under(&tmp.path().join("svg"));
    assert!(fs::read_to_string(&svg[0]).unwrap().starts_with("<svg"));
}

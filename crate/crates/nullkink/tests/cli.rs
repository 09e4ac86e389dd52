use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nullkink::config::{load, BisectConfig, EffectiveConfig, EvolveConfig, QnmConfig, SweepConfig};

fn nullkink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nullkink")).args(args).output().expect("binary runs")
}

/// Writes `body` as `config.toml` in `dir` and runs `cmd` on it with output into `dir/out`.
fn run_config(dir: &Path, cmd: &str, body: &str) -> (Output, PathBuf) {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, body).unwrap();
    let out = dir.join("out");
    let o = nullkink(&[cmd, "--config", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    (o, out)
}

/// Data rows of a CSV written by the tool, after the hash line and the header.
fn csv_rows(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let hash = lines.next().unwrap().to_string();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (hash, header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const ZERO_RUN: &str = r#"
[initial]
kind = "zero"

[evolution]
k = 33
u_end = 5.0
probes = [0.5]
output_stride = 0.5
"#;

#[test]
fn zero_run_keeps_the_half_kink_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let (o, out) = run_config(tmp.path(), "evolve", ZERO_RUN);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (hash, header, rows) = csv_rows(&out.join("series.csv"));
    assert!(hash.starts_with("# config_sha256: "));
    assert_eq!(header, ["u", "energy", "c1", "c1_dot", "c2", "x0", "f_at_0.5"]);
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let e: f64 = r[1].parse().unwrap();
        assert!((e - 2.0 / 3.0).abs() < 1e-14, "{e}");
    }
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["config_hash"].as_str().unwrap(), hash.trim_start_matches("# config_sha256: "));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let body = r#"
snapshots = [0.0, 1.0]

[initial]
kind = "family"
b = 1.0

[evolution]
k = 33
u_end = 2.0
output_stride = 0.25
"#;
    let (oa, da) = run_config(a.path(), "evolve", body);
    let (ob, db) = run_config(b.path(), "evolve", body);
    assert!(oa.status.success() && ob.status.success());
    for file in ["series.csv", "snapshots.csv"] {
        assert_eq!(fs::read(da.join(file)).unwrap(), fs::read(db.join(file)).unwrap(), "{file}");
    }
    let (_, _, rows) = csv_rows(&da.join("series.csv"));
    let u: f64 = rows.last().unwrap()[0].parse().unwrap();
    assert_eq!(u, 2.0);
}

#[test]
fn unknown_key_exits_1_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let body = ZERO_RUN.replace("k = 33", "k = 33\nstep_size = 0.1");
    let (o, _) = run_config(tmp.path(), "evolve", &body);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step_size"));
}

#[test]
fn invalid_value_exits_1_and_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let body = ZERO_RUN.replace("u_end = 5.0", "u_end = -1.0");
    let (o, _) = run_config(tmp.path(), "evolve", &body);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("evolution.u_end"));
}

#[test]
fn missing_config_exits_1() {
    let o = nullkink(&["evolve", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_dir_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = tmp.path().join("config.toml");
    fs::write(&cfg, ZERO_RUN).unwrap();
    let dir = blocker.join("out");
    let o = nullkink(&["evolve", "--config", cfg.to_str().unwrap(), "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn qnm_halfkink_with_scan() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"
problem = "halfkink"
methods = ["continued_fraction", "forward_recurrence"]

[scan]
re = [-0.5, -0.2]
im = [0.3, 0.6]
step = 0.05
"#;
    let (o, out) = run_config(tmp.path(), "qnm", body);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let q = json(&out.join("qnm.json"));
    let results = q["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    for r in results {
        let (re, im) = (r["re"].as_f64().unwrap(), r["im"].as_f64().unwrap());
        assert!((re + 0.364322).abs() < 1e-4 && (im - 0.476858).abs() < 1e-4, "{r}");
    }
    let (hash, header, rows) = csv_rows(&out.join("qnm_scan.csv"));
    assert!(hash.starts_with("# config_sha256: "));
    assert_eq!(header, ["re", "im", "abs_cf"]);
    assert_eq!(rows.len(), 7 * 7);
}

#[test]
fn qnm_vacuum_methods_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "problem = \"vacuum\"\nmethods = [\"continued_fraction\", \"bessel\"]\n";
    let (o, out) = run_config(tmp.path(), "qnm", body);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let q = json(&out.join("qnm.json"));
    let r = q["results"].as_array().unwrap();
    let d = (r[0]["re"].as_f64().unwrap() - r[1]["re"].as_f64().unwrap())
        .hypot(r[0]["im"].as_f64().unwrap() - r[1]["im"].as_f64().unwrap());
    assert!(d < 1e-6, "{d}");
}

#[test]
fn effective_separatrix_grows_like_sqrt_t() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "lambda0 = 10.0\nenergy = 2.0\nt_end = 1e5\nescape_lambda = 1e12\n";
    let (o, out) = run_config(tmp.path(), "effective", body);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, header, rows) = csv_rows(&out.join("effective.csv"));
    assert_eq!(header, ["t", "lambda", "lambda_dot", "E_eff"]);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap()))
        .filter(|(t, _)| *t >= 1e3)
        .collect();
    let (t0, l0) = pts[0];
    let (t1, l1) = *pts.last().unwrap();
    let slope = (l1 / l0).ln() / (t1 / t0).ln();
    assert!((slope - 0.5).abs() < 0.01, "{slope}");
}

#[test]
fn sweep_separates_the_two_endstates() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "b = [1.0, 20.0]\n\n[evolution]\nk = 129\nrel_tol = 1e-10\nabs_tol = 1e-12\n";
    let (o, out) = run_config(tmp.path(), "sweep", body);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, header, rows) = csv_rows(&out.join("sweep.csv"));
    assert_eq!(header[..2], ["b", "classification"]);
    let classes: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(classes, ["N0", "N1"]);
}

#[test]
fn bisect_narrows_a_coarse_bracket() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "bracket = [12.0, 13.0]\ntol = 0.1\n\n[evolution]\nk = 129\nrel_tol = 1e-10\nabs_tol = 1e-12\n";
    let (o, out) = run_config(tmp.path(), "bisect", body);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = json(&out.join("bisect.json"));
    let (lo, hi) = (b["outcome"]["b_lo"].as_f64().unwrap(), b["outcome"]["b_hi"].as_f64().unwrap());
    assert!(hi - lo <= 0.1 && lo <= 12.4583 && 12.4583 <= hi, "[{lo}, {hi}]");
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let ok = if name.starts_with("qnm") {
            load::<QnmConfig>(&path).is_ok()
        } else if name.starts_with("bisect") {
            load::<BisectConfig>(&path).is_ok()
        } else if name.starts_with("sweep") {
            load::<SweepConfig>(&path).is_ok()
        } else if name.starts_with("effective") {
            load::<EffectiveConfig>(&path).is_ok()
        } else {
            load::<EvolveConfig>(&path).is_ok()
        };
        assert!(ok, "{name} does not load");
        seen += 1;
    }
    assert!(seen >= 10);
}

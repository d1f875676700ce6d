use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use isoquad::{Discretization, Quadrilateral, Scheme, KAPPA_UNIFORM};

const BIN: &str = env!("CARGO_BIN_EXE_isoquad");
const SEARCH_HEADER: &str = "alpha,beta,gamma,delta,c,lambda1,lambda2,lambda3,lambda4,err,area,perimeter";

fn isoquad(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("ISOQUAD_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&read(p)).unwrap()
}

fn manifest_of(p: &Path) -> std::path::PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".manifest.json");
    s.into()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn eigs_unit_square_fd() {
    let o = isoquad(&["eigs", "0,1,1,1", "--scheme", "fd"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("eigenvalues 18.00 36.00 36.00 54.00"), "{}", stdout(&o));
}

#[test]
fn eigs_reference_domain_default_scheme() {
    let o = isoquad(&["eigs", "-0.2,1.1,1.2,1.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("eigenvalues 12.52 24.63 25.98 38.05"), "{}", stdout(&o));
}

#[test]
fn eigs_json_and_vertices_agree() {
    let a = isoquad(&["eigs", "--star", "-0.2,1.1,1.2,1.3", "--json"]);
    // the same domain scaled by 2 and shifted
    let b = isoquad(&["eigs", "--vertices", "1,1,3,1,0.6,3.2,3.4,3.6", "--json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    let a: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&b)).unwrap();
    for i in 0..4 {
        let la = a["eigenvalues"][i].as_f64().unwrap();
        let lb = b["eigenvalues"][i].as_f64().unwrap();
        assert!((la - 4.0 * lb).abs() < 1e-9 * la, "{la} {lb}");
    }
    assert!((b["area"].as_f64().unwrap() - 4.0 * a["area"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(a["xi"].as_array().unwrap().len(), 4);
}

#[test]
fn invalid_input_exits_2() {
    let o = isoquad(&["eigs", "1,1,0,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidQuadrilateral"), "{}", stderr(&o));

    let o = isoquad(&["eigs", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    let o = isoquad(&["eigs", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = isoquad(&["eigs", "0,1,1,1", "--kappa", "0.7"]);
    assert_eq!(o.status.code(), Some(2));
    let o = isoquad(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn search_writes_csv_and_manifest_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("search.csv");
    let verts = dir.path().join("vertices.csv");
    let args = [
        "search", "--l", "0.04", "--eps", "1e-3", "--out", out.to_str().unwrap(),
        "--vertices-out", verts.to_str().unwrap(),
    ];
    let o = isoquad(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = read(&out);
    assert_eq!(first.lines().next(), Some(SEARCH_HEADER));
    assert!(first.ends_with('\n') && !first.contains('\r'));
    let rows = data_rows(&first);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.len() == 12 && r[9] <= 1e-3));
    assert_eq!(read(&verts).lines().count(), rows.len() + 1);

    let manifest = json(&manifest_of(&out));
    assert_eq!(manifest["command"], "search");
    assert_eq!(manifest["config"]["search"]["l"].as_f64(), Some(0.04));
    assert_eq!(manifest["config"]["search"]["epsilon"].as_f64(), Some(1e-3));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    assert!(manifest["duration_seconds"].is_number());
    assert_eq!(manifest["diagnostics"]["stats"]["accepted"].as_u64(), Some(rows.len() as u64));

    let o = isoquad(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&out), first);

    // rerun from the manifest alone
    let again = dir.path().join("again.csv");
    let m = manifest_of(&out);
    let o = isoquad(&["search", "--config", m.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read(&again), first);

    // sequential evaluation gives the same bytes
    let seq = Command::new(BIN)
        .args(["search", "--l", "0.04", "--eps", "1e-3"])
        .env("ISOQUAD_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(seq.status.code(), Some(0));
    assert_eq!(stdout(&seq), first);
}

#[test]
fn search_rows_round_trip() {
    let o = isoquad(&["search", "--l", "0.04", "--eps", "1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    let disc = Discretization::new(Scheme::Sp, 1.0 / 3.0).unwrap();
    for r in data_rows(&stdout(&o)) {
        let q = Quadrilateral::new(r[0], r[1], r[2], r[3]);
        let l = disc.eigenvalues(&q).unwrap();
        for i in 0..4 {
            assert!((l[i] - r[5 + i]).abs() <= 1e-9 * r[5 + i].abs(), "{l:?} {r:?}");
        }
    }
}

#[test]
fn tiny_epsilon_keeps_only_the_reference() {
    // the reference itself always matches with zero error
    let o = isoquad(&["search", "--star", "-0.21,1.1,1.2,1.31", "--l", "0.02", "--eps", "1e-12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][..5], &[-0.21, 1.1, 1.2, 1.31, 1.0]);
    assert_eq!(rows[0][9], 0.0);
}

#[test]
fn search_rejects_bad_step() {
    let o = isoquad(&["search", "--h", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = isoquad(&["search", "--h", "0.2", "--l", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"scheme": "fd", "star": {"alpha": 0, "beta": 1, "gamma": 1, "delta": 1}}"#).unwrap();
    let c = cfg.to_str().unwrap();

    let o = isoquad(&["eigs", "--config", c]);
    assert!(stdout(&o).contains("eigenvalues 18.00 36.00 36.00 54.00"), "{}", stdout(&o));
    let o = isoquad(&["eigs", "--config", c, "--scheme", "sp", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["scheme"], "sp");
    assert_eq!(v["kappa"].as_f64(), Some(1.0 / 3.0));
    let o = isoquad(&["eigs", "--config", c, "--scheme", "sp", "--kappa", "uniform", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kappa"].as_f64(), Some(KAPPA_UNIFORM));

    fs::write(&cfg, r#"{"shceme": "fd"}"#).unwrap();
    let o = isoquad(&["eigs", "--config", c]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_reference_domain() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = isoquad(&["trace", "--T", "0.06", "--M", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = read(&out);
    assert_eq!(
        text.lines().next(),
        Some("t,alpha,beta,gamma,delta,c,residual_norm,det_jacobian,truncated")
    );
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 201);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    assert!(rows.iter().all(|r| r[8] == 0.0));
    let mid = &rows[100];
    assert_eq!(&mid[..6], &[0.0, -0.2, 1.1, 1.2, 1.3, 1.0]);
    let m = json(&manifest_of(&out));
    assert_eq!(m["command"], "trace");
    assert_eq!(m["diagnostics"]["rows"].as_u64(), Some(201));
}

#[test]
fn trace_fd_method_close_to_exact() {
    let exact = isoquad(&["trace", "--M", "50"]);
    let fd = isoquad(&["trace", "--M", "50", "--method", "fd"]);
    assert_eq!(fd.status.code(), Some(0), "{}", stderr(&fd));
    let a = data_rows(&stdout(&exact));
    let b = data_rows(&stdout(&fd));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        for k in 1..6 {
            assert!((x[k] - y[k]).abs() < 5e-3);
        }
    }
}

#[test]
fn trace_from_square_is_truncated() {
    let o = isoquad(&["trace", "--star", "0,1,1,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][8], 1.0);
    assert!(stderr(&o).contains("BifurcationDetected"), "{}", stderr(&o));
}

#[test]
fn trace_invalid_start_exits_2() {
    let o = isoquad(&["trace", "--star", "1,1,0,1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = isoquad(&["trace", "--M", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn deform_writes_steps_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("deform");
    let o = isoquad(&["deform", "--S", "3", "--T0", "0.06", "--M", "20", "--out", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = read(&d.join("summary.csv"));
    let mut lines = summary.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (t_col, rows_col, trunc_col) = (col("T"), col("rows"), col("truncated"));
    let mut count = 0;
    for (j, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let t: f64 = fields[t_col].parse().unwrap();
        let want = 0.06 / (1.0 + 2.0 * j as f64 / 3.0);
        assert!((t - want).abs() < 1e-15, "{t} {want}");
        let rows: usize = fields[rows_col].parse().unwrap();
        let step = read(&d.join(format!("step_{j:02}.csv")));
        assert!(step.starts_with("t,alpha,"));
        assert_eq!(step.lines().count(), rows + 1);
        assert_eq!(fields[trunc_col] == "1", rows < 41);
        count += 1;
    }
    assert_eq!(count, 3);
    // the undeformed domain is far from the square and traces in full
    assert_eq!(read(&d.join("step_00.csv")).lines().count(), 42);
    let m = json(&d.join("manifest.json"));
    assert_eq!(m["command"], "deform");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 4);
    assert_eq!(m["config"]["deform"]["S"].as_u64(), Some(3));
}

#[test]
fn reproduce_fast_suites_pass() {
    for suite in ["spectra", "square"] {
        let o = isoquad(&["reproduce", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
    let o = isoquad(&["reproduce", "--suite", "spectra", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
    let o = isoquad(&["reproduce", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reproduce_exit_code_reflects_failures() {
    let o = isoquad(&["reproduce", "--suite", "trace"]);
    let out = stdout(&o);
    let failed = out.lines().any(|l| l.ends_with("FAIL"));
    assert_eq!(o.status.code(), Some(if failed { 1 } else { 0 }), "{out}");
}

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn autoconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autoconv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    v
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_bundled_files() {
    let v = json(&autoconv(&["verify"]));
    assert_eq!(v["kind"], "verify");
    assert_eq!(v["data"]["passed"], true);
    let files = v["data"]["files"].as_array().unwrap();
    let sup = |name: &str| {
        files.iter().find(|f| f["file"] == name).unwrap()["sup"].as_f64().unwrap()
    };
    assert!((sup("step_n10.txt") - 1.56618).abs() < 5e-5);
    assert!((sup("step_n208.txt") - 1.50972).abs() < 5e-5);
    assert!((sup("step_n150_signed.txt") - 1.45810).abs() < 5e-5);
    let n20 = files.iter().find(|f| f["file"] == "step_n20_c.txt").unwrap();
    assert!((n20["c"].as_f64().unwrap() - 0.88922).abs() < 5e-5);
    assert_eq!(files.iter().filter(|f| f["signed"] == true).count(), 1);
    assert!(v["data"]["checks"].as_array().unwrap().len() >= 12);
}

#[test]
fn verify_flags_a_doctored_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("step_n10.txt");
    std::fs::write(&path, "1 1 1 1 1 1 1 1 1 1\n").unwrap();
    let out = autoconv(&["verify", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["data"]["passed"], false);
}

#[test]
fn verify_reports_parse_errors() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "# nothing\n").unwrap();
    let out = autoconv(&["verify", path_str(&empty)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no coefficients"));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2\n3 x4\n").unwrap();
    let out = autoconv(&["verify", path_str(&bad)]);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn single_cell_is_consistent() {
    // f = a on [-1/4, 1/4]: f*f peaks at x = 0 with value a^2/2, and
    // the integral is a/2, so sup at unit integral is 2.
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one.txt");
    std::fs::write(&one, "3\n").unwrap();
    let v = json(&autoconv(&["verify", path_str(&one)]));
    let f = &v["data"]["files"][0];
    assert_eq!(f["n"], 1);
    assert!((f["sup"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((f["integral"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!(v["data"]["checks"].as_array().unwrap().is_empty());
}

#[test]
fn bound_with_the_bundled_g() {
    let v = json(&autoconv(&["bound"]));
    let d = &v["data"];
    assert!(d["certified_bound"].as_f64().unwrap() >= 1.2748);
    assert!(d["gain"].as_f64().unwrap() > 0.0713);
    assert!(d["kernel_l2sq_numeric"].as_f64().unwrap() < 0.5747 / 0.138);
    assert!(!d["audit"].as_array().unwrap().is_empty());
    let (lo, hi) = (d["forbidden_interval"][0].as_f64().unwrap(), d["forbidden_interval"][1].as_f64().unwrap());
    assert!(lo >= d["z1_threshold"].as_f64().unwrap() && lo < hi);
}

#[test]
fn bound_reads_a_g_file() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    std::fs::write(&g, autoconv_core::assets::G_DELTA0138_N119).unwrap();
    let from_file = json(&autoconv(&["bound", "--g-file", path_str(&g)]));
    let bundled = json(&autoconv(&["bound"]));
    assert_eq!(from_file["data"]["certified_bound"], bundled["data"]["certified_bound"]);

    let missing = dir.path().join("missing.txt");
    let out = autoconv(&["bound", "--g-file", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.txt"));
}

#[test]
fn delta_is_validated() {
    for args in [["bound", "--delta", "0.3"], ["qpbound", "--delta", "0"]] {
        let out = autoconv(&args);
        assert_eq!(out.status.code(), Some(2));
        assert!(stderr(&out).contains("--delta"));
    }
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = autoconv(&["bound", "--report", path_str(p)]);
        assert!(out.status.success() && out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn qpbound_self_converges() {
    let coarse = json(&autoconv(&["qpbound", "--grid", "50"]));
    assert!(coarse["data"]["bound"].as_f64().unwrap() > 1.0);
    let b = |grid: &str| json(&autoconv(&["qpbound", "--grid", grid]))["data"]["bound"].as_f64().unwrap();
    assert!((b("100") - b("200")).abs() < 0.005);
    let out = autoconv(&["qpbound", "--grid", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analytic_builtins() {
    let f0 = json(&autoconv(&["analytic", "f0", "--grid", "400"]));
    assert!((f0["data"]["sup"].as_f64().unwrap() - PI / 2.0).abs() < 1e-4);
    assert_eq!(f0["data"]["symmetric"], false);
    let c = json(&autoconv(&["analytic", "counterexample"]));
    assert!((c["data"]["sup"].as_f64().unwrap() - 1.52799).abs() < 2e-3);
    assert!(!autoconv(&["analytic", "nonexistent-file"]).status.success());
}

#[test]
fn analytic_piece_file_and_csv() {
    let dir = TempDir::new().unwrap();
    let pieces = dir.path().join("f0.txt");
    std::fs::write(&pieces, "# f0 as a tuple\n(-0.25, 0.25, 1.0, -0.5, 0.5)\n").unwrap();
    let csv = dir.path().join("f0.csv");
    let v = json(&autoconv(&["analytic", path_str(&pieces), "--grid", "100", "--csv", path_str(&csv)]));
    assert!((v["data"]["sup"].as_f64().unwrap() - PI / 2.0).abs() < 1e-4);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    for &(x, y) in &rows[1..50] {
        assert!((y - PI / 2.0).abs() < 1e-4, "x = {x}");
    }
}

#[test]
fn convolve_csv_is_sorted_and_covers_the_support() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("n208.csv");
    let v = json(&autoconv(&["convolve", "step_n208.txt", "--csv", path_str(&csv)]));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,value"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2 * 208 + 1);
    assert_eq!(v["data"]["nodes"], rows.len());
    assert!(rows.windows(2).all(|w| w[1].0 > w[0].0));
    assert!((rows[0].0 + 0.5).abs() < 1e-12 && (rows[rows.len() - 1].0 - 0.5).abs() < 1e-12);
    let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    assert!((max - v["data"]["sup"].as_f64().unwrap()).abs() <= 1e-14 * max);

    // Without --csv the table goes to stdout.
    let out = autoconv(&["convolve", "step_n10.txt"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("x,value\n-0.5,0.0\n"));
}

#[test]
fn improve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let (report, csv) = (dir.path().join(format!("{name}.json")), dir.path().join(format!("{name}.csv")));
        let out = autoconv(&[
            "improve", "--n", "16", "--restarts", "3", "--seed", "5", "--max-iter", "40",
            "--report", path_str(&report), "--csv", path_str(&csv),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        (std::fs::read(report).unwrap(), std::fs::read_to_string(csv).unwrap())
    };
    let (a, trace) = run("a");
    let (b, _) = run("b");
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["data"]["final_sups"].as_array().unwrap().len(), 3);
    assert_eq!(v["data"]["coefficients"].as_array().unwrap().len(), 16);
    let sups: Vec<f64> = trace.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(sups.windows(2).all(|w| w[1] <= w[0]));
    assert!((sups.last().unwrap() - v["data"]["best_sup"].as_f64().unwrap()).abs() < 1e-14);
}

#[test]
fn improve_from_a_file() {
    let v = json(&autoconv(&["improve", "step_n10.txt", "--max-iter", "20"]));
    assert!(v["data"]["best_sup"].as_f64().unwrap() <= v["data"]["initial_sup"].as_f64().unwrap());
    assert_eq!(v["data"]["seed"], Value::Null);

    let signed = json(&autoconv(&["improve", "step_n10.txt", "--signed", "--max-iter", "3"]));
    assert_eq!(signed["data"]["signed"], true);

    let out = autoconv(&["improve", "--signed", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = autoconv(&["improve", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

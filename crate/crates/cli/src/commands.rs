//! One function per subcommand. Each returns whether every check it ran passed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use autoconv_core::analytic::PieceSet;
use autoconv_core::lowerbound::{self, quadratic_min_bound, BoundReport, CertificateParams, QuadraticBound};
use autoconv_core::search::{self, SearchOptions, SearchTrace, StepKind};
use autoconv_core::stepfn::StepFunction;
use autoconv_core::{assets, coeffs, manifest, report};
use serde::Serialize;

use crate::Output;

fn emit<T: Serialize>(kind: &str, payload: &T, out: &Output) -> Result<()> {
    let text = report::to_string(kind, payload);
    match &out.report {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// A file on disk, or else a bundled asset of that name.
fn load_text(arg: &str) -> Result<(String, String)> {
    let path = Path::new(arg);
    let name = path.file_name().map_or(arg.to_string(), |n| n.to_string_lossy().into_owned());
    if path.exists() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        return Ok((name, text));
    }
    match assets::by_name(arg) {
        Some(text) => Ok((name, text.to_string())),
        None => bail!("{arg}: no such file or bundled asset"),
    }
}

fn load_step(arg: &str) -> Result<(String, StepFunction)> {
    let (name, text) = load_text(arg)?;
    let values = coeffs::parse(&text).with_context(|| format!("parsing {arg}"))?;
    let signed = values.iter().any(|&v| v < 0.0);
    let f = StepFunction::with_sign(values, signed).with_context(|| format!("loading {arg}"))?;
    Ok((name, f))
}

#[derive(Serialize)]
struct FileSummary {
    file: String,
    n: usize,
    signed: bool,
    coeff_sum: f64,
    sqrt_2n: f64,
    integral: f64,
    sup: f64,
    c: Option<f64>,
}

#[derive(Serialize)]
struct VerifyReport {
    files: Vec<FileSummary>,
    checks: Vec<manifest::Check>,
    passed: bool,
}

pub fn verify(paths: &[String], out: &Output) -> Result<bool> {
    let bundled: Vec<String>;
    let paths = if paths.is_empty() {
        bundled = assets::ALL
            .iter()
            .map(|(name, _)| name.to_string())
            .filter(|name| name.starts_with("step_"))
            .collect();
        &bundled[..]
    } else {
        paths
    };
    let expectations = manifest::parse(assets::EXPECTATIONS_MANIFEST)?;
    let mut files = Vec::new();
    let mut checks = Vec::new();
    for arg in paths {
        let (name, f) = load_step(arg)?;
        for e in expectations.iter().filter(|e| e.file == name) {
            let actual = manifest::quantity(&f, &e.quantity);
            checks.push(manifest::Check::new(e.clone(), actual));
        }
        files.push(FileSummary {
            file: name,
            n: f.n(),
            signed: f.has_negative(),
            coeff_sum: f.coeff_sum(),
            sqrt_2n: (2.0 * f.n() as f64).sqrt(),
            integral: f.integral(),
            sup: f.unit_sup(),
            c: f.c_constant().ok(),
        });
    }
    let passed = checks.iter().all(|c| c.pass);
    emit("verify", &VerifyReport { files, checks, passed }, out)?;
    Ok(passed)
}

#[derive(Serialize)]
struct BoundOutput {
    delta: f64,
    g_source: String,
    g_terms: usize,
    kernel_l2sq_numeric: f64,
    #[serde(flatten)]
    report: BoundReport,
}

pub fn bound(delta: f64, g_file: Option<&Path>, out: &Output) -> Result<bool> {
    let (source, g) = match g_file {
        Some(path) => (path.display().to_string(), coeffs::read(path)?),
        None => {
            if delta != 0.138 {
                bail!("the bundled G is for delta = 0.138; pass --g-file for delta = {delta}");
            }
            ("g_delta0138_n119.txt".to_string(), assets::coefficients(assets::G_DELTA0138_N119))
        }
    };
    let params = CertificateParams::new(delta, g)?;
    let r = lowerbound::certify(&params)?;
    let payload = BoundOutput {
        delta,
        g_source: source,
        g_terms: params.g_coeffs.len(),
        kernel_l2sq_numeric: params.kernel_l2sq_numeric(100_000).upper(),
        report: r,
    };
    emit("bound", &payload, out)?;
    Ok(true)
}

pub fn qpbound(delta: f64, grid: usize, out: &Output) -> Result<bool> {
    let q: QuadraticBound = quadratic_min_bound(delta, grid)?;
    emit("qpbound", &q, out)?;
    Ok(true)
}

pub struct Start {
    pub input: Option<String>,
    pub n: usize,
    pub seed: u64,
    pub restarts: usize,
    pub signed: bool,
}

#[derive(Serialize)]
struct ImproveReport {
    start: String,
    n: usize,
    seed: Option<u64>,
    restarts: usize,
    tol: f64,
    max_iter: usize,
    best_index: usize,
    final_sups: Vec<f64>,
    initial_sup: f64,
    best_sup: f64,
    iterations: usize,
    converged: bool,
    signed: bool,
    coefficients: Vec<f64>,
}

fn trace_csv(trace: &SearchTrace) -> String {
    let mut s = String::from("iteration,sup,lp_sum,t,kind\n");
    let _ = writeln!(s, "0,{:?},,,start", trace.initial_sup);
    for (i, step) in trace.iterations.iter().enumerate() {
        let lp = if step.lp_sum.is_finite() { format!("{:?}", step.lp_sum) } else { String::new() };
        let kind = match step.kind {
            StepKind::Mix => "mix",
            StepKind::Polish => "polish",
        };
        let _ = writeln!(s, "{},{:?},{lp},{:?},{kind}", i + 1, step.sup, step.t);
    }
    s
}

pub fn improve(start: &Start, opts: &SearchOptions, csv: Option<&Path>, out: &Output) -> Result<bool> {
    let (label, seed, trace, best_index, final_sups) = match &start.input {
        Some(arg) => {
            let (name, f) = load_step(arg)?;
            let f = if start.signed { StepFunction::signed(f.into_coeffs())? } else { f };
            let trace = search::iterate_with(&f, opts)?;
            let sup = trace.best_sup();
            (name, None, trace, 0, vec![sup])
        }
        None => {
            if start.signed {
                bail!("--signed needs an input file");
            }
            let r = search::restart_harness(start.n, start.restarts, start.seed, opts)?;
            ("random".to_string(), Some(start.seed), r.best, r.best_index, r.final_sups)
        }
    };
    if let Some(path) = csv {
        write(path, &trace_csv(&trace))?;
    }
    let payload = ImproveReport {
        start: label,
        n: trace.best.n(),
        seed,
        restarts: final_sups.len(),
        tol: opts.tol,
        max_iter: opts.max_iter,
        best_index,
        final_sups,
        initial_sup: trace.initial_sup,
        best_sup: trace.best_sup(),
        iterations: trace.iterations.len(),
        converged: trace.converged,
        signed: trace.best.is_signed(),
        coefficients: trace.best.coeffs().to_vec(),
    };
    emit("improve", &payload, out)?;
    Ok(true)
}

#[derive(Serialize)]
struct AnalyticReport {
    name: String,
    pieces: PieceSet,
    integral: f64,
    symmetric: bool,
    grid: usize,
    tol: f64,
    sup: f64,
    argmax: f64,
}

pub fn analytic(which: &str, grid: usize, tol: f64, csv: Option<&Path>, out: &Output) -> Result<bool> {
    let set = match which {
        "f0" | "counterexample" => PieceSet::builtin(which)?,
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            PieceSet::parse(&text).with_context(|| format!("parsing {path}"))?
        }
    };
    let est = set.sup_autoconv(grid, tol)?;
    if let Some(path) = csv {
        let mut s = String::from("x,value\n");
        for i in 0..=grid {
            let x = -0.5 + i as f64 / grid as f64;
            let _ = writeln!(s, "{x:?},{:?}", set.autoconv_at(x, tol)?);
        }
        write(path, &s)?;
    }
    let payload = AnalyticReport {
        name: which.to_string(),
        integral: set.integral(),
        symmetric: set.is_symmetric(),
        pieces: set,
        grid,
        tol,
        sup: est.sup,
        argmax: est.argmax,
    };
    emit("analytic", &payload, out)?;
    Ok(true)
}

#[derive(Serialize)]
struct ConvolveReport {
    file: String,
    n: usize,
    nodes: usize,
    sup: f64,
    unit_sup: f64,
    integral: f64,
    csv: Option<PathBuf>,
}

pub fn convolve(arg: &str, csv: Option<&Path>, out: &Output) -> Result<bool> {
    let (name, f) = load_step(arg)?;
    let g = f.autoconvolve();
    let mut s = String::from("x,value\n");
    for (x, v) in g.nodes() {
        let _ = writeln!(s, "{x:?},{v:?}");
    }
    let payload = ConvolveReport {
        file: name,
        n: f.n(),
        nodes: g.values.len() + 2,
        sup: g.sup_norm(),
        unit_sup: f.unit_sup(),
        integral: g.integral(),
        csv: csv.map(Path::to_path_buf),
    };
    match csv {
        Some(path) => {
            write(path, &s)?;
            emit("convolve", &payload, out)?;
        }
        None => {
            print!("{s}");
            if out.report.is_some() {
                emit("convolve", &payload, out)?;
            }
        }
    }
    Ok(true)
}

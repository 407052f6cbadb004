//! Subcommand bodies. Each returns whether every check passed.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use mindisc::analyzer::{analyze, CheckConfig, CheckKind, Slacks};
use mindisc::areas::{jacobian, NormSpec};
use mindisc::filling::{fill_with, FillOptions, MetricCircle};
use mindisc::fixtures::{run_fixture, FixtureKind};
use mindisc::plateau::ProblemSpec;
use mindisc::solution::{solve_spec, Solution};
use mindisc::target::TargetSpec;
use mindisc::{io, par, AreaDef, Error, IntrinsicDisc, Result, SCHEMA_VERSION};
use serde_json::json;

use crate::config::RunConfig;
use crate::{svg, AnalyzeArgs, AreasArgs, Command, FillArgs, FixturesArgs, SolveArgs};

const FILL_ETA: f64 = 0.1;

pub fn run(cfg: &RunConfig, cmd: &Command) -> Result<bool> {
    let started = Instant::now();
    let go = || match cmd {
        Command::Solve(a) => solve(cfg, a),
        Command::Analyze(a) => analyze_dir(cfg, a),
        Command::Fill(a) => fill(cfg, a),
        Command::Areas(a) => areas(a),
        Command::Fixtures(a) => fixtures(cfg, a),
    };
    let (pass, timings) = match cfg.threads {
        Some(n) => par::with_threads(n, go)?,
        None => go()?,
    };
    if let Some(dir) = &cfg.output {
        write_meta(dir, cfg, started, timings)?;
    }
    Ok(pass)
}

/// Timings and other run-dependent facts go to `meta.json`, apart from the
/// reproducible artifacts.
fn write_meta(dir: &Path, cfg: &RunConfig, started: Instant, timings: serde_json::Value) -> Result<()> {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let meta = json!({
        "schema_version": SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": cfg.subcommand,
        "threads": cfg.threads,
        "finished_unix": now,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
        "timings": timings,
    });
    io::write_json(&dir.join("meta.json"), &meta)
}

type Outcome = Result<(bool, serde_json::Value)>;

fn solve(cfg: &RunConfig, a: &SolveArgs) -> Outcome {
    let out = cfg.output.as_deref().expect("solve has an output directory");
    let mut spec: ProblemSpec = io::read_json_as(&a.problem)?;
    let o = &cfg.overrides;
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    if let Some(r) = o.rings {
        spec.rings = r;
    }
    if let Some(l) = o.lambda_e {
        spec.lambda_e = l;
    }
    if let Some(n) = o.max_iters {
        spec.max_iters = n;
    }
    if a.no_inner_variation {
        spec.inner_variation = false;
    }
    // the solution directory must be self-contained for `analyze`
    if let TargetSpec::Table { matrix_csv } = &mut spec.target {
        let src = a.problem.parent().unwrap_or(Path::new(".")).join(&*matrix_csv);
        let name = src
            .file_name()
            .ok_or_else(|| Error::Config(format!("table path '{matrix_csv}' has no file name")))?
            .to_owned();
        let dst = out.join(&name);
        if fs::canonicalize(&src).ok() != fs::canonicalize(&dst).ok() {
            fs::copy(&src, &dst).map_err(|e| Error::io(&src, e))?;
        }
        *matrix_csv = name.to_string_lossy().into_owned();
    }
    let t = Instant::now();
    let sol = solve_spec(&spec, Some(out))?;
    let seconds = t.elapsed().as_secs_f64();
    sol.write(out)?;
    if a.svg {
        io::write_text(&out.join("trace.svg"), &svg::trace(&sol.trace))?;
    }
    println!(
        "area {}  energy {}  iterations {}  converged {}",
        io::fmt_f64(sol.area()?),
        io::fmt_f64(sol.map.energy(None)?),
        sol.iterations,
        sol.converged
    );
    Ok((true, json!({ "solve_seconds": seconds })))
}

fn check_config(path: Option<&Path>, eta: Option<f64>, seed: Option<u64>) -> Result<CheckConfig> {
    let mut cc: CheckConfig = match path {
        Some(p) => io::read_json_as(p)?,
        None => CheckConfig::default(),
    };
    if let Some(eta) = eta {
        cc.slack = Slacks::uniform(eta);
    }
    if let Some(seed) = seed {
        cc.seed = seed;
    }
    cc.validate().map_err(|e| match (path, e) {
        (Some(p), Error::Config(m)) => Error::Config(format!("{}: {m}", p.display())),
        (_, e) => e,
    })?;
    Ok(cc)
}

fn analyze_dir(cfg: &RunConfig, a: &AnalyzeArgs) -> Outcome {
    let out = cfg.output.as_deref().expect("analyze has an output directory");
    let cc = check_config(a.config.as_deref(), cfg.overrides.eta, cfg.seed)?;
    let kinds = CheckKind::parse_list(&a.checks)?;
    let sol = Solution::read(&a.solution_dir)?;
    let t = Instant::now();
    let zd = IntrinsicDisc::from_map(&sol.map)?;
    let report = analyze(&sol.map, &zd, &cc, sol.mu(), &kinds)?;
    let seconds = t.elapsed().as_secs_f64();
    report.write(out)?;
    zd.write(out)?;
    if a.svg {
        svg::write_overlays(out, &sol.map, &zd, &cc)?;
    }
    for c in &report.checks {
        println!("{:<10} {:<10} ratio {}", c.name, status_name(c), io::fmt_f64(c.ratio));
    }
    Ok((report.all_pass(), json!({ "analyze_seconds": seconds })))
}

fn status_name(c: &mindisc::analyzer::CheckRecord) -> String {
    serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn parse_mu(s: &str) -> Result<AreaDef> {
    AreaDef::parse(s).ok_or_else(|| {
        let names: Vec<&str> = AreaDef::ALL.iter().map(|m| m.name()).collect();
        Error::Config(format!("unknown area definition '{s}' (expected one of {})", names.join(", ")))
    })
}

fn fill(cfg: &RunConfig, a: &FillArgs) -> Outcome {
    let out = cfg.output.as_deref().expect("fill has an output directory");
    let mu = parse_mu(&a.mu)?;
    let c = MetricCircle::read(&a.curve)?;
    let rings = cfg.overrides.rings.unwrap_or(c.len().div_ceil(6).max(2));
    let mut opts = FillOptions::default();
    if let Some(l) = cfg.overrides.lambda_e {
        opts.lambda_e = l;
    }
    let t = Instant::now();
    let r = fill_with(&c, mu, rings, opts)?;
    let seconds = t.elapsed().as_secs_f64();
    let report = r.report(mu, rings, c.len(), cfg.overrides.eta.unwrap_or(FILL_ETA));
    io::write_json(&out.join("fill_report.json"), &report)?;
    println!(
        "area {}  length {}  ratio {}  bound {}  {}",
        io::fmt_f64(report.area),
        io::fmt_f64(report.length),
        io::fmt_f64(report.isoperimetric_ratio),
        io::fmt_f64(report.bound),
        if report.pass { "pass" } else { "fail" }
    );
    Ok((report.pass, json!({ "fill_seconds": seconds })))
}

fn areas(a: &AreasArgs) -> Outcome {
    let spec: NormSpec = io::read_json_as(&a.norm)?;
    let norm = spec.build()?;
    let mus = if a.mu == "all" { AreaDef::STABLE.to_vec() } else { vec![parse_mu(&a.mu)?] };
    let mut rows = Vec::with_capacity(mus.len());
    for mu in mus {
        rows.push(vec![mu.name().to_string(), io::fmt_f64(jacobian(&norm, mu)?)]);
    }
    print!("{}", io::csv_string(&["kind", "jacobian"], &rows));
    Ok((true, serde_json::Value::Null))
}

fn fixtures(cfg: &RunConfig, a: &FixturesArgs) -> Outcome {
    let out = cfg.output.as_deref().expect("fixtures has an output directory");
    let kinds = match &a.only {
        Some(list) => list
            .split(',')
            .map(|s| {
                let s = s.trim();
                FixtureKind::parse(s).ok_or_else(|| Error::Config(format!("unknown fixture '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?,
        None => FixtureKind::ALL.to_vec(),
    };
    let mut rows = Vec::new();
    let mut timings = serde_json::Map::new();
    let mut all_pass = true;
    println!(
        "{:<15} {:>5} {:>12} {:>12} {:>9} {:>7}  failed",
        "fixture", "rings", "area", "expected", "rel_err", "checks"
    );
    for kind in kinds {
        let t = Instant::now();
        let run = run_fixture(kind, cfg.overrides.rings)?;
        timings.insert(kind.name().into(), json!(t.elapsed().as_secs_f64()));
        let dir: PathBuf = out.join(kind.name());
        run.write(&dir)?;
        if a.svg {
            svg::write_overlays(&dir, &run.solution.map, &run.zd, &kind.config())?;
            io::write_text(&dir.join("trace.svg"), &svg::trace(&run.solution.trace))?;
        }
        let checks = &run.report.checks;
        let passed = checks.iter().filter(|c| c.pass).count();
        let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        all_pass &= failed.is_empty();
        let rings = run.solution.problem.rings;
        println!(
            "{:<15} {:>5} {:>12.6} {:>12.6} {:>9.5} {:>7}  {}",
            kind.name(),
            rings,
            run.area,
            kind.expected_area(),
            run.area_error(),
            format!("{passed}/{}", checks.len()),
            if failed.is_empty() { "-".to_string() } else { failed.join(",") }
        );
        rows.push(vec![
            kind.name().to_string(),
            rings.to_string(),
            io::fmt_f64(run.area),
            io::fmt_f64(kind.expected_area()),
            io::fmt_f64(run.area_error()),
            passed.to_string(),
            checks.len().to_string(),
            failed.join(";"),
        ]);
    }
    let header = ["fixture", "rings", "area", "expected", "rel_err", "passed", "checks", "failed"];
    io::write_text(&out.join("fixtures.csv"), &io::csv_string(&header, &rows))?;
    Ok((all_pass, serde_json::Value::Object(timings)))
}

//! End-to-end acceptance: one line per criterion, printed straight to
//! stdout so that it shows even when the test passes.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use mindisc::analyzer::{analyze, CheckConfig, CheckKind, CheckRecord};
use mindisc::areas::{jacobian, q_estimate, sample_norms, NORM_SAMPLER_SEED};
use mindisc::filling::{fill, MetricCircle};
use mindisc::fixtures::{run_fixture, FixtureKind, FixtureRun};
use mindisc::intrinsic::compare_metric;
use mindisc::solution::solve_spec;
use mindisc::{io, par, AreaDef, IntrinsicDisc, MetricTarget, PolygonalNorm, Seminorm};
use serde_json::Value;

type Verdict = (bool, String);

fn say(n: usize, (pass, detail): &Verdict) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n}: {} | {detail}", if *pass { "PASS" } else { "FAIL" });
    let _ = out.flush();
}

fn check<'a>(run: &'a FixtureRun, kind: CheckKind) -> &'a CheckRecord {
    run.report.get(kind).expect("every check runs on fixtures")
}

fn f64s(v: &Value) -> Vec<f64> {
    v.as_array().map(|a| a.iter().filter_map(Value::as_f64).collect()).unwrap_or_default()
}

/// `area(B(z, r)) / (scale · r²)` for the first growth center of a report.
fn growth_ratios(run: &FixtureRun, center: usize, scale: f64) -> Vec<f64> {
    let c = &check(run, CheckKind::Growth).details["centers"][center];
    let (areas, radii) = (f64s(&c["areas"]), f64s(&c["radii"]));
    areas.iter().zip(&radii).map(|(a, r)| a / (scale * r * r)).collect()
}

fn fmt(xs: &[f64]) -> String {
    let v: Vec<String> = xs.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", v.join(", "))
}

fn criterion_1() -> Verdict {
    let cases = [
        ("sup", PolygonalNorm::sup_norm(), [PI / 4.0, 2.0 / PI, 1.0]),
        ("l1", PolygonalNorm::l1_norm(), [PI / 2.0, 4.0 / PI, 2.0]),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, norm, expected) in cases {
        let s = Seminorm::Polygonal(norm);
        let got: Vec<f64> = AreaDef::STABLE.iter().map(|&mu| jacobian(&s, mu).unwrap()).collect();
        for (g, e) in got.iter().zip(expected) {
            worst = worst.max((g - e).abs());
        }
        parts.push(format!("{name} {}", fmt(&got)));
    }
    (worst <= 1e-6, format!("{}; max error {worst:.2e}", parts.join(", ")))
}

fn criterion_2() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for mu in AreaDef::STABLE {
        let q = q_estimate(mu, 1000).unwrap();
        let exact = mu.q().unwrap();
        pass &= q.samples == 1000 && q.value >= exact - 1e-6;
        parts.push(format!("{} {:.6} (q {:.6})", mu.name(), q.value, exact));
    }
    let norms = sample_norms(1000, NORM_SAMPLER_SEED);
    let mut spread: f64 = 1.0;
    for n in &norms {
        let s = Seminorm::Polygonal(n.clone());
        let j: Vec<f64> = AreaDef::STABLE.iter().map(|&mu| jacobian(&s, mu).unwrap()).collect();
        let hi = j.iter().copied().fold(0.0, f64::max);
        let lo = j.iter().copied().fold(f64::INFINITY, f64::min);
        spread = spread.max(hi / lo);
    }
    pass &= spread <= 2.0;
    (pass, format!("{}; largest ratio between definitions {spread:.4}", parts.join(", ")))
}

fn criterion_3(flat: &FixtureRun) -> Verdict {
    let zd = &flat.zd;
    let points: Vec<Vec<f64>> = (0..zd.class_count()).map(|c| zd.ubar(c).to_vec()).collect();
    let distortion = compare_metric(zd, &MetricTarget::euclidean(2), &points).unwrap();
    let iso = check(flat, CheckKind::Iso);
    let by_kind = &iso.details["max_ratio_by_kind"];
    let iso_max = ["boundary", "face", "offset", "sphere"].iter().filter_map(|k| by_kind[k].as_f64()).fold(0.0, f64::max);
    let circle = by_kind["boundary"].as_f64().unwrap_or(0.0);
    let growth = growth_ratios(flat, 0, PI);
    let holder = check(flat, CheckKind::Holder).measured;
    let coarea = check(flat, CheckKind::Coarea).ratio;
    let cl = check(flat, CheckKind::Cl).ratio;
    let items = [
        (flat.area_error() <= 0.02, format!("area {:.5}", flat.area)),
        (distortion <= 0.05, format!("distortion {distortion:.4}")),
        (iso_max <= 1.05 && circle >= 0.9, format!("iso max {iso_max:.4}, circle {circle:.4}")),
        (!growth.is_empty() && growth.iter().all(|r| (0.8..=1.2).contains(r)), format!("growth {}", fmt(&growth))),
        ((0.9..=1.1).contains(&holder), format!("holder {holder:.4}")),
        ((coarea - 1.0).abs() <= 0.15, format!("coarea {coarea:.4}")),
        ((cl - 16.0 / 54.0).abs() <= 0.05, format!("cl {cl:.4}")),
    ];
    summarize(&items)
}

fn criterion_4(cone: &FixtureRun) -> Verdict {
    let (_, len) = cone.zd.boundary_cycle().unwrap();
    let growth = growth_ratios(cone, 0, 0.5 * PI);
    let holder = check(cone, CheckKind::Holder).measured;
    let rim = check(cone, CheckKind::Iso).details["max_ratio_by_kind"]["boundary"].as_f64().unwrap_or(0.0);
    let qc = check(cone, CheckKind::Qc).measured;
    let items = [
        ((len - PI).abs() <= 0.02 * PI, format!("rim length {len:.5}")),
        (!growth.is_empty() && growth.iter().all(|r| (r - 1.0).abs() <= 0.05), format!("apex growth {}", fmt(&growth))),
        ((0.4..=0.6).contains(&holder), format!("holder {holder:.4}")),
        ((rim - 1.0).abs() <= 0.1, format!("rim iso {rim:.4}")),
        (qc <= 1.1, format!("qc p95 {qc:.4}")),
    ];
    summarize(&items)
}

fn criterion_5(cd: &FixtureRun) -> Verdict {
    let zd = &cd.zd;
    let target = cd.solution.map.target();
    let n = cd.solution.map.mesh().vertex_count();
    // preimage of the collapsed ball, measured in the target
    let center = [0.0, 0.0];
    let inside: Vec<usize> = (0..n).filter(|&v| target.distance(cd.solution.map.image(v), &center) <= zd.tolerance()).collect();
    let class = zd.class_of(inside[0]);
    let mut members = zd.classes()[class].clone();
    members.sort_unstable();
    let others_single = (0..zd.class_count()).filter(|&c| c != class).all(|c| zd.classes()[c].len() == 1);
    let merged = members == inside && others_single;
    let g = &check(cd, CheckKind::Growth).details["centers"];
    let thick = g[0]["exponent"].as_f64().unwrap_or(0.0);
    let flat = g[1]["exponent"].as_f64().unwrap_or(0.0);
    let d = check(cd, CheckKind::Doubling);
    // ratio of μ(B(z, 2r)) to μ(B(z, r)) as r decreases
    let mut scales: Vec<(f64, f64)> = d.details["scales"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|e| Some((e["radius"].as_f64()?, e["ratio"].as_f64()?)))
        .collect();
    scales.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ratios: Vec<f64> = scales.iter().map(|s| s.1).collect();
    let increasing = ratios.len() >= 3 && ratios.windows(2).all(|w| w[1] > w[0]);
    let items = [
        (merged, format!("ball preimage {} vertices in one class, {} classes", inside.len(), zd.class_count())),
        ((0.8..=1.2).contains(&thick), format!("thick exponent {thick:.3}")),
        ((1.8..=2.2).contains(&flat), format!("flat exponent {flat:.3}")),
        (d.pass && increasing, format!("doubling {}", fmt(&ratios))),
    ];
    summarize(&items)
}

fn criterion_6(runs: &[&FixtureRun]) -> Verdict {
    let mut items = Vec::new();
    for run in runs {
        let v = check(run, CheckKind::Voronoi);
        let m = v.details["m"].as_f64().unwrap_or(f64::NAN);
        let mut ok = v.pass;
        let mut ns = Vec::new();
        for r in v.details["runs"].as_array().into_iter().flatten() {
            let get = |k: &str| r[k].as_f64().unwrap_or(f64::NAN);
            ok &= get("net_size") <= get("net_bound")
                && get("components") <= get("component_bound")
                && get("max_component_diameter") <= get("diameter_bound");
            ns.push(get("n") as usize);
        }
        ns.sort_unstable();
        ok &= ns == [2, 4, 8];
        items.push((ok, format!("{} n {ns:?} M {m:.4}", run.kind)));
    }
    summarize(&items)
}

fn criterion_7() -> Verdict {
    let circle = MetricCircle::euclidean_circle(18, 1.0).unwrap();
    let c = fill(&circle, AreaDef::BusemannHausdorff, 3).unwrap();
    let square = MetricCircle::sup_square(24, 1.0).unwrap();
    let s = fill(&square, AreaDef::HolmesThompson, 4).unwrap();
    let bound = |r: &mindisc::filling::FillResult| r.length * r.length / (2.0 * PI) * 1.1;
    let items = [
        ((c.area - PI).abs() <= 0.05 * PI && c.area <= bound(&c), format!("circle {:.5}", c.area)),
        ((s.area - 8.0 / PI).abs() <= 0.05 * 8.0 / PI && s.area <= bound(&s), format!("square {:.5}", s.area)),
    ];
    summarize(&items)
}

fn criterion_8(runs: &[&FixtureRun]) -> Verdict {
    let mut items = Vec::new();
    for run in runs {
        let mu = run.solution.mu();
        let q = mu.q().unwrap();
        let energy = run.solution.map.energy(None).unwrap();
        let ratio = run.area / (q * energy);
        let qc = check(run, CheckKind::Qc).measured;
        let lip = run.zd.lipschitz_excess();
        let ok = ratio >= 0.95 && qc <= SQRT_2 + 0.1 && lip <= 1e-9;
        items.push((ok, format!("{} area/(qE) {ratio:.4} qc p95 {qc:.4} lipschitz {lip:.1e}", run.kind)));
    }
    // determinism: reruns and thread counts give identical bytes
    let spec = FixtureKind::Flat.problem(8);
    let artifacts = |threads: usize| {
        par::with_threads(threads, || {
            let s = solve_spec(&spec, None).unwrap();
            let zd = IntrinsicDisc::from_map(&s.map).unwrap();
            let r = analyze(&s.map, &zd, &CheckConfig::default(), s.mu(), &CheckKind::ALL).unwrap();
            (io::to_json_string(&s.to_file().unwrap()).unwrap(), s.trace_csv(), io::to_json_string(&r).unwrap())
        })
    };
    let a = artifacts(4);
    let same = a == artifacts(4) && a == artifacts(1);
    items.push((same, format!("byte-identical reruns {same}")));
    summarize(&items)
}

fn summarize(items: &[(bool, String)]) -> Verdict {
    let pass = items.iter().all(|i| i.0);
    let text: Vec<String> = items.iter().map(|(ok, s)| if *ok { s.clone() } else { format!("{s} (fail)") }).collect();
    (pass, text.join("; "))
}

#[test]
fn acceptance() {
    let mut verdicts = Vec::new();
    let mut record = |n: usize, v: Verdict| {
        say(n, &v);
        verdicts.push((n, v.0));
    };
    record(1, criterion_1());
    record(2, criterion_2());
    let flat = run_fixture(FixtureKind::Flat, None).unwrap();
    record(3, criterion_3(&flat));
    let cone = run_fixture(FixtureKind::Cone, None).unwrap();
    record(4, criterion_4(&cone));
    let collapsed = run_fixture(FixtureKind::CollapsedDisc, None).unwrap();
    record(5, criterion_5(&collapsed));
    record(6, criterion_6(&[&flat, &cone]));
    record(7, criterion_7());
    let square = run_fixture(FixtureKind::SquareSup, None).unwrap();
    record(8, criterion_8(&[&flat, &cone, &collapsed, &square]));
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.1).map(|v| v.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

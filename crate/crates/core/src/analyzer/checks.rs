//! The individual checks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::geom::{triangle_disc_intersection_area, Vec2};
use crate::{par, Error, Result};

use super::{CheckKind, CheckRecord, Ctx, LevelSet};

/// A sampled discrete Jordan cycle and the region it bounds.
pub(crate) struct Cycle {
    kind: &'static str,
    length: f64,
    area: f64,
    /// Classes on (or just inside) the cycle.
    rim: Vec<usize>,
    /// Classes of the enclosed region.
    enclosed: Vec<usize>,
    label: Value,
}

pub(crate) struct Cycles {
    list: Vec<Cycle>,
    /// Level sets that were not single closed loops inside the disc.
    skipped: usize,
}

pub(crate) fn run(ctx: &Ctx<'_>, kind: CheckKind, cycles: Option<&Cycles>) -> Result<CheckRecord> {
    if ctx.is_degenerate() && !matches!(kind, CheckKind::Qc | CheckKind::Lipschitz | CheckKind::Cl) {
        return Ok(CheckRecord::degenerate(kind, "the intrinsic disc is a single point"));
    }
    match kind {
        CheckKind::Iso => Ok(isoperimetric(ctx, cycles.expect("cycles sampled for iso"))),
        CheckKind::Diam => Ok(diameters(ctx, cycles.expect("cycles sampled for diam"))),
        CheckKind::Growth => growth(ctx),
        CheckKind::Holder => holder(ctx),
        CheckKind::Cl => Ok(courant_lebesgue(ctx)),
        CheckKind::Voronoi => voronoi(ctx),
        CheckKind::Coarea => Ok(coarea(ctx)),
        CheckKind::Doubling => Ok(doubling(ctx)),
        CheckKind::Qc => Ok(qc(ctx)),
        CheckKind::Energy => Ok(energy(ctx)),
        CheckKind::Lipschitz => Ok(lipschitz(ctx)),
    }
}

/// Sphere centers: the class nearest the domain center, then seeded
/// random interior classes.
fn sample_centers(ctx: &Ctx<'_>) -> Vec<usize> {
    let mesh = ctx.map.mesh();
    let interior = mesh.interior_vertices();
    let mut out = vec![ctx.zd.class_of(ctx.nearest_vertex([0.0, 0.0]))];
    if interior.is_empty() {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    for _ in 0..100 * ctx.cfg.centers {
        if out.len() >= ctx.cfg.centers {
            break;
        }
        let c = ctx.zd.class_of(interior[rng.random_range(0..interior.len())]);
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

fn level_cycle(ctx: &Ctx<'_>, ls: LevelSet, kind: &'static str, label: Value) -> Option<Cycle> {
    if !ls.is_jordan() {
        return None;
    }
    Some(Cycle {
        kind,
        length: ls.length,
        area: ls.area,
        rim: ctx.vertex_classes(&ls.rim),
        enclosed: ctx.vertex_classes(&ls.inside),
        label,
    })
}

/// Face loops, distance spheres around sampled centers, boundary offsets
/// and the boundary cycle.
pub(crate) fn sample_cycles(ctx: &Ctx<'_>) -> Result<Cycles> {
    let zd = ctx.zd;
    let mut list: Vec<Cycle> = zd
        .triangle_classes()
        .iter()
        .enumerate()
        .map(|(t, c)| Cycle {
            kind: "face",
            length: ctx.face_perimeter(t),
            area: ctx.area[t],
            rim: c.to_vec(),
            enclosed: c.to_vec(),
            label: json!({ "triangle": t }),
        })
        .collect();
    let g = ctx.boundary_distance();
    let radii = ctx.cfg.radii;
    let centers = sample_centers(ctx);
    let per_center = par::map_range(centers.len(), |i| {
        let c = centers[i];
        let f = ctx.vertex_values(zd.dist_row(c));
        (1..=radii)
            .map(|j| {
                let t = g[c] * j as f64 / (radii + 1) as f64;
                level_cycle(ctx, ctx.level_set(&f, t), "sphere", json!({ "center_class": c, "radius": t }))
            })
            .collect::<Vec<_>>()
    });
    let gv: Vec<f64> = ctx.vertex_values(&g).into_iter().map(|v| -v).collect();
    let gmax = g.iter().copied().fold(0.0, f64::max);
    let offsets = par::map_range(radii, |j| {
        let s = gmax * (j + 1) as f64 / (radii + 1) as f64;
        level_cycle(ctx, ctx.level_set(&gv, -s), "offset", json!({ "offset": s }))
    });
    let mut skipped = 0;
    for c in per_center.into_iter().flatten().chain(offsets) {
        match c {
            Some(c) => list.push(c),
            None => skipped += 1,
        }
    }
    let (bcycle, blen) = zd.boundary_cycle()?;
    list.push(Cycle {
        kind: "boundary",
        length: blen,
        area: ctx.total_area,
        rim: bcycle.to_vec(),
        enclosed: (0..zd.class_count()).collect(),
        label: json!({ "boundary_classes": bcycle.len() }),
    });
    Ok(Cycles { list, skipped })
}

fn isoperimetric(ctx: &Ctx<'_>, cycles: &Cycles) -> CheckRecord {
    let eta = ctx.cfg.slack.iso;
    let mut worst: Option<(f64, &Cycle)> = None;
    let mut by_kind = serde_json::Map::new();
    let mut tested = 0usize;
    for c in &cycles.list {
        if !(c.length > 0.0 && c.length < ctx.l0) {
            continue;
        }
        tested += 1;
        let r = c.area / (ctx.c * c.length * c.length);
        let slot = by_kind.entry(c.kind).or_insert(json!(0.0));
        if r > slot.as_f64().unwrap_or(0.0) {
            *slot = json!(r);
        }
        if worst.is_none_or(|(w, _)| r > w) {
            worst = Some((r, c));
        }
    }
    let Some((ratio, w)) = worst else {
        return CheckRecord::degenerate(CheckKind::Iso, "no cycle shorter than l0");
    };
    let bound = ctx.c * w.length * w.length;
    CheckRecord::new(CheckKind::Iso, bound, w.area, eta, ratio <= 1.0 + eta)
        .with_witness(json!({ "kind": w.kind, "length": w.length, "area": w.area, "cycle": w.label }))
        .with_details(json!({ "tested": tested, "skipped": cycles.skipped, "max_ratio_by_kind": by_kind }))
}

fn diameters(ctx: &Ctx<'_>, cycles: &Cycles) -> CheckRecord {
    let eta = ctx.cfg.slack.diam;
    let factor = 8.0 * ctx.c + 1.0;
    let ratios = par::map_range(cycles.list.len(), |i| {
        let c = &cycles.list[i];
        let rim = ctx.class_set_diameter(&mut c.rim.clone());
        if !(rim > 0.0 && rim < ctx.l0 / 2.0) {
            return None;
        }
        let inner = ctx.class_set_diameter(&mut c.enclosed.clone());
        Some((inner / (factor * rim), rim, inner))
    });
    let mut worst: Option<(usize, f64, f64, f64)> = None;
    let mut tested = 0usize;
    for (i, r) in ratios.iter().enumerate() {
        if let Some((ratio, rim, inner)) = *r {
            tested += 1;
            if worst.is_none_or(|w| ratio > w.1) {
                worst = Some((i, ratio, rim, inner));
            }
        }
    }
    let Some((i, ratio, rim, inner)) = worst else {
        return CheckRecord::degenerate(CheckKind::Diam, "every sampled cycle is a single class");
    };
    let c = &cycles.list[i];
    CheckRecord::new(CheckKind::Diam, factor * rim, inner, eta, ratio <= 1.0 + eta)
        .with_witness(json!({ "kind": c.kind, "cycle_diameter": rim, "enclosed_diameter": inner, "cycle": c.label }))
        .with_details(json!({ "tested": tested, "factor": factor }))
}

/// Least-squares slope of `log y` against `log x`.
fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn growth(ctx: &Ctx<'_>) -> Result<CheckRecord> {
    let eta = ctx.cfg.slack.growth;
    let g = ctx.boundary_distance();
    let default = [super::BallSpec { center: [0.0, 0.0], radii: Vec::new() }];
    let specs = if ctx.cfg.growth.is_empty() { &default[..] } else { &ctx.cfg.growth[..] };
    let mut per_center = Vec::new();
    let mut worst: Option<(f64, f64, f64, usize, f64)> = None;
    for spec in specs {
        let v = ctx.nearest_vertex(spec.center);
        let c = ctx.zd.class_of(v);
        let db = g[c];
        let radii: Vec<f64> = if spec.radii.is_empty() {
            (1..=8).map(|i| db * i as f64 / 10.0).collect()
        } else {
            spec.radii.iter().copied().filter(|&r| r > 0.0 && r < db).collect()
        };
        if radii.is_empty() {
            continue;
        }
        let f = ctx.vertex_values(ctx.zd.dist_row(c));
        let areas: Vec<f64> = radii.iter().map(|&r| ctx.sublevel_area(&f, r)).collect();
        let bounds: Vec<f64> = radii.iter().map(|&r| (ctx.q * ctx.q * r * r / (4.0 * ctx.c)).min(ctx.c * ctx.l0 * ctx.l0)).collect();
        let ratios: Vec<f64> = areas.iter().zip(&bounds).map(|(a, b)| a / b).collect();
        for i in 0..radii.len() {
            if worst.is_none_or(|w| ratios[i] < w.0) {
                worst = Some((ratios[i], bounds[i], areas[i], v, radii[i]));
            }
        }
        per_center.push(json!({
            "vertex": v,
            "class": c,
            "boundary_distance": db,
            "radii": radii,
            "areas": areas,
            "ratios": ratios,
            "exponent": log_slope(&radii, &areas),
        }));
    }
    let Some((ratio, bound, area, v, r)) = worst else {
        return Err(Error::Analysis("no ball center with a radius below its distance to the boundary".into()));
    };
    Ok(CheckRecord::new(CheckKind::Growth, bound, area, eta, ratio >= 1.0 - eta)
        .with_witness(json!({ "vertex": v, "radius": r }))
        .with_details(json!({ "centers": per_center })))
}

fn holder(ctx: &Ctx<'_>) -> Result<CheckRecord> {
    let eta = ctx.cfg.slack.holder;
    let mesh = ctx.map.mesh();
    let h = mesh.max_edge_length();
    let smax = 0.3;
    let vs = mesh.vertices();
    let pool: Vec<usize> = mesh.interior_vertices().into_iter().filter(|&v| vs[v].norm() <= 0.9).collect();
    let mut edges = vec![h];
    while *edges.last().expect("nonempty") * 2.0 < smax {
        edges.push(edges.last().expect("nonempty") * 2.0);
    }
    let nb = edges.len();
    let bin_of = |s: f64| -> Option<usize> {
        if !(h..=smax).contains(&s) {
            return None;
        }
        Some(edges.iter().rposition(|&e| s >= e).unwrap_or(0))
    };
    let sources: Vec<usize> = match ctx.cfg.holder_center {
        Some(p) => vec![ctx.nearest_vertex(p)],
        None => pool.clone(),
    };
    let all_pairs = ctx.cfg.holder_center.is_none();
    // per source: best (d, separation, other) per bin
    let partial = par::map_range(sources.len(), |i| {
        let x = sources[i];
        let row = ctx.zd.dist_row(ctx.zd.class_of(x));
        let mut best = vec![(0.0f64, 0.0f64, usize::MAX, usize::MAX); nb];
        let mut count = 0usize;
        for &y in &pool {
            if y == x || (all_pairs && y < x) {
                continue;
            }
            let Some(b) = bin_of((vs[x] - vs[y]).norm()) else { continue };
            count += 1;
            let d = row[ctx.zd.class_of(y)];
            if best[b].2 == usize::MAX || d > best[b].0 {
                best[b] = (d, (vs[x] - vs[y]).norm(), x, y);
            }
        }
        (best, count)
    });
    let mut best = vec![(0.0f64, 0.0f64, usize::MAX, usize::MAX); nb];
    let mut pairs = 0usize;
    for (b, count) in partial {
        pairs += count;
        for i in 0..nb {
            if b[i].2 != usize::MAX && (best[i].2 == usize::MAX || b[i].0 > best[i].0) {
                best[i] = b[i];
            }
        }
    }
    let bins: Vec<_> = best.into_iter().filter(|b| b.2 != usize::MAX).collect();
    if bins.len() < 2 {
        let why = format!("mesh too coarse for a Hölder fit ({pairs} pairs in one scale)");
        return Ok(CheckRecord::degenerate(CheckKind::Holder, &why));
    }
    if bins.iter().all(|b| b.0 == 0.0) {
        return Ok(CheckRecord::degenerate(CheckKind::Holder, "all distances vanish"));
    }
    let alpha_paper = ctx.q / (4.0 * PI * ctx.c);
    let mut slopes = Vec::new();
    let mut worst = (f64::INFINITY, 0usize);
    for i in 0..bins.len() - 1 {
        let (a, b) = (bins[i], bins[i + 1]);
        if a.0 <= 0.0 || b.0 <= 0.0 || b.1 <= a.1 {
            continue;
        }
        let s = (b.0 / a.0).ln() / (b.1 / a.1).ln();
        slopes.push(s);
        if s < worst.0 {
            worst = (s, i);
        }
    }
    if slopes.is_empty() {
        return Err(Error::Analysis("no usable separation bins for a Hölder fit".into()));
    }
    let (alpha, i) = worst;
    let (a, b) = (bins[i], bins[i + 1]);
    let envelope: Vec<Value> = bins.iter().map(|b| json!({ "separation": b.1, "distance": b.0 })).collect();
    Ok(CheckRecord::new(CheckKind::Holder, alpha_paper, alpha, eta, alpha >= alpha_paper - eta)
        .with_witness(json!({ "pairs": [[a.2, a.3], [b.2, b.3]], "separations": [a.1, b.1], "distances": [a.0, b.0] }))
        .with_details(json!({ "pairs": pairs, "mesh_width": h, "slopes": slopes, "envelope": envelope })))
}

fn courant_lebesgue(ctx: &Ctx<'_>) -> CheckRecord {
    let eta = ctx.cfg.slack.cl;
    let mesh = ctx.map.mesh();
    let loc = mesh.locator();
    let step = mesh.sample_step();
    let mut entries = Vec::new();
    let mut worst: Option<(f64, f64, f64, [f64; 2], f64, f64)> = None;
    for spec in &ctx.cfg.cl {
        let x = Vec2::new(spec.center[0], spec.center[1]);
        let r = spec.radius;
        let parts: Vec<f64> = (0..mesh.triangle_count())
            .map(|t| {
                if ctx.energy[t] == 0.0 {
                    return 0.0;
                }
                let frac = triangle_disc_intersection_area(mesh.triangle_points(t), &x, r) / mesh.triangle_area(t);
                ctx.energy[t] * frac.clamp(0.0, 1.0)
            })
            .collect();
        let e = par::pairwise_sum(&parts);
        let ts: Vec<f64> = (0..32).map(|i| r * (2.0 / 3.0 + i as f64 / 31.0 / 3.0)).collect();
        let lens = par::map_range(ts.len(), |i| ctx.map.circle_restriction_length_with(&loc, step, &x, ts[i]));
        let (imin, lmin) = lens.iter().copied().enumerate().fold((0, f64::INFINITY), |m, (i, l)| if l < m.1 { (i, l) } else { m });
        let ratio = if e > 0.0 { lmin * lmin / (6.0 * PI * e) } else { 0.0 };
        entries.push(json!({ "center": spec.center, "radius": r, "energy": e, "min_length": lmin, "at": ts[imin], "ratio": ratio }));
        if worst.is_none_or(|w| ratio > w.0) {
            worst = Some((ratio, 6.0 * PI * e, lmin * lmin, spec.center, r, ts[imin]));
        }
    }
    let Some((ratio, bound, measured, center, r, t)) = worst else {
        return CheckRecord::degenerate(CheckKind::Cl, "no circles configured");
    };
    let mut rec = CheckRecord::new(CheckKind::Cl, bound, measured, eta, ratio <= 1.0 + eta)
        .with_witness(json!({ "center": center, "radius": r, "t": t }))
        .with_details(json!({ "circles": entries }));
    rec.ratio = ratio;
    rec
}

fn voronoi(ctx: &Ctx<'_>) -> Result<CheckRecord> {
    let eta = ctx.cfg.slack.voronoi;
    let zd = ctx.zd;
    let k = zd.class_count();
    let (bcycle, l) = zd.boundary_cycle()?;
    let c = ctx.c;
    let m_const = ctx.cfg.voronoi_m.unwrap_or(super::M_HAT * c.powi(4));
    let mut entries = Vec::new();
    let mut pass = true;
    let mut worst = (f64::NEG_INFINITY, Value::Null);
    for &n in &ctx.cfg.voronoi_n {
        let sep = l / n as f64;
        // greedy maximal separated set in class order
        let mut net: Vec<usize> = Vec::new();
        let mut near = vec![f64::INFINITY; k];
        for z in 0..k {
            if near[z] >= sep {
                net.push(z);
                for (nz, d) in near.iter_mut().zip(zd.dist_row(z)) {
                    *nz = nz.min(*d);
                }
            }
        }
        let m = net.len();
        if m == 0 {
            return Err(Error::Analysis("empty net".into()));
        }
        let mut min_sep = f64::INFINITY;
        for i in 0..m {
            for j in i + 1..m {
                min_sep = min_sep.min(zd.dist(net[i], net[j]));
            }
        }
        let eps = if min_sep.is_finite() { min_sep } else { sep } / (8.0 * m as f64);
        let cell: Vec<usize> = (0..k)
            .map(|z| {
                (0..m)
                    .min_by(|&a, &b| {
                        let fa = zd.dist(net[a], z) + a as f64 * eps;
                        let fb = zd.dist(net[b], z) + b as f64 * eps;
                        fa.total_cmp(&fb)
                    })
                    .expect("nonempty net")
            })
            .collect();
        let mut in_g = vec![false; k];
        for &b in bcycle {
            in_g[b] = true;
        }
        for t in zd.triangle_classes() {
            if cell[t[0]] != cell[t[1]] || cell[t[1]] != cell[t[2]] {
                for &v in t {
                    in_g[v] = true;
                }
            }
        }
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for t in zd.triangle_classes() {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                if !in_g[a] && !in_g[b] {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut members: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for z in 0..k {
            if !in_g[z] {
                let r = find(&mut parent, z);
                members.entry(r).or_default().push(z);
            }
        }
        let comps = members.len();
        let max_diam = members.values().map(|ms| ctx.class_set_diameter(&mut ms.clone())).fold(0.0, f64::max);
        let net_bound = 2.0 * n as f64 + 64.0 * c * (ctx.total_area / (l * l)) * (n * n) as f64;
        let comp_bound = m_const * (n * n) as f64;
        let diam_bound = (8.0 * c + 1.0) * 4.0 * l / n as f64;
        let ok = (m as f64) <= net_bound && (comps as f64) <= comp_bound && max_diam <= diam_bound * (1.0 + eta);
        pass &= ok;
        let entry = json!({
            "n": n,
            "net_size": m,
            "net_bound": net_bound,
            "components": comps,
            "component_bound": comp_bound,
            "components_per_n2": comps as f64 / (n * n) as f64,
            "max_component_diameter": max_diam,
            "diameter_bound": diam_bound,
            "pass": ok,
        });
        let r = (m as f64 / net_bound).max(comps as f64 / comp_bound).max(max_diam / diam_bound);
        if r > worst.0 {
            worst = (r, entry.clone());
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Ok(CheckRecord::degenerate(CheckKind::Voronoi, "no net sizes configured"));
    }
    Ok(CheckRecord::new(CheckKind::Voronoi, 1.0, worst.0, eta, pass)
        .with_witness(worst.1)
        .with_details(json!({ "m": m_const, "boundary_length": l, "runs": entries })))
}

fn coarea(ctx: &Ctx<'_>) -> CheckRecord {
    let eta = ctx.cfg.slack.coarea;
    let v = ctx.nearest_vertex(ctx.cfg.coarea_center);
    let f = ctx.vertex_values(ctx.zd.dist_row(ctx.zd.class_of(v)));
    let fmax = f.iter().copied().fold(0.0, f64::max);
    if fmax == 0.0 {
        return CheckRecord::degenerate(CheckKind::Coarea, "constant distance function");
    }
    let levels = 24;
    let dt = fmax / levels as f64;
    let lens = par::map_range(levels, |i| ctx.level_set(&f, (i as f64 + 0.5) * dt).length);
    let integral = par::pairwise_sum(&lens) * dt;
    let bound = ctx.q * integral;
    CheckRecord::new(CheckKind::Coarea, bound, ctx.total_area, eta, ctx.total_area >= bound * (1.0 - eta))
        .with_witness(json!({ "center_vertex": v }))
        .with_details(json!({ "levels": levels, "max_distance": fmax, "level_lengths": lens }))
}

fn doubling(ctx: &Ctx<'_>) -> CheckRecord {
    let Some(spec) = &ctx.cfg.doubling else {
        return CheckRecord::degenerate(CheckKind::Doubling, "no witness points configured");
    };
    let a = ctx.zd.class_of(ctx.nearest_vertex(spec.anchor));
    let mut rows: Vec<(f64, f64, usize)> = spec
        .points
        .iter()
        .map(|&p| {
            let v = ctx.nearest_vertex(p);
            let c = ctx.zd.class_of(v);
            let r = ctx.zd.dist(c, a);
            let f = ctx.vertex_values(ctx.zd.dist_row(c));
            let small = ctx.sublevel_area(&f, r);
            let big = ctx.sublevel_area(&f, 2.0 * r);
            (r, if small > 0.0 { big / small } else { f64::INFINITY }, v)
        })
        .filter(|row| row.0 > 0.0)
        .collect();
    rows.sort_by(|x, y| y.0.total_cmp(&x.0));
    if rows.len() < 2 {
        return CheckRecord::degenerate(CheckKind::Doubling, "fewer than two witness points off the anchor");
    }
    let increasing = rows.windows(2).all(|w| w[1].1 > w[0].1);
    let first = rows[0].1;
    let last = rows[rows.len() - 1].1;
    let entries: Vec<Value> = rows.iter().map(|r| json!({ "radius": r.0, "ratio": r.1, "vertex": r.2 })).collect();
    CheckRecord::new(CheckKind::Doubling, first, last, 0.0, increasing)
        .with_witness(json!({ "vertex": rows[rows.len() - 1].2, "radius": rows[rows.len() - 1].0 }))
        .with_details(json!({ "scales": entries }))
}

/// 95th percentile of the quasiconformality constant, weighted by domain
/// area on the triangles that are not collapsed.
fn qc(ctx: &Ctx<'_>) -> CheckRecord {
    let eta = ctx.cfg.slack.qc;
    let mesh = ctx.map.mesh();
    let mut vals: Vec<(f64, f64, usize)> = (0..mesh.triangle_count())
        .map(|t| (ctx.seminorms[t].qc(), mesh.triangle_area(t) * ctx.map.triangle_weight(t), t))
        .filter(|v| v.1 > 0.0 && !(ctx.seminorms[v.2].is_degenerate() && ctx.seminorms[v.2].max_stretch_sq() == 0.0))
        .collect();
    if vals.is_empty() {
        return CheckRecord::degenerate(CheckKind::Qc, "every triangle is collapsed");
    }
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = vals.iter().map(|v| v.1).sum();
    let mut acc = 0.0;
    let mut p95 = vals[vals.len() - 1];
    for v in &vals {
        acc += v.1;
        if acc >= 0.95 * total {
            p95 = *v;
            break;
        }
    }
    let bound = if ctx.map.target().is_et() { 1.0 } else { 2f64.sqrt() };
    let max = vals[vals.len() - 1];
    CheckRecord::new(CheckKind::Qc, bound, p95.0, eta, p95.0 <= bound + eta)
        .with_witness(json!({ "triangle": p95.2 }))
        .with_details(json!({ "max": max.0, "max_triangle": max.2 }))
}

fn energy(ctx: &Ctx<'_>) -> CheckRecord {
    let eta = ctx.cfg.slack.energy;
    let e = par::pairwise_sum(&ctx.energy);
    if e == 0.0 {
        return CheckRecord::degenerate(CheckKind::Energy, "zero energy");
    }
    let bound = ctx.q * e;
    CheckRecord::new(CheckKind::Energy, bound, ctx.total_area, eta, ctx.total_area >= bound * (1.0 - eta))
        .with_details(json!({ "energy": e, "area": ctx.total_area }))
}

fn lipschitz(ctx: &Ctx<'_>) -> CheckRecord {
    let tol = 1e-9;
    let lip = ctx.zd.lipschitz_excess().max(0.0);
    let k = ctx.zd.class_count();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 0x7452_6961);
    let mut tri: f64 = 0.0;
    if k >= 3 {
        for _ in 0..100_000 {
            let (a, b, c) = (rng.random_range(0..k), rng.random_range(0..k), rng.random_range(0..k));
            tri = tri.max(ctx.zd.dist(a, c) - ctx.zd.dist(a, b) - ctx.zd.dist(b, c));
        }
    }
    let measured = lip.max(tri);
    let mut rec = CheckRecord::new(CheckKind::Lipschitz, tol, measured, 0.0, measured <= tol)
        .with_details(json!({ "lipschitz_excess": lip, "triangle_excess_sampled": tri }));
    rec.ratio = measured / tol;
    rec
}

//! Native SVG drawings: level sets and Voronoi cells of `d_Z` on the domain
//! disc, and objective traces.

use std::fmt::Write;
use std::path::Path;

use mindisc::analyzer::CheckConfig;
use mindisc::plateau::TraceRow;
use mindisc::{io, IntrinsicDisc, PAMap, Result, Vec2};

const SIZE: f64 = 512.0;
const LEVELS: usize = 16;

fn px(p: &Vec2) -> (f64, f64) {
    let h = SIZE / 2.0;
    (h + 0.95 * h * p.x, h - 0.95 * h * p.y)
}

fn open(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn hue(i: usize) -> String {
    format!("hsl({:.1},65%,72%)", (i as f64 * 137.508) % 360.0)
}

fn triangle(out: &mut String, pts: [Vec2; 3], fill: &str) {
    let [a, b, c] = pts.map(|p| px(&p));
    let _ = writeln!(
        out,
        r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}" stroke="{fill}" stroke-width="0.3"/>"#,
        a.0, a.1, b.0, b.1, c.0, c.1
    );
}

fn boundary(out: &mut String, map: &PAMap) {
    let mesh = map.mesh();
    let pts: Vec<String> = mesh
        .boundary()
        .iter()
        .map(|&v| {
            let (x, y) = px(&mesh.vertices()[v]);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(out, r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1"/>"#, pts.join(" "));
}

fn nearest_vertex(map: &PAMap, p: [f64; 2]) -> usize {
    let q = Vec2::new(p[0], p[1]);
    let vs = map.mesh().vertices();
    (0..vs.len()).min_by(|&a, &b| (vs[a] - q).norm().total_cmp(&(vs[b] - q).norm())).unwrap_or(0)
}

/// Bands and level lines of `d_Z(P(center), P(·))`.
pub fn levels(map: &PAMap, zd: &IntrinsicDisc, center: usize) -> String {
    let mesh = map.mesh();
    let vs = mesh.vertices();
    let c = zd.class_of(center);
    let f: Vec<f64> = (0..vs.len()).map(|v| zd.dist(c, zd.class_of(v))).collect();
    let top = f.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let step = top / LEVELS as f64;
    let mut out = String::new();
    open(&mut out, SIZE, SIZE);
    for tri in mesh.triangles() {
        let mean = tri.iter().map(|&v| f[v]).sum::<f64>() / 3.0;
        let band = ((mean / step) as usize).min(LEVELS - 1);
        let g = 245 - (band * 150 / LEVELS) as u32;
        triangle(&mut out, tri.map(|v| vs[v]), &format!("rgb({g},{g},255)"));
    }
    for k in 1..LEVELS {
        let l = k as f64 * step;
        for tri in mesh.triangles() {
            let mut hits = Vec::with_capacity(2);
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                if (f[a] < l) != (f[b] < l) {
                    let s = (l - f[a]) / (f[b] - f[a]);
                    hits.push(vs[a] + (vs[b] - vs[a]) * s);
                }
            }
            if let [p, q] = hits[..] {
                let (p, q) = (px(&p), px(&q));
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="navy" stroke-width="0.8"/>"#,
                    p.0, p.1, q.0, q.1
                );
            }
        }
    }
    boundary(&mut out, map);
    let (x, y) = px(&vs[center]);
    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="red"/>"#);
    out.push_str("</svg>\n");
    out
}

/// Cells of the `n` classes picked by farthest-point sampling from `P(start)`,
/// each triangle colored by the cell of its first vertex.
pub fn voronoi(map: &PAMap, zd: &IntrinsicDisc, start: usize, n: usize) -> String {
    let k = zd.class_count();
    let mut seeds = vec![zd.class_of(start)];
    let mut near: Vec<f64> = (0..k).map(|c| zd.dist(seeds[0], c)).collect();
    while seeds.len() < n.min(k) {
        let far = (0..k).max_by(|&a, &b| near[a].total_cmp(&near[b])).unwrap_or(0);
        if near[far] <= 0.0 {
            break;
        }
        seeds.push(far);
        for (c, d) in near.iter_mut().enumerate() {
            *d = d.min(zd.dist(far, c));
        }
    }
    let cell: Vec<usize> = (0..k)
        .map(|c| (0..seeds.len()).min_by(|&a, &b| zd.dist(seeds[a], c).total_cmp(&zd.dist(seeds[b], c))).unwrap_or(0))
        .collect();
    let mesh = map.mesh();
    let vs = mesh.vertices();
    let mut out = String::new();
    open(&mut out, SIZE, SIZE);
    for tri in mesh.triangles() {
        triangle(&mut out, tri.map(|v| vs[v]), &hue(cell[zd.class_of(tri[0])]));
    }
    boundary(&mut out, map);
    for &s in &seeds {
        let (x, y) = px(&vs[zd.classes()[s][0]]);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

/// Area, energy and objective against the iteration count.
pub fn trace(rows: &[TraceRow]) -> String {
    let (w, h, m) = (640.0, 360.0, 40.0);
    let mut out = String::new();
    open(&mut out, w, h);
    let last = rows.last().map_or(1, |r| r.iteration.max(1)) as f64;
    let series: [(&str, fn(&TraceRow) -> f64); 3] =
        [("darkred", |r| r.area), ("darkgreen", |r| r.energy), ("navy", |r| r.objective)];
    let vals = || rows.iter().flat_map(|r| series.iter().map(move |s| (s.1)(r))).filter(|v| v.is_finite());
    let lo = vals().fold(f64::INFINITY, f64::min);
    let hi = vals().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let _ = writeln!(
        out,
        r#"<polyline points="{m},{m} {m},{b} {r},{b}" fill="none" stroke="black"/>"#,
        b = h - m,
        r = w - m
    );
    for (color, get) in series {
        let pts: Vec<String> = rows
            .iter()
            .filter(|r| get(r).is_finite())
            .map(|r| {
                let x = m + (w - 2.0 * m) * r.iteration as f64 / last;
                let y = h - m - (h - 2.0 * m) * (get(r) - lo) / span;
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, pts.join(" "));
    }
    let _ = writeln!(
        out,
        r#"<text x="{m}" y="{}" font-size="12" font-family="sans-serif">area (red), energy (green), objective (blue); range {} to {}</text>"#,
        m - 10.0,
        io::fmt_f64(lo),
        io::fmt_f64(hi)
    );
    out.push_str("</svg>\n");
    out
}

/// Writes `levels.svg` and one `voronoi_n{n}.svg` per configured `n`.
pub fn write_overlays(dir: &Path, map: &PAMap, zd: &IntrinsicDisc, cfg: &CheckConfig) -> Result<()> {
    let center = nearest_vertex(map, cfg.coarea_center);
    io::write_text(&dir.join("levels.svg"), &levels(map, zd, center))?;
    for &n in &cfg.voronoi_n {
        io::write_text(&dir.join(format!("voronoi_n{n}.svg")), &voronoi(map, zd, center, n))?;
    }
    Ok(())
}

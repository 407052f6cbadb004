//! Triangulated unit disc and piecewise-affine maps into targets.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::areas::{jacobian, AreaDef, QuadraticSeminorm, Seminorm};
use crate::geom::{barycentric, cross, Mat2, Vec2};
use crate::target::{pullback, MetricTarget, NormBall};
use crate::{par, Error, Result};

/// Minimum signed area of a domain triangle.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

/// A triangulation of the closed unit disc.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscMesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
    rings: Option<usize>,
    vertex_triangles: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    is_boundary: Vec<bool>,
}

impl DiscMesh {
    /// Validates and indexes a triangulation: counterclockwise triangles of
    /// positive area, every edge shared by at most two triangles, a single
    /// boundary loop on the unit circle.
    pub fn new(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>, boundary: Vec<usize>) -> Result<Self> {
        let n = vertices.len();
        if triangles.is_empty() || boundary.len() < 3 {
            return Err(Error::InvalidMesh("empty triangulation".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!("triangle {t} has an out-of-range vertex")));
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            if 0.5 * cross(&(b - a), &(c - a)) <= MIN_TRIANGLE_AREA {
                return Err(Error::DegenerateTriangle(t));
            }
        }
        let mut edges: std::collections::HashMap<(usize, usize), u8> = Default::default();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        if edges.values().any(|&c| c > 2) {
            return Err(Error::InvalidMesh("edge shared by more than two triangles".into()));
        }
        let open = edges.values().filter(|&&c| c == 1).count();
        if open != boundary.len() {
            return Err(Error::InvalidMesh(format!(
                "{open} boundary edges but a boundary loop of {} vertices",
                boundary.len()
            )));
        }
        let mut is_boundary = vec![false; n];
        for (k, &v) in boundary.iter().enumerate() {
            let w = boundary[(k + 1) % boundary.len()];
            if edges.get(&(v.min(w), v.max(w))) != Some(&1) {
                return Err(Error::InvalidMesh(format!("boundary step {v}->{w} is not a boundary edge")));
            }
            if (vertices[v].norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMesh(format!("boundary vertex {v} is off the unit circle")));
            }
            if is_boundary[v] {
                return Err(Error::InvalidMesh(format!("boundary loop repeats vertex {v}")));
            }
            is_boundary[v] = true;
        }
        let mut vertex_triangles = vec![Vec::new(); n];
        let mut neighbors = vec![Vec::new(); n];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                vertex_triangles[tri[k]].push(t);
                for j in 1..3 {
                    let w = tri[(k + j) % 3];
                    if !neighbors[tri[k]].contains(&w) {
                        neighbors[tri[k]].push(w);
                    }
                }
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        if let Some(v) = vertex_triangles.iter().position(|t| t.is_empty()) {
            return Err(Error::InvalidMesh(format!("vertex {v} is in no triangle")));
        }
        Ok(Self {
            vertices,
            triangles,
            boundary,
            rings: None,
            vertex_triangles,
            neighbors,
            is_boundary,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Ring count when built by [`make_disc_mesh`].
    pub fn rings(&self) -> Option<usize> {
        self.rings
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| !self.is_boundary[v]).collect()
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn triangle_points(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * cross(&(b - a), &(c - a))
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::with_capacity(self.triangles.len() * 3 / 2 + self.boundary.len());
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                e.push((a.min(b), a.max(b)));
            }
        }
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges()
            .iter()
            .map(|&(a, b)| (self.vertices[a] - self.vertices[b]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Sampling step for curves drawn on the domain: a quarter of the median
    /// edge length, which near-degenerate edges cannot drive to zero.
    pub fn sample_step(&self) -> f64 {
        let mut l: Vec<f64> = self.edges().iter().map(|&(a, b)| (self.vertices[a] - self.vertices[b]).norm()).collect();
        l.sort_unstable_by(f64::total_cmp);
        l[l.len() / 2] / 4.0
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .iter()
            .map(|&(a, b)| (self.vertices[a] - self.vertices[b]).norm())
            .fold(0.0, f64::max)
    }

    /// The same connectivity with new vertex positions.
    pub fn with_positions(&self, vertices: Vec<Vec2>) -> Result<Self> {
        let mut m = Self::new(vertices, self.triangles.clone(), self.boundary.clone())?;
        m.rings = self.rings;
        Ok(m)
    }

    pub fn locator(&self) -> Locator<'_> {
        Locator::new(self)
    }
}

/// Concentric-ring triangulation: ring `k` carries `6k` vertices at radius
/// `k / rings`, consecutive rings joined by an angular merge.
pub fn make_disc_mesh(rings: usize) -> Result<DiscMesh> {
    if rings == 0 {
        return Err(Error::InvalidMesh("rings must be at least 1".into()));
    }
    let n = rings;
    let mut vertices = vec![Vec2::zeros()];
    let ring_start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    for k in 1..=n {
        let r = k as f64 / n as f64;
        let m = 6 * k;
        for j in 0..m {
            let t = TAU * j as f64 / m as f64;
            let (s, c) = t.sin_cos();
            vertices.push(if k == n {
                // exactly on the unit circle
                let p = Vec2::new(c, s);
                p / p.norm()
            } else {
                Vec2::new(r * c, r * s)
            });
        }
    }
    let mut triangles = Vec::with_capacity(6 * n * n);
    for j in 0..6 {
        triangles.push([0, 1 + j, 1 + (j + 1) % 6]);
    }
    for k in 2..=n {
        let (inner, outer) = (ring_start(k - 1), ring_start(k));
        let (mi, mo) = (6 * (k - 1), 6 * k);
        let (mut i, mut j) = (0usize, 0usize);
        while i < mi || j < mo {
            // compare angles (j+1)/mo and (i+1)/mi exactly
            let advance_outer = i == mi || (j < mo && (j + 1) * mi <= (i + 1) * mo);
            if advance_outer {
                triangles.push([inner + i % mi, outer + j, outer + (j + 1) % mo]);
                j += 1;
            } else {
                triangles.push([inner + i, outer + j % mo, inner + (i + 1) % mi]);
                i += 1;
            }
        }
    }
    let boundary = (ring_start(n)..ring_start(n) + 6 * n).collect();
    let mut mesh = DiscMesh::new(vertices, triangles, boundary)?;
    mesh.rings = Some(n);
    Ok(mesh)
}

/// Uniform-grid point location over a mesh.
pub struct Locator<'a> {
    mesh: &'a DiscMesh,
    cells: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> Locator<'a> {
    fn new(mesh: &'a DiscMesh) -> Self {
        let cells = ((mesh.triangle_count() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let mut buckets = vec![Vec::new(); cells * cells];
        for t in 0..mesh.triangle_count() {
            let p = mesh.triangle_points(t);
            let (lo, hi) = Self::bbox(&p);
            let (x0, y0) = Self::cell_of(cells, &lo);
            let (x1, y1) = Self::cell_of(cells, &hi);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    buckets[y * cells + x].push(t);
                }
            }
        }
        Self { mesh, cells, buckets }
    }

    fn bbox(p: &[Vec2; 3]) -> (Vec2, Vec2) {
        let lo = Vec2::new(p[0].x.min(p[1].x).min(p[2].x), p[0].y.min(p[1].y).min(p[2].y));
        let hi = Vec2::new(p[0].x.max(p[1].x).max(p[2].x), p[0].y.max(p[1].y).max(p[2].y));
        (lo, hi)
    }

    fn cell_of(cells: usize, p: &Vec2) -> (usize, usize) {
        let f = |x: f64| (((x + 1.0) * 0.5 * cells as f64).floor().max(0.0) as usize).min(cells - 1);
        (f(p.x), f(p.y))
    }

    /// Triangle containing `p` with barycentric weights. Points slightly
    /// outside the polygonal disc snap to the nearest triangle in their cell.
    pub fn locate(&self, p: &Vec2) -> Option<(usize, [f64; 3])> {
        let (cx, cy) = Self::cell_of(self.cells, p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[cy * self.cells + cx] {
            let [a, b, c] = self.mesh.triangle_points(t);
            let w = barycentric(p, &a, &b, &c);
            let m = w[0].min(w[1]).min(w[2]);
            if m >= -1e-12 {
                return Some((t, clamp_weights(w)));
            }
            if best.as_ref().is_none_or(|b| m > b.2) {
                best = Some((t, w, m));
            }
        }
        match best {
            Some((t, w, m)) if m > -0.5 => Some((t, clamp_weights(w))),
            _ => None,
        }
    }
}

fn clamp_weights(w: [f64; 3]) -> [f64; 3] {
    let c = w.map(|x| x.max(0.0));
    let s = c[0] + c[1] + c[2];
    c.map(|x| x / s)
}

/// Edge-length Gram matrix of an affine map on the domain triangle with
/// edges `e1 = b - a`, `e2 = c - a`, given squared image edge lengths.
pub fn gram_from_lengths(dom: &[Vec2; 3], ab2: f64, ac2: f64, bc2: f64) -> Result<QuadraticSeminorm> {
    let e = Mat2::from_columns(&[dom[1] - dom[0], dom[2] - dom[0]]);
    let einv = e
        .try_inverse()
        .ok_or_else(|| Error::InvalidMesh("degenerate domain triangle".into()))?;
    let off = 0.5 * (ab2 + ac2 - bc2);
    let m = Mat2::new(ab2, off, off, ac2);
    QuadraticSeminorm::new(einv.transpose() * m * einv)
}

/// Columns `L e1`, `L e2` of the linear part of the affine map taking the
/// domain triangle to the image points (in target coordinates).
fn affine_columns(dom: &[Vec2; 3], img: [&[f64]; 3]) -> Result<(Vec<f64>, Vec<f64>)> {
    let e1 = dom[1] - dom[0];
    let e2 = dom[2] - dom[0];
    let det = cross(&e1, &e2);
    if det.abs() <= MIN_TRIANGLE_AREA {
        return Err(Error::InvalidMesh("degenerate domain triangle".into()));
    }
    let d = img[0].len();
    let mut c1 = vec![0.0; d];
    let mut c2 = vec![0.0; d];
    for k in 0..d {
        let d1 = img[1][k] - img[0][k];
        let d2 = img[2][k] - img[0][k];
        c1[k] = (d1 * e2.y - d2 * e1.y) / det;
        c2[k] = (d2 * e1.x - d1 * e2.x) / det;
    }
    Ok((c1, c2))
}

/// Seminorm of the affine map on a domain triangle with the given images:
/// the exact pullback for normed targets and for the collapsed disc (whose
/// chart is the plane, see [`image_weight`]), the edge-length Gram model on
/// cones.
pub fn seminorm_from_images(target: &MetricTarget, dom: &[Vec2; 3], img: [&[f64]; 3]) -> Result<Seminorm> {
    match target {
        MetricTarget::Normed { ball, .. } => {
            let (c1, c2) = affine_columns(dom, img)?;
            Ok(pullback(ball, &c1, &c2))
        }
        MetricTarget::CollapsedDisc { .. } => {
            let (c1, c2) = affine_columns(dom, img)?;
            Ok(pullback(&NormBall::Euclidean, &c1, &c2))
        }
        MetricTarget::Table { .. } => Err(Error::InvalidTarget("maps into distance tables are not defined".into())),
        MetricTarget::Cone { .. } => {
            let ab = target.distance(img[0], img[1]);
            let ac = target.distance(img[0], img[2]);
            let bc = target.distance(img[1], img[2]);
            Ok(Seminorm::Quadratic(gram_from_lengths(dom, ab * ab, ac * ac, bc * bc)?))
        }
    }
}

/// Fraction of a triangle on which the differential of the affine map is
/// the one returned by [`seminorm_from_images`]; it vanishes elsewhere.
/// Below 1 only for the collapsed disc, where the part of the image inside
/// the collapsed ball has zero area and energy.
pub fn image_weight(target: &MetricTarget, img: [&[f64]; 3]) -> f64 {
    let MetricTarget::CollapsedDisc { center, radius } = target else {
        return 1.0;
    };
    let tri = img.map(|p| Vec2::new(p[0], p[1]));
    let area = 0.5 * cross(&(tri[1] - tri[0]), &(tri[2] - tri[0])).abs();
    if area <= MIN_TRIANGLE_AREA {
        let c = (tri[0] + tri[1] + tri[2]) / 3.0;
        return if (c - center).norm() <= *radius { 0.0 } else { 1.0 };
    }
    let inside = crate::geom::triangle_disc_intersection_area(tri, center, *radius);
    (1.0 - inside / area).clamp(0.0, 1.0)
}

/// Per-triangle quantities of a map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleStat {
    pub domain_area: f64,
    /// See [`image_weight`].
    pub weight: f64,
    pub jacobian: f64,
    pub lambda_max: f64,
    pub qc: f64,
}

impl TriangleStat {
    pub fn area(&self) -> f64 {
        self.jacobian * self.domain_area * self.weight
    }
}

/// A piecewise-affine map from a disc mesh into a target.
#[derive(Clone, Debug)]
pub struct PAMap {
    mesh: Arc<DiscMesh>,
    target: MetricTarget,
    images: Vec<f64>,
}

impl PAMap {
    pub fn new(mesh: Arc<DiscMesh>, target: MetricTarget, images: Vec<f64>) -> Result<Self> {
        if !target.supports_maps() {
            return Err(Error::InvalidTarget("maps into distance tables are not defined".into()));
        }
        let d = target.coord_dim();
        if images.len() != d * mesh.vertex_count() {
            return Err(Error::InvalidTarget(format!(
                "{} image coordinates for {} vertices of dimension {d}",
                images.len(),
                mesh.vertex_count()
            )));
        }
        for p in images.chunks(d) {
            target.validate_point(p)?;
        }
        Ok(Self { mesh, target, images })
    }

    /// Map defined by a closure on vertex positions.
    pub fn from_fn(mesh: Arc<DiscMesh>, target: MetricTarget, f: impl Fn(&Vec2) -> Vec<f64>) -> Result<Self> {
        let images = mesh.vertices().iter().flat_map(|p| f(p)).collect();
        Self::new(mesh, target, images)
    }

    pub fn mesh(&self) -> &DiscMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<DiscMesh> {
        &self.mesh
    }

    pub fn target(&self) -> &MetricTarget {
        &self.target
    }

    pub fn images(&self) -> &[f64] {
        &self.images
    }

    pub fn dim(&self) -> usize {
        self.target.coord_dim()
    }

    pub fn image(&self, v: usize) -> &[f64] {
        let d = self.dim();
        &self.images[v * d..(v + 1) * d]
    }

    fn tri_images(&self, t: usize) -> [&[f64]; 3] {
        self.mesh.triangles()[t].map(|v| self.image(v))
    }

    /// Edge-length Gram matrix of triangle `t`.
    pub fn triangle_gram(&self, t: usize) -> Result<QuadraticSeminorm> {
        let [a, b, c] = self.tri_images(t);
        let ab = self.target.distance(a, b);
        let ac = self.target.distance(a, c);
        let bc = self.target.distance(b, c);
        gram_from_lengths(&self.mesh.triangle_points(t), ab * ab, ac * ac, bc * bc)
    }

    /// Metric differential on triangle `t` (exact pullback for normed targets).
    pub fn triangle_seminorm(&self, t: usize) -> Result<Seminorm> {
        seminorm_from_images(&self.target, &self.mesh.triangle_points(t), self.tri_images(t))
    }

    pub fn triangle_weight(&self, t: usize) -> f64 {
        image_weight(&self.target, self.tri_images(t))
    }

    pub fn triangle_stats(&self, mu: AreaDef) -> Result<Vec<TriangleStat>> {
        par::map_range(self.mesh.triangle_count(), |t| -> Result<TriangleStat> {
            let s = self.triangle_seminorm(t)?;
            Ok(TriangleStat {
                domain_area: self.mesh.triangle_area(t),
                weight: self.triangle_weight(t),
                jacobian: jacobian(&s, mu)?,
                lambda_max: s.max_stretch_sq(),
                qc: s.qc(),
            })
        })
        .into_iter()
        .collect()
    }

    /// μ-area over `region` (all triangles when `None`).
    pub fn area_mu(&self, mu: AreaDef, region: Option<&[usize]>) -> Result<f64> {
        self.reduce(region, |t| {
            Ok(jacobian(&self.triangle_seminorm(t)?, mu)? * self.mesh.triangle_area(t) * self.triangle_weight(t))
        })
    }

    /// Discrete Reshetnyak energy `Σ λ_max · area` over `region`.
    pub fn energy(&self, region: Option<&[usize]>) -> Result<f64> {
        self.reduce(region, |t| {
            Ok(self.triangle_seminorm(t)?.max_stretch_sq() * self.mesh.triangle_area(t) * self.triangle_weight(t))
        })
    }

    fn reduce(&self, region: Option<&[usize]>, f: impl Fn(usize) -> Result<f64> + Sync + Send) -> Result<f64> {
        let vals: Vec<Result<f64>> = match region {
            None => par::map_range(self.mesh.triangle_count(), &f),
            Some(ts) => par::map_range(ts.len(), |i| f(ts[i])),
        };
        let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
        Ok(par::pairwise_sum(&vals))
    }

    /// Image of a domain point, or `None` outside the mesh.
    pub fn eval_with(&self, loc: &Locator<'_>, p: &Vec2, out: &mut [f64]) -> bool {
        match loc.locate(p) {
            Some((t, w)) => {
                self.target.interpolate(self.tri_images(t), w, out);
                true
            }
            None => false,
        }
    }

    /// Length of the image of the circle `S_t(center) ∩ D̄`, sampled at a
    /// parameter step of at most a quarter of the shortest mesh edge.
    pub fn circle_restriction_length(&self, center: &Vec2, t: f64) -> f64 {
        let loc = self.mesh.locator();
        self.circle_restriction_length_with(&loc, self.mesh.sample_step(), center, t)
    }

    pub fn circle_restriction_length_with(&self, loc: &Locator<'_>, step: f64, center: &Vec2, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let samples = ((TAU * t / step).ceil() as usize).max(16);
        let d = self.dim();
        let mut prev: Option<Vec<f64>> = None;
        let mut first: Option<Vec<f64>> = None;
        let mut all_inside = true;
        let mut parts = Vec::with_capacity(samples);
        let mut cur = vec![0.0; d];
        for k in 0..samples {
            let a = TAU * k as f64 / samples as f64;
            let p = center + Vec2::new(t * a.cos(), t * a.sin());
            if p.norm() > 1.0 || !self.eval_with(loc, &p, &mut cur) {
                all_inside = false;
                prev = None;
                continue;
            }
            if let Some(q) = &prev {
                parts.push(self.target.distance(q, &cur));
            }
            if k == 0 {
                first = Some(cur.clone());
            }
            prev = Some(cur.clone());
        }
        if all_inside {
            if let (Some(a), Some(b)) = (&prev, &first) {
                parts.push(self.target.distance(a, b));
            }
        }
        par::pairwise_sum(&parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::MetricTarget;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn identity(rings: usize) -> PAMap {
        let m = Arc::new(make_disc_mesh(rings).unwrap());
        PAMap::from_fn(m, MetricTarget::euclidean(2), |p| vec![p.x, p.y]).unwrap()
    }

    #[test]
    fn image_weight_removes_the_collapsed_part() {
        let t = MetricTarget::collapsed_disc(Vec2::zeros(), 0.25).unwrap();
        let w = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| image_weight(&t, [&a[..], &b[..], &c[..]]);
        assert_eq!(w([-0.1, -0.1], [0.1, -0.1], [0.0, 0.1]), 0.0);
        assert_eq!(w([0.5, 0.5], [0.9, 0.5], [0.5, 0.9]), 1.0);
        // the right angle at the center holds a quarter of the collapsed disc
        let quarter = PI * 0.25 * 0.25 / 4.0;
        assert_relative_eq!(w([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]), 1.0 - quarter / 0.5, epsilon = 1e-9);
        let e = MetricTarget::euclidean(2);
        assert_eq!(image_weight(&e, [&[0.0, 0.0][..], &[0.1, 0.0][..], &[0.0, 0.1][..]]), 1.0);
    }

    #[test]
    fn ring_counts() {
        let m = make_disc_mesh(1).unwrap();
        assert_eq!((m.vertex_count(), m.triangle_count()), (7, 6));
        assert_eq!(make_disc_mesh(2).unwrap().vertex_count(), 19);
        let m = make_disc_mesh(20).unwrap();
        assert_eq!(m.boundary().len(), 120);
        assert_eq!(m.vertex_count(), 1 + 3 * 20 * 21);
        assert!(m.max_edge_length() <= 2.0 / 20.0);
        assert!(make_disc_mesh(0).is_err());
    }

    #[test]
    fn mesh_is_deterministic_and_tiles_the_polygon() {
        let a = make_disc_mesh(7).unwrap();
        assert_eq!(a, make_disc_mesh(7).unwrap());
        let total: f64 = (0..a.triangle_count()).map(|t| a.triangle_area(t)).sum();
        let n = a.boundary().len() as f64;
        assert_relative_eq!(total, 0.5 * n * (TAU / n).sin(), epsilon = 1e-12);
    }

    #[test]
    fn invalid_meshes_rejected() {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert!(DiscMesh::new(v.clone(), vec![[0, 2, 1]], vec![1, 2, 0]).is_err());
        assert!(DiscMesh::new(v, vec![[0, 1, 2]], vec![0, 1, 2]).is_err());
    }

    #[test]
    fn gram_examples() {
        let m = identity(3);
        for t in 0..m.mesh().triangle_count() {
            assert_relative_eq!(*m.triangle_gram(t).unwrap().gram(), Mat2::identity(), epsilon = 1e-10);
        }
        let mesh = Arc::new(make_disc_mesh(3).unwrap());
        let s = PAMap::from_fn(mesh, MetricTarget::euclidean(2), |p| vec![3.0 * p.x, 3.0 * p.y]).unwrap();
        assert_relative_eq!(*s.triangle_gram(4).unwrap().gram(), Mat2::identity() * 9.0, epsilon = 1e-9);
        let dom = [Vec2::zeros(), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let g = gram_from_lengths(&dom, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(*g.gram(), Mat2::new(1.0, 0.5, 0.5, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn gram_equals_ltl_for_euclidean_targets() {
        let mesh = Arc::new(make_disc_mesh(4).unwrap());
        let f = |p: &Vec2| vec![p.x + 0.3 * p.y * p.y, 2.0 * p.y, p.x * p.y];
        let m = PAMap::from_fn(mesh, MetricTarget::euclidean(3), f).unwrap();
        for t in 0..m.mesh().triangle_count() {
            let g = m.triangle_gram(t).unwrap();
            let Seminorm::Quadratic(q) = m.triangle_seminorm(t).unwrap() else { panic!() };
            assert!((g.gram() - q.gram()).norm() < 1e-10);
        }
    }

    #[test]
    fn area_and_energy_examples() {
        let m = identity(20);
        for mu in AreaDef::ALL {
            let a = m.area_mu(mu, None).unwrap();
            assert!((a - PI).abs() / PI < 2.0 / 20.0);
        }
        assert_relative_eq!(m.energy(None).unwrap(), m.area_mu(AreaDef::HolmesThompson, None).unwrap(), epsilon = 1e-10);
        let mesh = m.mesh_arc().clone();
        let c = PAMap::from_fn(mesh.clone(), MetricTarget::euclidean(2), |_| vec![0.3, 0.1]).unwrap();
        assert_eq!(c.area_mu(AreaDef::BusemannHausdorff, None).unwrap(), 0.0);
        assert_eq!(c.energy(None).unwrap(), 0.0);
        let s = PAMap::from_fn(mesh, MetricTarget::euclidean(2), |p| vec![2.0 * p.x, p.y]).unwrap();
        let base = m.area_mu(AreaDef::BusemannHausdorff, None).unwrap();
        assert_relative_eq!(s.area_mu(AreaDef::BusemannHausdorff, None).unwrap(), 2.0 * base, epsilon = 1e-10);
        assert_relative_eq!(s.energy(None).unwrap(), 4.0 * base, epsilon = 1e-10);
    }

    #[test]
    fn area_is_additive_over_regions() {
        let m = identity(6);
        let all: Vec<usize> = (0..m.mesh().triangle_count()).collect();
        let (a, b) = all.split_at(37);
        let mu = AreaDef::BusemannHausdorff;
        let whole = m.area_mu(mu, None).unwrap();
        let parts = m.area_mu(mu, Some(a)).unwrap() + m.area_mu(mu, Some(b)).unwrap();
        assert!((whole - parts).abs() < 1e-14);
    }

    #[test]
    fn area_error_halves_under_refinement() {
        let err = |r| (identity(r).area_mu(AreaDef::BusemannHausdorff, None).unwrap() - PI).abs();
        let (e10, e20, e40) = (err(10), err(20), err(40));
        assert!(e20 <= e10 / 2.0 * 1.5 && e40 <= e20 / 2.0 * 1.5, "{e10} {e20} {e40}");
    }

    #[test]
    fn area_never_exceeds_energy() {
        let mesh = Arc::new(make_disc_mesh(6).unwrap());
        let maps = [
            PAMap::from_fn(mesh.clone(), MetricTarget::sup(3), |p| vec![p.x, p.y * p.y, p.x + p.y]).unwrap(),
            PAMap::from_fn(mesh.clone(), MetricTarget::euclidean(2), |p| vec![p.x * 3.0, p.y]).unwrap(),
            PAMap::from_fn(mesh, MetricTarget::cone(0.5).unwrap(), |p| vec![p.norm(), 0.5 * p.y.atan2(p.x).rem_euclid(TAU)]).unwrap(),
        ];
        for m in &maps {
            for mu in AreaDef::ALL {
                assert!(m.area_mu(mu, None).unwrap() <= m.energy(None).unwrap() + 1e-9);
            }
        }
    }

    #[test]
    fn circle_restriction_examples() {
        let m = identity(20);
        let l = m.circle_restriction_length(&Vec2::zeros(), 0.5);
        assert!((l - PI).abs() / PI < 0.01, "{l}");
        let mesh = m.mesh_arc().clone();
        let c = PAMap::from_fn(mesh.clone(), MetricTarget::euclidean(2), |_| vec![0.0, 0.0]).unwrap();
        assert_eq!(c.circle_restriction_length(&Vec2::zeros(), 0.5), 0.0);
        let cone = MetricTarget::cone(0.5).unwrap();
        let k = PAMap::from_fn(mesh, cone, |p| vec![p.norm(), 0.5 * p.y.atan2(p.x).rem_euclid(TAU)]).unwrap();
        let l = k.circle_restriction_length(&Vec2::zeros(), 0.5);
        assert!((l - PI / 2.0).abs() / (PI / 2.0) < 0.01, "{l}");
    }

    #[test]
    fn locator_finds_containing_triangle() {
        let m = make_disc_mesh(9).unwrap();
        let loc = m.locator();
        for k in 0..500 {
            let a = k as f64 * 0.37;
            let r = (k as f64 / 500.0).sqrt() * 0.99;
            let p = Vec2::new(r * a.cos(), r * a.sin());
            let (t, w) = loc.locate(&p).unwrap();
            let [x, y, z] = m.triangle_points(t);
            let q = x * w[0] + y * w[1] + z * w[2];
            assert!((p - q).norm() < 1e-12);
        }
    }
}

//! Discrete Plateau solver: minimize μ-area plus a small energy term over
//! piecewise-affine maps whose boundary trace is a weakly monotone
//! parametrization of a Jordan curve.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::areas::{jacobian, AreaDef};
use crate::geom::{cross, Vec2};
use crate::isotonic::anchored_project;
use crate::mesh::{image_weight, make_disc_mesh, seminorm_from_images, DiscMesh, PAMap, MIN_TRIANGLE_AREA};
use crate::optim::{minimize, LbfgsOptions, Objective};
use crate::target::{MetricTarget, NormBall, TargetSpec};
use crate::{par, Error, Result};

/// Parametrization of the boundary Jordan curve by arclength.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCurve {
    kind: CurveKind,
    length: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum CurveKind {
    /// Round circle of the given radius about the origin of a Euclidean
    /// plane (Euclidean normed targets, the collapsed disc).
    Circle { radius: f64 },
    /// Circle `r = radius` on a cone.
    ConeRim { radius: f64 },
    /// Closed polyline in target coordinates with geodesic (chart) segments.
    Polyline { points: Vec<Vec<f64>>, cumulative: Vec<f64> },
}

impl BoundaryCurve {
    pub fn circle(target: &MetricTarget, radius: f64) -> Result<Self> {
        let ok = match target {
            MetricTarget::Normed { ball: NormBall::Euclidean, dim } => *dim >= 2,
            MetricTarget::CollapsedDisc { center, radius: r } => {
                radius <= 1.0 && center.norm() + r < radius
            }
            _ => false,
        };
        if !ok || !(radius > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "a round circle of radius {radius} is not available in a {} target",
                target.kind_name()
            )));
        }
        Ok(Self {
            kind: CurveKind::Circle { radius },
            length: TAU * radius,
        })
    }

    pub fn cone_rim(target: &MetricTarget, radius: f64) -> Result<Self> {
        let MetricTarget::Cone { alpha } = target else {
            return Err(Error::InvalidProblem("cone_rim needs a cone target".into()));
        };
        if !(radius > 0.0) {
            return Err(Error::InvalidProblem("boundary length 0".into()));
        }
        Ok(Self {
            kind: CurveKind::ConeRim { radius },
            length: TAU * alpha * radius,
        })
    }

    /// Boundary of `[-h, h]²` in a planar normed target, starting at `(h, 0)`.
    pub fn square(target: &MetricTarget, half_side: f64) -> Result<Self> {
        let h = half_side;
        let pts = [[h, 0.0], [h, h], [-h, h], [-h, -h], [h, -h]];
        Self::polyline(target, pts.iter().map(|p| p.to_vec()).collect())
    }

    pub fn polyline(target: &MetricTarget, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidCurve("a closed polyline needs at least 3 points".into()));
        }
        for p in &points {
            target.validate_point(p)?;
        }
        let k = points.len();
        let mut cumulative = vec![0.0];
        for i in 0..k {
            let d = target.distance(&points[i], &points[(i + 1) % k]);
            if d <= 1e-9 {
                return Err(Error::InvalidCurve(format!("repeated point at {i}")));
            }
            cumulative.push(cumulative[i] + d);
        }
        for i in 0..k {
            for j in i + 2..k {
                if i == 0 && j == k - 1 {
                    continue;
                }
                if target.distance(&points[i], &points[j]) <= 1e-9 {
                    return Err(Error::InvalidCurve(format!("vertices {i} and {j} coincide")));
                }
            }
        }
        let length = cumulative[k];
        Ok(Self {
            kind: CurveKind::Polyline { points, cumulative },
            length,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Point at arclength `t` (taken modulo the length).
    pub fn point(&self, target: &MetricTarget, t: f64, out: &mut [f64]) {
        let s = t.rem_euclid(self.length);
        match &self.kind {
            CurveKind::Circle { radius } => {
                let a = s / radius;
                out.fill(0.0);
                out[0] = radius * a.cos();
                out[1] = radius * a.sin();
            }
            CurveKind::ConeRim { radius } => {
                let MetricTarget::Cone { alpha } = target else { unreachable!("checked at construction") };
                out[0] = *radius;
                out[1] = (s / radius).min(TAU * alpha * (1.0 - 1e-16));
            }
            CurveKind::Polyline { points, cumulative } => {
                let k = points.len();
                let i = match cumulative.binary_search_by(|c| c.total_cmp(&s)) {
                    Ok(i) => i.min(k - 1),
                    Err(i) => i - 1,
                };
                let seg = cumulative[i + 1] - cumulative[i];
                let f = ((s - cumulative[i]) / seg).clamp(0.0, 1.0);
                target.lerp(&points[i], &points[(i + 1) % k], f, out);
            }
        }
    }

    /// Arclength parameters in `(t0, t1)` where the curve has a corner,
    /// ascending; `t1` may exceed the length by at most one period.
    fn corners_between(&self, t0: f64, t1: f64) -> Vec<f64> {
        let CurveKind::Polyline { cumulative, .. } = &self.kind else {
            return Vec::new();
        };
        let k = cumulative.len() - 1;
        let mut out = Vec::new();
        let mut period = (t0 / self.length).floor() * self.length;
        while period < t1 {
            out.extend(cumulative[..k].iter().map(|c| c + period).filter(|&c| c > t0 && c < t1));
            period += self.length;
        }
        out
    }

    /// Closed polyline of `n` points equispaced in arclength.
    pub fn samples(&self, target: &MetricTarget, n: usize) -> Vec<Vec<f64>> {
        let d = target.coord_dim();
        (0..n)
            .map(|i| {
                let mut p = vec![0.0; d];
                self.point(target, self.length * i as f64 / n as f64, &mut p);
                p
            })
            .collect()
    }
}

/// JSON form of a boundary: a named fixture or an explicit polyline.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum BoundarySpec {
    Named(String),
    Polyline { polyline: Vec<Vec<f64>> },
}

impl BoundarySpec {
    pub fn build(&self, target: &MetricTarget) -> Result<BoundaryCurve> {
        match self {
            BoundarySpec::Named(n) => match n.as_str() {
                "circle" => match target {
                    MetricTarget::Cone { .. } => BoundaryCurve::cone_rim(target, 1.0),
                    _ => BoundaryCurve::circle(target, 1.0),
                },
                "cone_rim" => BoundaryCurve::cone_rim(target, 1.0),
                "square_sup" => BoundaryCurve::square(target, 1.0),
                other => Err(Error::InvalidProblem(format!("unknown boundary '{other}'"))),
            },
            BoundarySpec::Polyline { polyline } => BoundaryCurve::polyline(target, polyline.clone()),
        }
    }
}

fn default_lambda() -> f64 {
    1e-3
}
fn default_iters() -> usize {
    100_000
}
fn default_true() -> bool {
    true
}

/// JSON problem file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub rings: usize,
    pub target: TargetSpec,
    pub boundary: BoundarySpec,
    pub mu: AreaDef,
    #[serde(default = "default_lambda")]
    pub lambda_e: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default = "default_true")]
    pub inner_variation: bool,
}

impl ProblemSpec {
    pub fn build(&self, base_dir: Option<&std::path::Path>) -> Result<PlateauProblem> {
        let target = self.target.build(base_dir)?;
        let boundary = self.boundary.build(&target)?;
        let mesh = Arc::new(make_disc_mesh(self.rings)?);
        let mut p = PlateauProblem::new(mesh, target, boundary, self.mu)?;
        p.lambda_e = self.lambda_e;
        p.seed = self.seed;
        p.max_iters = self.max_iters;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug)]
pub struct PlateauProblem {
    pub mesh: Arc<DiscMesh>,
    pub target: MetricTarget,
    pub boundary: BoundaryCurve,
    pub mu: AreaDef,
    /// Weight of the energy tie-break, in `(0, 0.1]`.
    pub lambda_e: f64,
    pub seed: u64,
    pub max_iters: usize,
    /// Halvings of `lambda_e` after the first convergence.
    pub continuation: usize,
    /// Vertices pinned to the cone apex (the mesh center for cone targets).
    pub apex_vertices: Vec<usize>,
    /// Boundary vertices whose parameters stay fixed (three-point normalization).
    pub anchors: Vec<usize>,
    /// Amplitude of seeded jitter added to the initial interior images.
    pub init_jitter: f64,
    pub jacobi_sweeps: usize,
}

impl PlateauProblem {
    pub fn new(mesh: Arc<DiscMesh>, target: MetricTarget, boundary: BoundaryCurve, mu: AreaDef) -> Result<Self> {
        let apex_vertices = match target {
            MetricTarget::Cone { .. } => {
                let c = (0..mesh.vertex_count())
                    .min_by(|&a, &b| mesh.vertices()[a].norm().total_cmp(&mesh.vertices()[b].norm()))
                    .expect("mesh has vertices");
                vec![c]
            }
            _ => Vec::new(),
        };
        let k = mesh.boundary().len();
        let anchors = vec![0, k / 3, 2 * k / 3];
        let p = Self {
            mesh,
            target,
            boundary,
            mu,
            lambda_e: default_lambda(),
            seed: 0,
            max_iters: default_iters(),
            continuation: 2,
            apex_vertices,
            anchors,
            init_jitter: 0.0,
            jacobi_sweeps: 50,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_e > 0.0 && self.lambda_e <= 0.1) {
            return Err(Error::InvalidProblem(format!("lambda_e = {} not in (0, 0.1]", self.lambda_e)));
        }
        if !(self.boundary.length() > 0.0) || !self.boundary.length().is_finite() {
            return Err(Error::InvalidProblem("boundary length 0".into()));
        }
        if !self.target.supports_maps() {
            return Err(Error::InvalidTarget("cannot solve into a distance table".into()));
        }
        let mut a = self.anchors.clone();
        a.dedup();
        if a.len() != self.anchors.len() || a.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidProblem("anchors must be increasing boundary positions".into()));
        }
        Ok(())
    }
}

/// One row of the objective trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub stage: usize,
    pub lambda_e: f64,
    pub area: f64,
    pub energy: f64,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub map: PAMap,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    pub iterations: usize,
    /// Arclength parameters of the boundary vertices.
    pub boundary_params: Vec<f64>,
}

/// Layout of the optimization vector: free interior vertices (chart
/// parameters), then one arclength parameter per boundary vertex.
struct Layout {
    free: Vec<usize>,
    /// position of each vertex in the vector: interior offset or boundary index
    slot: Vec<Slot>,
    pd: usize,
    nb: usize,
}

#[derive(Clone, Copy)]
enum Slot {
    Interior(usize),
    Boundary(usize),
    Apex,
}

impl Layout {
    fn new(p: &PlateauProblem) -> Self {
        let mesh = &p.mesh;
        let pd = p.target.param_dim();
        let mut slot = vec![Slot::Apex; mesh.vertex_count()];
        let mut free = Vec::new();
        for v in 0..mesh.vertex_count() {
            if mesh.is_boundary(v) || p.apex_vertices.contains(&v) {
                continue;
            }
            slot[v] = Slot::Interior(free.len() * pd);
            free.push(v);
        }
        for (i, &v) in mesh.boundary().iter().enumerate() {
            slot[v] = Slot::Boundary(i);
        }
        Self {
            nb: mesh.boundary().len(),
            free,
            slot,
            pd,
        }
    }

    fn len(&self) -> usize {
        self.free.len() * self.pd + self.nb
    }

    fn boundary_offset(&self) -> usize {
        self.free.len() * self.pd
    }
}

struct PlateauObjective<'a> {
    p: &'a PlateauProblem,
    layout: Layout,
    lambda: f64,
    h: f64,
    anchor_values: Vec<f64>,
    /// for each parameter index: the vertex it moves
    param_vertex: Vec<usize>,
    /// Arclength spacing of the fans that fill the gap between a boundary
    /// chord and its arc of the curve.
    fan_step: f64,
}

/// Reference domain triangle for measuring target triangles.
const UNIT_TRIANGLE: [Vec2; 3] = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];

impl<'a> PlateauObjective<'a> {
    fn images(&self, x: &[f64]) -> Vec<f64> {
        let t = &self.p.target;
        let d = t.coord_dim();
        let mut img = vec![0.0; d * self.p.mesh.vertex_count()];
        let bo = self.layout.boundary_offset();
        for (v, chunk) in img.chunks_mut(d).enumerate() {
            match self.layout.slot[v] {
                Slot::Interior(o) => t.from_params(&x[o..o + self.layout.pd], chunk),
                Slot::Boundary(i) => self.p.boundary.point(t, x[bo + i], chunk),
                Slot::Apex => chunk.fill(0.0),
            }
        }
        img
    }

    /// Contribution of triangle `t` to the objective (`+inf` if it
    /// straddles a cone apex).
    fn tri_value(&self, t: usize, img: [&[f64]; 3]) -> Result<(f64, f64)> {
        if self.p.target.straddles_apex(img) {
            return Ok((f64::INFINITY, f64::INFINITY));
        }
        let mesh = &self.p.mesh;
        let s = seminorm_from_images(&self.p.target, &mesh.triangle_points(t), img)?;
        let a = mesh.triangle_area(t) * image_weight(&self.p.target, img);
        Ok((jacobian(&s, self.p.mu)? * a, s.max_stretch_sq() * a))
    }

    fn parts(&self, img: &[f64]) -> Result<(f64, f64)> {
        let d = self.p.target.coord_dim();
        let tris = self.p.mesh.triangles();
        let vals = par::map_range(tris.len(), |t| {
            let im = tris[t].map(|v| &img[v * d..(v + 1) * d]);
            self.tri_value(t, im)
        });
        let mut area = Vec::with_capacity(vals.len());
        let mut energy = Vec::with_capacity(vals.len());
        for v in vals {
            let (a, e) = v?;
            area.push(a);
            energy.push(e);
        }
        Ok((par::pairwise_sum(&area), par::pairwise_sum(&energy)))
    }

    /// Objective restricted to the triangles around `v`, with `v` imaged at `pv`.
    fn local(&self, img: &[f64], v: usize, pv: &[f64]) -> Result<f64> {
        let d = self.p.target.coord_dim();
        let tris = self.p.mesh.triangles();
        let mut sum = 0.0;
        for &t in self.p.mesh.vertex_triangles(v) {
            let im = tris[t].map(|w| if w == v { pv } else { &img[w * d..(w + 1) * d] });
            let (a, e) = self.tri_value(t, im)?;
            sum += a + self.lambda * e;
        }
        Ok(sum)
    }

    /// μ-area of the fan from `c(t0)` over the arc `c([t0, t1])`: the region
    /// between a boundary chord and the curve. Without it the chords would
    /// let boundary parameters collapse onto the anchors.
    fn fan(&self, t0: f64, t1: f64) -> Result<f64> {
        // intermediate points on a fixed arclength grid plus the corners of
        // the curve, so that the fan area is continuous in t0 and t1: a new
        // point always appears at an end and adds a degenerate triangle
        let mut ts = vec![t0];
        let first = (t0 / self.fan_step).floor() as i64 + 1;
        let mut grid: Vec<f64> = (first..)
            .map(|j| j as f64 * self.fan_step)
            .take_while(|&g| g < t1)
            .filter(|&g| g > t0)
            .collect();
        grid.extend(self.p.boundary.corners_between(t0, t1));
        grid.sort_by(f64::total_cmp);
        ts.extend(grid);
        ts.push(t1);
        if ts.len() < 3 {
            return Ok(0.0);
        }
        let t = &self.p.target;
        let d = t.coord_dim();
        let mut pts = vec![0.0; d * ts.len()];
        for (c, &s) in pts.chunks_mut(d).zip(&ts) {
            self.p.boundary.point(t, s, c);
        }
        let mut sum = 0.0;
        for j in 1..ts.len() - 1 {
            let img = [&pts[..d], &pts[j * d..(j + 1) * d], &pts[(j + 1) * d..(j + 2) * d]];
            let s = seminorm_from_images(t, &UNIT_TRIANGLE, img)?;
            sum += 0.5 * jacobian(&s, self.p.mu)? * image_weight(t, img);
        }
        Ok(sum)
    }

    /// Fan over boundary edge `i` (from boundary vertex `i` to `i + 1`).
    fn edge_fan(&self, b: &[f64], i: usize) -> Result<f64> {
        let k = b.len();
        if i + 1 < k {
            self.fan(b[i], b[i + 1])
        } else {
            self.fan(b[k - 1], b[0] + self.p.boundary.length())
        }
    }

    fn fans(&self, x: &[f64]) -> Result<f64> {
        let b = &x[self.layout.boundary_offset()..];
        let vals: Vec<f64> = par::map_range(b.len(), |i| self.edge_fan(b, i)).into_iter().collect::<Result<_>>()?;
        Ok(par::pairwise_sum(&vals))
    }

    /// Area (mesh plus boundary fans) and energy at `x`.
    fn area_energy(&self, x: &[f64]) -> Result<(f64, f64)> {
        let (a, e) = self.parts(&self.images(x))?;
        Ok((a + self.fans(x)?, e))
    }
}

impl Objective for PlateauObjective<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let (a, e) = self.area_energy(x)?;
        Ok(a + self.lambda * e)
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) -> Result<()> {
        let img = self.images(x);
        let t = &self.p.target;
        let d = t.coord_dim();
        let pd = self.layout.pd;
        let bo = self.layout.boundary_offset();
        let h = self.h;
        let vals = par::map_range(x.len(), |k| -> Result<f64> {
            let v = self.param_vertex[k];
            let mut plus = vec![0.0; d];
            let mut minus = vec![0.0; d];
            let (mut fan_p, mut fan_m, mut fan_0) = (0.0, 0.0, 0.0);
            if k >= bo {
                let i = k - bo;
                if self.p.anchors.contains(&i) {
                    return Ok(0.0);
                }
                self.p.boundary.point(t, x[k] + h, &mut plus);
                self.p.boundary.point(t, x[k] - h, &mut minus);
                let nb = self.layout.nb;
                let prev = (i + nb - 1) % nb;
                let mut b = x[bo..].to_vec();
                let fans = |b: &[f64]| -> Result<f64> { Ok(self.edge_fan(b, prev)? + self.edge_fan(b, i)?) };
                fan_0 = fans(&b)?;
                b[i] = x[k] + h;
                fan_p = fans(&b)?;
                b[i] = x[k] - h;
                fan_m = fans(&b)?;
            } else {
                let o = (k / pd) * pd;
                let mut z = x[o..o + pd].to_vec();
                z[k - o] += h;
                t.from_params(&z, &mut plus);
                z[k - o] -= 2.0 * h;
                t.from_params(&z, &mut minus);
            }
            let mut fp = self.local(&img, v, &plus)? + fan_p;
            let mut fm = self.local(&img, v, &minus)? + fan_m;
            if k >= bo {
                // one-sided differences at ties with a neighbour parameter
                let (i, nb, len) = (k - bo, self.layout.nb, self.p.boundary.length());
                let next = if i + 1 < nb { x[k + 1] } else { x[bo] + len };
                let prev = if i > 0 { x[k - 1] } else { x[bo + nb - 1] - len };
                if x[k] + h > next {
                    fp = f64::INFINITY;
                }
                if x[k] - h < prev {
                    fm = f64::INFINITY;
                }
            }
            Ok(match (fp.is_finite(), fm.is_finite()) {
                (true, true) => (fp - fm) / (2.0 * h),
                (true, false) | (false, true) => {
                    let f0 = self.local(&img, v, &img[v * d..(v + 1) * d])? + fan_0;
                    if fp.is_finite() { (fp - f0) / h } else { (f0 - fm) / h }
                }
                (false, false) => 0.0,
            })
        });
        for (gk, v) in g.iter_mut().zip(vals) {
            *gk = v?;
        }
        Ok(())
    }

    fn project(&self, x: &mut [f64]) {
        let bo = self.layout.boundary_offset();
        let b = &mut x[bo..];
        for (&a, &val) in self.p.anchors.iter().zip(&self.anchor_values) {
            b[a] = val;
        }
        let projected = anchored_project(b, &self.p.anchors, self.p.boundary.length());
        b.copy_from_slice(&projected);
    }
}

/// Initial vector: boundary parameters equispaced by arclength, interior
/// images by radial extension in chart coordinates followed by Jacobi
/// averaging sweeps.
fn initial_point(p: &PlateauProblem, layout: &Layout) -> Vec<f64> {
    let t = &p.target;
    let mesh = &p.mesh;
    let (d, pd) = (t.coord_dim(), layout.pd);
    let nb = layout.nb;
    let len = p.boundary.length();
    let mut x = vec![0.0; layout.len()];
    let bo = layout.boundary_offset();
    for i in 0..nb {
        x[bo + i] = len * i as f64 / nb as f64;
    }
    // chart parameters of every vertex
    let mut z = vec![0.0; pd * mesh.vertex_count()];
    let mut img = vec![0.0; d];
    let mut center = vec![0.0; pd];
    for (i, &v) in mesh.boundary().iter().enumerate() {
        p.boundary.point(t, x[bo + i], &mut img);
        t.to_params(&img, &mut z[v * pd..(v + 1) * pd]);
        for k in 0..pd {
            center[k] += z[v * pd + k] / nb as f64;
        }
    }
    if !p.apex_vertices.is_empty() {
        center.fill(0.0);
    }
    let mut zb = vec![0.0; pd];
    for &v in &layout.free {
        let q = mesh.vertices()[v];
        let rho = q.norm();
        let theta = q.y.atan2(q.x).rem_euclid(TAU);
        p.boundary.point(t, len * theta / TAU, &mut img);
        t.to_params(&img, &mut zb);
        for k in 0..pd {
            z[v * pd + k] = center[k] + rho * (zb[k] - center[k]);
        }
    }
    for &v in &p.apex_vertices {
        let mut apex = vec![0.0; pd];
        t.to_params(&vec![0.0; d], &mut apex);
        z[v * pd..(v + 1) * pd].copy_from_slice(&apex);
    }
    for _ in 0..p.jacobi_sweeps {
        let prev = z.clone();
        for &v in &layout.free {
            let nb = mesh.neighbors(v);
            for k in 0..pd {
                z[v * pd + k] = nb.iter().map(|&w| prev[w * pd + k]).sum::<f64>() / nb.len() as f64;
            }
        }
    }
    if p.init_jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        for &v in &layout.free {
            for k in 0..pd {
                z[v * pd + k] += p.init_jitter * rng.random_range(-1.0..1.0);
            }
        }
    }
    for (j, &v) in layout.free.iter().enumerate() {
        x[j * pd..(j + 1) * pd].copy_from_slice(&z[v * pd..(v + 1) * pd]);
    }
    x
}

/// Solves the discrete Plateau problem.
pub fn solve(p: &PlateauProblem) -> Result<SolveResult> {
    p.validate()?;
    let layout = Layout::new(p);
    let mut param_vertex = vec![0; layout.len()];
    for (j, &v) in layout.free.iter().enumerate() {
        for k in 0..layout.pd {
            param_vertex[j * layout.pd + k] = v;
        }
    }
    let bo = layout.boundary_offset();
    for (i, &v) in p.mesh.boundary().iter().enumerate() {
        param_vertex[bo + i] = v;
    }
    let x0 = initial_point(p, &layout);
    let samples = p.boundary.samples(&p.target, 64);
    let mut diam: f64 = 0.0;
    for a in &samples {
        for b in &samples {
            diam = diam.max(p.target.distance(a, b));
        }
    }
    let anchor_values = p.anchors.iter().map(|&a| x0[bo + a]).collect();
    let mut obj = PlateauObjective {
        p,
        layout,
        lambda: p.lambda_e,
        h: 1e-6 * diam,
        anchor_values,
        param_vertex,
        fan_step: p.boundary.length() / (4 * p.mesh.boundary().len()) as f64,
    };
    let mut x = x0;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = true;
    for stage in 0..=p.continuation {
        if iterations >= p.max_iters {
            converged = false;
            break;
        }
        let opts = LbfgsOptions {
            max_iterations: p.max_iters - iterations,
            first_step: 1e-2 * diam,
            ..Default::default()
        };
        let lambda = obj.lambda;
        let base = iterations;
        let out = {
            let obj_ref = &obj;
            minimize(obj_ref, &x, &opts, |it, xi, f| {
                if let Ok((a, e)) = obj_ref.area_energy(xi) {
                    trace.push(TraceRow {
                        iteration: base + it,
                        stage,
                        lambda_e: lambda,
                        area: a,
                        energy: e,
                        objective: f,
                    });
                }
            })?
        };
        iterations += out.iterations;
        converged = out.converged;
        x = out.x;
        obj.lambda *= 0.5;
    }
    let images = obj.images(&x);
    let boundary_params = x[bo..].to_vec();
    let map = PAMap::new(p.mesh.clone(), p.target.clone(), images)?;
    Ok(SolveResult {
        map,
        trace,
        converged,
        iterations,
        boundary_params,
    })
}

struct InnerObjective<'a> {
    map: &'a PAMap,
    /// Interior vertices, two coordinates each.
    free: Vec<usize>,
    /// Boundary vertices sliding on the unit circle, one angle each.
    sliding: Vec<usize>,
    h: f64,
}

impl InnerObjective<'_> {
    fn positions(&self, x: &[f64]) -> Vec<Vec2> {
        let mut pos = self.map.mesh().vertices().to_vec();
        for (j, &v) in self.free.iter().enumerate() {
            pos[v] = Vec2::new(x[2 * j], x[2 * j + 1]);
        }
        let off = 2 * self.free.len();
        for (j, &v) in self.sliding.iter().enumerate() {
            let a = x[off + j];
            pos[v] = Vec2::new(a.cos(), a.sin());
        }
        pos
    }

    /// Vertex moved by parameter `k` and its perturbed positions.
    fn perturbed(&self, k: usize, pos: &[Vec2], x: &[f64]) -> (usize, Vec2, Vec2) {
        let off = 2 * self.free.len();
        if k < off {
            let v = self.free[k / 2];
            let d = if k % 2 == 0 { Vec2::new(self.h, 0.0) } else { Vec2::new(0.0, self.h) };
            (v, pos[v] + d, pos[v] - d)
        } else {
            let v = self.sliding[k - off];
            let a = x[k];
            (v, Vec2::new((a + self.h).cos(), (a + self.h).sin()), Vec2::new((a - self.h).cos(), (a - self.h).sin()))
        }
    }

    fn tri_energy(&self, t: usize, pos: &[Vec2]) -> Result<f64> {
        let tri = self.map.mesh().triangles()[t];
        let dom = tri.map(|v| pos[v]);
        let a = 0.5 * cross(&(dom[1] - dom[0]), &(dom[2] - dom[0]));
        if a <= MIN_TRIANGLE_AREA {
            return Ok(f64::INFINITY);
        }
        let img = tri.map(|v| self.map.image(v));
        let w = image_weight(self.map.target(), img);
        Ok(seminorm_from_images(self.map.target(), &dom, img)?.max_stretch_sq() * a * w)
    }
}

impl Objective for InnerObjective<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let pos = self.positions(x);
        let vals: Vec<f64> = par::map_range(self.map.mesh().triangle_count(), |t| self.tri_energy(t, &pos))
            .into_iter()
            .collect::<Result<_>>()?;
        if vals.iter().any(|v| v.is_infinite()) {
            return Ok(f64::INFINITY);
        }
        Ok(par::pairwise_sum(&vals))
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) -> Result<()> {
        let pos = self.positions(x);
        let mesh = self.map.mesh();
        let vals = par::map_range(x.len(), |k| -> Result<f64> {
            let (v, plus, minus) = self.perturbed(k, &pos, x);
            let local = |pos: &[Vec2]| -> Result<f64> {
                let mut s = 0.0;
                for &t in mesh.vertex_triangles(v) {
                    s += self.tri_energy(t, pos)?;
                }
                Ok(s)
            };
            let mut p = pos.clone();
            p[v] = plus;
            let fp = local(&p)?;
            p[v] = minus;
            let fm = local(&p)?;
            Ok(if fp.is_finite() && fm.is_finite() { (fp - fm) / (2.0 * self.h) } else { 0.0 })
        });
        for (gk, v) in g.iter_mut().zip(vals) {
            *gk = v?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InnerVariationOptions {
    pub max_iterations: usize,
    pub rel_tol: f64,
}

impl Default for InnerVariationOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            rel_tol: 1e-10,
        }
    }
}

/// Moves domain vertices at fixed images to decrease the energy: interior
/// vertices freely, boundary vertices along the circle except three
/// anchors. The result is the same surface on a reparametrized mesh. Moves
/// that would invert a triangle are rejected.
pub fn inner_variation_pass(map: &PAMap, opts: InnerVariationOptions) -> Result<PAMap> {
    let mesh = map.mesh();
    let free: Vec<usize> = mesh.interior_vertices();
    let b = mesh.boundary();
    let k = b.len();
    let anchors = [0, k / 3, 2 * k / 3];
    let sliding: Vec<usize> = (0..k).filter(|i| !anchors.contains(i)).map(|i| b[i]).collect();
    if free.is_empty() && sliding.is_empty() {
        return Ok(map.clone());
    }
    let mut x0: Vec<f64> = free.iter().flat_map(|&v| [mesh.vertices()[v].x, mesh.vertices()[v].y]).collect();
    x0.extend(sliding.iter().map(|&v| mesh.vertices()[v].y.atan2(mesh.vertices()[v].x)));
    let obj = InnerObjective {
        map,
        free,
        sliding,
        h: 1e-6,
    };
    let e0 = obj.value(&x0)?;
    if e0 == 0.0 {
        return Ok(map.clone());
    }
    let lopts = LbfgsOptions {
        max_iterations: opts.max_iterations,
        rel_tol: opts.rel_tol,
        first_step: 0.1 * mesh.min_edge_length(),
        ..Default::default()
    };
    let out = minimize(&obj, &x0, &lopts, |_, _, _| {})?;
    if !(out.value < e0) {
        return Ok(map.clone());
    }
    let moved = mesh.with_positions(obj.positions(&out.x))?;
    PAMap::new(Arc::new(moved), map.target().clone(), map.images().to_vec())
}

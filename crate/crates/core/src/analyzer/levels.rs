//! Level sets of piecewise-linear functions on the domain mesh, measured in
//! the image.

use crate::geom::{segment_disc_overlap, sublevel_fraction, Vec2};
use crate::target::MetricTarget;

use super::Ctx;

/// The level set `{f = t}` and the sublevel region `{f <= t}`.
#[derive(Clone, Debug)]
pub(crate) struct LevelSet {
    /// Image length of the level polyline.
    pub length: f64,
    /// μ-area of the sublevel region.
    pub area: f64,
    /// Connected components of the polyline.
    pub loops: usize,
    /// Whether the sublevel region meets the domain boundary.
    pub open: bool,
    /// Vertices with `f <= t`.
    pub inside: Vec<usize>,
    /// Inside endpoints of edges crossing the level.
    pub rim: Vec<usize>,
}

impl LevelSet {
    /// A single closed loop bounding a nonempty region inside the disc.
    pub fn is_jordan(&self) -> bool {
        self.loops == 1 && !self.open && !self.inside.is_empty()
    }
}

/// Crossing of the level on edge `(a, b)`: `a` inside, `b` outside.
#[derive(Clone, Copy)]
struct Crossing {
    a: usize,
    b: usize,
    s: f64,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

impl Ctx<'_> {
    /// Pulls a per-class function back to the mesh vertices.
    pub fn vertex_values(&self, class_values: &[f64]) -> Vec<f64> {
        self.zd.projection().iter().map(|&c| class_values[c]).collect()
    }

    /// Image length of the straight segment between two crossings in triangle `t`.
    fn segment_length(&self, t: usize, p: Crossing, q: Crossing) -> f64 {
        let mesh = self.map.mesh();
        let dom = |c: Crossing| {
            let (a, b) = (mesh.vertices()[c.a], mesh.vertices()[c.b]);
            a + (b - a) * c.s
        };
        match self.map.target() {
            MetricTarget::CollapsedDisc { center, radius } => {
                let img = |c: Crossing| {
                    let (a, b) = (self.map.image(c.a), self.map.image(c.b));
                    Vec2::new(a[0] + c.s * (b[0] - a[0]), a[1] + c.s * (b[1] - a[1]))
                };
                let (pi, qi) = (img(p), img(q));
                ((pi - qi).norm() - segment_disc_overlap(&pi, &qi, center, *radius)).max(0.0)
            }
            _ => self.seminorms[t].eval(&(dom(q) - dom(p))),
        }
    }

    /// Length of the image of the boundary of triangle `t`.
    pub fn face_perimeter(&self, t: usize) -> f64 {
        let [a, b, c] = self.map.mesh().triangles()[t];
        [(a, b), (b, c), (c, a)]
            .into_iter()
            .map(|(a, b)| self.segment_length(t, Crossing { a, b, s: 0.0 }, Crossing { a, b, s: 1.0 }))
            .sum()
    }

    /// μ-area of `{f <= level}` with `f` affine on each triangle.
    pub fn sublevel_area(&self, f: &[f64], level: f64) -> f64 {
        let mesh = self.map.mesh();
        let parts: Vec<f64> = mesh
            .triangles()
            .iter()
            .zip(&self.area)
            .map(|(tri, a)| if *a == 0.0 { 0.0 } else { a * sublevel_fraction(tri.map(|v| f[v]), level) })
            .collect();
        crate::par::pairwise_sum(&parts)
    }

    pub fn level_set(&self, f: &[f64], level: f64) -> LevelSet {
        let mesh = self.map.mesh();
        let inside_flag: Vec<bool> = f.iter().map(|v| *v <= level).collect();
        let inside: Vec<usize> = (0..f.len()).filter(|&v| inside_flag[v]).collect();
        let open = mesh.boundary().iter().any(|&v| inside_flag[v]);
        let mut dsu = Dsu((0..self.edge_index.len()).collect());
        let mut degree = vec![0u8; self.edge_index.len()];
        let mut crossed = Vec::new();
        let mut length = 0.0;
        let mut lengths = Vec::new();
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let n_in = tri.iter().filter(|&&v| inside_flag[v]).count();
            if n_in == 0 || n_in == 3 {
                continue;
            }
            let mut cr = [Crossing { a: 0, b: 0, s: 0.0 }; 2];
            let mut ids = [0usize; 2];
            let mut k = 0;
            for i in 0..3 {
                let (u, v) = (tri[i], tri[(i + 1) % 3]);
                if inside_flag[u] == inside_flag[v] {
                    continue;
                }
                let (a, b) = if inside_flag[u] { (u, v) } else { (v, u) };
                let s = ((level - f[a]) / (f[b] - f[a])).clamp(0.0, 1.0);
                cr[k] = Crossing { a, b, s };
                ids[k] = self.edge_index[&(u.min(v), u.max(v))];
                k += 1;
            }
            dsu.union(ids[0], ids[1]);
            for id in ids {
                if degree[id] == 0 {
                    crossed.push(id);
                }
                degree[id] += 1;
            }
            lengths.push(self.segment_length(t, cr[0], cr[1]));
        }
        length += crate::par::pairwise_sum(&lengths);
        // a crossed edge seen by one triangle lies on the domain boundary
        let open = open || crossed.iter().any(|&e| degree[e] < 2);
        let mut roots: Vec<usize> = crossed.iter().map(|&e| dsu.find(e)).collect();
        roots.sort_unstable();
        roots.dedup();
        let mut rim: Vec<usize> = crossed
            .iter()
            .map(|&e| {
                let (u, v) = self.edges[e];
                if inside_flag[u] {
                    u
                } else {
                    v
                }
            })
            .collect();
        rim.sort_unstable();
        rim.dedup();
        LevelSet {
            length,
            area: self.sublevel_area(f, level),
            loops: roots.len(),
            open,
            inside,
            rim,
        }
    }
}

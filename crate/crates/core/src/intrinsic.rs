//! The intrinsic disc `Z`: the length pseudo-metric `d_u` of a map on the
//! mesh vertices, its metric quotient, the projection `P` and the factor
//! map `ū`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mesh::PAMap;
use crate::target::MetricTarget;
use crate::{io, par, Error, Result};

/// Weighted graph in compressed adjacency form.
#[derive(Clone, Debug)]
pub struct LengthGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl LengthGraph {
    /// Builds a graph from undirected edges; parallel edges keep the
    /// smallest weight.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut best: HashMap<(usize, usize), f64> = HashMap::with_capacity(edges.len());
        for &(a, b, w) in edges {
            if a == b {
                continue;
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidMesh(format!("edge ({a}, {b}) has weight {w}")));
            }
            let key = (a.min(b), a.max(b));
            best.entry(key).and_modify(|x| *x = x.min(w)).or_insert(w);
        }
        let mut sorted: Vec<((usize, usize), f64)> = best.into_iter().collect();
        sorted.sort_by(|x, y| x.0.cmp(&y.0));
        let mut degree = vec![0usize; n + 1];
        for &((a, b), _) in &sorted {
            degree[a + 1] += 1;
            degree[b + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for &((a, b), w) in &sorted {
            targets[fill[a]] = b;
            weights[fill[a]] = w;
            fill[a] += 1;
            targets[fill[b]] = a;
            weights[fill[b]] = w;
            fill[b] += 1;
        }
        Ok(Self { offsets, targets, weights })
    }

    /// The length graph of a map: mesh edges plus, for every interior edge,
    /// the diagonal joining the two opposite vertices; weights are target
    /// distances between images.
    pub fn of_map(map: &PAMap) -> Result<Self> {
        let mesh = map.mesh();
        let mut pairs = mesh.edges();
        let mut opposite: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in mesh.triangles() {
            for i in 0..3 {
                let (a, b, c) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let key = (a.min(b), a.max(b));
                if let Some(d) = opposite.insert(key, c) {
                    pairs.push((c.min(d), c.max(d)));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let t = map.target();
        let edges: Vec<(usize, usize, f64)> =
            pairs.iter().map(|&(a, b)| (a, b, t.distance(map.image(a), map.image(b)))).collect();
        Self::from_edges(mesh.vertex_count(), &edges)
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    /// Undirected edges `(a, b, w)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for a in 0..self.node_count() {
            for (b, w) in self.neighbors(a) {
                if a < b {
                    out.push((a, b, w));
                }
            }
        }
        out
    }

    /// Connected components as a label per node, plus the count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for (w, _) in self.neighbors(v) {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Shortest-path distances from `source` (Dijkstra).
    pub fn sssp(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.node_count()];
        self.sssp_into(source, &mut dist);
        dist
    }

    fn sssp_into(&self, source: usize, dist: &mut [f64]) {
        dist.fill(f64::INFINITY);
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem(0.0, source));
        while let Some(HeapItem(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for (w, len) in self.neighbors(v) {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(HeapItem(nd, w));
                }
            }
        }
    }

    /// All-pairs shortest paths, row-major. Errors if disconnected.
    pub fn apsp(&self) -> Result<Vec<f64>> {
        let (_, count) = self.components();
        if count > 1 {
            return Err(Error::Disconnected { components: count });
        }
        let n = self.node_count();
        let mut out = vec![0.0; n * n];
        par::for_each_chunk_mut(&mut out, n, |row, chunk| self.sssp_into(row, chunk));
        symmetrize(n, &mut out);
        Ok(out)
    }
}

/// Dijkstra sums in different orders can differ in the last bit.
fn symmetrize(n: usize, d: &mut [f64]) {
    for i in 0..n {
        for j in i + 1..n {
            let m = d[i * n + j].min(d[j * n + i]);
            d[i * n + j] = m;
            d[j * n + i] = m;
        }
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins for deterministic labels
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// The metric quotient of the mesh vertices under `d_u`.
#[derive(Clone, Debug)]
pub struct IntrinsicDisc {
    target: MetricTarget,
    /// Vertex ids of each class, ascending; classes ordered by smallest member.
    classes: Vec<Vec<usize>>,
    projection: Vec<usize>,
    dist: Vec<f64>,
    boundary: Vec<usize>,
    ubar: Vec<Vec<f64>>,
    triangle_classes: Vec<[usize; 3]>,
    /// μ-independent data of the source map kept for area sums.
    graph: LengthGraph,
    tol: f64,
}

/// Connectivity of the fibers of `P`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberReport {
    pub merged_classes: usize,
    pub disconnected_fibers: Vec<usize>,
}

impl IntrinsicDisc {
    /// Quotient with the default tolerance `1e-6 · diameter`.
    pub fn from_map(map: &PAMap) -> Result<Self> {
        Self::from_map_with_tol(map, None)
    }

    /// Quotient merging vertex pairs at `d_u ≤ tol`.
    pub fn from_map_with_tol(map: &PAMap, tol: Option<f64>) -> Result<Self> {
        let graph = LengthGraph::of_map(map)?;
        let n = graph.node_count();
        let d = graph.apsp()?;
        let diam = d.iter().copied().fold(0.0, f64::max);
        let tol = tol.unwrap_or(1e-6 * diam);
        let mut uf = UnionFind::new(n);
        // all pairs, not only edges: zero-distance pairs need not be adjacent
        for i in 0..n {
            for j in i + 1..n {
                if d[i * n + j] <= tol {
                    uf.union(i, j);
                }
            }
        }
        let mut root_class: HashMap<usize, usize> = HashMap::new();
        let mut projection = vec![0; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            let r = uf.find(v);
            let c = *root_class.entry(r).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            projection[v] = c;
            classes[c].push(v);
        }
        let k = classes.len();
        // d_u between class representatives: a metric on the classes, and
        // unlike the contracted graph it cannot shorten paths by the merge
        // tolerance, so ū stays exactly 1-Lipschitz
        let dist = if k == n {
            d
        } else {
            let reps: Vec<usize> = classes.iter().map(|c| c[0]).collect();
            let mut out = Vec::with_capacity(k * k);
            for &a in &reps {
                out.extend(reps.iter().map(|&b| d[a * n + b]));
            }
            out
        };
        let mesh = map.mesh();
        let mut boundary: Vec<usize> = Vec::new();
        for &v in mesh.boundary() {
            let c = projection[v];
            if boundary.last() != Some(&c) {
                boundary.push(c);
            }
        }
        while boundary.len() > 1 && boundary.first() == boundary.last() {
            boundary.pop();
        }
        let ubar = classes.iter().map(|c| map.image(c[0]).to_vec()).collect();
        let triangle_classes = mesh.triangles().iter().map(|t| t.map(|v| projection[v])).collect();
        Ok(Self {
            target: map.target().clone(),
            classes,
            projection,
            dist,
            boundary,
            ubar,
            triangle_classes,
            graph,
            tol,
        })
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    /// `P`: vertex to class.
    pub fn projection(&self) -> &[usize] {
        &self.projection
    }

    pub fn class_of(&self, v: usize) -> usize {
        self.projection[v]
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.class_count() + b]
    }

    pub fn dist_row(&self, a: usize) -> &[f64] {
        let k = self.class_count();
        &self.dist[a * k..(a + 1) * k]
    }

    pub fn dist_matrix(&self) -> &[f64] {
        &self.dist
    }

    /// `ū` at a class: the image of its representative.
    pub fn ubar(&self, c: usize) -> &[f64] {
        &self.ubar[c]
    }

    pub fn target(&self) -> &MetricTarget {
        &self.target
    }

    pub fn triangle_classes(&self) -> &[[usize; 3]] {
        &self.triangle_classes
    }

    pub fn graph(&self) -> &LengthGraph {
        &self.graph
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// The class cycle `∂Z` and its length.
    pub fn boundary_cycle(&self) -> Result<(&[usize], f64)> {
        if self.boundary.len() < 2 {
            return Err(Error::DegenerateBoundary(format!("boundary collapses to {} class(es)", self.boundary.len())));
        }
        let k = self.boundary.len();
        let len = (0..k).map(|i| self.dist(self.boundary[i], self.boundary[(i + 1) % k])).sum();
        Ok((&self.boundary, len))
    }

    /// Whether each class is connected in the mesh; lists the classes
    /// whose fibers are not.
    pub fn fiber_report(&self) -> FiberReport {
        let mut disconnected = Vec::new();
        let mut merged = 0;
        for (c, members) in self.classes.iter().enumerate() {
            if members.len() < 2 {
                continue;
            }
            merged += 1;
            let mut seen = vec![members[0]];
            let mut stack = vec![members[0]];
            while let Some(v) = stack.pop() {
                for (w, _) in self.graph.neighbors(v) {
                    if self.projection[w] == c && !seen.contains(&w) {
                        seen.push(w);
                        stack.push(w);
                    }
                }
            }
            if seen.len() != members.len() {
                disconnected.push(c);
            }
        }
        FiberReport {
            merged_classes: merged,
            disconnected_fibers: disconnected,
        }
    }

    /// Largest violation of `d_X(ū p, ū q) ≤ d_Z(p, q)` over class pairs
    /// (non-positive when `ū` is 1-Lipschitz).
    pub fn lipschitz_excess(&self) -> f64 {
        let k = self.class_count();
        let rows = par::map_range(k, |a| {
            (a + 1..k)
                .map(|b| self.target.distance(&self.ubar[a], &self.ubar[b]) - self.dist(a, b))
                .fold(f64::NEG_INFINITY, f64::max)
        });
        rows.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest violation of the triangle inequality over class triples
    /// (non-positive for a metric).
    pub fn triangle_excess(&self) -> f64 {
        let k = self.class_count();
        let rows = par::map_range(k, |a| {
            let mut worst = f64::NEG_INFINITY;
            for b in 0..k {
                let ab = self.dist(a, b);
                for c in 0..k {
                    worst = worst.max(self.dist(a, c) - ab - self.dist(b, c));
                }
            }
            worst
        });
        rows.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `z_space.json` and the distance matrix `z_dist.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let k = self.class_count();
        io::write_text(&dir.join("z_dist.csv"), &io::matrix_csv(k, &self.dist))?;
        let file = ZSpaceFile {
            schema_version: crate::SCHEMA_VERSION,
            classes: self.classes.clone(),
            dist_csv: "z_dist.csv".into(),
            boundary: self.boundary.clone(),
            ubar: self.ubar.clone(),
            tolerance: self.tol,
        };
        io::write_json(&dir.join("z_space.json"), &file)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ZSpaceFile {
    pub schema_version: u32,
    pub classes: Vec<Vec<usize>>,
    pub dist_csv: String,
    pub boundary: Vec<usize>,
    pub ubar: Vec<Vec<f64>>,
    pub tolerance: f64,
}

/// Normalized distortion `max |d_Z(p, q) − d_ref(φ p, φ q)| / diam_ref`
/// for the correspondence `points[c] = φ(c)`.
pub fn compare_metric(zd: &IntrinsicDisc, reference: &MetricTarget, points: &[Vec<f64>]) -> Result<f64> {
    let k = zd.class_count();
    if points.len() != k {
        return Err(Error::Analysis(format!("{} reference points for {k} classes", points.len())));
    }
    let rows = par::map_range(k, |a| {
        let mut err: f64 = 0.0;
        let mut diam: f64 = 0.0;
        for b in a + 1..k {
            let r = reference.distance(&points[a], &points[b]);
            diam = diam.max(r);
            err = err.max((zd.dist(a, b) - r).abs());
        }
        (err, diam)
    });
    let (err, diam) = rows.into_iter().fold((0.0f64, 0.0f64), |(e, d), (x, y)| (e.max(x), d.max(y)));
    Ok(if diam > 0.0 { err / diam } else { err })
}

use std::sync::Arc;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mindisc::intrinsic::LengthGraph;
use mindisc::mesh::make_disc_mesh;
use mindisc::par::{self, Mode};
use mindisc::{AreaDef, IntrinsicDisc, MetricTarget, PAMap};

/// A curved map into the sup-norm plane, so the area kernel meets
/// polygonal pullbacks.
fn swirl(rings: usize) -> PAMap {
    let mesh = Arc::new(make_disc_mesh(rings).unwrap());
    PAMap::from_fn(mesh, MetricTarget::sup(2), |p| {
        let a = 1.5 * p.norm();
        vec![p.x * a.cos() - p.y * a.sin(), p.x * a.sin() + p.y * a.cos()]
    })
    .unwrap()
}

const MODES: [(&str, Mode); 2] = [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)];

fn area(c: &mut Criterion) {
    let map = swirl(24);
    let mut g = c.benchmark_group("area_holmes_thompson");
    for (name, mode) in MODES {
        par::set_mode(mode);
        g.bench_function(BenchmarkId::new(name, 24), |b| b.iter(|| map.area_mu(AreaDef::HolmesThompson, None).unwrap()));
    }
    par::set_mode(Mode::Parallel);
    g.finish();
}

fn shortest_paths(c: &mut Criterion) {
    let map = swirl(12);
    let graph = LengthGraph::of_map(&map).unwrap();
    let mut g = c.benchmark_group("all_pairs_shortest_paths");
    for (name, mode) in MODES {
        par::set_mode(mode);
        g.bench_function(BenchmarkId::new(name, graph.node_count()), |b| b.iter(|| graph.apsp().unwrap()));
    }
    par::set_mode(Mode::Parallel);
    g.finish();
}

fn lipschitz(c: &mut Criterion) {
    let map = swirl(12);
    let zd = IntrinsicDisc::from_map(&map).unwrap();
    let mut g = c.benchmark_group("lipschitz_excess");
    for (name, mode) in MODES {
        par::set_mode(mode);
        g.bench_function(BenchmarkId::new(name, zd.class_count()), |b| b.iter(|| zd.lipschitz_excess()));
    }
    par::set_mode(Mode::Parallel);
    g.finish();
}

fn config() -> Criterion {
    Criterion::default().sample_size(10).measurement_time(Duration::from_secs(5))
}

criterion_group! {
    name = benches;
    config = config();
    targets = area, shortest_paths, lipschitz
}
criterion_main!(benches);

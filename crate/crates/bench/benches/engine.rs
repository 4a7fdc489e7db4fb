//! Benchmarks for the hot paths: single mutations, green-sequence
//! replay, flips, the staged construction, and class enumeration.

use criterion::{criterion_group, criterion_main, Criterion};

use mgs_core::construct::construct_closed;
use mgs_core::quiver::apply_green_sequence;
use mgs_core::search::{enumerate_class, seed};
use mgs_core::surface::parse_triangulation;

const TORUS4: &str = include_str!("../../core/fixtures/torus4.json");
const GENUS2_10: &str = include_str!("../../core/fixtures/genus2_10.json");

fn bench_mutation(c: &mut Criterion) {
    let q = parse_triangulation(TORUS4).unwrap().quiver().unwrap();
    c.bench_function("mutate_torus4_vertex", |b| {
        b.iter(|| q.mutate(std::hint::black_box(1)).unwrap())
    });
    let t = parse_triangulation(GENUS2_10).unwrap();
    let full = construct_closed(&t).unwrap().full;
    let framed = t.quiver().unwrap().framed().unwrap();
    c.bench_function("replay_100_step_sequence", |b| {
        b.iter(|| apply_green_sequence(&framed, std::hint::black_box(&full)).unwrap())
    });
}

fn bench_surface(c: &mut Criterion) {
    let t = parse_triangulation(GENUS2_10).unwrap();
    c.bench_function("flip_genus2_arc", |b| {
        b.iter(|| t.flip(std::hint::black_box(3)).unwrap())
    });
    c.bench_function("construct_genus2_10", |b| {
        b.iter(|| construct_closed(std::hint::black_box(&t)).unwrap())
    });
}

fn bench_search(c: &mut Criterion) {
    let q = seed("e6").unwrap();
    c.bench_function("enumerate_e6_class", |b| {
        b.iter(|| enumerate_class(std::hint::black_box(&q), 1000).unwrap())
    });
}

criterion_group!(benches, bench_mutation, bench_surface, bench_search);
criterion_main!(benches);

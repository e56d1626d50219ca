use std::hint::black_box;

use blowup_core::boundary::{bulk_in_chart, collision_field};
use blowup_core::graf::{comparability_audit, count_free_boundary_components_d1, tie_fraction, GrafQuery};
use blowup_core::parallel::Exec;
use blowup_core::sampling::{configuration, rng_for, unit_direction};
use blowup_core::{MassSystem, Partition};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn graf(c: &mut Criterion) {
    let line = MassSystem::uniform(1, vec![1.0, 1.5, 2.0, 0.7], 1.0, 1.0).unwrap();
    let plane = MassSystem::uniform(2, vec![1.0, 1.5, 2.0, 0.7], 1.0, 1.0).unwrap();
    let q_line = GrafQuery::new(&line, 1e-3).unwrap();
    let q_plane = GrafQuery::new(&plane, 1e-3).unwrap();

    let mut group = c.benchmark_group("graf");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new("components_n4", name), &exec, |b, &e| {
            b.iter(|| count_free_boundary_components_d1(&q_line, 8, 1, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("comparability_5000", name), &exec, |b, &e| {
            b.iter(|| comparability_audit(&q_plane, 5000, 2, e).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("tie_fraction_20000", name), &exec, |b, &e| {
            b.iter(|| tie_fraction(&q_plane, 20_000, 3, e).unwrap())
        });
    }
    group.finish();
}

fn chart_fields(c: &mut Criterion) {
    let sys = MassSystem::uniform(3, vec![1.0, 2.0, 0.5, 1.5, 1.0], 1.0, 1.0).unwrap();
    let part = Partition::new(5, vec![vec![0, 1, 2], vec![3, 4]]).unwrap();
    let sweep = |e: Exec| {
        e.map(4096, |k| {
            let mut rng = rng_for(4, k as u64);
            let q = configuration(&sys, &mut rng, 1.0);
            let w = unit_direction(&sys, &mut rng);
            let s = bulk_in_chart(&sys, &part, &q, &w, 0.5).unwrap().state;
            collision_field(&sys, &s).unwrap().v_int
        })
    };
    let mut group = c.benchmark_group("collision_field_sweep");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &e| b.iter(|| black_box(sweep(e))));
    }
    group.finish();
}

criterion_group!(benches, graf, chart_fields);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use homflow::homgeom::{koszul_ricci, ricci_operator};
use homflow::strata::{moment_flow, moment_map};
use homflow_bench::{bracket, entry, scenario};

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("ricci");
    for name in ["h3", "rh_5", "sl2r_so2", "so23_so3"] {
        let e = entry(name);
        group.bench_function(name, |b| b.iter(|| ricci_operator(black_box(e.space()), black_box(e.metric()))));
    }
    let e = entry("rh_5");
    let g = e.metric().gram().clone();
    group.bench_function("rh_5 koszul", |b| b.iter(|| koszul_ricci(black_box(e.space().split_algebra()), black_box(&g))));
    group.finish();
}

fn strata(c: &mut Criterion) {
    let mut group = c.benchmark_group("strata");
    let mu = bracket("sl2r_semidirect_r2");
    group.bench_function("moment_map sl2r_semidirect_r2", |b| b.iter(|| moment_map(black_box(&mu))));
    for name in ["h3", "nonstandard4"] {
        let mu = bracket(name);
        group.bench_function(format!("moment_flow {name}"), |b| b.iter(|| moment_flow(black_box(&mu), 100_000, 1e-9)));
    }
    group.finish();
}

fn flow(c: &mut Criterion) {
    let mut group = c.benchmark_group("cohom1");
    group.sample_size(10);
    let sc = scenario(
        r#"{"entry": "rh_3", "t_end": 0.5, "metric": [[2.4, 0, 0], [0, 2, 0.2], [0, 0.2, 1.8]],
            "lam0": [[0.05, 0, 0], [0, -0.08, 0], [0, 0, -0.08]]}"#,
    );
    let init = sc.initial_state().expect("initial state");
    group.bench_function("integrate rh_3 500 steps", |b| {
        b.iter(|| sc.system.integrate(black_box(init.clone()), 0.5, 1e-3))
    });
    group.finish();
}

criterion_group!(benches, curvature, strata, flow);
criterion_main!(benches);

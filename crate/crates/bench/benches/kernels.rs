use criterion::{criterion_group, criterion_main, Criterion};
use graphwave::diophantine::{continued_fraction, dirichlet_simultaneous};
use graphwave::ggcc::{evaluate, optimal_watershed};
use graphwave::graph::normalize;
use graphwave::quasimodes::{build_quasimode, find_violating_path, metrics};
use graphwave::scenario::{self, catalog};
use graphwave::spectral::{eigenvalues, EigenOptions};
use graphwave::wavesim::{default_probes, observability_ratio};
use graphwave::Real;
use std::hint::black_box;

fn ggcc(c: &mut Criterion) {
    let cat = catalog();
    c.bench_function("evaluate catalog", |b| {
        b.iter(|| {
            for s in &cat {
                black_box(evaluate(&normalize(&s.graph, &s.omega)));
            }
        })
    });
    let bot = scenario::build("bot_graph", &[]).unwrap();
    let n = normalize(&bot.graph, &bot.omega);
    c.bench_function("optimal watershed bot_graph", |b| b.iter(|| black_box(optimal_watershed(&n))));
}

fn spectrum(c: &mut Criterion) {
    let x = scenario::build("x_graph", &[]).unwrap();
    let opts = EigenOptions::default();
    c.bench_function("eigenvalues x_graph k<=40", |b| b.iter(|| black_box(eigenvalues(&x.graph, 40.0, &opts).unwrap())));
}

fn quasimode(c: &mut Criterion) {
    let x = scenario::build("x_graph", &[]).unwrap();
    let n = normalize(&x.graph, &x.omega);
    let path = find_violating_path(&n).unwrap();
    c.bench_function("quasimode n=512 with quadrature", |b| {
        b.iter(|| {
            let qm = build_quasimode(&n.graph, &path, 512).unwrap();
            black_box(metrics(&n.graph, &qm))
        })
    });
}

fn waves(c: &mut Criterion) {
    let bot = scenario::build("bot_graph", &[]).unwrap();
    let n = normalize(&bot.graph, &bot.omega);
    let probes = default_probes(&bot.graph, &n);
    let mut g = c.benchmark_group("observability");
    g.sample_size(20);
    g.bench_function("bot_graph T=4.2", |b| {
        b.iter(|| black_box(observability_ratio(&bot.graph, &bot.omega, 4.2, &probes).unwrap()))
    });
    g.finish();
}

fn diophantine(c: &mut Criterion) {
    let e = Real::e();
    c.bench_function("continued fraction e depth 200", |b| b.iter(|| black_box(continued_fraction(&e, 200))));
    c.bench_function("simultaneous d=3 N=30", |b| {
        b.iter(|| black_box(dirichlet_simultaneous(&[0.4142135623730951, 0.7182818284590452, 0.1415926535897932], 30)))
    });
}

criterion_group!(benches, ggcc, spectrum, quasimode, waves, diophantine);
criterion_main!(benches);

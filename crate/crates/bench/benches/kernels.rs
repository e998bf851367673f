use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hyperprop::hypergraph::{build_knn_hypergraph, knn_indices};
use hyperprop::nn::{forward, loss_and_gradients, TrainConfig, TwoLayerParams};
use hyperprop::ssl::{propagate_labels, PropagationConfig};
use hyperprop_bench::{features, fixture};

fn sparse_products(c: &mut Criterion) {
    let mut g = c.benchmark_group("sparse");
    for n in [1000, 4000] {
        let f = fixture(n, 50);
        let x = features(&f).clone();
        g.bench_with_input(BenchmarkId::new("theta_times_dense", n), &n, |b, _| {
            b.iter(|| black_box(f.sym.apply(&x).unwrap()))
        });
        let hg = build_knn_hypergraph(&x, 5, true).unwrap();
        let h = hg.incidence().clone();
        let ht = h.transpose();
        g.bench_with_input(BenchmarkId::new("h_times_ht", n), &n, |b, _| {
            b.iter(|| black_box(h.mul_sparse(&ht).unwrap()))
        });
    }
    g.finish();
}

fn knn(c: &mut Criterion) {
    let mut g = c.benchmark_group("knn");
    g.sample_size(10);
    for (n, dim) in [(2000, 50), (2000, 300)] {
        let f = fixture(n, dim);
        g.bench_with_input(BenchmarkId::new(format!("k5_dim{dim}"), n), &n, |b, _| {
            b.iter(|| black_box(knn_indices(features(&f), 5).unwrap()))
        });
    }
    g.finish();
}

fn label_propagation(c: &mut Criterion) {
    let mut g = c.benchmark_group("cg");
    g.sample_size(10);
    let f = fixture(4000, 50);
    let cfg = PropagationConfig::default();
    g.bench_function("propagate_labels_n4000_c10", |b| {
        b.iter(|| black_box(propagate_labels(&f.sym, &f.pm1, &cfg).unwrap()))
    });
    g.finish();
}

fn train_epoch(c: &mut Criterion) {
    let mut g = c.benchmark_group("nn");
    let f = fixture(4000, 50);
    let cfg = TrainConfig::default();
    let params = TwoLayerParams::glorot(50, cfg.hidden, 10, 1);
    let x = features(&f);
    let labeled = f.dataset.train_indices();
    g.bench_function("forward_backward_n4000", |b| {
        b.iter(|| {
            let t = forward(&f.sym, x, &params).unwrap();
            black_box(loss_and_gradients(&f.sym, &t, &f.onehot, labeled, &params, cfg.weight_decay).unwrap())
        })
    });
    g.finish();
}

criterion_group!(benches, sparse_products, knn, label_propagation, train_epoch);
criterion_main!(benches);

//! Acceptance criteria, one PASS/FAIL line each.
//!
//! `cargo test --release --test acceptance` runs criteria 1-5. Add
//! `-- --data` to also run the dataset criteria 6-10, which read
//! `HYPERPROP_DATA_DIR` (default `data`) with `usps/`, `mnist/` and
//! `fashion/` subdirectories laid out as described in the README.
//! Runtime budgets are enforced only in optimized builds.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hyperprop::experiment::{
    median_grid, run_experiment, DatasetKind, ExperimentConfig, Method, ResultRow, RunOptions,
};
use hyperprop::hypergraph::{build_knn_hypergraph, hypergraph_operator, Hypergraph};
use hyperprop::labels::{encode_labels, inject_noise, LabelScheme, NoisySplit};
use hyperprop::nn::{forward, forward_proposed, loss_and_gradients, TwoLayerParams};
use hyperprop::ssl::{propagate_features, propagate_labels, PropagationConfig};
use hyperprop::{oracle, DenseMatrix, Normalization};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within_budget(elapsed: Duration, budget_s: u64) -> bool {
    cfg!(debug_assertions) || elapsed.as_secs_f64() < budget_s as f64
}

fn clean_split(labels: Vec<usize>) -> NoisySplit {
    NoisySplit {
        clean_labels: labels.clone(),
        noisy_labels: labels,
        flipped: vec![],
        level: 0.0,
        seed: 0,
    }
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let cfg_for = |alpha| PropagationConfig {
        alpha,
        tol: 1e-12,
        max_iter: 10_000,
    };
    let mut worst: f64 = 0.0;
    for case in 0..20u64 {
        let n = 10 + (case as usize * 7) % 41;
        let hg = oracle::random_hypergraph(n, n, 6, 1000 + case);
        let op = hypergraph_operator(&hg, Normalization::Sym).unwrap();
        let theta = op.matrix().to_dense();
        let labels: Vec<usize> = (0..n).map(|i| (i * 5 + case as usize) % 4).collect();
        let labeled: Vec<usize> = (0..n).filter(|i| i % 3 == 0).collect();
        let y = encode_labels(&clean_split(labels), &labeled, 4, LabelScheme::Pm1).unwrap();
        let x = oracle::random_dense(n, 3, 2000 + case);
        for alpha in [0.5, 0.9, 0.99] {
            let f = propagate_labels(&op, &y, &cfg_for(alpha)).unwrap();
            worst = worst.max(oracle::max_abs_diff(&f, &oracle::dense_propagation(&theta, &y.values, alpha)));
            let g = propagate_features(&op, &x, &cfg_for(alpha)).unwrap();
            worst = worst.max(oracle::max_abs_diff(&g, &oracle::dense_propagation(&theta, &x, alpha)));
        }
    }
    let t = started.elapsed();
    outcome(
        worst <= 1e-8 && within_budget(t, 10),
        format!("max entrywise error {worst:.2e} over 20 hypergraphs × 3 alphas ({:.2}s)", t.as_secs_f64()),
    )
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for seed in 0..3u64 {
        let n = 9 + seed as usize;
        let hg = oracle::random_hypergraph(n, n, 4, 300 + seed);
        let x = oracle::random_dense(n, 6, 400 + seed);
        let labels: Vec<usize> = (0..n).map(|i| (i + seed as usize) % 4).collect();
        let labeled: Vec<usize> = (0..n).filter(|i| i % 4 != 3).collect();
        let y = encode_labels(&clean_split(labels), &labeled, 4, LabelScheme::OneHot).unwrap();
        let sym = hypergraph_operator(&hg, Normalization::Sym).unwrap();
        let rw = hypergraph_operator(&hg, Normalization::Rw).unwrap();
        let f = propagate_features(&sym, &x, &PropagationConfig::default()).unwrap();
        let variants: [(&_, &DenseMatrix, bool); 3] = [(&sym, &x, false), (&rw, &x, false), (&sym, &f, true)];
        for (op, input, proposed) in variants {
            let params = TwoLayerParams::glorot(6, 5, 4, 500 + seed);
            let run = |p: &TwoLayerParams| {
                if proposed {
                    forward_proposed(op, input, p).unwrap()
                } else {
                    forward(op, input, p).unwrap()
                }
            };
            let loss = |p: &TwoLayerParams| loss_and_gradients(op, &run(p), &y, &labeled, p, 5e-4).unwrap().0;
            let (_, g) = loss_and_gradients(op, &run(&params), &y, &labeled, &params, 5e-4).unwrap();
            let fd1 = oracle::finite_difference_gradient(
                |t| loss(&TwoLayerParams { theta1: t.clone(), theta2: params.theta2.clone() }),
                &params.theta1,
                1e-5,
            );
            let fd2 = oracle::finite_difference_gradient(
                |t| loss(&TwoLayerParams { theta1: params.theta1.clone(), theta2: t.clone() }),
                &params.theta2,
                1e-5,
            );
            for (a, b) in g.theta1.iter().zip(&fd1).chain(g.theta2.iter().zip(&fd2)) {
                worst = worst.max(relative_error(*a, *b));
            }
            instances += 1;
        }
    }
    let t = started.elapsed();
    outcome(
        worst < 1e-5 && within_budget(t, 10),
        format!("max relative error {worst:.2e} on {instances} instances (sym, rw, propagated) ({:.2}s)", t.as_secs_f64()),
    )
}

fn criterion_3() -> Outcome {
    let started = Instant::now();
    let mut row_sum_err: f64 = 0.0;
    let mut asym: f64 = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for case in 0..6u64 {
        let n = 20 + 16 * case as usize;
        let x = oracle::random_dense(n, 4, 700 + case);
        let hg = build_knn_hypergraph(&x, 5, true).unwrap();
        let sym = hypergraph_operator(&hg, Normalization::Sym).unwrap();
        let rw = hypergraph_operator(&hg, Normalization::Rw).unwrap();
        for s in rw.matrix().row_sums() {
            row_sum_err = row_sum_err.max((s - 1.0).abs());
        }
        asym = asym.max(sym.matrix().max_asymmetry());
        let ev = oracle::symmetric_eigenvalues(&sym.matrix().to_dense());
        lo = lo.min(ev[0]);
        hi = hi.max(*ev.last().unwrap());
    }
    let two = Hypergraph::from_edges(2, &[vec![0, 1], vec![0, 1]], vec![1.0, 1.0]).unwrap();
    let hand = hypergraph_operator(&two, Normalization::Sym).unwrap().matrix().to_dense();
    let hand_ok = hand.iter().all(|&v| v == 0.5);
    let t = started.elapsed();
    outcome(
        row_sum_err <= 1e-10 && asym <= 1e-12 && lo >= -1e-10 && hi <= 1.0 + 1e-10 && hand_ok && within_budget(t, 5),
        format!(
            "rw row-sum error {row_sum_err:.1e}, sym asymmetry {asym:.1e}, spectrum [{lo:.3e}, {hi:.12}], 2-vertex example {} ({:.2}s)",
            if hand_ok { "exact" } else { "wrong" },
            t.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Outcome {
    let ds = hyperprop::dataset::synthetic_blobs(1430, 10, 3, 1.0, 4).unwrap();
    let l = ds.train_indices().len();
    let mut problems = Vec::new();
    for level in [0.0, 0.15, 0.30, 0.45, 0.6] {
        for seed in [1u64, 2, 3] {
            let s = inject_noise(&ds, level, seed).unwrap();
            let expected = (level * l as f64).round() as usize;
            if s.flipped.len() != expected {
                problems.push(format!("level {level}: {} flips, expected {expected}", s.flipped.len()));
            }
            if s.flipped.iter().any(|&i| s.noisy_labels[i] == s.clean_labels[i]) {
                problems.push(format!("level {level}: a flip kept its label"));
            }
            if ds.test_indices().iter().any(|&i| s.noisy_labels[i] != s.clean_labels[i]) {
                problems.push(format!("level {level}: test label changed"));
            }
            let changed = (0..ds.len()).filter(|&i| s.noisy_labels[i] != s.clean_labels[i]).count();
            if changed != s.flipped.len() {
                problems.push(format!("level {level}: {changed} changed rows vs {} flipped", s.flipped.len()));
            }
            if s != inject_noise(&ds, level, seed).unwrap() {
                problems.push(format!("level {level} seed {seed}: not reproducible"));
            }
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("l = {l}, 5 levels × 3 seeds: exact counts, true flips, clean test labels, reproducible")
        } else {
            problems.join("; ")
        },
    )
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let mut cfg = ExperimentConfig::preset(DatasetKind::Synthetic, false);
    cfg.noise_levels = vec![0.0];
    cfg.seeds = vec![1];
    let report = match run_experiment(&cfg, &RunOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let t = started.elapsed();
    let parts: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{} {:.2}%", r.method, 100.0 * r.accuracy))
        .collect();
    outcome(
        report.failures.is_empty()
            && report.rows.len() == 5
            && report.rows.iter().all(|r| r.accuracy >= 0.9)
            && within_budget(t, 30),
        format!("{} ({:.1}s)", parts.join(", "), t.as_secs_f64()),
    )
}

fn data_dir() -> PathBuf {
    std::env::var_os("HYPERPROP_DATA_DIR").map_or_else(|| PathBuf::from("data"), PathBuf::from)
}

fn run_grid(mut cfg: ExperimentConfig, methods: &[Method], levels: &[f64]) -> Result<Vec<ResultRow>, String> {
    cfg.methods = methods.to_vec();
    cfg.noise_levels = levels.to_vec();
    cfg.seeds = vec![1, 2, 3];
    cfg.data_dir = data_dir();
    let report = run_experiment(&cfg, &RunOptions::default()).map_err(|e| e.to_string())?;
    if let Some(f) = report.failures.first() {
        return Err(format!("{} at {} seed {} failed: {}", f.method, f.noise_level, f.seed, f.error));
    }
    Ok(report.rows)
}

/// Median accuracy in percent.
fn median(rows: &[ResultRow], method: Method, level: f64) -> f64 {
    median_grid(rows)
        .iter()
        .find(|g| g.method == method && g.noise_level == level)
        .map_or(f64::NAN, |g| 100.0 * g.median_accuracy)
}

fn usps_criteria() -> Vec<Outcome> {
    let started = Instant::now();
    let rows = match run_grid(
        ExperimentConfig::preset(DatasetKind::Usps, false),
        &[Method::GraphSsl, Method::HypergraphSsl, Method::HgnnProposed],
        &[0.0, 0.45],
    ) {
        Ok(r) => r,
        Err(e) => return (0..3).map(|_| outcome(false, format!("USPS run failed: {e}"))).collect(),
    };
    let t = started.elapsed().as_secs_f64();
    let g0 = median(&rows, Method::GraphSsl, 0.0);
    let h0 = median(&rows, Method::HypergraphSsl, 0.0);
    let p0 = median(&rows, Method::HgnnProposed, 0.0);
    let g45 = median(&rows, Method::GraphSsl, 0.45);
    let p45 = median(&rows, Method::HgnnProposed, 0.45);
    let near = |v: f64| (v - 95.06).abs() <= 2.0;
    vec![
        outcome(
            near(g0) && near(h0) && near(p0) && (cfg!(debug_assertions) || t < 900.0),
            format!("level 0: graph-ssl {g0:.2}, hypergraph-ssl {h0:.2}, hgnn-proposed {p0:.2} (target 95.06 ± 2; {t:.0}s)"),
        ),
        outcome(
            p45 - g45 >= 8.0,
            format!("45%: hgnn-proposed {p45:.2} vs graph-ssl {g45:.2}, gap {:.2} (need ≥ 8)", p45 - g45),
        ),
        outcome(
            g0 - g45 >= 15.0 && p0 - p45 <= 15.0,
            format!("graph-ssl drop {:.2} (need ≥ 15), hgnn-proposed drop {:.2} (need ≤ 15)", g0 - g45, p0 - p45),
        ),
    ]
}

fn criterion_9() -> Outcome {
    let started = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for kind in [DatasetKind::Mnist, DatasetKind::Fashion] {
        let rows = match run_grid(ExperimentConfig::preset(kind, false), &Method::ALL, &[0.0, 0.45]) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("{kind} run failed: {e}")),
        };
        let p = median(&rows, Method::HgnnProposed, 0.45);
        let others: Vec<String> = Method::ALL[..4]
            .iter()
            .map(|&m| {
                let v = median(&rows, m, 0.45);
                ok &= p >= v - 1.0;
                format!("{m} {v:.2}")
            })
            .collect();
        let zero: Vec<String> = Method::ALL
            .iter()
            .map(|&m| format!("{m} {:.2}", median(&rows, m, 0.0)))
            .collect();
        details.push(format!(
            "{kind} 45%: hgnn-proposed {p:.2} vs {}; 0%: {}",
            others.join(", "),
            zero.join(", ")
        ));
    }
    let t = started.elapsed().as_secs_f64();
    ok &= cfg!(debug_assertions) || t < 1800.0;
    outcome(ok, format!("{} ({t:.0}s)", details.join(" | ")))
}

fn criterion_10() -> Outcome {
    let mut cfg = ExperimentConfig::preset(DatasetKind::Fashion, false);
    cfg.pca_dims = None;
    let rows = match run_grid(cfg, &[Method::Gcn, Method::Hgnn], &[0.0]) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("Fashion run failed: {e}")),
    };
    let gcn = median(&rows, Method::Gcn, 0.0);
    let hgnn = median(&rows, Method::Hgnn, 0.0);
    outcome(
        hgnn - gcn >= 2.0,
        format!("no PCA, 0%: hgnn {hgnn:.2} vs gcn {gcn:.2}, gap {:.2} (need ≥ 2)", hgnn - gcn),
    )
}

fn main() -> ExitCode {
    let with_data = std::env::args().any(|a| a == "--data");
    let mut results: Vec<(usize, Option<Outcome>)> = vec![
        (1, Some(criterion_1())),
        (2, Some(criterion_2())),
        (3, Some(criterion_3())),
        (4, Some(criterion_4())),
        (5, Some(criterion_5())),
    ];
    if with_data {
        for (i, o) in usps_criteria().into_iter().enumerate() {
            results.push((6 + i, Some(o)));
        }
        results.push((9, Some(criterion_9())));
        results.push((10, Some(criterion_10())));
    } else {
        results.extend((6..=10).map(|c| (c, None)));
    }
    let mut failed = 0;
    for (c, o) in &results {
        match o {
            Some(o) => {
                println!("criterion {c:>2}: {} {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
                failed += usize::from(!o.passed);
            }
            None => println!("criterion {c:>2}: SKIP needs datasets; rerun with `-- --data`"),
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}


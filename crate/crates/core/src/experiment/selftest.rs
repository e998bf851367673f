//! Small-instance checks of the numerical core against the dense reference
//! routines in [`crate::oracle`].

use crate::dataset::synthetic_blobs;
use crate::hypergraph::{hypergraph_operator, Normalization};
use crate::labels::{encode_labels, inject_noise, LabelScheme};
use crate::linalg::{conjugate_gradient, CgSettings};
use crate::nn::{forward, loss_and_gradients, TwoLayerParams};
use crate::oracle;
use crate::preprocess::pca_fit;
use crate::ssl::{propagate, PropagationConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, err: f64, tol: f64) -> SelfCheck {
    SelfCheck {
        name,
        passed: err <= tol,
        detail: format!("error {err:.3e} (tolerance {tol:.0e})"),
    }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> SelfCheck {
    SelfCheck {
        name,
        passed: false,
        detail: e.to_string(),
    }
}

pub fn selftest() -> Vec<SelfCheck> {
    let mut out = Vec::new();

    let a = oracle::random_sparse(30, 20, 0.2, 1);
    let b = oracle::random_dense(20, 4, 2);
    out.push(match a.mul_dense(&b) {
        Ok(got) => check("sparse × dense", oracle::max_abs_diff(&got, &oracle::dense_matmul(&a.to_dense(), &b)), 1e-12),
        Err(e) => failed("sparse × dense", e),
    });

    let spd = oracle::random_spd(25, 3);
    let rhs = oracle::random_dense(25, 1, 4);
    let settings = CgSettings { tol: 1e-12, max_iter: 500 };
    let apply = |x: &[f64], y: &mut [f64]| {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..x.len()).map(|j| spd[[i, j]] * x[j]).sum();
        }
    };
    out.push(match conjugate_gradient(apply, rhs.column(0).as_slice().unwrap_or(&rhs.column(0).to_vec()), settings) {
        Ok(o) => {
            let want = oracle::dense_solve(&spd, &rhs);
            let err = o.solution.iter().zip(want.column(0)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            check("conjugate gradient", err, 1e-8)
        }
        Err(e) => failed("conjugate gradient", e),
    });

    let hg = oracle::random_hypergraph(30, 30, 5, 5);
    match (
        hypergraph_operator(&hg, Normalization::Sym),
        hypergraph_operator(&hg, Normalization::Rw),
    ) {
        (Ok(sym), Ok(rw)) => {
            out.push(check(
                "hypergraph operators",
                oracle::max_abs_diff(&sym.matrix().to_dense(), &oracle::dense_theta_sym(&hg))
                    .max(oracle::max_abs_diff(&rw.matrix().to_dense(), &oracle::dense_theta_rw(&hg))),
                1e-13,
            ));
            let x = oracle::random_dense(30, 3, 6);
            let cfg = PropagationConfig { tol: 1e-12, max_iter: 5000, ..Default::default() };
            out.push(match propagate(&sym, &x, &cfg) {
                Ok(f) => check(
                    "closed-form propagation",
                    oracle::max_abs_diff(&f, &oracle::dense_propagation(&sym.matrix().to_dense(), &x, cfg.alpha)),
                    1e-8,
                ),
                Err(e) => failed("closed-form propagation", e),
            });

            let p = TwoLayerParams::glorot(3, 4, 3, 7);
            let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
            let split = crate::labels::NoisySplit {
                clean_labels: labels.clone(),
                noisy_labels: labels,
                flipped: vec![],
                level: 0.0,
                seed: 0,
            };
            let labeled: Vec<usize> = (0..20).collect();
            let grad_check = || -> crate::Result<f64> {
                let y = encode_labels(&split, &labeled, 3, LabelScheme::OneHot)?;
                let (_, g) = loss_and_gradients(&rw, &forward(&rw, &x, &p)?, &y, &labeled, &p, 1e-3)?;
                let loss = |t2: &crate::DenseMatrix| {
                    let q = TwoLayerParams { theta1: p.theta1.clone(), theta2: t2.clone() };
                    forward(&rw, &x, &q)
                        .and_then(|t| loss_and_gradients(&rw, &t, &y, &labeled, &q, 1e-3))
                        .map_or(f64::NAN, |r| r.0)
                };
                let fd = oracle::finite_difference_gradient(loss, &p.theta2, 1e-5);
                Ok(oracle::max_abs_diff(&g.theta2, &fd))
            };
            out.push(match grad_check() {
                Ok(err) => check("network gradient", err, 1e-7),
                Err(e) => failed("network gradient", e),
            });
        }
        (Err(e), _) | (_, Err(e)) => out.push(failed("hypergraph operators", e)),
    }

    out.push(match synthetic_blobs(200, 4, 2, 1.0, 8).and_then(|ds| inject_noise(&ds, 0.3, 9).map(|s| (ds, s))) {
        Ok((ds, s)) => {
            let ok = s.flipped.len() == 42
                && s.flipped.iter().all(|&i| s.noisy_labels[i] != s.clean_labels[i] && i < ds.train_indices().len())
                && ds.test_indices().iter().all(|&i| s.noisy_labels[i] == s.clean_labels[i]);
            SelfCheck {
                name: "label noise",
                passed: ok,
                detail: format!("{} flips", s.flipped.len()),
            }
        }
        Err(e) => failed("label noise", e),
    });

    let x = oracle::random_dense(20, 6, 5);
    out.push(match pca_fit(&x, 3) {
        Ok(model) => {
            let mean = x.mean_axis(ndarray::Axis(0)).expect("nonempty");
            let c = &x - &mean;
            let (vals, _) = oracle::symmetric_eigen(&(c.t().dot(&c) / 19.0));
            let err = (0..3)
                .map(|k| (model.explained_variance[k] - vals[5 - k]).abs())
                .fold(0.0, f64::max);
            check("pca", err, 1e-10)
        }
        Err(e) => failed("pca", e),
    });
    out
}

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{forward, forward_from_propagated, propagate_input, ForwardTrace, TwoLayerParams};
use crate::error::{Error, Result};
use crate::hypergraph::PropagationOperator;
use crate::labels::{decode_predictions, LabelMatrix, LabelScheme};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: 64,
            learning_rate: 0.01,
            epochs: 200,
            weight_decay: 5e-4,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.hidden >= 1
            && self.learning_rate >= 0.0
            && self.learning_rate.is_finite()
            && self.epochs >= 1
            && self.weight_decay >= 0.0
            && (0.0..1.0).contains(&self.adam_beta1)
            && (0.0..1.0).contains(&self.adam_beta2)
            && self.adam_eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("invalid training configuration {self:?}")))
        }
    }
}

/// Masked cross-entropy over `labeled` rows plus (wd/2)(‖θ1‖² + ‖θ2‖²), and
/// its gradient with respect to θ1 and θ2.
pub fn loss_and_gradients(
    op: &PropagationOperator,
    trace: &ForwardTrace,
    y: &LabelMatrix,
    labeled: &[usize],
    params: &TwoLayerParams,
    weight_decay: f64,
) -> Result<(f64, TwoLayerParams)> {
    if labeled.is_empty() {
        return Err(Error::Parameter("training needs at least one labeled row".into()));
    }
    if y.scheme != LabelScheme::OneHot {
        return Err(Error::Parameter("network training expects one-hot labels".into()));
    }
    if y.values.dim() != trace.logits.dim() {
        return Err(Error::shape(
            "loss",
            format!("labels {:?} vs logits {:?}", y.values.dim(), trace.logits.dim()),
        ));
    }
    let m = labeled.len() as f64;
    let logits = &trace.logits;
    let z = &trace.probabilities;
    let mut data_loss = 0.0;
    // dL/dlogits is (Z − Y)/m on labeled rows and 0 elsewhere
    let mut d_logits = DenseMatrix::zeros(logits.dim());
    for &i in labeled {
        let row = logits.row(i);
        let max = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        let log_sum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        for j in 0..row.len() {
            let yij = y.values[[i, j]];
            if yij != 0.0 {
                data_loss -= yij * (row[j] - log_sum);
            }
            d_logits[[i, j]] = (z[[i, j]] - yij) / m;
        }
    }
    let decay = 0.5 * weight_decay * (params.theta1.iter().chain(&params.theta2).map(|v| v * v).sum::<f64>());
    let loss = data_loss / m + decay;

    let mut g2 = trace.propagated_hidden.t().dot(&d_logits);
    g2.scaled_add(weight_decay, &params.theta2);
    let d_hidden = op.apply_transpose(&d_logits.dot(&params.theta2.t()))?;
    let d_pre = ndarray::Zip::from(&d_hidden)
        .and(&trace.hidden_pre)
        .map_collect(|&g, &pre| if pre > 0.0 { g } else { 0.0 });
    let mut g1 = trace.propagated_input.t().dot(&d_pre);
    g1.scaled_add(weight_decay, &params.theta1);
    Ok((loss, TwoLayerParams { theta1: g1, theta2: g2 }))
}

struct Adam {
    m: TwoLayerParams,
    v: TwoLayerParams,
    step: i32,
}

impl Adam {
    fn new(p: &TwoLayerParams) -> Self {
        let z = TwoLayerParams::zeros(p.input_dim(), p.hidden_dim(), p.num_classes());
        Adam {
            m: z.clone(),
            v: z,
            step: 0,
        }
    }

    fn update(&mut self, params: &mut TwoLayerParams, grads: &TwoLayerParams, cfg: &TrainConfig) {
        self.step += 1;
        let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let lr = cfg.learning_rate;
        let eps = cfg.adam_eps;
        for (p, g, m, v) in [
            (&mut params.theta1, &grads.theta1, &mut self.m.theta1, &mut self.v.theta1),
            (&mut params.theta2, &grads.theta2, &mut self.m.theta2, &mut self.v.theta2),
        ] {
            ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
        }
    }
}

/// Full-batch Adam from a seeded Glorot initialization for `cfg.epochs` steps.
pub fn train(
    op: &PropagationOperator,
    x: &DenseMatrix,
    y: &LabelMatrix,
    labeled: &[usize],
    cfg: &TrainConfig,
) -> Result<TwoLayerParams> {
    train_logged(op, x, y, labeled, cfg, None)
}

/// As [`train`], writing `epoch,loss,train_accuracy` lines to `log` when given.
/// The loss is the one evaluated before that epoch's update.
pub fn train_logged(
    op: &PropagationOperator,
    x: &DenseMatrix,
    y: &LabelMatrix,
    labeled: &[usize],
    cfg: &TrainConfig,
    mut log: Option<&mut dyn Write>,
) -> Result<TwoLayerParams> {
    cfg.validate()?;
    let input: Arc<DenseMatrix> = propagate_input(op, x)?;
    let mut params = TwoLayerParams::glorot(x.ncols(), cfg.hidden, y.values.ncols(), cfg.seed);
    let mut adam = Adam::new(&params);
    let log_err = |e: std::io::Error| Error::io("training log", e);
    if let Some(w) = log.as_mut() {
        writeln!(w, "epoch,loss,train_accuracy").map_err(log_err)?;
    }
    for epoch in 0..cfg.epochs {
        let trace = forward_from_propagated(op, Arc::clone(&input), &params).map_err(|e| match e {
            Error::Numerical(_) => Error::Training { epoch, loss: f64::NAN },
            other => other,
        })?;
        let (loss, grads) = loss_and_gradients(op, &trace, y, labeled, &params, cfg.weight_decay)?;
        if !loss.is_finite() {
            return Err(Error::Training { epoch, loss });
        }
        if let Some(w) = log.as_mut() {
            let pred = decode_predictions(&trace.probabilities)?;
            let hits = labeled
                .iter()
                .filter(|&&i| y.values[[i, pred[i]]] == 1.0)
                .count();
            writeln!(w, "{epoch},{loss},{}", hits as f64 / labeled.len() as f64).map_err(log_err)?;
        }
        adam.update(&mut params, &grads, cfg);
    }
    Ok(params)
}

/// Argmax of the forward probabilities, ties to the lowest class.
pub fn predict(op: &PropagationOperator, x: &DenseMatrix, params: &TwoLayerParams) -> Result<Vec<usize>> {
    decode_predictions(&forward(op, x, params)?.probabilities)
}

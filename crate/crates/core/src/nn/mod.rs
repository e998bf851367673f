//! Two-layer networks over a propagation operator:
//! Z = softmax(Θ · ReLU(Θ X θ1) · θ2).
//!
//! The same code serves the graph network (gcn operator), the hypergraph
//! network (sym or rw operator) and the feature-propagated variant, which
//! feeds the smoothed features F in place of X and requires Θ_sym.

mod train;

pub use train::{loss_and_gradients, predict, train, train_logged, TrainConfig};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypergraph::{Normalization, PropagationOperator};
use crate::linalg::{ensure_finite, DenseMatrix};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerParams {
    /// L1×L2
    pub theta1: DenseMatrix,
    /// L2×C
    pub theta2: DenseMatrix,
}

impl TwoLayerParams {
    pub fn zeros(input: usize, hidden: usize, classes: usize) -> Self {
        TwoLayerParams {
            theta1: DenseMatrix::zeros((input, hidden)),
            theta2: DenseMatrix::zeros((hidden, classes)),
        }
    }

    /// Glorot-uniform: entries drawn from U(−a, a) with a = √(6 / (fan_in + fan_out)),
    /// θ1 first, both row-major.
    pub fn glorot(input: usize, hidden: usize, classes: usize, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        let mut draw = |rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            DenseMatrix::from_shape_simple_fn((rows, cols), || (2.0 * rng.unit() - 1.0) * a)
        };
        let theta1 = draw(input, hidden);
        let theta2 = draw(hidden, classes);
        TwoLayerParams { theta1, theta2 }
    }

    pub fn input_dim(&self) -> usize {
        self.theta1.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.theta1.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.theta2.ncols()
    }

    fn check(&self) -> Result<()> {
        if self.theta1.ncols() != self.theta2.nrows() {
            return Err(Error::shape(
                "two-layer params",
                format!("θ1 is {:?} but θ2 is {:?}", self.theta1.dim(), self.theta2.dim()),
            ));
        }
        ensure_finite(&self.theta1, "θ1")?;
        ensure_finite(&self.theta2, "θ2")
    }
}

/// Every intermediate of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Θ·X, shared across epochs
    pub propagated_input: Arc<DenseMatrix>,
    /// Θ·X·θ1
    pub hidden_pre: DenseMatrix,
    /// R = ReLU(Θ·X·θ1)
    pub hidden: DenseMatrix,
    /// Θ·R
    pub propagated_hidden: DenseMatrix,
    /// Θ·R·θ2
    pub logits: DenseMatrix,
    /// Z, row-wise softmax of the logits
    pub probabilities: DenseMatrix,
}

/// Row-wise softmax with the row maximum subtracted first.
pub fn softmax_rows(logits: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_finite(logits, "logits").map_err(|e| Error::Numerical(e.to_string()))?;
    let mut z = logits.clone();
    for mut row in z.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    Ok(z)
}

/// Θ·X, computed once per dataset and reused for every epoch.
pub fn propagate_input(op: &PropagationOperator, x: &DenseMatrix) -> Result<Arc<DenseMatrix>> {
    if x.nrows() != op.size() {
        return Err(Error::shape(
            "forward",
            format!("operator has {} vertices, input has {} rows", op.size(), x.nrows()),
        ));
    }
    ensure_finite(x, "network input")?;
    Ok(Arc::new(op.apply(x)?))
}

/// Forward pass from a precomputed Θ·X.
pub fn forward_from_propagated(
    op: &PropagationOperator,
    propagated_input: Arc<DenseMatrix>,
    params: &TwoLayerParams,
) -> Result<ForwardTrace> {
    params.check()?;
    if propagated_input.ncols() != params.input_dim() {
        return Err(Error::shape(
            "forward",
            format!("input has {} columns, θ1 expects {}", propagated_input.ncols(), params.input_dim()),
        ));
    }
    let hidden_pre = propagated_input.dot(&params.theta1);
    let hidden = hidden_pre.mapv(|v| v.max(0.0));
    let propagated_hidden = op.apply(&hidden)?;
    let logits = propagated_hidden.dot(&params.theta2);
    let probabilities = softmax_rows(&logits)?;
    Ok(ForwardTrace {
        propagated_input,
        hidden_pre,
        hidden,
        propagated_hidden,
        logits,
        probabilities,
    })
}

pub fn forward(op: &PropagationOperator, x: &DenseMatrix, params: &TwoLayerParams) -> Result<ForwardTrace> {
    forward_from_propagated(op, propagate_input(op, x)?, params)
}

/// Same computation on propagated features F; Θ must be the sym hypergraph operator.
pub fn forward_proposed(op: &PropagationOperator, f: &DenseMatrix, params: &TwoLayerParams) -> Result<ForwardTrace> {
    require_sym(op)?;
    forward(op, f, params)
}

pub(crate) fn require_sym(op: &PropagationOperator) -> Result<()> {
    if op.normalization() != Normalization::Sym {
        return Err(Error::Parameter(format!(
            "the feature-propagated network uses Θ_sym, got {}",
            op.normalization()
        )));
    }
    Ok(())
}

//! Closed-form propagation F = (1 − α)(I − αΘ)⁻¹ B, one CG solve per column.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Normalization, PropagationOperator};
use crate::labels::{LabelMatrix, LabelScheme};
use crate::linalg::{conjugate_gradient, CgSettings, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            alpha: 0.99,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Parameter(format!(
                "need tol > 0 and max_iter > 0, got {} and {}",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

/// Label propagation from a ±1/0 label matrix. The operator must be
/// symmetric (sym, graph_sym or gcn) so that I − αΘ is SPD.
pub fn propagate_labels(op: &PropagationOperator, y: &LabelMatrix, cfg: &PropagationConfig) -> Result<DenseMatrix> {
    if y.scheme != LabelScheme::Pm1 {
        return Err(Error::Parameter("label propagation expects a pm1 label matrix".into()));
    }
    propagate(op, &y.values, cfg)
}

/// Feature smoothing with Θ_sym.
pub fn propagate_features(op: &PropagationOperator, x: &DenseMatrix, cfg: &PropagationConfig) -> Result<DenseMatrix> {
    if op.normalization() != Normalization::Sym {
        return Err(Error::Parameter(format!(
            "feature propagation uses the sym hypergraph operator, got {}",
            op.normalization()
        )));
    }
    propagate(op, x, cfg)
}

/// Columns are solved independently in parallel; each solve is serial in
/// its reductions, so the result does not depend on the thread count.
pub fn propagate(op: &PropagationOperator, b: &DenseMatrix, cfg: &PropagationConfig) -> Result<DenseMatrix> {
    cfg.validate()?;
    if !op.normalization().is_symmetric() {
        return Err(Error::Parameter(format!(
            "closed-form propagation needs a symmetric operator, got {}",
            op.normalization()
        )));
    }
    let n = op.size();
    if b.nrows() != n {
        return Err(Error::shape(
            "propagate",
            format!("operator is {n}×{n}, right-hand side has {} rows", b.nrows()),
        ));
    }
    let alpha = cfg.alpha;
    let theta = op.matrix();
    let settings = CgSettings {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
    };
    let outcomes = (0..b.ncols())
        .into_par_iter()
        .map(|c| {
            let rhs: Vec<f64> = b.column(c).iter().map(|v| (1.0 - alpha) * v).collect();
            let apply = |x: &[f64], out: &mut [f64]| {
                theta.mul_vec_into(x, out);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = xi - alpha * *o;
                }
            };
            conjugate_gradient(apply, &rhs, settings)
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| !o.converged(cfg.tol))
        .max_by(|a, b| a.1.residual.total_cmp(&b.1.residual));
    if let Some((column, o)) = worst {
        return Err(Error::Solver {
            column,
            residual: o.residual,
            iterations: o.iterations,
        });
    }
    let mut f = DenseMatrix::zeros((n, b.ncols()));
    for (c, o) in outcomes.into_iter().enumerate() {
        f.column_mut(c).assign(&ndarray::ArrayView1::from(&o.solution));
    }
    Ok(f)
}

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::incidence::Hypergraph;
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};

/// Which smoothing matrix an operator holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Dv^{-1/2} H W De^{-1} Hᵀ Dv^{-1/2}
    Sym,
    /// Dv^{-1} H W De^{-1} Hᵀ
    Rw,
    /// D^{-1/2} A D^{-1/2} on a pairwise graph
    GraphSym,
    /// D̃^{-1/2} (A + I) D̃^{-1/2}
    Gcn,
}

impl Normalization {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Normalization::Rw)
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Normalization::Sym => 0,
            Normalization::Rw => 1,
            Normalization::GraphSym => 2,
            Normalization::Gcn => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Normalization::Sym,
            1 => Normalization::Rw,
            2 => Normalization::GraphSym,
            3 => Normalization::Gcn,
            _ => return None,
        })
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Sym => "sym",
            Normalization::Rw => "rw",
            Normalization::GraphSym => "graph_sym",
            Normalization::Gcn => "gcn",
        })
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym" => Ok(Normalization::Sym),
            "rw" => Ok(Normalization::Rw),
            "graph_sym" => Ok(Normalization::GraphSym),
            "gcn" => Ok(Normalization::Gcn),
            other => Err(Error::Parameter(format!("unknown normalization `{other}`"))),
        }
    }
}

/// An n×n nonnegative smoothing matrix Θ.
#[derive(Debug, Clone)]
pub struct PropagationOperator {
    matrix: SparseMatrix,
    normalization: Normalization,
    transpose: OnceLock<SparseMatrix>,
}

impl PropagationOperator {
    /// Wraps a square matrix. Entries must be nonnegative; symmetric
    /// normalizations must be symmetric to 1e-12.
    pub fn new(matrix: SparseMatrix, normalization: Normalization) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::shape(
                "propagation operator",
                format!("{}x{} is not square", matrix.rows(), matrix.cols()),
            ));
        }
        if matrix.values().iter().any(|&v| v < 0.0) {
            return Err(Error::Parameter("propagation operator has negative entries".into()));
        }
        if normalization.is_symmetric() {
            let asym = matrix.max_asymmetry();
            if asym > 1e-12 {
                return Err(Error::Numerical(format!(
                    "{normalization} operator is asymmetric by {asym:e}"
                )));
            }
        }
        Ok(PropagationOperator {
            matrix,
            normalization,
            transpose: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Number of vertices.
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// Θ · X
    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.matrix.mul_dense(x)
    }

    /// Θᵀ · X
    pub fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.normalization.is_symmetric() {
            return self.matrix.mul_dense(x);
        }
        self.transpose
            .get_or_init(|| self.matrix.transpose())
            .mul_dense(x)
    }
}

impl PartialEq for PropagationOperator {
    fn eq(&self, other: &Self) -> bool {
        self.normalization == other.normalization && self.matrix == other.matrix
    }
}

/// Assembles Θ_sym or Θ_rw from a hypergraph by sparse products and
/// diagonal scalings.
pub fn hypergraph_operator(hg: &Hypergraph, normalization: Normalization) -> Result<PropagationOperator> {
    if !matches!(normalization, Normalization::Sym | Normalization::Rw) {
        return Err(Error::Parameter(format!(
            "hypergraph operators are sym or rw, not {normalization}"
        )));
    }
    if let Some(v) = hg.vertex_degrees().iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Degenerate(format!("vertex {v} has zero degree")));
    }
    if let Some(e) = hg.edge_degrees().iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Degenerate(format!("hyperedge {e} is empty")));
    }
    let h = hg.incidence();
    let edge_scale: Vec<f64> = hg
        .edge_weights()
        .iter()
        .zip(hg.edge_degrees())
        .map(|(w, d)| w / d)
        .collect();
    let core = h.diag_scale(None, Some(&edge_scale))?.mul_sparse(&h.transpose())?;
    let matrix = match normalization {
        Normalization::Sym => core.normalize_symmetric(hg.vertex_degrees())?,
        _ => {
            let s: Vec<f64> = hg.vertex_degrees().iter().map(|d| 1.0 / d).collect();
            core.diag_scale(Some(&s), None)?
        }
    };
    PropagationOperator::new(matrix, normalization)
}

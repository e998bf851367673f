use serde::{Deserialize, Serialize};

use super::knn::{knn_indices, NeighborTable};
use super::operator::{Normalization, PropagationOperator};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};

/// Gaussian kernel bandwidth σ for pairwise graph weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Mean distance from each point to its k-th neighbor.
    #[default]
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    fn resolve(self, table: &NeighborTable) -> Result<f64> {
        let sigma = match self {
            Bandwidth::Fixed(s) => s,
            Bandwidth::Auto => {
                let k = table.k();
                let total: f64 = (0..table.len()).map(|i| table.distances(i)[k - 1]).sum();
                total / table.len() as f64
            }
        };
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Degenerate(format!("graph bandwidth σ = {sigma}")));
        }
        Ok(sigma)
    }
}

/// Symmetrized kNN adjacency with weights exp(−‖xi − xj‖² / 2σ²), zero diagonal.
fn gaussian_adjacency(table: &NeighborTable, bandwidth: Bandwidth) -> Result<SparseMatrix> {
    let sigma = bandwidth.resolve(table)?;
    let denom = 2.0 * sigma * sigma;
    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(table.len() * table.k());
    for i in 0..table.len() {
        for (&j, &d) in table.neighbors(i).iter().zip(table.distances(i)) {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            pairs.push((a, b, (-d * d / denom).exp()));
        }
    }
    pairs.sort_by_key(|&(a, b, _)| (a, b));
    pairs.dedup_by_key(|&mut (a, b, _)| (a, b));
    let n = table.len();
    SparseMatrix::from_triplets(
        n,
        n,
        pairs.into_iter().flat_map(|(a, b, w)| [(a, b, w), (b, a, w)]),
    )
}

fn symmetric_normalize(adjacency: &SparseMatrix, normalization: Normalization) -> Result<PropagationOperator> {
    let degrees = adjacency.row_sums();
    if let Some(v) = degrees.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Degenerate(format!("vertex {v} is isolated in the kNN graph")));
    }
    PropagationOperator::new(adjacency.normalize_symmetric(&degrees)?, normalization)
}

/// D^{-1/2} A D^{-1/2} on the Gaussian-weighted symmetrized kNN graph.
pub fn build_knn_graph(x: &DenseMatrix, k: usize, bandwidth: Bandwidth) -> Result<PropagationOperator> {
    knn_graph_from_neighbors(&knn_indices(x, k)?, bandwidth)
}

pub fn knn_graph_from_neighbors(table: &NeighborTable, bandwidth: Bandwidth) -> Result<PropagationOperator> {
    let a = gaussian_adjacency(table, bandwidth)?;
    symmetric_normalize(&a, Normalization::GraphSym)
}

/// D̃^{-1/2} (A + I) D̃^{-1/2} on the same adjacency, the renormalized
/// operator of a graph convolutional network.
pub fn gcn_operator(x: &DenseMatrix, k: usize, bandwidth: Bandwidth) -> Result<PropagationOperator> {
    if x.nrows() == 1 {
        return PropagationOperator::new(SparseMatrix::identity(1), Normalization::Gcn);
    }
    gcn_operator_from_neighbors(&knn_indices(x, k)?, bandwidth)
}

pub fn gcn_operator_from_neighbors(table: &NeighborTable, bandwidth: Bandwidth) -> Result<PropagationOperator> {
    let a = gaussian_adjacency(table, bandwidth)?;
    let n = a.rows();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(a.nnz() + n);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        triplets.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, v)));
        triplets.push((i, i, 1.0));
    }
    let with_loops = SparseMatrix::from_triplets(n, n, triplets)?;
    symmetric_normalize(&with_loops, Normalization::Gcn)
}

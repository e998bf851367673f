use super::knn::{knn_indices, NeighborTable};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};

/// Weighted hypergraph stored as a 0/1 incidence matrix (vertices × hyperedges).
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    incidence: SparseMatrix,
    edge_weights: Vec<f64>,
    vertex_degrees: Vec<f64>,
    edge_degrees: Vec<f64>,
}

impl Hypergraph {
    /// Builds a hypergraph from explicit member lists. Repeated members of one
    /// hyperedge count once. Every hyperedge must have at least two distinct
    /// vertices and a positive finite weight.
    pub fn from_edges(num_vertices: usize, edges: &[Vec<usize>], weights: Vec<f64>) -> Result<Self> {
        if weights.len() != edges.len() {
            return Err(Error::shape(
                "hypergraph",
                format!("{} hyperedges but {} weights", edges.len(), weights.len()),
            ));
        }
        let mut triplets = Vec::new();
        for (e, members) in edges.iter().enumerate() {
            let mut m = members.clone();
            m.sort_unstable();
            m.dedup();
            if m.len() < 2 {
                return Err(Error::Degenerate(format!(
                    "hyperedge {e} has {} distinct vertices, need at least 2",
                    m.len()
                )));
            }
            if let Some(&v) = m.last().filter(|&&v| v >= num_vertices) {
                return Err(Error::Parameter(format!(
                    "hyperedge {e} references vertex {v} of {num_vertices}"
                )));
            }
            if !(weights[e] > 0.0 && weights[e].is_finite()) {
                return Err(Error::Parameter(format!("hyperedge {e} has weight {}", weights[e])));
            }
            triplets.extend(m.into_iter().map(|v| (v, e, 1.0)));
        }
        let incidence = SparseMatrix::from_triplets(num_vertices, edges.len(), triplets)?;
        Ok(Self::from_incidence_unchecked(incidence, weights))
    }

    fn from_incidence_unchecked(incidence: SparseMatrix, edge_weights: Vec<f64>) -> Self {
        let mut vertex_degrees = vec![0.0; incidence.rows()];
        let mut edge_degrees = vec![0.0; incidence.cols()];
        for (v, dv) in vertex_degrees.iter_mut().enumerate() {
            let (edges, h) = incidence.row(v);
            for (&e, &h) in edges.iter().zip(h) {
                *dv += edge_weights[e] * h;
                edge_degrees[e] += h;
            }
        }
        Hypergraph {
            incidence,
            edge_weights,
            vertex_degrees,
            edge_degrees,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.incidence.rows()
    }

    pub fn num_edges(&self) -> usize {
        self.incidence.cols()
    }

    /// `H`, with `H[v, e] = 1` iff vertex v belongs to hyperedge e.
    pub fn incidence(&self) -> &SparseMatrix {
        &self.incidence
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    /// d(v) = Σ_e w(e) h(v, e)
    pub fn vertex_degrees(&self) -> &[f64] {
        &self.vertex_degrees
    }

    /// d(e) = Σ_v h(v, e)
    pub fn edge_degrees(&self) -> &[f64] {
        &self.edge_degrees
    }

    /// Sorted member list of every hyperedge.
    pub fn edges(&self) -> Vec<Vec<usize>> {
        let t = self.incidence.transpose();
        (0..t.rows()).map(|e| t.row(e).0.to_vec()).collect()
    }
}

/// Hyperedge `e_j` for every point j: point i joins `e_j` when i is among the
/// k nearest neighbors of j or j is among the k nearest neighbors of i. With
/// `include_centroid`, j itself also joins `e_j`. All weights are 1.
pub fn build_knn_hypergraph(x: &DenseMatrix, k: usize, include_centroid: bool) -> Result<Hypergraph> {
    let table = knn_indices(x, k)?;
    hypergraph_from_neighbors(&table, include_centroid)
}

/// Same as [`build_knn_hypergraph`] from a precomputed neighbor table.
pub fn hypergraph_from_neighbors(table: &NeighborTable, include_centroid: bool) -> Result<Hypergraph> {
    let n = table.len();
    let mut members: Vec<Vec<usize>> = (0..n)
        .map(|j| if include_centroid { vec![j] } else { Vec::new() })
        .collect();
    for i in 0..n {
        for &j in table.neighbors(i) {
            // j ∈ kNN(i) puts i in e_j and j in e_i
            members[j].push(i);
            members[i].push(j);
        }
    }
    Hypergraph::from_edges(n, &members, vec![1.0; n])
}

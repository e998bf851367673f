use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const QUERY_BLOCK: usize = 32;

/// The k nearest rows of every row, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    k: usize,
    indices: Vec<usize>,
    distances: Vec<f64>,
}

impl NeighborTable {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.indices.len() / self.k
        }
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[i * self.k..(i + 1) * self.k]
    }

    /// Euclidean distances matching [`Self::neighbors`].
    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        (0..self.len()).map(|i| self.neighbors(i).to_vec()).collect()
    }
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..4 {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += (x - y) * (x - y);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Inserts (d, j) into an ascending list capped at k. Candidates arrive in
/// increasing j, so an equal distance never displaces an earlier index.
#[inline]
fn offer(best: &mut Vec<(f64, usize)>, k: usize, d: f64, j: usize) {
    if best.len() == k && d >= best[k - 1].0 {
        return;
    }
    let pos = best.partition_point(|&(bd, _)| bd <= d);
    if best.len() == k {
        best.pop();
    }
    best.insert(pos, (d, j));
}

/// Exact k-nearest-neighbor search under the Euclidean metric by blocked
/// brute force. Row `i` never lists itself; ties go to the lower row index.
pub fn knn_indices(x: &DenseMatrix, k: usize) -> Result<NeighborTable> {
    let n = x.nrows();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!("knn needs 1 <= k < n, got k = {k}, n = {n}")));
    }
    let x = x.as_standard_layout();
    let dim = x.ncols();
    let data = x.as_slice().expect("standard layout");
    let row = |i: usize| &data[i * dim..(i + 1) * dim];

    let blocks: Vec<Vec<Vec<(f64, usize)>>> = (0..n)
        .step_by(QUERY_BLOCK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + QUERY_BLOCK).min(n);
            let mut best: Vec<Vec<(f64, usize)>> =
                (start..end).map(|_| Vec::with_capacity(k + 1)).collect();
            for j in 0..n {
                let cand = row(j);
                for (q, list) in (start..end).zip(best.iter_mut()) {
                    if q != j {
                        offer(list, k, squared_distance(row(q), cand), j);
                    }
                }
            }
            best
        })
        .collect();

    let mut indices = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    for list in blocks.into_iter().flatten() {
        for (d, j) in list {
            indices.push(j);
            distances.push(d.sqrt());
        }
    }
    Ok(NeighborTable { k, indices, distances })
}

//! Slow, dense reference implementations used to check the fast paths.
//!
//! Nothing here is used by the production pipeline. The routines are written
//! for obviousness: triple loops, Gaussian elimination, cyclic Jacobi
//! eigenvalues, exhaustive neighbor sorting, central finite differences.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg32;

use crate::hypergraph::Hypergraph;
use crate::linalg::{DenseMatrix, SparseMatrix};

fn uniform(rng: &mut Pcg32) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Entries uniform in [-1, 1).
pub fn random_dense(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = Pcg32::seed_from_u64(seed);
    DenseMatrix::from_shape_fn((rows, cols), |_| 2.0 * uniform(&mut rng) - 1.0)
}

/// Each entry present with probability `density`, value uniform in [-1, 1).
pub fn random_sparse(rows: usize, cols: usize, density: f64, seed: u64) -> SparseMatrix {
    let mut rng = Pcg32::seed_from_u64(seed);
    let mut triplets = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if uniform(&mut rng) < density {
                let v = 2.0 * uniform(&mut rng) - 1.0;
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
    }
    SparseMatrix::from_triplets(rows, cols, triplets).expect("valid triplets")
}

/// Symmetric positive-definite matrix MᵀM + I.
pub fn random_spd(n: usize, seed: u64) -> DenseMatrix {
    let m = random_dense(n, n, seed);
    let mut a = dense_matmul(&m.t().to_owned(), &m);
    for i in 0..n {
        a[[i, i]] += 1.0;
    }
    a
}

/// Random hypergraph: `edges` hyperedges each with 2..=max_size distinct
/// vertices, then one extra pair edge per uncovered vertex so every vertex has
/// positive degree.
pub fn random_hypergraph(n: usize, edges: usize, max_size: usize, seed: u64) -> Hypergraph {
    assert!(n >= 2 && max_size >= 2);
    let mut rng = Pcg32::seed_from_u64(seed);
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for _ in 0..edges {
        let size = 2 + (rng.next_u64() % (max_size.min(n) as u64 - 1)) as usize;
        let mut members: Vec<usize> = Vec::with_capacity(size);
        while members.len() < size {
            let v = (rng.next_u64() % n as u64) as usize;
            if !members.contains(&v) {
                members.push(v);
            }
        }
        members.sort_unstable();
        sets.push(members);
    }
    let mut covered = vec![false; n];
    for e in &sets {
        for &v in e {
            covered[v] = true;
        }
    }
    for v in 0..n {
        if !covered[v] {
            let u = (v + 1 + (rng.next_u64() % (n as u64 - 1)) as usize) % n;
            let mut pair = vec![v, u];
            pair.sort_unstable();
            sets.push(pair);
        }
    }
    let weights = vec![1.0; sets.len()];
    Hypergraph::from_edges(n, &sets, weights).expect("valid random hypergraph")
}

pub fn dense_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = DenseMatrix::zeros((a.nrows(), b.ncols()));
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = 0.0;
            for k in 0..a.ncols() {
                acc += a[[i, k]] * b[[k, j]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Solves A X = B by Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.nrows(), n);
    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| m[[p, col]].abs().total_cmp(&m[[q, col]].abs()))
            .expect("non-empty");
        assert!(m[[pivot, col]].abs() > 1e-300, "singular matrix");
        if pivot != col {
            for j in 0..n {
                m.swap([pivot, j], [col, j]);
            }
            for j in 0..rhs.ncols() {
                rhs.swap([pivot, j], [col, j]);
            }
        }
        for row in col + 1..n {
            let f = m[[row, col]] / m[[col, col]];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[[row, j]] -= f * m[[col, j]];
            }
            for j in 0..rhs.ncols() {
                rhs[[row, j]] -= f * rhs[[col, j]];
            }
        }
    }
    let mut x = DenseMatrix::zeros(rhs.dim());
    for j in 0..rhs.ncols() {
        for row in (0..n).rev() {
            let mut acc = rhs[[row, j]];
            for k in row + 1..n {
                acc -= m[[row, k]] * x[[k, j]];
            }
            x[[row, j]] = acc / m[[row, row]];
        }
    }
    x
}

/// (1 − α)(I − αΘ)⁻¹ B by direct elimination.
pub fn dense_propagation(theta: &DenseMatrix, b: &DenseMatrix, alpha: f64) -> DenseMatrix {
    let n = theta.nrows();
    let mut a = theta.mapv(|v| -alpha * v);
    for i in 0..n {
        a[[i, i]] += 1.0;
    }
    dense_solve(&a, b).mapv(|v| (1.0 - alpha) * v)
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotation, ascending.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    symmetric_eigen(a).0
}

/// Eigenvalues (ascending) and matching unit eigenvectors (columns) of a
/// symmetric matrix by cyclic Jacobi rotation.
pub fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    let mut m = a.clone();
    let mut v = DenseMatrix::eye(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum();
        let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].total_cmp(&m[[j, j]]));
    let values = order.iter().map(|&i| m[[i, i]]).collect();
    let vectors = DenseMatrix::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    (values, vectors)
}

/// Spectral radius estimate by power iteration on AᵀA (so it works for any
/// square matrix), returning sqrt of the dominant eigenvalue of AᵀA, i.e. the
/// 2-norm, which bounds the spectral radius from above.
pub fn power_iteration_norm(a: &DenseMatrix, iterations: usize) -> f64 {
    let n = a.ncols();
    let ata = dense_matmul(&a.t().to_owned(), a);
    let mut v = DenseMatrix::from_elem((n, 1), 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let w = dense_matmul(&ata, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w.mapv(|x| x / norm);
    }
    lambda.sqrt()
}

/// Exhaustive k nearest neighbors: sort every other row by (distance, index).
pub fn brute_force_knn(x: &DenseMatrix, k: usize) -> Vec<Vec<usize>> {
    let n = x.nrows();
    (0..n)
        .map(|i| {
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d: f64 = x
                        .row(i)
                        .iter()
                        .zip(x.row(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d, j)
                })
                .collect();
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cand.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Central finite-difference gradient of `f` with respect to every entry of `at`.
pub fn finite_difference_gradient<F>(f: F, at: &DenseMatrix, step: f64) -> DenseMatrix
where
    F: Fn(&DenseMatrix) -> f64,
{
    let mut grad = DenseMatrix::zeros(at.dim());
    let mut probe = at.clone();
    for idx in 0..at.len() {
        let (r, c) = (idx / at.ncols(), idx % at.ncols());
        let orig = probe[[r, c]];
        probe[[r, c]] = orig + step;
        let up = f(&probe);
        probe[[r, c]] = orig - step;
        let down = f(&probe);
        probe[[r, c]] = orig;
        grad[[r, c]] = (up - down) / (2.0 * step);
    }
    grad
}

/// Dense Θ_sym = Dv^{-1/2} H W De^{-1} Hᵀ Dv^{-1/2} straight from the formula.
pub fn dense_theta_sym(hg: &Hypergraph) -> DenseMatrix {
    let (dv, core) = dense_theta_core(hg);
    let n = dv.len();
    DenseMatrix::from_shape_fn((n, n), |(i, j)| core[[i, j]] / (dv[i].sqrt() * dv[j].sqrt()))
}

/// Dense Θ_rw = Dv^{-1} H W De^{-1} Hᵀ straight from the formula.
pub fn dense_theta_rw(hg: &Hypergraph) -> DenseMatrix {
    let (dv, core) = dense_theta_core(hg);
    let n = dv.len();
    DenseMatrix::from_shape_fn((n, n), |(i, j)| core[[i, j]] / dv[i])
}

fn dense_theta_core(hg: &Hypergraph) -> (Vec<f64>, DenseMatrix) {
    let h = hg.incidence().to_dense();
    let (n, m) = h.dim();
    let w = hg.edge_weights();
    let dv: Vec<f64> = (0..n).map(|v| (0..m).map(|e| w[e] * h[[v, e]]).sum()).collect();
    let de: Vec<f64> = (0..m).map(|e| (0..n).map(|v| h[[v, e]]).sum()).collect();
    let mut core = DenseMatrix::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            core[[i, j]] = (0..m).map(|e| h[[i, e]] * w[e] / de[e] * h[[j, e]]).sum();
        }
    }
    (dv, core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn gaussian_elimination_two_by_two() {
        let x = dense_solve(&array![[4.0, 1.0], [1.0, 3.0]], &array![[1.0], [2.0]]);
        assert!((x[[0, 0]] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[[1, 0]] - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_eigenvalues_known_matrix() {
        let ev = symmetric_eigenvalues(&array![[2.0, 1.0], [1.0, 2.0]]);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_knn_line() {
        let x = array![[0.0], [1.0], [10.0]];
        assert_eq!(brute_force_knn(&x, 1), vec![vec![1], vec![0], vec![1]]);
    }
}

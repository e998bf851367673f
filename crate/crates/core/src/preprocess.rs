//! Principal component analysis over the full feature matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Axis};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, DenseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// Column means of the fit data.
    pub mean: Array1<f64>,
    /// m×d, orthonormal columns ordered by decreasing variance.
    pub components: DenseMatrix,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.components.ncols()
    }
}

/// Centers X (no scaling) and keeps the top `d` eigenvectors of the sample
/// covariance XcᵀXc / (n − 1). Each component is signed so that its
/// largest-magnitude entry is positive, the lowest index winning ties.
pub fn pca_fit(x: &DenseMatrix, d: usize) -> Result<PcaModel> {
    let (n, m) = x.dim();
    if d == 0 || n < 2 || d > (n - 1).min(m) {
        return Err(Error::Parameter(format!(
            "PCA dimension {d} outside 1..={} for a {n}×{m} matrix",
            (n.max(1) - 1).min(m)
        )));
    }
    ensure_finite(x, "PCA input")?;
    let mean = x.mean_axis(Axis(0)).expect("n ≥ 2");
    let centered = x - &mean;
    let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    let cov = DMatrix::from_fn(m, m, |i, j| 0.5 * (cov[[i, j]] + cov[[j, i]]));
    let eig = SymmetricEigen::try_new(cov, 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("covariance eigensolve did not converge".into()))?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut components = DenseMatrix::zeros((m, d));
    let mut explained_variance = Vec::with_capacity(d);
    for (k, &src) in order.iter().take(d).enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut lead = 0;
        for i in 1..m {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..m {
            components[[i, k]] = sign * col[i];
        }
        explained_variance.push(eig.eigenvalues[src].max(0.0));
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

/// (X − 1·meanᵀ) · components
pub fn pca_transform(model: &PcaModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.ncols() != model.input_dim() {
        return Err(Error::shape(
            "pca_transform",
            format!("model expects {} columns, input has {}", model.input_dim(), x.ncols()),
        ));
    }
    Ok((x - &model.mean).dot(&model.components))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use ndarray::{array, s};
    use proptest::prelude::*;

    #[test]
    fn collinear_points() {
        let x = array![[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [-1.5, -3.0]];
        let full = pca_fit(&x, 1).unwrap();
        let r5 = 5f64.sqrt();
        assert!((full.components[[0, 0]] - 1.0 / r5).abs() < 1e-12);
        assert!((full.components[[1, 0]] - 2.0 / r5).abs() < 1e-12);
        let both = pca_fit(&x, 2).unwrap();
        assert!(both.explained_variance[1].abs() < 1e-12);
    }

    #[test]
    fn diagonal_covariance() {
        // mean-zero columns that are mutually orthogonal
        let x = array![[1.0, 2.0, 0.5], [-1.0, 2.0, -0.5], [1.0, -2.0, -0.5], [-1.0, -2.0, 0.5]];
        let model = pca_fit(&x, 3).unwrap();
        let mut want: Vec<f64> = (0..3).map(|j| x.column(j).mapv(|v| v * v).sum() / 3.0).collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for (g, w) in model.explained_variance.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_dense_eigendecomposition() {
        let x = oracle::random_dense(20, 6, 5);
        let model = pca_fit(&x, 3).unwrap();
        let mean = x.mean_axis(Axis(0)).unwrap();
        let c = &x - &mean;
        let cov = c.t().dot(&c) / 19.0;
        let (vals, vecs) = oracle::symmetric_eigen(&cov);
        for k in 0..3 {
            let src = 5 - k;
            assert!((model.explained_variance[k] - vals[src]).abs() < 1e-8);
            let mut v = vecs.column(src).to_owned();
            let lead = (0..6).fold(0, |b, i| if v[i].abs() > v[b].abs() { i } else { b });
            if v[lead] < 0.0 {
                v.mapv_inplace(|a| -a);
            }
            for i in 0..6 {
                assert!((model.components[[i, k]] - v[i]).abs() < 1e-8);
            }
        }
        let gram = model.components.t().dot(&model.components);
        assert!(oracle::max_abs_diff(&gram, &DenseMatrix::eye(3)) < 1e-10);
    }

    #[test]
    fn full_rank_transform_preserves_distances() {
        let x = oracle::random_dense(12, 4, 8);
        let model = pca_fit(&x, 4).unwrap();
        let y = pca_transform(&model, &x).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let dx = (&x.row(i) - &x.row(j)).mapv(|v| v * v).sum().sqrt();
                let dy = (&y.row(i) - &y.row(j)).mapv(|v| v * v).sum().sqrt();
                assert!((dx - dy).abs() < 1e-9);
            }
        }
        let mean_row = model.mean.clone().insert_axis(Axis(0));
        assert!(pca_transform(&model, &mean_row).unwrap().iter().all(|v| v.abs() < 1e-15));
        assert!(matches!(pca_transform(&model, &x.slice(s![.., ..3]).to_owned()), Err(Error::Shape { .. })));
    }

    #[test]
    fn dimension_out_of_range() {
        let x = oracle::random_dense(4, 6, 1);
        assert!(pca_fit(&x, 0).is_err());
        assert!(pca_fit(&x, 4).is_err());
        assert!(pca_fit(&x, 3).is_ok());
    }

    fn reconstruction_error(x: &DenseMatrix, d: usize) -> f64 {
        let model = pca_fit(x, d).unwrap();
        let y = pca_transform(&model, x).unwrap();
        let back = y.dot(&model.components.t()) + &model.mean;
        (x - &back).mapv(|v| v * v).sum().sqrt()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn projected_statistics(n in 6usize..30, m in 2usize..8, seed in any::<u64>()) {
            let x = oracle::random_dense(n, m, seed);
            let d = m.min(n - 1);
            let model = pca_fit(&x, d).unwrap();
            prop_assert!(model.explained_variance.windows(2).all(|w| w[0] >= w[1]));
            let y = pca_transform(&model, &x).unwrap();
            for v in y.mean_axis(Axis(0)).unwrap() {
                prop_assert!(v.abs() < 1e-9);
            }
            let cov = y.t().dot(&y) / (n as f64 - 1.0);
            let want = DenseMatrix::from_diag(&Array1::from(model.explained_variance.clone()));
            prop_assert!(oracle::max_abs_diff(&cov, &want) < 1e-8);
            prop_assert_eq!(pca_fit(&x, d).unwrap(), model);
        }

        #[test]
        fn reconstruction_error_nonincreasing(seed in any::<u64>()) {
            let x = oracle::random_dense(15, 6, seed);
            let errs: Vec<f64> = (1..=6).map(|d| reconstruction_error(&x, d)).collect();
            prop_assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-10), "{:?}", errs);
        }
    }
}

use rand_distr::{Distribution, StandardNormal};

use super::ImageDataset;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::SeededRng;

/// Isotropic Gaussian clusters with standard deviation `spread` around
/// `num_classes` centers that are pairwise at least `10·spread` apart.
/// Classes are balanced (sizes differ by at most one); rows are shuffled and
/// the first round(0.7·n) form the training split.
pub fn synthetic_blobs(n: usize, num_classes: usize, dim: usize, spread: f64, seed: u64) -> Result<ImageDataset> {
    if num_classes < 2 || n < num_classes || dim == 0 || !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::Parameter(format!(
            "synthetic_blobs needs n ≥ C ≥ 2, dim ≥ 1, spread > 0; got n={n}, C={num_classes}, dim={dim}, spread={spread}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let gap = 10.0 * spread;
    // centers uniform in a cube large enough that rejection rarely fails
    let side = 4.0 * gap * num_classes as f64;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(num_classes);
    let mut attempts = 0;
    while centers.len() < num_classes {
        let c: Vec<f64> = (0..dim).map(|_| side * rng.unit()).collect();
        let far = centers.iter().all(|o| {
            o.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() >= gap * gap
        });
        if far {
            centers.push(c);
        }
        attempts += 1;
        if attempts > 10_000 {
            // fall back to a line along the first axis
            centers = (0..num_classes)
                .map(|k| {
                    let mut c = vec![0.0; dim];
                    c[0] = 2.0 * gap * k as f64;
                    c
                })
                .collect();
        }
    }
    let mut labels: Vec<usize> = (0..n).map(|i| i % num_classes).collect();
    rng.shuffle(&mut labels);
    let mut features = DenseMatrix::zeros((n, dim));
    for (i, &c) in labels.iter().enumerate() {
        for j in 0..dim {
            let z: f64 = StandardNormal.sample(rng.inner_mut());
            features[[i, j]] = centers[c][j] + spread * z;
        }
    }
    let n_train = ((0.7 * n as f64).round() as usize).clamp(1, n);
    ImageDataset::new(features, labels, (0..n_train).collect(), (n_train..n).collect(), num_classes)
}

//! Image datasets as flattened feature matrices with a train/test split.

mod idx;
mod synthetic;
mod usps;

pub use idx::{load_idx_dataset, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels};
pub use synthetic::synthetic_blobs;
pub use usps::{load_usps_dataset, read_usps_file, write_usps_file};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::SeededRng;

/// Flattened images (one per row), class ids, and a train/test partition.
///
/// Loaders place training rows before test rows, so the first
/// `train_indices.len()` rows are the labeled ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset {
    features: DenseMatrix,
    labels: Vec<usize>,
    train_indices: Vec<usize>,
    test_indices: Vec<usize>,
    num_classes: usize,
}

impl ImageDataset {
    pub fn new(
        features: DenseMatrix,
        labels: Vec<usize>,
        train_indices: Vec<usize>,
        test_indices: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let n = features.nrows();
        if labels.len() != n {
            return Err(Error::shape(
                "dataset",
                format!("{n} feature rows but {} labels", labels.len()),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= num_classes) {
            return Err(Error::Parameter(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        let mut seen = vec![false; n];
        for &i in train_indices.iter().chain(&test_indices) {
            if i >= n || seen[i] {
                return Err(Error::Parameter(format!(
                    "train/test indices must partition 0..{n}; offending index {i}"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parameter(format!("train/test indices do not cover 0..{n}")));
        }
        crate::linalg::ensure_finite(&features, "dataset features")?;
        Ok(ImageDataset {
            features,
            labels,
            train_indices,
            test_indices,
            num_classes,
        })
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.train_indices
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test_indices
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Same labels and split with replaced features (e.g. after PCA).
    pub fn with_features(&self, features: DenseMatrix) -> Result<Self> {
        ImageDataset::new(
            features,
            self.labels.clone(),
            self.train_indices.clone(),
            self.test_indices.clone(),
            self.num_classes,
        )
    }

    /// Seeded class-stratified subsample: `train_count` rows from the
    /// training pool and `test_count` from the test pool, each allocated to
    /// classes in proportion to the pool by largest remainder. Selected
    /// training rows come first in the result, in original order.
    pub fn subsample_stratified(&self, train_count: usize, test_count: usize, seed: u64) -> Result<Self> {
        let mut rng = SeededRng::new(seed);
        let train = self.stratified_pick(&self.train_indices, train_count, &mut rng)?;
        let test = self.stratified_pick(&self.test_indices, test_count, &mut rng)?;
        let rows: Vec<usize> = train.iter().chain(&test).copied().collect();
        let features = self.features.select(ndarray::Axis(0), &rows);
        let labels = rows.iter().map(|&i| self.labels[i]).collect();
        ImageDataset::new(
            features,
            labels,
            (0..train.len()).collect(),
            (train.len()..rows.len()).collect(),
            self.num_classes,
        )
    }

    fn stratified_pick(&self, pool: &[usize], count: usize, rng: &mut SeededRng) -> Result<Vec<usize>> {
        if count > pool.len() {
            return Err(Error::Parameter(format!(
                "cannot draw {count} rows from a pool of {}",
                pool.len()
            )));
        }
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); self.num_classes];
        for &i in pool {
            by_class[self.labels[i]].push(i);
        }
        let total = pool.len() as f64;
        let quotas: Vec<f64> = by_class
            .iter()
            .map(|c| count as f64 * c.len() as f64 / total.max(1.0))
            .collect();
        let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut order: Vec<usize> = (0..self.num_classes).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - alloc[a] as f64;
            let rb = quotas[b] - alloc[b] as f64;
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let missing = count - alloc.iter().sum::<usize>();
        for &c in order.iter().take(missing) {
            alloc[c] += 1;
        }
        let mut picked = Vec::with_capacity(count);
        for (members, &take) in by_class.iter_mut().zip(&alloc) {
            rng.partial_shuffle(members, take);
            picked.extend_from_slice(&members[..take]);
        }
        picked.sort_unstable();
        Ok(picked)
    }
}

//! Label matrices, synthetic label noise, decoding and accuracy.
//!
//! Noise draw order for [`inject_noise`], from one [`SeededRng`] stream:
//! first `round(level·l)` steps of a partial Fisher–Yates over a copy of the
//! training indices select the flipped rows; then, in selection order, each
//! selected row draws `r = below(C − 1)` and takes class `r` if `r < clean`,
//! else `r + 1`.

use serde::{Deserialize, Serialize};

use crate::dataset::ImageDataset;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelScheme {
    /// +1 for the labeled class, −1 elsewhere, 0 on unlabeled rows
    Pm1,
    OneHot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    pub values: DenseMatrix,
    pub scheme: LabelScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisySplit {
    pub clean_labels: Vec<usize>,
    pub noisy_labels: Vec<usize>,
    /// Sorted row ids whose label was replaced; always training rows.
    pub flipped: Vec<usize>,
    pub level: f64,
    pub seed: u64,
}

/// Replaces exactly round(level·l) training labels with a uniformly chosen
/// different class. Test labels are never touched.
pub fn inject_noise(dataset: &ImageDataset, level: f64, seed: u64) -> Result<NoisySplit> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::Parameter(format!("noise level {level} outside [0, 1)")));
    }
    let clean = dataset.labels().to_vec();
    let c = dataset.num_classes();
    let mut pool = dataset.train_indices().to_vec();
    let count = (level * pool.len() as f64).round() as usize;
    if count > 0 && c < 2 {
        return Err(Error::Parameter("label noise needs at least two classes".into()));
    }
    let mut rng = SeededRng::new(seed);
    rng.partial_shuffle(&mut pool, count);
    let mut noisy = clean.clone();
    for &i in &pool[..count] {
        let r = rng.below(c - 1);
        noisy[i] = if r < clean[i] { r } else { r + 1 };
    }
    let mut flipped = pool[..count].to_vec();
    flipped.sort_unstable();
    Ok(NoisySplit {
        clean_labels: clean,
        noisy_labels: noisy,
        flipped,
        level,
        seed,
    })
}

/// Label matrix built from `noisy_labels` over `labeled_set`.
pub fn encode_labels(
    split: &NoisySplit,
    labeled_set: &[usize],
    num_classes: usize,
    scheme: LabelScheme,
) -> Result<LabelMatrix> {
    let n = split.noisy_labels.len();
    let mut values = DenseMatrix::zeros((n, num_classes));
    let off = match scheme {
        LabelScheme::Pm1 => -1.0,
        LabelScheme::OneHot => 0.0,
    };
    for &i in labeled_set {
        if i >= n {
            return Err(Error::Parameter(format!("labeled index {i} out of range for {n} rows")));
        }
        let class = split.noisy_labels[i];
        if class >= num_classes {
            return Err(Error::Parameter(format!("class {class} ≥ {num_classes}")));
        }
        values.row_mut(i).fill(off);
        values[[i, class]] = 1.0;
    }
    Ok(LabelMatrix { values, scheme })
}

/// Row-wise argmax; ties go to the lowest class index.
pub fn decode_predictions(f: &DenseMatrix) -> Result<Vec<usize>> {
    if f.ncols() < 2 {
        return Err(Error::Parameter(format!("decoding needs at least 2 classes, got {}", f.ncols())));
    }
    f.rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::Numerical(format!("NaN score at ({i}, {j})")));
                }
                if v > row[best] {
                    best = j;
                }
            }
            Ok(best)
        })
        .collect()
}

/// Fraction of `eval_set` where `pred` matches `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize], eval_set: &[usize]) -> Result<f64> {
    if eval_set.is_empty() {
        return Err(Error::Parameter("accuracy over an empty evaluation set".into()));
    }
    if pred.len() != truth.len() {
        return Err(Error::shape(
            "accuracy",
            format!("{} predictions for {} labels", pred.len(), truth.len()),
        ));
    }
    let mut hits = 0usize;
    for &i in eval_set {
        if i >= pred.len() {
            return Err(Error::Parameter(format!("evaluation index {i} out of range")));
        }
        hits += usize::from(pred[i] == truth[i]);
    }
    Ok(hits as f64 / eval_set.len() as f64)
}

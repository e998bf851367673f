//! USPS digits in the `zip.train` / `zip.test` text layout: one image per
//! line, a class label (written as a real, truncated) followed by 256 pixel
//! values in [-1, 1], kept as-is.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::ImageDataset;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const USPS_PIXELS: usize = 256;

/// Parses one file into (labels, row-major pixels). Blank lines are skipped.
pub fn read_usps_file(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    let mut pixels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let at = |detail: String| Error::format(path, format!("line {}: {detail}", lineno + 1));
        if fields.len() != USPS_PIXELS + 1 {
            return Err(at(format!("expected {} fields, found {}", USPS_PIXELS + 1, fields.len())));
        }
        let label: f64 = fields[0]
            .parse()
            .map_err(|_| at(format!("bad label `{}`", fields[0])))?;
        if !(label >= 0.0 && label < 1e6) {
            return Err(at(format!("label {label} is not a class id")));
        }
        labels.push(label.trunc() as usize);
        for f in &fields[1..] {
            let v: f64 = f.parse().map_err(|_| at(format!("bad pixel `{f}`")))?;
            if !v.is_finite() {
                return Err(at(format!("non-finite pixel `{f}`")));
            }
            pixels.push(v);
        }
    }
    Ok((labels, pixels))
}

/// Writes rows in the same layout. Values use the shortest representation
/// that parses back to the same bits.
pub fn write_usps_file(path: &Path, features: &DenseMatrix, labels: &[usize]) -> Result<()> {
    if features.ncols() != USPS_PIXELS || features.nrows() != labels.len() {
        return Err(Error::shape(
            "write_usps_file",
            format!("{}×{} features with {} labels", features.nrows(), features.ncols(), labels.len()),
        ));
    }
    let mut out = Vec::new();
    for (row, &label) in features.rows().into_iter().zip(labels) {
        write!(out, "{label}").unwrap();
        for v in row {
            write!(out, " {v:?}").unwrap();
        }
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads the training file then the test file; training rows come first.
/// The class count is one more than the largest label.
pub fn load_usps_dataset(train_path: &Path, test_path: &Path) -> Result<ImageDataset> {
    let (mut labels, mut pixels) = read_usps_file(train_path)?;
    let (test_labels, test_pixels) = read_usps_file(test_path)?;
    let n_train = labels.len();
    labels.extend(test_labels);
    pixels.extend(test_pixels);
    let n = labels.len();
    let features = DenseMatrix::from_shape_vec((n, USPS_PIXELS), pixels)
        .map_err(|e| Error::format(train_path, e.to_string()))?;
    let num_classes = labels.iter().max().map_or(0, |&c| c + 1);
    ImageDataset::new(features, labels, (0..n_train).collect(), (n_train..n).collect(), num_classes)
}

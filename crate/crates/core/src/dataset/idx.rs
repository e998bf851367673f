//! IDX files (the MNIST distribution format): big-endian u32 magic, then
//! big-endian u32 dimensions, then unsigned bytes.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::ImageDataset;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Raw images: (count, height, width, pixels in row-major order).
pub type IdxImages = (usize, usize, usize, Vec<u8>);

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    Ok(bytes)
}

fn be_u32(bytes: &[u8], at: usize, path: &Path) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(path, "truncated header"))
}

pub fn read_idx_images(path: &Path) -> Result<IdxImages> {
    let bytes = read_all(path)?;
    let magic = be_u32(&bytes, 0, path)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::format(path, format!("bad image magic {magic:#010x}")));
    }
    let count = be_u32(&bytes, 4, path)? as usize;
    let height = be_u32(&bytes, 8, path)? as usize;
    let width = be_u32(&bytes, 12, path)? as usize;
    let expected = count * height * width;
    let body = &bytes[16..];
    if body.len() != expected {
        return Err(Error::format(
            path,
            format!("expected {expected} pixel bytes for {count}×{height}×{width}, found {}", body.len()),
        ));
    }
    Ok((count, height, width, body.to_vec()))
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_all(path)?;
    let magic = be_u32(&bytes, 0, path)?;
    if magic != LABELS_MAGIC {
        return Err(Error::format(path, format!("bad label magic {magic:#010x}")));
    }
    let count = be_u32(&bytes, 4, path)? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(Error::format(
            path,
            format!("header says {count} labels, found {}", body.len()),
        ));
    }
    Ok(body.to_vec())
}

pub fn write_idx_images(path: &Path, height: usize, width: usize, pixels: &[u8]) -> Result<()> {
    let count = pixels.len() / (height * width).max(1);
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let mut write = || -> std::io::Result<()> {
        for v in [IMAGES_MAGIC, count as u32, height as u32, width as u32] {
            w.write_all(&v.to_be_bytes())?;
        }
        w.write_all(pixels)?;
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let mut write = || -> std::io::Result<()> {
        w.write_all(&LABELS_MAGIC.to_be_bytes())?;
        w.write_all(&(labels.len() as u32).to_be_bytes())?;
        w.write_all(labels)?;
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Loads a train and a test split. Each image is flattened row by row
/// (pixel (r, c) lands in column r·width + c) and divided by 255. Training
/// rows come first. The class count is one more than the largest label.
pub fn load_idx_dataset(
    images_train: &Path,
    labels_train: &Path,
    images_test: &Path,
    labels_test: &Path,
) -> Result<ImageDataset> {
    let (n_train, h, w, train_px) = read_idx_images(images_train)?;
    let (n_test, h2, w2, test_px) = read_idx_images(images_test)?;
    if (h, w) != (h2, w2) {
        return Err(Error::format(
            images_test,
            format!("image size {h2}×{w2} differs from training size {h}×{w}"),
        ));
    }
    let train_labels = read_idx_labels(labels_train)?;
    let test_labels = read_idx_labels(labels_test)?;
    if train_labels.len() != n_train {
        return Err(Error::format(
            labels_train,
            format!("{} labels for {n_train} images", train_labels.len()),
        ));
    }
    if test_labels.len() != n_test {
        return Err(Error::format(
            labels_test,
            format!("{} labels for {n_test} images", test_labels.len()),
        ));
    }
    let n = n_train + n_test;
    let m = h * w;
    let pixels: Vec<f64> = train_px
        .iter()
        .chain(&test_px)
        .map(|&p| f64::from(p) / 255.0)
        .collect();
    let features = DenseMatrix::from_shape_vec((n, m), pixels)
        .map_err(|e| Error::format(images_train, e.to_string()))?;
    let labels: Vec<usize> = train_labels.iter().chain(&test_labels).map(|&c| c as usize).collect();
    let num_classes = labels.iter().max().map_or(0, |&c| c + 1);
    ImageDataset::new(features, labels, (0..n_train).collect(), (n_train..n).collect(), num_classes)
}

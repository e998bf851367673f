//! Binary CSR operator files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size          field
//! 0       8             magic "HPROPCSR"
//! 8       4             version (u32, currently 1)
//! 12      4             normalization (u32: 0 sym, 1 rw, 2 graph_sym, 3 gcn)
//! 16      8             rows (u64)
//! 24      8             cols (u64)
//! 32      8             nnz (u64)
//! 40      8·(rows+1)    row offsets (u64)
//! ...     8·nnz         column indices (u64)
//! ...     8·nnz         values (f64, IEEE-754 bits)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::operator::{Normalization, PropagationOperator};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

pub const CACHE_MAGIC: &[u8; 8] = b"HPROPCSR";
pub const CACHE_VERSION: u32 = 1;

pub fn write_operator<W: Write>(op: &PropagationOperator, mut w: W) -> std::io::Result<()> {
    let m = op.matrix();
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&u32::from(op.normalization().code()).to_le_bytes())?;
    for v in [m.rows(), m.cols(), m.nnz()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for &v in m.row_offsets().iter().chain(m.col_indices()) {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for &v in m.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

pub fn save_operator(op: &PropagationOperator, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_operator(op, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_index_array(r: &mut impl Read, len: usize) -> std::io::Result<Vec<usize>> {
    (0..len).map(|_| read_u64(r).map(|v| v as usize)).collect()
}

/// Reads an operator; `origin` only labels errors.
pub fn read_operator<R: Read>(mut r: R, origin: &Path) -> Result<PropagationOperator> {
    let truncated = |e: std::io::Error| Error::format(origin, format!("truncated operator file: {e}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::format(origin, "bad magic bytes"));
    }
    let version = read_u32(&mut r).map_err(truncated)?;
    if version != CACHE_VERSION {
        return Err(Error::format(origin, format!("unsupported version {version}")));
    }
    let code = read_u32(&mut r).map_err(truncated)?;
    let normalization = u8::try_from(code)
        .ok()
        .and_then(Normalization::from_code)
        .ok_or_else(|| Error::format(origin, format!("unknown normalization code {code}")))?;
    let rows = read_u64(&mut r).map_err(truncated)? as usize;
    let cols = read_u64(&mut r).map_err(truncated)? as usize;
    let nnz = read_u64(&mut r).map_err(truncated)? as usize;
    let row_offsets = read_index_array(&mut r, rows + 1).map_err(truncated)?;
    let col_indices = read_index_array(&mut r, nnz).map_err(truncated)?;
    let values = (0..nnz)
        .map(|_| read_u64(&mut r).map(f64::from_bits))
        .collect::<std::io::Result<Vec<f64>>>()
        .map_err(truncated)?;
    let matrix = SparseMatrix::from_csr(rows, cols, row_offsets, col_indices, values)
        .map_err(|e| Error::format(origin, e.to_string()))?;
    PropagationOperator::new(matrix, normalization)
}

pub fn load_operator(path: &Path) -> Result<PropagationOperator> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_operator(BufReader::new(file), path)
}

//! Fixed-dimension sentence embeddings and exact cosine nearest-neighbour
//! search.
//!
//! On-disk format (`.sseb`, little-endian):
//!
//! ```text
//! "SSEB" | u32 version = 1 | u32 dim | u64 count | count * dim f32, row-major
//! ```
//!
//! with a companion `.ids` text file holding one id per line, line `k`
//! naming row `k`.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{CurateError, Result};

pub const MAGIC: &[u8; 4] = b"SSEB";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8;

/// Tolerance on the L2 norm of a normalized row.
pub const NORM_TOLERANCE: f64 = 1e-4;

/// Derives the `.ids` companion of an embedding file.
pub fn ids_path_for(data_path: &Path) -> PathBuf {
    data_path.with_extension("ids")
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborHit {
    pub id: String,
    pub similarity: f64,
}

/// Id-indexed embedding rows, L2-normalized on construction.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    dim: usize,
    rows: Vec<f32>,
    norms: Vec<f64>,
    positions: HashMap<String, usize>,
}

fn l2_norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

impl EmbeddingMatrix {
    /// Builds a matrix from row-major data, normalizing every row.
    pub fn from_rows(ids: Vec<String>, dim: usize, mut rows: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(CurateError::Invalid("embedding dim must be positive".into()));
        }
        if rows.len() != ids.len() * dim {
            return Err(CurateError::Invalid(format!(
                "{} ids but {} floats for dim {}",
                ids.len(),
                rows.len(),
                dim
            )));
        }
        let mut positions = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if positions.insert(id.clone(), i).is_some() {
                return Err(CurateError::Invalid(format!("duplicate embedding id `{id}`")));
            }
        }
        let mut norms = Vec::with_capacity(ids.len());
        for (i, row) in rows.chunks_exact_mut(dim).enumerate() {
            if row.iter().any(|x| !x.is_finite()) {
                return Err(CurateError::Invalid(format!(
                    "embedding row {i} (`{}`) holds a non-finite value",
                    ids[i]
                )));
            }
            let norm = l2_norm(row);
            if norm == 0.0 {
                return Err(CurateError::ZeroNormRow {
                    row: i,
                    id: ids[i].clone(),
                });
            }
            for x in row.iter_mut() {
                *x = (f64::from(*x) / norm) as f32;
            }
            norms.push(l2_norm(row));
        }
        Ok(EmbeddingMatrix {
            ids,
            dim,
            rows,
            norms,
            positions,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Rows are always normalized once constructed.
    pub fn normalized(&self) -> bool {
        true
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, row: usize) -> &str {
        &self.ids[row]
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.rows[row * self.dim..(row + 1) * self.dim]
    }

    pub fn row_norm(&self, row: usize) -> f64 {
        self.norms[row]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.position(id).map(|i| self.row(i))
    }

    fn check_query(&self, vector: &[f32]) -> Result<f64> {
        if vector.len() != self.dim {
            return Err(CurateError::DimensionMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        let norm = l2_norm(vector);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(CurateError::ZeroQuery);
        }
        Ok(norm)
    }

    /// Cosine similarity of `vector` with row `row`, accumulated in f64.
    pub fn cosine(&self, vector: &[f32], row: usize) -> Result<f64> {
        let qn = self.check_query(vector)?;
        Ok(self.cosine_unchecked(vector, qn, row))
    }

    fn cosine_unchecked(&self, vector: &[f32], query_norm: f64, row: usize) -> f64 {
        let sim = dot(vector, self.row(row)) / (query_norm * self.norms[row]);
        sim.clamp(-1.0, 1.0)
    }

    /// Exact top-`k` rows by cosine similarity; ties go to the smaller id.
    pub fn query(&self, vector: &[f32], k: usize) -> Result<Vec<NeighborHit>> {
        self.query_where(vector, k, |_| true)
    }

    /// Like [`query`](Self::query), restricted to rows accepted by `keep`.
    pub fn query_where(
        &self,
        vector: &[f32],
        k: usize,
        keep: impl Fn(usize) -> bool,
    ) -> Result<Vec<NeighborHit>> {
        let qn = self.check_query(vector)?;
        if k == 0 {
            return Ok(Vec::new());
        }
        let better = |a: (f64, usize), b: (f64, usize)| {
            a.0 > b.0 || (a.0 == b.0 && self.ids[a.1] < self.ids[b.1])
        };
        // Best-first, at most k long.
        let mut top: Vec<(f64, usize)> = Vec::with_capacity(k.min(self.len()) + 1);
        for row in (0..self.len()).filter(|&r| keep(r)) {
            let cand = (self.cosine_unchecked(vector, qn, row), row);
            if top.len() == k && !better(cand, top[k - 1]) {
                continue;
            }
            let at = top.partition_point(|&t| better(t, cand));
            top.insert(at, cand);
            top.truncate(k);
        }
        Ok(top
            .into_iter()
            .map(|(similarity, row)| NeighborHit {
                id: self.ids[row].clone(),
                similarity,
            })
            .collect())
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> CurateError {
    CurateError::EmbeddingFormat {
        path: path.to_owned(),
        message: message.into(),
    }
}

/// Reads raw `(dim, count, data)` from an `.sseb` stream.
pub fn read_sseb(mut reader: impl Read, path: &Path) -> Result<(usize, usize, Vec<f32>)> {
    let mut header = [0u8; HEADER_LEN];
    reader
        .read_exact(&mut header)
        .map_err(|_| format_err(path, "truncated header"))?;
    if &header[0..4] != MAGIC {
        return Err(format_err(path, "bad magic bytes"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(format_err(path, format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(header[12..20].try_into().unwrap());
    if dim == 0 {
        return Err(format_err(path, "dim is zero"));
    }
    let count = usize::try_from(count).map_err(|_| format_err(path, "count overflows"))?;
    let floats = count
        .checked_mul(dim)
        .ok_or_else(|| format_err(path, "count * dim overflows"))?;
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| CurateError::io(path, e))?;
    if bytes.len() != floats * 4 {
        return Err(format_err(
            path,
            format!("expected {} data bytes, found {}", floats * 4, bytes.len()),
        ));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok((dim, count, data))
}

/// Writes rows in the `.sseb` format.
pub fn write_sseb(mut writer: impl Write, dim: usize, rows: &[f32]) -> std::io::Result<()> {
    assert!(dim > 0 && rows.len().is_multiple_of(dim), "rows must fill whole rows of dim");
    writer.write_all(MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    writer.write_all(&(dim as u32).to_le_bytes())?;
    writer.write_all(&((rows.len() / dim) as u64).to_le_bytes())?;
    for x in rows {
        writer.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Writes an embedding file pair.
pub fn write_embeddings(
    data_path: &Path,
    ids_path: &Path,
    ids: &[String],
    dim: usize,
    rows: &[f32],
) -> Result<()> {
    if rows.len() != ids.len() * dim {
        return Err(CurateError::Invalid("id count does not match rows".into()));
    }
    let file = File::create(data_path).map_err(|e| CurateError::io(data_path, e))?;
    let mut w = BufWriter::new(file);
    write_sseb(&mut w, dim, rows)
        .and_then(|_| w.flush())
        .map_err(|e| CurateError::io(data_path, e))?;
    let mut text = String::new();
    for id in ids {
        text.push_str(id);
        text.push('\n');
    }
    fs::write(ids_path, text).map_err(|e| CurateError::io(ids_path, e))
}

/// Loads and normalizes an embedding file pair.
pub fn load_embeddings(data_path: &Path, ids_path: &Path) -> Result<EmbeddingMatrix> {
    let file = File::open(data_path).map_err(|e| CurateError::io(data_path, e))?;
    let (dim, count, data) = read_sseb(BufReader::new(file), data_path)?;
    let text = fs::read_to_string(ids_path).map_err(|e| CurateError::io(ids_path, e))?;
    let ids: Vec<String> = if text.is_empty() {
        Vec::new()
    } else {
        text.strip_suffix('\n')
            .unwrap_or(&text)
            .split('\n')
            .map(str::to_owned)
            .collect()
    };
    if ids.len() != count {
        return Err(format_err(
            ids_path,
            format!("{} ids for {} rows", ids.len(), count),
        ));
    }
    EmbeddingMatrix::from_rows(ids, dim, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[(&str, &[f32])]) -> EmbeddingMatrix {
        let dim = rows[0].1.len();
        EmbeddingMatrix::from_rows(
            rows.iter().map(|(id, _)| id.to_string()).collect(),
            dim,
            rows.iter().flat_map(|(_, r)| r.iter().copied()).collect(),
        )
        .unwrap()
    }

    fn hits(h: &[NeighborHit]) -> Vec<(&str, f64)> {
        h.iter().map(|x| (x.id.as_str(), x.similarity)).collect()
    }

    #[test]
    fn unit_axis_queries() {
        let m = matrix(&[("e1", &[1.0, 0.0]), ("e2", &[0.0, 1.0])]);
        assert_eq!(hits(&m.query(&[1.0, 0.0], 2).unwrap()), [("e1", 1.0), ("e2", 0.0)]);
        let h = m.query(&[0.6, 0.8], 2).unwrap();
        assert_eq!((h[0].id.as_str(), h[1].id.as_str()), ("e2", "e1"));
        assert!((h[0].similarity - 0.8).abs() < 1e-7);
        assert!((h[1].similarity - 0.6).abs() < 1e-7);
    }

    #[test]
    fn ties_go_to_lower_id() {
        let m = matrix(&[("b", &[1.0, 1.0]), ("a", &[2.0, 2.0]), ("c", &[0.0, 1.0])]);
        let h = m.query(&[3.0, 3.0], 3).unwrap();
        assert_eq!(h[0].id, "a");
        assert_eq!(h[1].id, "b");
        assert_eq!(h[0].similarity, h[1].similarity);
    }

    #[test]
    fn k_larger_than_rows_and_zero() {
        let m = matrix(&[("a", &[1.0, 0.0])]);
        assert_eq!(m.query(&[1.0, 1.0], 5).unwrap().len(), 1);
        assert!(m.query(&[1.0, 1.0], 0).unwrap().is_empty());
    }

    #[test]
    fn query_errors() {
        let m = matrix(&[("a", &[1.0, 0.0])]);
        assert!(matches!(
            m.query(&[1.0, 0.0, 0.0], 1),
            Err(CurateError::DimensionMismatch { expected: 2, actual: 3 })
        ));
        assert!(matches!(m.query(&[0.0, 0.0], 1), Err(CurateError::ZeroQuery)));
    }

    #[test]
    fn rows_are_normalized_and_filtered_query_respects_mask() {
        let m = matrix(&[("a", &[3.0, 4.0]), ("b", &[0.0, 2.0])]);
        assert!(m.normalized());
        for i in 0..m.len() {
            assert!((m.row_norm(i) - 1.0).abs() < NORM_TOLERANCE);
        }
        let h = m.query_where(&[3.0, 4.0], 1, |r| r == 1).unwrap();
        assert_eq!(h[0].id, "b");
    }

    #[test]
    fn file_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("e.sseb");
        let ids_file = ids_path_for(&data);
        let ids: Vec<String> = ["x", "y"].map(String::from).to_vec();
        write_embeddings(&data, &ids_file, &ids, 2, &[1.0, 0.0, 0.0, 3.0]).unwrap();
        let m = load_embeddings(&data, &ids_file).unwrap();
        assert_eq!(m.ids(), ids.as_slice());
        assert_eq!(m.row(1), &[0.0, 1.0]);

        // header bytes are bit-exact
        let bytes = fs::read(&data).unwrap();
        assert_eq!(&bytes[..4], b"SSEB");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[2, 0, 0, 0]);
        assert_eq!(&bytes[12..20], &[2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(bytes.len(), 20 + 16);

        fs::write(&ids_file, "x\n").unwrap();
        assert!(matches!(
            load_embeddings(&data, &ids_file),
            Err(CurateError::EmbeddingFormat { .. })
        ));

        let mut bad = bytes.clone();
        bad[0] = b'X';
        fs::write(&data, &bad).unwrap();
        assert!(load_embeddings(&data, &ids_file).is_err());

        let mut bad = bytes;
        bad[4] = 2;
        fs::write(&data, &bad).unwrap();
        assert!(load_embeddings(&data, &ids_file).is_err());
    }

    #[test]
    fn empty_file_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("e.sseb");
        let ids_file = dir.path().join("e.ids");
        write_embeddings(&data, &ids_file, &[], 4, &[]).unwrap();
        let m = load_embeddings(&data, &ids_file).unwrap();
        assert!(m.is_empty());
        assert_eq!(m.dim(), 4);
    }

    #[test]
    fn count_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("e.sseb");
        let ids_file = dir.path().join("e.ids");
        let ids: Vec<String> = (0..10).map(|i| format!("r{i}")).collect();
        write_embeddings(&data, &ids_file, &ids, 1, &[1.0; 10]).unwrap();
        fs::write(&ids_file, ids[..9].join("\n") + "\n").unwrap();
        assert!(load_embeddings(&data, &ids_file).is_err());
    }

    #[test]
    fn zero_row_named() {
        let err = EmbeddingMatrix::from_rows(
            vec!["a".into(), "b".into()],
            2,
            vec![1.0, 0.0, 0.0, 0.0],
        )
        .unwrap_err();
        assert!(matches!(err, CurateError::ZeroNormRow { row: 1, .. }));
        assert!(err.to_string().contains("row 1"));
    }
}

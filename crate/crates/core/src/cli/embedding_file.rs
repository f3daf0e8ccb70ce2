//! Embedding tables on disk.
//!
//! Binary layout, all little-endian:
//!
//! | offset | size | field                 |
//! |--------|------|-----------------------|
//! | 0      | 4    | magic `SLEM`          |
//! | 4      | 2    | version (1)           |
//! | 6      | 4    | count                 |
//! | 10     | 4    | dim                   |
//! | 14     | 4·count·dim | f32 values, row-major |
//!
//! An optional sidecar `<file>.meta.csv` with header `id,label,slice` gives
//! per-row ids, labels and slices. Files ending in `.csv`, `.tsv` or `.txt`
//! are read as delimited text with one row of numbers per embedding.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Embedding, Representation};
use crate::simulator::{derive_seed, EvalItem, Stream, StreamSpec};
use crate::streamline::{LabeledItem, Slice, SlicedLabeledPool, UnlabeledBuffer, UnlabeledItem};
use crate::ItemId;

pub const MAGIC: &[u8; 4] = b"SLEM";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 14;

/// Per-row metadata from the sidecar table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowMeta {
    pub id: u64,
    pub label: usize,
    pub slice: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub rows: Vec<Vec<f32>>,
    pub meta: Option<Vec<RowMeta>>,
}

impl EmbeddingTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn file_err(offset: usize, reason: impl Into<String>) -> Error {
    Error::EmbeddingFile {
        offset: offset as u64,
        reason: reason.into(),
    }
}

/// Serializes rows into the binary layout.
pub fn encode_embeddings(rows: &[Vec<f32>]) -> Result<Vec<u8>> {
    let first = rows.first().ok_or(Error::EmptyCollection("embedding rows"))?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidEmbedding);
    }
    if let Some(r) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: r.len(),
        });
    }
    let count = u32::try_from(rows.len())
        .map_err(|_| Error::ShapeMismatch("more rows than the format holds".into()))?;
    let dim32 =
        u32::try_from(dim).map_err(|_| Error::ShapeMismatch("dimension too large".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * rows.len() * dim);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&dim32.to_le_bytes());
    for v in rows.iter().flatten() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Parses the binary layout.
pub fn decode_embeddings(bytes: &[u8]) -> Result<(usize, Vec<Vec<f32>>)> {
    if bytes.len() < HEADER_LEN {
        return Err(file_err(
            bytes.len(),
            format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len()),
        ));
    }
    if &bytes[0..4] != MAGIC {
        return Err(file_err(0, "bad magic, expected SLEM"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(file_err(4, format!("unsupported version {version}")));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let count = word(6) as usize;
    let dim = word(10) as usize;
    if count == 0 {
        return Err(file_err(6, "count is zero; empty collections are rejected"));
    }
    if dim == 0 {
        return Err(file_err(10, "dim is zero"));
    }
    let expected = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| file_err(6, "count x dim overflows"))?;
    if bytes.len() != expected {
        return Err(file_err(
            bytes.len().min(expected),
            format!("expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    let mut rows = Vec::with_capacity(count);
    for r in 0..count {
        let mut row = Vec::with_capacity(dim);
        for c in 0..dim {
            let at = HEADER_LEN + 4 * (r * dim + c);
            let v = f32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
            if !v.is_finite() {
                return Err(file_err(at, "non-finite value"));
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok((dim, rows))
}

/// Sidecar path for an embedding file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.csv");
    PathBuf::from(s)
}

fn is_text(path: &Path) -> Option<u8> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("txt") => Some(b','),
        Some("tsv") => Some(b'\t'),
        _ => None,
    }
}

fn read_text(path: &Path, delimiter: u8) -> Result<(usize, Vec<Vec<f32>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f32>> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let offset = rec.position().map_or(0, |p| p.byte()) as usize;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f32>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| file_err(offset, format!("`{f}` is not a finite number")))
            })
            .collect::<Result<Vec<f32>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(file_err(
                    offset,
                    format!("row has {} values, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let dim = rows.first().map(Vec::len).ok_or_else(|| file_err(0, "no rows"))?;
    if dim == 0 {
        return Err(file_err(0, "empty row"));
    }
    Ok((dim, rows))
}

/// Reads the sidecar table.
pub fn read_meta(path: &Path) -> Result<Vec<RowMeta>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Reads embeddings and, when present, the sidecar table.
pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let (dim, rows) = match is_text(path) {
        Some(d) => read_text(path, d)?,
        None => decode_embeddings(&std::fs::read(path).map_err(|e| Error::io(path, e))?)?,
    };
    let side = sidecar_path(path);
    let meta = if side.exists() {
        let meta = read_meta(&side)?;
        if meta.len() != rows.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} metadata rows for {} embeddings",
                meta.len(),
                rows.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(m) = meta.iter().find(|m| !seen.insert(m.id)) {
            return Err(Error::DuplicateItem(m.id));
        }
        Some(meta)
    } else {
        None
    };
    Ok(EmbeddingTable { dim, rows, meta })
}

/// Writes the binary file and, when `meta` is given, its sidecar.
pub fn write_embeddings(path: &Path, rows: &[Vec<f32>], meta: Option<&[RowMeta]>) -> Result<()> {
    let bytes = encode_embeddings(rows)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    if let Some(meta) = meta {
        if meta.len() != rows.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} metadata rows for {} embeddings",
                meta.len(),
                rows.len()
            )));
        }
        let side = sidecar_path(path);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&side)?;
        for m in meta {
            w.serialize(m)?;
        }
        w.flush().map_err(|e| Error::io(&side, e))?;
    }
    Ok(())
}

/// Builds a stream from a labeled table. Each slice is shuffled with `seed`;
/// its head becomes the initial pool, the next `eval_per_slice` rows the
/// evaluation set and the rest feeds the episodes in schedule order. Copies
/// made for redundancy get fresh ids above the largest table id.
pub fn stream_from_table(table: &EmbeddingTable, spec: &StreamSpec, seed: u64) -> Result<Stream> {
    let meta = table
        .meta
        .as_ref()
        .ok_or_else(|| Error::InvalidStream("embedding table has no id/label/slice sidecar".into()))?;
    let mut spec = spec.clone();
    spec.slices = meta.iter().map(|m| m.slice).max().map_or(0, |s| s + 1);
    spec.classes = meta.iter().map(|m| m.label).max().map_or(0, |l| l + 1).max(2);
    spec.dim = table.dim;
    spec.validate_layout()?;

    let mut by_slice: Vec<Vec<usize>> = vec![Vec::new(); spec.slices];
    for (i, m) in meta.iter().enumerate() {
        by_slice[m.slice].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
    for rows in &mut by_slice {
        rows.shuffle(&mut rng);
    }
    let payload = |i: usize| -> Result<Representation> {
        Ok(Representation::Flat(Embedding::new(
            table.rows[i].iter().map(|&v| f64::from(v)).collect(),
        )?))
    };

    let mut cursor = vec![0usize; spec.slices];
    let mut take = |s: usize, n: usize| -> Result<Vec<usize>> {
        let start = cursor[s];
        if start + n > by_slice[s].len() {
            return Err(Error::InvalidStream(format!(
                "slice {s} has {} rows, needs at least {}",
                by_slice[s].len(),
                start + n
            )));
        }
        cursor[s] += n;
        Ok(by_slice[s][start..start + n].to_vec())
    };

    let mut slices = Vec::with_capacity(spec.slices);
    for s in 0..spec.slices {
        let rare = spec.rare_slices.contains(&s);
        let n = if rare {
            spec.rare_initial()
        } else {
            spec.common_initial
        };
        let items = take(s, n)?
            .into_iter()
            .map(|i| {
                Ok(LabeledItem {
                    id: ItemId(meta[i].id),
                    label: meta[i].label,
                    payload: payload(i)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        slices.push(Slice::new(items, rare));
    }
    let pool = SlicedLabeledPool::new(slices)?;

    let mut eval = Vec::new();
    for s in 0..spec.slices {
        for i in take(s, spec.eval_per_slice)? {
            eval.push(EvalItem {
                features: table.rows[i].iter().map(|&v| f64::from(v)).collect(),
                label: meta[i].label,
                slice: s,
            });
        }
    }

    let mut next_id = meta.iter().map(|m| m.id).max().map_or(0, |m| m + 1);
    let unique = spec.episode_size / spec.redundancy;
    let mut labels = HashMap::new();
    let mut episodes = Vec::with_capacity(spec.rounds);
    for r in 0..spec.rounds {
        let s = spec.schedule.slice_for_round(r, spec.slices, &spec.rare_slices)?;
        let mut items = Vec::with_capacity(spec.episode_size);
        for i in take(s, unique)? {
            let p = payload(i)?;
            for copy in 0..spec.redundancy {
                let id = if copy == 0 {
                    ItemId(meta[i].id)
                } else {
                    next_id += 1;
                    ItemId(next_id - 1)
                };
                labels.insert(id, meta[i].label);
                items.push(UnlabeledItem {
                    id,
                    payload: p.clone(),
                });
            }
        }
        items.shuffle(&mut rng);
        episodes.push(UnlabeledBuffer::new(items, Some(s))?);
    }
    Stream::from_parts(pool, episodes, eval, spec.classes, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let bytes = encode_embeddings(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(&bytes[..4], b"SLEM");
        assert_eq!(bytes.len(), HEADER_LEN + 8);
        assert_eq!(u32::from_le_bytes(bytes[10..14].try_into().unwrap()), 2);
    }

    #[test]
    fn truncated_reports_lengths() {
        let mut bytes = encode_embeddings(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        bytes.truncate(bytes.len() - 3);
        let err = decode_embeddings(&bytes).unwrap_err().to_string();
        assert!(err.contains("expected 30 bytes, found 27"), "{err}");
    }

    #[test]
    fn zero_count_rejected() {
        let mut bytes = encode_embeddings(&[vec![1.0]]).unwrap();
        bytes[6..10].copy_from_slice(&0u32.to_le_bytes());
        bytes.truncate(HEADER_LEN);
        assert!(matches!(
            decode_embeddings(&bytes),
            Err(Error::EmbeddingFile { offset: 6, .. })
        ));
    }
}

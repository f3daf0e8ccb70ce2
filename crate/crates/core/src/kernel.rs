//! Embeddings and the similarity kernels built from them.
//!
//! Every set function in the crate reads its similarities from a
//! [`SimilarityMatrix`]. Entries are nonnegative: cosine scores below zero are
//! clamped to zero so the facility-location family stays monotone.
//!
//! Images with several detected objects are compared with
//! [`object_set_similarity`], which averages how well each side's objects are
//! covered by the other side's objects.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ItemId;

/// Self-similarities that land this close to one are reported as exactly one.
const UNIT_SNAP: f64 = 1e-12;

fn clamp_unit(x: f64) -> f64 {
    if x >= 1.0 - UNIT_SNAP {
        1.0
    } else if x <= 0.0 {
        0.0
    } else {
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A dense real feature vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    values: Vec<f64>,
}

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidEmbedding);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }

    /// Unit-length copy of this embedding. Normalizing twice is a no-op up to
    /// rounding.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            values: self.values.iter().map(|v| v / norm).collect(),
        })
    }

    fn check_dim(&self, other: &Embedding) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }
}

impl From<Embedding> for Vec<f64> {
    fn from(e: Embedding) -> Self {
        e.values
    }
}

/// The per-object embeddings of one image. Objects are normalized on
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectSetEmbedding {
    objects: Vec<Embedding>,
}

impl ObjectSetEmbedding {
    pub fn new(objects: Vec<Embedding>) -> Result<Self> {
        let first = objects.first().ok_or(Error::EmptyObjectSet)?;
        for o in &objects[1..] {
            first.check_dim(o)?;
        }
        let objects = objects
            .iter()
            .map(Embedding::normalized)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { objects })
    }

    pub fn objects(&self) -> &[Embedding] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.objects[0].dim()
    }
}

/// Feature payload of a single item.
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Flat(Embedding),
    Objects(ObjectSetEmbedding),
}

impl Representation {
    pub fn kind(&self) -> &'static str {
        match self {
            Representation::Flat(_) => "flat",
            Representation::Objects(_) => "object-set",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Representation::Flat(e) => e.dim(),
            Representation::Objects(o) => o.dim(),
        }
    }

    pub fn as_flat(&self) -> Option<&Embedding> {
        match self {
            Representation::Flat(e) => Some(e),
            Representation::Objects(_) => None,
        }
    }
}

impl From<Embedding> for Representation {
    fn from(e: Embedding) -> Self {
        Representation::Flat(e)
    }
}

impl From<ObjectSetEmbedding> for Representation {
    fn from(o: ObjectSetEmbedding) -> Self {
        Representation::Objects(o)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric {
    Cosine,
    Rbf { bandwidth: f64 },
    ObjectSet,
}

impl Metric {
    /// Cosine for flat embeddings, the object-set reduction for object
    /// collections.
    pub fn default_for(repr: &Representation) -> Metric {
        match repr {
            Representation::Flat(_) => Metric::Cosine,
            Representation::Objects(_) => Metric::ObjectSet,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::Rbf { .. } => "rbf",
            Metric::ObjectSet => "object_set",
        }
    }

    /// Applies the metric to a single pair.
    pub fn similarity(&self, a: &Representation, b: &Representation) -> Result<f64> {
        match (self, a, b) {
            (Metric::Cosine, Representation::Flat(x), Representation::Flat(y)) => {
                cosine_similarity(x, y)
            }
            (Metric::Rbf { bandwidth }, Representation::Flat(x), Representation::Flat(y)) => {
                rbf_similarity(x, y, *bandwidth)
            }
            (Metric::ObjectSet, Representation::Objects(x), Representation::Objects(y)) => {
                object_set_similarity(x, y)
            }
            (_, x, y) if x.kind() != y.kind() => Err(Error::MixedRepresentations),
            (m, x, _) => Err(Error::MetricKindMismatch {
                metric: m.name(),
                kind: x.kind(),
            }),
        }
    }
}

/// Cosine similarity clamped to `[0, 1]`.
pub fn cosine_similarity(a: &Embedding, b: &Embedding) -> Result<f64> {
    a.check_dim(b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(clamp_unit(dot(&a.values, &b.values) / (na * nb)))
}

/// Gaussian kernel `exp(-|a - b|^2 / (2 h^2))`.
pub fn rbf_similarity(a: &Embedding, b: &Embedding, bandwidth: f64) -> Result<f64> {
    if bandwidth <= 0.0 || !bandwidth.is_finite() {
        return Err(Error::NonPositiveBandwidth(bandwidth));
    }
    a.check_dim(b)?;
    let sq: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((-sq / (2.0 * bandwidth * bandwidth)).exp())
}

/// Image-to-image score from object-to-object dot products.
///
/// Each object of `x1` is matched to its best counterpart in `x2` and the
/// matches are averaged; the same is done from the `x2` side and the two
/// averages are themselves averaged.
pub fn object_set_similarity(x1: &ObjectSetEmbedding, x2: &ObjectSetEmbedding) -> Result<f64> {
    if x1.is_empty() || x2.is_empty() {
        return Err(Error::EmptyObjectSet);
    }
    x1.objects[0].check_dim(&x2.objects[0])?;
    let n1 = x1.len();
    let n2 = x2.len();
    let mut pair = vec![0.0; n1 * n2];
    for (i, a) in x1.objects.iter().enumerate() {
        for (j, b) in x2.objects.iter().enumerate() {
            pair[i * n2 + j] = clamp_unit(dot(&a.values, &b.values));
        }
    }
    let forward: f64 = (0..n1)
        .map(|i| pair[i * n2..(i + 1) * n2].iter().copied().fold(0.0, f64::max))
        .sum::<f64>()
        / n1 as f64;
    let backward: f64 = (0..n2)
        .map(|j| (0..n1).map(|i| pair[i * n2 + j]).fold(0.0, f64::max))
        .sum::<f64>()
        / n2 as f64;
    Ok(clamp_unit(0.5 * (forward + backward)))
}

/// Dense row-major similarity kernel between two indexed collections.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    row_ids: Vec<ItemId>,
    col_ids: Vec<ItemId>,
}

impl SimilarityMatrix {
    /// Builds a kernel from explicit rows. Every row must have the same
    /// length and every entry must be finite and nonnegative. Zero columns are
    /// allowed (an empty conditioning set).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidKernel("ragged rows".into()));
        }
        let n = rows.len();
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_raw(n, cols, data)
    }

    /// An `rows x 0` kernel.
    pub fn empty_cols(rows: usize) -> Self {
        Self {
            rows,
            cols: 0,
            data: Vec::new(),
            row_ids: (0..rows as u64).map(ItemId).collect(),
            col_ids: Vec::new(),
        }
    }

    fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if let Some(bad) = data.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidKernel(format!(
                "entry {bad} is negative or not finite"
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            row_ids: (0..rows as u64).map(ItemId).collect(),
            col_ids: (0..cols as u64).map(ItemId).collect(),
        })
    }

    /// Attaches stable item identifiers to both axes.
    pub fn with_ids(mut self, row_ids: Vec<ItemId>, col_ids: Vec<ItemId>) -> Result<Self> {
        if row_ids.len() != self.rows || col_ids.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} kernel given {} row ids and {} col ids",
                self.rows,
                self.cols,
                row_ids.len(),
                col_ids.len()
            )));
        }
        self.row_ids = row_ids;
        self.col_ids = col_ids;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_ids(&self) -> &[ItemId] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[ItemId] {
        &self.col_ids
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Largest entry of each row, zero for a row with no columns.
    pub fn row_max(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().copied().fold(0.0, f64::max))
            .collect()
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if factor <= 0.0 || !factor.is_finite() {
            return Err(Error::InvalidKernel(format!("scale factor {factor}")));
        }
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= factor);
        Ok(out)
    }

    /// Sub-kernel on the given row and column positions, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        for &r in rows {
            if r >= self.rows {
                return Err(Error::IndexOutOfRange { index: r, size: self.rows });
            }
        }
        for &c in cols {
            if c >= self.cols {
                return Err(Error::IndexOutOfRange { index: c, size: self.cols });
            }
        }
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(Self {
            rows: rows.len(),
            cols: cols.len(),
            data,
            row_ids: rows.iter().map(|&r| self.row_ids[r]).collect(),
            col_ids: cols.iter().map(|&c| self.col_ids[c]).collect(),
        })
    }

    /// Concatenates the columns of two kernels that share a row axis.
    pub fn hconcat(&self, other: &SimilarityMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot join {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        let mut col_ids = self.col_ids.clone();
        col_ids.extend_from_slice(&other.col_ids);
        Ok(Self {
            rows: self.rows,
            cols,
            data,
            row_ids: self.row_ids.clone(),
            col_ids,
        })
    }
}

/// Evaluates `metric` on every (row, col) pair.
///
/// Rows are computed in parallel; each entry depends only on its own pair so
/// the result is identical to a sequential double loop.
pub fn build_kernel(
    rows: &[Representation],
    cols: &[Representation],
    metric: Metric,
) -> Result<SimilarityMatrix> {
    if rows.is_empty() {
        return Err(Error::EmptyCollection("kernel rows"));
    }
    if cols.is_empty() {
        return Err(Error::EmptyCollection("kernel columns"));
    }
    let kind = rows[0].kind();
    if rows.iter().chain(cols).any(|r| r.kind() != kind) {
        return Err(Error::MixedRepresentations);
    }
    let n_cols = cols.len();
    let mut data = vec![0.0; rows.len() * n_cols];
    data.par_chunks_mut(n_cols)
        .zip(rows.par_iter())
        .try_for_each(|(out, r)| {
            for (slot, c) in out.iter_mut().zip(cols) {
                *slot = metric.similarity(r, c)?;
            }
            Ok::<_, Error>(())
        })?;
    SimilarityMatrix::from_raw(rows.len(), n_cols, data)
}

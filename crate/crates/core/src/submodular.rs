//! Facility-location set functions and the information measures built on
//! them.
//!
//! Three functions are provided, all defined over a ground set that indexes
//! one axis of a [`SimilarityMatrix`]:
//!
//! * [`FacilityLocation`]: `F(A) = sum_i max_{j in A} S_ij`.
//! * [`Flqmi`], the facility-location mutual information against a fixed
//!   query set `P`: `sum_{i in A} max_{j in P} S_ij + sum_{j in P} max_{i in A} S_ij`.
//! * [`Flcg`], the facility-location conditional gain against a fixed private
//!   set `P`: `sum_i max(max_{j in A} S_ij - max_{j in P} S_ij, 0)`.
//!
//! The max over an empty set is zero, so every function vanishes at the empty
//! set. Each function also exposes an incremental cache (best similarity seen
//! per covered row) that the greedy maximizers use for marginal gains.

use crate::error::{Error, Result};
use crate::kernel::SimilarityMatrix;

/// A set function over `0..ground_size()`.
pub trait SetFunction {
    fn ground_size(&self) -> usize;

    /// Definitional evaluation. Duplicate indices are ignored.
    fn value(&self, set: &[usize]) -> Result<f64>;
}

/// Per-row coverage state used for O(rows) marginal gains.
#[derive(Clone, Debug, PartialEq)]
pub struct GainCache {
    best: Vec<f64>,
}

/// Incremental marginal gains. `gain` must agree with
/// `value(A + x) - value(A)` for the set `A` whose items were inserted.
pub trait IncrementalGain: SetFunction {
    fn empty_cache(&self) -> GainCache;
    fn gain(&self, cache: &GainCache, item: usize) -> f64;
    fn insert(&self, cache: &mut GainCache, item: usize);
}

/// The three facility-location variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FunctionKind {
    Fl,
    Flqmi,
    Flcg,
}

fn checked_set(set: &[usize], ground: usize) -> Result<Vec<usize>> {
    let mut out = set.to_vec();
    for &i in &out {
        if i >= ground {
            return Err(Error::IndexOutOfRange { index: i, size: ground });
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Column-major copy of a kernel so that the similarities of one candidate
/// to every covered row are contiguous.
fn transpose(kernel: &SimilarityMatrix) -> Vec<f64> {
    let (rows, cols) = (kernel.rows(), kernel.cols());
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for (c, v) in kernel.row(r).iter().enumerate() {
            out[c * rows + r] = *v;
        }
    }
    out
}

#[inline]
fn coverage_gain(column: &[f64], best: &[f64]) -> f64 {
    column
        .iter()
        .zip(best)
        .map(|(s, b)| if s > b { s - b } else { 0.0 })
        .sum()
}

#[inline]
fn raise(column: &[f64], best: &mut [f64]) {
    for (b, s) in best.iter_mut().zip(column) {
        if *s > *b {
            *b = *s;
        }
    }
}

/// Facility location over a kernel whose rows are the represented items and
/// whose columns are the ground set.
#[derive(Clone, Debug)]
pub struct FacilityLocation {
    kernel: SimilarityMatrix,
    by_candidate: Vec<f64>,
}

impl FacilityLocation {
    pub fn new(kernel: SimilarityMatrix) -> Self {
        let by_candidate = transpose(&kernel);
        Self { kernel, by_candidate }
    }

    pub fn kernel(&self) -> &SimilarityMatrix {
        &self.kernel
    }

    fn column(&self, item: usize) -> &[f64] {
        let rows = self.kernel.rows();
        &self.by_candidate[item * rows..(item + 1) * rows]
    }
}

impl SetFunction for FacilityLocation {
    fn ground_size(&self) -> usize {
        self.kernel.cols()
    }

    fn value(&self, set: &[usize]) -> Result<f64> {
        let set = checked_set(set, self.ground_size())?;
        Ok((0..self.kernel.rows())
            .map(|i| set.iter().map(|&j| self.kernel.get(i, j)).fold(0.0, f64::max))
            .sum())
    }
}

impl IncrementalGain for FacilityLocation {
    fn empty_cache(&self) -> GainCache {
        GainCache {
            best: vec![0.0; self.kernel.rows()],
        }
    }

    fn gain(&self, cache: &GainCache, item: usize) -> f64 {
        coverage_gain(self.column(item), &cache.best)
    }

    fn insert(&self, cache: &mut GainCache, item: usize) {
        raise(self.column(item), &mut cache.best);
    }
}

/// Facility-location mutual information between a subset of the rows of a
/// `U x P` kernel and the fixed query set `P` (its columns).
#[derive(Clone, Debug)]
pub struct Flqmi {
    kernel: SimilarityMatrix,
    query_max: Vec<f64>,
}

impl Flqmi {
    pub fn new(kernel: SimilarityMatrix) -> Self {
        let query_max = kernel.row_max();
        Self { kernel, query_max }
    }

    pub fn kernel(&self) -> &SimilarityMatrix {
        &self.kernel
    }
}

impl SetFunction for Flqmi {
    fn ground_size(&self) -> usize {
        self.kernel.rows()
    }

    fn value(&self, set: &[usize]) -> Result<f64> {
        let set = checked_set(set, self.ground_size())?;
        let towards_query: f64 = set
            .iter()
            .map(|&i| self.kernel.row(i).iter().copied().fold(0.0, f64::max))
            .sum();
        let query_covered: f64 = (0..self.kernel.cols())
            .map(|j| set.iter().map(|&i| self.kernel.get(i, j)).fold(0.0, f64::max))
            .sum();
        Ok(towards_query + query_covered)
    }
}

impl IncrementalGain for Flqmi {
    fn empty_cache(&self) -> GainCache {
        GainCache {
            best: vec![0.0; self.kernel.cols()],
        }
    }

    fn gain(&self, cache: &GainCache, item: usize) -> f64 {
        self.query_max[item] + coverage_gain(self.kernel.row(item), &cache.best)
    }

    fn insert(&self, cache: &mut GainCache, item: usize) {
        raise(self.kernel.row(item), &mut cache.best);
    }
}

/// Facility-location conditional gain of a subset of the ground set given a
/// private set `P`.
///
/// `ground_kernel` has the represented items as rows and the ground set as
/// columns; `private_kernel` shares the row axis and has `P` as columns.
#[derive(Clone, Debug)]
pub struct Flcg {
    ground: FacilityLocation,
    private_kernel: SimilarityMatrix,
    private_max: Vec<f64>,
}

impl Flcg {
    pub fn new(ground_kernel: SimilarityMatrix, private_kernel: SimilarityMatrix) -> Result<Self> {
        if ground_kernel.rows() != private_kernel.rows() {
            return Err(Error::ShapeMismatch(format!(
                "conditional gain needs a shared row axis: {} vs {} rows",
                ground_kernel.rows(),
                private_kernel.rows()
            )));
        }
        if ground_kernel.row_ids() != private_kernel.row_ids() {
            return Err(Error::ShapeMismatch(
                "ground and private kernels order their rows differently".into(),
            ));
        }
        let private_max = private_kernel.row_max();
        Ok(Self {
            ground: FacilityLocation::new(ground_kernel),
            private_kernel,
            private_max,
        })
    }

    pub fn ground_kernel(&self) -> &SimilarityMatrix {
        self.ground.kernel()
    }

    pub fn private_kernel(&self) -> &SimilarityMatrix {
        &self.private_kernel
    }
}

impl SetFunction for Flcg {
    fn ground_size(&self) -> usize {
        self.ground.ground_size()
    }

    fn value(&self, set: &[usize]) -> Result<f64> {
        let set = checked_set(set, self.ground_size())?;
        let kernel = self.ground.kernel();
        Ok((0..kernel.rows())
            .map(|i| {
                let covered = set.iter().map(|&j| kernel.get(i, j)).fold(0.0, f64::max);
                (covered - self.private_max[i]).max(0.0)
            })
            .sum())
    }
}

impl IncrementalGain for Flcg {
    fn empty_cache(&self) -> GainCache {
        GainCache {
            best: self.private_max.clone(),
        }
    }

    fn gain(&self, cache: &GainCache, item: usize) -> f64 {
        self.ground.gain(cache, item)
    }

    fn insert(&self, cache: &mut GainCache, item: usize) {
        self.ground.insert(cache, item)
    }
}

/// One of the three facility-location functions.
#[derive(Clone, Debug)]
pub enum SetFunctionInstance {
    Fl(FacilityLocation),
    Flqmi(Flqmi),
    Flcg(Flcg),
}

impl SetFunctionInstance {
    pub fn facility_location(kernel: SimilarityMatrix) -> Self {
        Self::Fl(FacilityLocation::new(kernel))
    }

    pub fn flqmi(kernel: SimilarityMatrix) -> Self {
        Self::Flqmi(Flqmi::new(kernel))
    }

    pub fn flcg(ground_kernel: SimilarityMatrix, private_kernel: SimilarityMatrix) -> Result<Self> {
        Ok(Self::Flcg(Flcg::new(ground_kernel, private_kernel)?))
    }

    pub fn kind(&self) -> FunctionKind {
        match self {
            Self::Fl(_) => FunctionKind::Fl,
            Self::Flqmi(_) => FunctionKind::Flqmi,
            Self::Flcg(_) => FunctionKind::Flcg,
        }
    }

    /// The same function restricted to the ground items `ids` (positions in
    /// the current ground set). Kernels that index the ground set on both
    /// axes are cut down on both axes, so a partition only ever holds a
    /// `|ids| x |ids|` block.
    pub fn restrict(&self, ids: &[usize]) -> Result<Self> {
        let square = |k: &SimilarityMatrix| k.rows() == k.cols() && k.row_ids() == k.col_ids();
        let all_rows = |k: &SimilarityMatrix| (0..k.rows()).collect::<Vec<_>>();
        Ok(match self {
            Self::Fl(f) => {
                let k = f.kernel();
                let rows = if square(k) { ids.to_vec() } else { all_rows(k) };
                Self::facility_location(k.select(&rows, ids)?)
            }
            Self::Flqmi(f) => {
                let k = f.kernel();
                let cols: Vec<usize> = (0..k.cols()).collect();
                Self::flqmi(k.select(ids, &cols)?)
            }
            Self::Flcg(f) => {
                let g = f.ground_kernel();
                let p = f.private_kernel();
                let rows = if square(g) { ids.to_vec() } else { all_rows(g) };
                let p_cols: Vec<usize> = (0..p.cols()).collect();
                let private = if p.cols() == 0 {
                    SimilarityMatrix::empty_cols(rows.len())
                        .with_ids(rows.iter().map(|&r| g.row_ids()[r]).collect(), vec![])?
                } else {
                    p.select(&rows, &p_cols)?
                };
                Self::flcg(g.select(&rows, ids)?, private)?
            }
        })
    }
}

impl SetFunction for SetFunctionInstance {
    fn ground_size(&self) -> usize {
        match self {
            Self::Fl(f) => f.ground_size(),
            Self::Flqmi(f) => f.ground_size(),
            Self::Flcg(f) => f.ground_size(),
        }
    }

    fn value(&self, set: &[usize]) -> Result<f64> {
        match self {
            Self::Fl(f) => f.value(set),
            Self::Flqmi(f) => f.value(set),
            Self::Flcg(f) => f.value(set),
        }
    }
}

impl IncrementalGain for SetFunctionInstance {
    fn empty_cache(&self) -> GainCache {
        match self {
            Self::Fl(f) => f.empty_cache(),
            Self::Flqmi(f) => f.empty_cache(),
            Self::Flcg(f) => f.empty_cache(),
        }
    }

    fn gain(&self, cache: &GainCache, item: usize) -> f64 {
        match self {
            Self::Fl(f) => f.gain(cache, item),
            Self::Flqmi(f) => f.gain(cache, item),
            Self::Flcg(f) => f.gain(cache, item),
        }
    }

    fn insert(&self, cache: &mut GainCache, item: usize) {
        match self {
            Self::Fl(f) => f.insert(cache, item),
            Self::Flqmi(f) => f.insert(cache, item),
            Self::Flcg(f) => f.insert(cache, item),
        }
    }
}

/// `f(A + x) - f(A)` through the incremental cache.
pub fn marginal_gain<F: IncrementalGain + ?Sized>(f: &F, set: &[usize], item: usize) -> Result<f64> {
    let set = checked_set(set, f.ground_size())?;
    if item >= f.ground_size() {
        return Err(Error::IndexOutOfRange {
            index: item,
            size: f.ground_size(),
        });
    }
    if set.binary_search(&item).is_ok() {
        return Err(Error::AlreadySelected(item));
    }
    let mut cache = f.empty_cache();
    for &a in &set {
        f.insert(&mut cache, a);
    }
    Ok(f.gain(&cache, item))
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Submodular mutual information `f(A) + f(B) - f(A + B)`.
pub fn smi_value<F: SetFunction + ?Sized>(f: &F, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(f.value(a)? + f.value(b)? - f.value(&union(a, b))?)
}

/// Submodular conditional gain of `A` given `B`: `f(A + B) - f(B)`.
pub fn scg_value<F: SetFunction + ?Sized>(f: &F, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(f.value(&union(a, b))? - f.value(b)?)
}

/// Normalizer applied to the mutual information between an unlabeled buffer
/// and a slice when identifying slices: `|U| + |P|`.
pub fn flqmi_normalizer(buffer_len: usize, slice_len: usize) -> f64 {
    (buffer_len + slice_len) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(rows: Vec<Vec<f64>>) -> SimilarityMatrix {
        SimilarityMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn fl_examples() {
        let f = FacilityLocation::new(k(vec![vec![1.0, 0.2], vec![0.2, 1.0]]));
        assert_eq!(f.value(&[]).unwrap(), 0.0);
        assert!((f.value(&[0]).unwrap() - 1.2).abs() < 1e-12);
        assert_eq!(f.value(&[0, 1]).unwrap(), 2.0);
        assert!(matches!(f.value(&[2]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn flqmi_examples() {
        let f = Flqmi::new(k(vec![vec![0.9, 0.1], vec![0.2, 0.8]]));
        assert_eq!(f.value(&[]).unwrap(), 0.0);
        assert!((f.value(&[0, 1]).unwrap() - 3.4).abs() < 1e-12);
        let single = Flqmi::new(k(vec![vec![0.35]]));
        assert!((single.value(&[0]).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn flcg_examples() {
        let g = k(vec![vec![1.0, 0.5], vec![0.5, 1.0]]);
        let f = Flcg::new(g.clone(), k(vec![vec![0.9], vec![0.1]])).unwrap();
        assert_eq!(f.value(&[]).unwrap(), 0.0);
        assert!((f.value(&[1]).unwrap() - 0.9).abs() < 1e-12);

        let empty = Flcg::new(g.clone(), SimilarityMatrix::empty_cols(2)).unwrap();
        let fl = FacilityLocation::new(g);
        for set in [vec![0], vec![1], vec![0, 1]] {
            assert_eq!(empty.value(&set).unwrap(), fl.value(&set).unwrap());
        }
    }

    #[test]
    fn flcg_rejects_unshared_rows() {
        let g = k(vec![vec![1.0, 0.5], vec![0.5, 1.0]]);
        assert!(Flcg::new(g, k(vec![vec![0.3]])).is_err());
    }

    #[test]
    fn marginal_gain_cases() {
        let f = SetFunctionInstance::facility_location(k(vec![
            vec![1.0, 1.0, 0.3],
            vec![1.0, 1.0, 0.3],
            vec![0.3, 0.3, 1.0],
        ]));
        assert_eq!(marginal_gain(&f, &[], 2).unwrap(), f.value(&[2]).unwrap());
        // item 1 duplicates item 0
        assert_eq!(marginal_gain(&f, &[0], 1).unwrap(), 0.0);
        assert!(matches!(
            marginal_gain(&f, &[0], 0),
            Err(Error::AlreadySelected(0))
        ));
    }

    #[test]
    fn identities_on_small_sets() {
        let f = FacilityLocation::new(k(vec![
            vec![1.0, 0.4, 0.1],
            vec![0.4, 1.0, 0.6],
            vec![0.1, 0.6, 1.0],
        ]));
        assert_eq!(smi_value(&f, &[0, 2], &[]).unwrap(), 0.0);
        assert_eq!(scg_value(&f, &[0, 2], &[]).unwrap(), f.value(&[0, 2]).unwrap());
        assert!((smi_value(&f, &[1], &[1]).unwrap() - f.value(&[1]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn normalizer_is_sum_of_sizes() {
        assert_eq!(flqmi_normalizer(7, 13), 20.0);
    }

    #[test]
    fn restrict_fl_square_cuts_both_axes() {
        let f = SetFunctionInstance::facility_location(k(vec![
            vec![1.0, 0.4, 0.1],
            vec![0.4, 1.0, 0.6],
            vec![0.1, 0.6, 1.0],
        ]));
        let r = f.restrict(&[0, 2]).unwrap();
        assert_eq!(r.ground_size(), 2);
        assert!((r.value(&[0]).unwrap() - 1.1).abs() < 1e-12);
    }
}

//! Comparison selectors: random, uncertainty sampling, plain facility
//! location, FLQMI targeting of a query slice, and gradient-embedding
//! k-means++ seeding.
//!
//! Every selector returns at most `budget` distinct ids from the buffer.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{build_kernel, Metric, Representation};
use crate::maximize::{maximize, MaximizerConfig};
use crate::streamline::{Featurizer, Selection, SlicedLabeledPool, UnlabeledBuffer};
use crate::submodular::SetFunctionInstance;
use crate::ItemId;

const SIMPLEX_TOL: f64 = 1e-6;

/// Model output for one item: a class distribution, or one distribution per
/// predicted box.
#[derive(Clone, Debug, PartialEq)]
pub enum PredictionRecord {
    Classification(Vec<f64>),
    Detection(Vec<Vec<f64>>),
}

fn check_simplex(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidPrediction("empty probability vector".into()));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidPrediction(
            "probabilities must be finite and nonnegative".into(),
        ));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidPrediction(format!("probabilities sum to {sum}")));
    }
    Ok(())
}

impl PredictionRecord {
    pub fn validate(&self) -> Result<()> {
        match self {
            PredictionRecord::Classification(p) => check_simplex(p),
            PredictionRecord::Detection(boxes) => {
                if boxes.is_empty() {
                    return Err(Error::InvalidPrediction("detection item has no boxes".into()));
                }
                boxes.iter().try_for_each(|b| check_simplex(b))
            }
        }
    }

    fn boxes(&self) -> &[Vec<f64>] {
        match self {
            PredictionRecord::Classification(p) => std::slice::from_ref(p),
            PredictionRecord::Detection(b) => b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyMode {
    Entropy,
    LeastConfidence,
    Margin,
}

/// Shannon entropy in nats with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

pub fn least_confidence(p: &[f64]) -> f64 {
    1.0 - p.iter().copied().fold(0.0, f64::max)
}

/// Gap between the two largest probabilities.
pub fn margin(p: &[f64]) -> f64 {
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for &v in p {
        if v > first {
            second = first;
            first = v;
        } else if v > second {
            second = v;
        }
    }
    first - second
}

/// Per-item uncertainty score. Detection items average the per-box score.
pub fn uncertainty_scores(preds: &[PredictionRecord], mode: UncertaintyMode) -> Result<Vec<f64>> {
    preds
        .iter()
        .map(|rec| {
            rec.validate()?;
            let score = match mode {
                UncertaintyMode::Entropy => entropy,
                UncertaintyMode::LeastConfidence => least_confidence,
                UncertaintyMode::Margin => margin,
            };
            let boxes = rec.boxes();
            Ok(boxes.iter().map(|b| score(b)).sum::<f64>() / boxes.len() as f64)
        })
        .collect()
}

/// Top-`budget` items by uncertainty. Entropy and least confidence rank
/// descending; margin ranks ascending. Ties keep buffer order.
pub fn uncertainty_select(
    buffer: &UnlabeledBuffer,
    preds: &[PredictionRecord],
    mode: UncertaintyMode,
    budget: usize,
) -> Result<Vec<ItemId>> {
    if preds.len() != buffer.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} items",
            preds.len(),
            buffer.len()
        )));
    }
    let scores = uncertainty_scores(preds, mode)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    match mode {
        UncertaintyMode::Margin => order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b])),
        _ => order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a])),
    }
    Ok(order
        .into_iter()
        .take(budget)
        .map(|i| buffer.items[i].id)
        .collect())
}

/// Uniform sample without replacement.
pub fn random_select(buffer: &UnlabeledBuffer, budget: usize, seed: u64) -> Vec<ItemId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = budget.min(buffer.len());
    index::sample(&mut rng, buffer.len(), k)
        .into_iter()
        .map(|i| buffer.items[i].id)
        .collect()
}

fn features(buffer: &UnlabeledBuffer, featurizer: &dyn Featurizer) -> Result<Vec<Representation>> {
    buffer
        .items
        .iter()
        .map(|i| featurizer.featurize(&i.payload))
        .collect()
}

fn to_selection(buffer: &UnlabeledBuffer, trace: crate::maximize::SelectionTrace) -> Selection {
    Selection {
        ids: trace.chosen.iter().map(|&i| buffer.items[i].id).collect(),
        trace,
    }
}

/// Facility location over the buffer's own `U x U` kernel.
pub fn submodular_fl_select(
    buffer: &UnlabeledBuffer,
    budget: usize,
    featurizer: &dyn Featurizer,
    metric: Metric,
    maximizer: &MaximizerConfig,
) -> Result<Selection> {
    let budget = budget.min(buffer.len());
    if budget == 0 {
        return Ok(Selection::default());
    }
    let u = features(buffer, featurizer)?;
    let f = SetFunctionInstance::facility_location(build_kernel(&u, &u, metric)?);
    Ok(to_selection(buffer, maximize(&f, &maximizer.with_budget(budget))?))
}

/// FLQMI between buffer subsets and slice `t` of the pool, used as the query
/// set. The budget is fixed; nothing is saved across rounds.
pub fn similar_select(
    buffer: &UnlabeledBuffer,
    pool: &SlicedLabeledPool,
    t: usize,
    budget: usize,
    featurizer: &dyn Featurizer,
    metric: Metric,
    maximizer: &MaximizerConfig,
) -> Result<Selection> {
    let slice = pool.slice(t)?;
    if slice.is_empty() {
        return Err(Error::EmptySlice(t));
    }
    let budget = budget.min(buffer.len());
    if budget == 0 {
        return Ok(Selection::default());
    }
    let u = features(buffer, featurizer)?;
    let q = slice
        .items
        .iter()
        .map(|i| featurizer.featurize(&i.payload))
        .collect::<Result<Vec<_>>>()?;
    let f = SetFunctionInstance::flqmi(build_kernel(&u, &q, metric)?);
    Ok(to_selection(buffer, maximize(&f, &maximizer.with_budget(budget))?))
}

/// Index of the largest probability, smallest index on ties.
pub fn predicted_class(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Last-layer loss gradient under the predicted label: the outer product of
/// `p - onehot(argmax p)` with the penultimate features, flattened class by
/// class.
pub fn gradient_embedding(probs: &[f64], features: &[f64]) -> Vec<f64> {
    let y = predicted_class(probs);
    let mut out = Vec::with_capacity(probs.len() * features.len());
    for (c, &p) in probs.iter().enumerate() {
        let scale = p - if c == y { 1.0 } else { 0.0 };
        out.extend(features.iter().map(|h| scale * h));
    }
    out
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: the first center is uniform, later centers are drawn
/// proportionally to the squared distance to the nearest chosen center. When
/// every remaining point sits on a center the draw falls back to uniform over
/// the unchosen points.
pub fn kmeans_pp_seeding(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    let k = k.min(n);
    if k == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();

    while chosen.len() < k {
        let weights: Vec<f64> = nearest
            .iter()
            .zip(&taken)
            .map(|(&d, &t)| if t { 0.0 } else { d })
            .collect();
        let next = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(&mut rng),
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen.push(next);
        taken[next] = true;
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    chosen
}

/// BADGE: k-means++ seeding over gradient embeddings.
pub fn badge_select(
    buffer: &UnlabeledBuffer,
    probs: &[Vec<f64>],
    features: &[Vec<f64>],
    budget: usize,
    seed: u64,
) -> Result<Vec<ItemId>> {
    if probs.len() != buffer.len() || features.len() != buffer.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions and {} feature rows for {} items",
            probs.len(),
            features.len(),
            buffer.len()
        )));
    }
    for p in probs {
        check_simplex(p)?;
    }
    let grads: Vec<Vec<f64>> = probs
        .iter()
        .zip(features)
        .map(|(p, h)| gradient_embedding(p, h))
        .collect();
    Ok(kmeans_pp_seeding(&grads, budget, seed)
        .into_iter()
        .map(|i| buffer.items[i].id)
        .collect())
}

//! Synthetic episodic streams, a softmax-regression learner and the metrics
//! used to compare selection methods.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    badge_select, random_select, similar_select, submodular_fl_select, uncertainty_select,
    PredictionRecord, UncertaintyMode,
};
use crate::error::{Error, Result};
use crate::kernel::{Embedding, Metric, Representation};
use crate::maximize::MaximizerConfig;
use crate::streamline::{
    scg_select, streamline_round_with, BudgetState, IdentityFeaturizer, LabelOracle, LabeledItem,
    RoundConfig, Slice, SlicedLabeledPool, UnlabeledBuffer, UnlabeledItem,
};
use crate::ItemId;

/// Order in which slices arrive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// Every `k`-th round shows a rare slice; the other rounds cycle through
    /// the common slices.
    EveryK { k: usize },
    /// Round `r` shows slice `r mod T`.
    Sequential,
    Explicit { slices: Vec<usize> },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::EveryK { k: 3 }
    }
}

impl Schedule {
    /// Slice shown in round `round` (zero based).
    pub fn slice_for_round(&self, round: usize, slices: usize, rare: &[usize]) -> Result<usize> {
        if slices == 0 {
            return Err(Error::InvalidStream("no slices".into()));
        }
        match self {
            Schedule::EveryK { k } => {
                if *k == 0 {
                    return Err(Error::InvalidStream("every_k needs k >= 1".into()));
                }
                let common: Vec<usize> = (0..slices).filter(|s| !rare.contains(s)).collect();
                let rare_rounds_through = (round + 1) / k;
                let is_rare = (round + 1) % k == 0;
                if (is_rare && !rare.is_empty()) || common.is_empty() {
                    let seen = if is_rare { rare_rounds_through - 1 } else { round };
                    Ok(rare[seen % rare.len()])
                } else {
                    let seen = if rare.is_empty() {
                        round
                    } else {
                        round - rare_rounds_through
                    };
                    Ok(common[seen % common.len()])
                }
            }
            Schedule::Sequential => Ok(round % slices),
            Schedule::Explicit { slices: order } => {
                let s = *order.get(round).ok_or_else(|| {
                    Error::InvalidStream(format!(
                        "explicit schedule has {} entries, round {round} requested",
                        order.len()
                    ))
                })?;
                if s >= slices {
                    return Err(Error::InvalidStream(format!(
                        "schedule names slice {s} of {slices}"
                    )));
                }
                Ok(s)
            }
        }
    }
}

/// Parameters of a synthetic stream.
///
/// Slice `s`, class `c` is a Gaussian around
/// `o_s + sqrt(w) m_c + sqrt(1 - w) v_{s,c}` where the slice offsets `o_s`
/// are mutually orthogonal, `m_c` is shared by all slices, `v_{s,c}` is
/// specific to the slice and `w` is `shared_class_weight`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamSpec {
    pub slices: usize,
    pub dim: usize,
    pub classes: usize,
    /// Distance between slice centers in units of `noise_std`.
    pub slice_separation: f64,
    /// Norm of the class directions in units of `noise_std`.
    pub class_separation: f64,
    pub shared_class_weight: f64,
    pub noise_std: f64,
    /// Initial labeled size of each common slice.
    pub common_initial: usize,
    /// Ratio of common to rare initial sizes.
    pub imbalance: f64,
    pub rare_slices: Vec<usize>,
    pub schedule: Schedule,
    pub rounds: usize,
    pub episode_size: usize,
    /// Copies of each sampled item in an episode.
    pub redundancy: usize,
    pub eval_per_slice: usize,
    pub seed: u64,
}

impl Default for StreamSpec {
    fn default() -> Self {
        Self {
            slices: 4,
            dim: 16,
            classes: 5,
            slice_separation: 6.0,
            class_separation: 3.0,
            shared_class_weight: 0.3,
            noise_std: 1.0,
            common_initial: 500,
            imbalance: 5.0,
            rare_slices: vec![3],
            schedule: Schedule::default(),
            rounds: 12,
            episode_size: 200,
            redundancy: 2,
            eval_per_slice: 500,
            seed: 0,
        }
    }
}

impl StreamSpec {
    pub fn rare_initial(&self) -> usize {
        (self.common_initial as f64 / self.imbalance).round() as usize
    }

    /// Checks every field the synthetic generator needs.
    pub fn validate(&self) -> Result<()> {
        self.validate_layout()?;
        let bad = |m: String| Err(Error::InvalidStream(m));
        if self.dim < self.slices {
            return bad(format!(
                "dim {} cannot hold {} orthogonal slice offsets",
                self.dim, self.slices
            ));
        }
        if self.classes < 2 {
            return bad("classes must be at least 2".into());
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std must be positive, got {}", self.noise_std));
        }
        if !(self.slice_separation >= 0.0 && self.class_separation >= 0.0) {
            return bad("separations must be nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.shared_class_weight) {
            return bad("shared_class_weight must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Checks the fields that shape the stream: sizes, rarity and schedule.
    pub fn validate_layout(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidStream(m));
        if self.slices == 0 {
            return bad("slices must be at least 1".into());
        }
        if !(self.imbalance >= 1.0 && self.imbalance.is_finite()) {
            return bad(format!("imbalance must be >= 1, got {}", self.imbalance));
        }
        if self.common_initial == 0 || self.rare_initial() == 0 {
            return bad("initial slice sizes must be positive".into());
        }
        if self.redundancy == 0 {
            return bad("redundancy must be at least 1".into());
        }
        if self.episode_size == 0 || self.episode_size % self.redundancy != 0 {
            return bad(format!(
                "episode_size {} must be a positive multiple of redundancy {}",
                self.episode_size, self.redundancy
            ));
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        for (i, &r) in self.rare_slices.iter().enumerate() {
            if r >= self.slices || self.rare_slices[..i].contains(&r) {
                return bad(format!("invalid rare slice {r}"));
            }
        }
        for r in 0..self.rounds {
            self.schedule.slice_for_round(r, self.slices, &self.rare_slices)?;
        }
        Ok(())
    }
}

/// Held-out example with its slice.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalItem {
    pub features: Vec<f64>,
    pub label: usize,
    pub slice: usize,
}

/// Initial pool, the episodes in arrival order and a slice-balanced
/// evaluation set. Holds the hidden labels of every episode item.
#[derive(Clone, Debug)]
pub struct Stream {
    pub pool: SlicedLabeledPool,
    pub episodes: Vec<UnlabeledBuffer>,
    pub eval: Vec<EvalItem>,
    pub classes: usize,
    labels: HashMap<ItemId, usize>,
}

impl Stream {
    /// Assembles a stream from parts, e.g. from an embedding file.
    pub fn from_parts(
        pool: SlicedLabeledPool,
        episodes: Vec<UnlabeledBuffer>,
        eval: Vec<EvalItem>,
        classes: usize,
        labels: HashMap<ItemId, usize>,
    ) -> Result<Self> {
        if episodes.is_empty() {
            return Err(Error::InvalidStream("no episodes".into()));
        }
        for ep in &episodes {
            for it in &ep.items {
                if !labels.contains_key(&it.id) {
                    return Err(Error::InvalidStream(format!("item {} has no label", it.id)));
                }
            }
        }
        Ok(Self {
            pool,
            episodes,
            eval,
            classes,
            labels,
        })
    }
}

impl LabelOracle for Stream {
    fn label(&self, id: ItemId) -> Result<usize> {
        self.labels.get(&id).copied().ok_or(Error::UnknownItem(id.0))
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

struct World {
    means: Vec<Vec<Vec<f64>>>,
    noise: f64,
    classes: usize,
}

impl World {
    fn new(spec: &StreamSpec, rng: &mut ChaCha8Rng) -> Self {
        let d = spec.dim;
        let sigma = spec.noise_std;
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(spec.slices);
        while basis.len() < spec.slices {
            let mut v = gaussian(rng, d);
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
            let v = unit(v);
            if v.iter().any(|x| *x != 0.0) {
                basis.push(v);
            }
        }
        let radius = spec.slice_separation * sigma / std::f64::consts::SQRT_2;
        let class_norm = spec.class_separation * sigma;
        let shared: Vec<Vec<f64>> = (0..spec.classes).map(|_| unit(gaussian(rng, d))).collect();
        let (ws, wp) = (
            spec.shared_class_weight.sqrt(),
            (1.0 - spec.shared_class_weight).sqrt(),
        );
        let means = basis
            .iter()
            .map(|o| {
                shared
                    .iter()
                    .map(|m| {
                        let v = unit(gaussian(rng, d));
                        (0..d)
                            .map(|k| radius * o[k] + class_norm * (ws * m[k] + wp * v[k]))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            means,
            noise: sigma,
            classes: spec.classes,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, slice: usize) -> (Vec<f64>, usize) {
        let label = rng.random_range(0..self.classes);
        let x = self.means[slice][label]
            .iter()
            .map(|m| m + self.noise * rng.sample::<f64, _>(StandardNormal))
            .collect();
        (x, label)
    }
}

fn flat(values: Vec<f64>) -> Result<Representation> {
    Ok(Representation::Flat(Embedding::new(values)?))
}

/// Generates the initial pool, the episodes and the evaluation set. The
/// output is a pure function of `spec`.
pub fn generate_stream(spec: &StreamSpec) -> Result<Stream> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let world = World::new(spec, &mut rng);
    let mut next_id = 0u64;
    let mut fresh = || {
        next_id += 1;
        ItemId(next_id - 1)
    };

    let mut slices = Vec::with_capacity(spec.slices);
    for s in 0..spec.slices {
        let rare = spec.rare_slices.contains(&s);
        let n = if rare {
            spec.rare_initial()
        } else {
            spec.common_initial
        };
        let mut items = Vec::with_capacity(n);
        for _ in 0..n {
            let (x, label) = world.sample(&mut rng, s);
            items.push(LabeledItem {
                id: fresh(),
                label,
                payload: flat(x)?,
            });
        }
        slices.push(Slice::new(items, rare));
    }
    let pool = SlicedLabeledPool::new(slices)?;

    let mut eval = Vec::with_capacity(spec.slices * spec.eval_per_slice);
    for s in 0..spec.slices {
        for _ in 0..spec.eval_per_slice {
            let (features, label) = world.sample(&mut rng, s);
            eval.push(EvalItem {
                features,
                label,
                slice: s,
            });
        }
    }

    let unique = spec.episode_size / spec.redundancy;
    let mut labels = HashMap::new();
    let mut episodes = Vec::with_capacity(spec.rounds);
    for r in 0..spec.rounds {
        let s = spec.schedule.slice_for_round(r, spec.slices, &spec.rare_slices)?;
        let mut items = Vec::with_capacity(spec.episode_size);
        for _ in 0..unique {
            let (x, label) = world.sample(&mut rng, s);
            let payload = flat(x)?;
            for _ in 0..spec.redundancy {
                let id = fresh();
                labels.insert(id, label);
                items.push(UnlabeledItem {
                    id,
                    payload: payload.clone(),
                });
            }
        }
        // Shuffle so copies are not adjacent.
        for i in (1..items.len()).rev() {
            let j = rng.random_range(0..=i);
            items.swap(i, j);
        }
        episodes.push(UnlabeledBuffer::new(items, Some(s))?);
    }

    Ok(Stream {
        pool,
        episodes,
        eval,
        classes: spec.classes,
        labels,
    })
}

/// Vector the learner sees for a payload: flat embeddings as they are,
/// object sets as the mean of their objects.
pub fn payload_vector(payload: &Representation) -> Vec<f64> {
    match payload {
        Representation::Flat(e) => e.values().to_vec(),
        Representation::Objects(o) => {
            let mut acc = vec![0.0; o.dim()];
            for e in o.objects() {
                acc.iter_mut().zip(e.values()).for_each(|(a, v)| *a += v);
            }
            acc.iter_mut().for_each(|a| *a /= o.len() as f64);
            acc
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerHyper {
    pub epochs: usize,
    /// L2 penalty on the weights (not the biases).
    pub l2: f64,
    /// Fixed step size. When absent the inverse of a smoothness bound is used,
    /// which makes every step decrease the loss.
    pub step_size: Option<f64>,
}

impl Default for LearnerHyper {
    fn default() -> Self {
        Self {
            epochs: 100,
            l2: 1e-3,
            step_size: None,
        }
    }
}

/// Multinomial logistic regression on standardized inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Learner {
    classes: usize,
    dim: usize,
    /// `classes x dim` weights followed by `classes` biases.
    params: Vec<f64>,
    mean: Vec<f64>,
    scale: Vec<f64>,
    losses: Vec<f64>,
}

fn softmax_in_place(z: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    z.iter_mut().for_each(|v| *v /= s);
}

fn logits(params: &[f64], x: &[f64], classes: usize, out: &mut [f64]) {
    let d = x.len();
    for c in 0..classes {
        let w = &params[c * d..(c + 1) * d];
        out[c] = params[classes * d + c] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Mean cross-entropy plus `l2 / 2 |W|^2`, and its gradient with respect to
/// the parameter layout of [`Learner`].
pub fn loss_and_gradient(
    params: &[f64],
    x: &[Vec<f64>],
    y: &[usize],
    classes: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let mut p = vec![0.0; classes];
    for (xi, &yi) in x.iter().zip(y) {
        logits(params, xi, classes, &mut p);
        softmax_in_place(&mut p);
        loss -= p[yi].max(1e-300).ln();
        for c in 0..classes {
            let r = p[c] - if c == yi { 1.0 } else { 0.0 };
            grad[classes * d + c] += r;
            grad[c * d..(c + 1) * d]
                .iter_mut()
                .zip(xi)
                .for_each(|(g, v)| *g += r * v);
        }
    }
    let inv = 1.0 / n.max(1) as f64;
    loss *= inv;
    grad.iter_mut().for_each(|g| *g *= inv);
    for k in 0..classes * d {
        loss += 0.5 * l2 * params[k] * params[k];
        grad[k] += l2 * params[k];
    }
    (loss, grad)
}

/// Largest eigenvalue of `[X 1]^T [X 1] / n` by power iteration.
fn gram_top_eigenvalue(x: &[Vec<f64>]) -> f64 {
    let n = x.len() as f64;
    let d = x.first().map_or(0, Vec::len) + 1;
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 0.0;
    for _ in 0..100 {
        let mut next = vec![0.0; d];
        for xi in x {
            let dot = xi.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() + v[d - 1];
            next.iter_mut().zip(xi).for_each(|(o, a)| *o += dot * a);
            next[d - 1] += dot;
        }
        next.iter_mut().for_each(|o| *o /= n);
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let converged = (norm - lambda).abs() <= 1e-10 * norm;
        lambda = norm;
        v = next.into_iter().map(|a| a / norm).collect();
        if converged {
            break;
        }
    }
    lambda
}

/// Fits a learner on raw feature vectors by full-batch gradient descent from
/// zero weights.
pub fn train_on(x: &[Vec<f64>], y: &[usize], classes: usize, hyper: &LearnerHyper) -> Result<Learner> {
    if x.is_empty() {
        return Err(Error::EmptyPool);
    }
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!("{} rows, {} labels", x.len(), y.len())));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::ShapeMismatch("ragged feature rows".into()));
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= classes) {
        return Err(Error::ShapeMismatch(format!("label {bad} with {classes} classes")));
    }
    let n = x.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in x {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v / n);
    }
    let mut scale = vec![0.0; dim];
    for r in x {
        scale
            .iter_mut()
            .zip(r.iter().zip(&mean))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m) / n);
    }
    scale.iter_mut().for_each(|s| {
        *s = if *s > 1e-24 { 1.0 / s.sqrt() } else { 1.0 };
    });
    let z: Vec<Vec<f64>> = x
        .iter()
        .map(|r| {
            r.iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((v, m), s)| (v - m) * s)
                .collect()
        })
        .collect();

    let step = match hyper.step_size {
        Some(s) => s,
        None => 1.0 / (0.5 * gram_top_eigenvalue(&z) * 1.01 + hyper.l2),
    };
    let mut params = vec![0.0; classes * (dim + 1)];
    let mut losses = Vec::with_capacity(hyper.epochs + 1);
    for _ in 0..hyper.epochs {
        let (loss, grad) = loss_and_gradient(&params, &z, y, classes, hyper.l2);
        losses.push(loss);
        params.iter_mut().zip(&grad).for_each(|(p, g)| *p -= step * g);
    }
    losses.push(loss_and_gradient(&params, &z, y, classes, hyper.l2).0);
    Ok(Learner {
        classes,
        dim,
        params,
        mean,
        scale,
        losses,
    })
}

/// Fits a learner on every item of the pool.
pub fn train_learner(pool: &SlicedLabeledPool, classes: usize, hyper: &LearnerHyper) -> Result<Learner> {
    let (x, y): (Vec<_>, Vec<_>) = pool
        .iter()
        .map(|(_, it)| (payload_vector(&it.payload), it.label))
        .unzip();
    train_on(&x, &y, classes, hyper)
}

impl Learner {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Training loss before every epoch and after the last one.
    pub fn loss_history(&self) -> &[f64] {
        &self.losses
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = x
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) * s)
            .collect();
        let mut p = vec![0.0; self.classes];
        logits(&self.params, &z, self.classes, &mut p);
        softmax_in_place(&mut p);
        p
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        crate::baselines::predicted_class(&self.predict_proba(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub full: f64,
    /// Accuracy per slice; NaN for slices without evaluation items.
    pub per_slice: Vec<f64>,
}

/// Overall and per-slice accuracy.
pub fn evaluate<P: Fn(&[f64]) -> usize>(predict: P, eval: &[EvalItem], slices: usize) -> Evaluation {
    let mut hit = vec![0usize; slices];
    let mut count = vec![0usize; slices];
    for it in eval {
        count[it.slice] += 1;
        if predict(&it.features) == it.label {
            hit[it.slice] += 1;
        }
    }
    let total: usize = count.iter().sum();
    Evaluation {
        full: hit.iter().sum::<usize>() as f64 / total as f64,
        per_slice: hit
            .iter()
            .zip(&count)
            .map(|(&h, &c)| h as f64 / c as f64)
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Efficiency {
    Ratio(f64),
    Undefined,
}

/// Labels at which a curve of `(labels, metric)` points first reaches
/// `target`, interpolating linearly between measured points.
pub fn labels_to_reach(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    let mut prev: Option<(f64, f64)> = None;
    for &(l, m) in curve {
        if m >= target {
            return Some(match prev {
                Some((pl, pm)) if m > pm => pl + (target - pm) * (l - pl) / (m - pm),
                _ => l,
            });
        }
        prev = Some((l, m));
    }
    None
}

/// Labels random sampling needs to reach `target` divided by the labels the
/// method needs.
pub fn labeling_efficiency(method: &[(f64, f64)], random: &[(f64, f64)], target: f64) -> Efficiency {
    match (labels_to_reach(method, target), labels_to_reach(random, target)) {
        (Some(m), Some(r)) if m > 0.0 => Efficiency::Ratio(r / m),
        _ => Efficiency::Undefined,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Streamline,
    /// Slice-aware budget, random selection.
    StreamlineNoScg,
    /// Slice-aware budget, BADGE selection.
    StreamlineReplScg,
    /// Conditional-gain selection with the fixed budget.
    StreamlineNoBudget,
    Random,
    Entropy,
    Margin,
    LeastConf,
    Submodular,
    Similar,
    Badge,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Streamline,
        Method::StreamlineNoScg,
        Method::StreamlineReplScg,
        Method::StreamlineNoBudget,
        Method::Random,
        Method::Entropy,
        Method::Margin,
        Method::LeastConf,
        Method::Submodular,
        Method::Similar,
        Method::Badge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Streamline => "streamline",
            Method::StreamlineNoScg => "streamline_no_scg",
            Method::StreamlineReplScg => "streamline_repl_scg",
            Method::StreamlineNoBudget => "streamline_no_budget",
            Method::Random => "random",
            Method::Entropy => "entropy",
            Method::Margin => "margin",
            Method::LeastConf => "least_conf",
            Method::Submodular => "submodular",
            Method::Similar => "similar",
            Method::Badge => "badge",
        }
    }

    pub fn is_streamline(self) -> bool {
        matches!(
            self,
            Method::Streamline
                | Method::StreamlineNoScg
                | Method::StreamlineReplScg
                | Method::StreamlineNoBudget
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config("method", format!("unknown method `{s}`")))
    }
}

/// Settings of a run that are not part of the stream.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentHyper {
    pub budget: usize,
    pub rho: f64,
    pub maximizer: MaximizerConfig,
    pub learner: LearnerHyper,
    /// Kernel used for identification and selection. `None` picks an RBF
    /// kernel with bandwidth `sqrt(dim)` times the spread of the pool.
    pub metric: Option<Metric>,
    /// When set, streamline variants re-flag slices before every round as
    /// rare when smaller than this fraction of the mean of the other slices.
    /// Otherwise the flags of the initial pool are kept.
    pub rare_by_size: Option<f64>,
}

impl Default for ExperimentHyper {
    fn default() -> Self {
        Self {
            budget: 50,
            rho: 0.5,
            maximizer: MaximizerConfig::default(),
            learner: LearnerHyper::default(),
            metric: None,
            rare_by_size: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: usize,
    /// Labels spent up to and including this round.
    pub labels_total: usize,
    pub full_metric: f64,
    pub rare_metric: f64,
    pub identified_slice: Option<usize>,
    pub true_slice: usize,
    pub granted_b: usize,
    pub gamma: f64,
    pub slice_sizes: Vec<usize>,
    pub selected: Vec<ItemId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsLog {
    pub method: Method,
    pub seed: u64,
    pub initial_full: f64,
    pub initial_rare: f64,
    pub initial_sizes: Vec<usize>,
    pub rows: Vec<RoundMetrics>,
}

impl MetricsLog {
    pub fn last(&self) -> Option<&RoundMetrics> {
        self.rows.last()
    }

    /// `(labels, metric)` points including the initial model at zero labels.
    pub fn curve(&self, rare: bool) -> Vec<(f64, f64)> {
        let start = if rare {
            self.initial_rare
        } else {
            self.initial_full
        };
        std::iter::once((0.0, start))
            .chain(self.rows.iter().map(|r| {
                (
                    r.labels_total as f64,
                    if rare { r.rare_metric } else { r.full_metric },
                )
            }))
            .collect()
    }
}

/// SplitMix64 mixing of a seed with a stream index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn auto_bandwidth(pool: &SlicedLabeledPool) -> f64 {
    // Pooled within-slice standard deviation per coordinate.
    let mut sum_var = 0.0;
    let mut count = 0usize;
    let mut dim = 1;
    for slice in pool.slices() {
        let rows: Vec<Vec<f64>> = slice.items.iter().map(|i| payload_vector(&i.payload)).collect();
        let n = rows.len() as f64;
        dim = rows[0].len();
        for k in 0..dim {
            let m = rows.iter().map(|r| r[k]).sum::<f64>() / n;
            sum_var += rows.iter().map(|r| (r[k] - m).powi(2)).sum::<f64>();
        }
        count += rows.len();
    }
    let var = sum_var / (count.max(1) * dim) as f64;
    (dim as f64 * var).sqrt().max(1e-6)
}

fn rare_metric(eval: &Evaluation, rare: &[usize]) -> f64 {
    if rare.is_empty() {
        return eval.full;
    }
    rare.iter().map(|&s| eval.per_slice[s]).sum::<f64>() / rare.len() as f64
}

fn predictions(learner: &Learner, buffer: &UnlabeledBuffer) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    buffer
        .items
        .iter()
        .map(|it| {
            let x = payload_vector(&it.payload);
            (learner.predict_proba(&x), x)
        })
        .unzip()
}

/// Runs `method` over every episode of a generated stream.
pub fn run_experiment(spec: &StreamSpec, method: Method, hyper: &ExperimentHyper) -> Result<MetricsLog> {
    let stream = generate_stream(spec)?;
    run_on_stream(&stream, spec.seed, method, hyper)
}

/// Runs `method` over every episode of `stream`: select, label, augment,
/// retrain, evaluate. Runs end when the episodes are exhausted.
pub fn run_on_stream(
    stream: &Stream,
    seed: u64,
    method: Method,
    hyper: &ExperimentHyper,
) -> Result<MetricsLog> {
    let mut pool = stream.pool.clone();
    let rare: Vec<usize> = pool
        .rare_flags()
        .iter()
        .enumerate()
        .filter_map(|(s, &r)| r.then_some(s))
        .collect();
    let slices = pool.slice_count();
    let metric = hyper.metric.unwrap_or_else(|| Metric::Rbf {
        bandwidth: auto_bandwidth(&pool),
    });
    let featurizer = IdentityFeaturizer;
    let mut state = BudgetState::new(hyper.budget, hyper.rho)?;
    let mut learner = train_learner(&pool, stream.classes, &hyper.learner)?;
    let initial = evaluate(|x| learner.predict(x), &stream.eval, slices);

    let mut log = MetricsLog {
        method,
        seed,
        initial_full: initial.full,
        initial_rare: rare_metric(&initial, &rare),
        initial_sizes: pool.sizes(),
        rows: Vec::with_capacity(stream.episodes.len()),
    };
    let mut labels_total = 0;

    for (round, buffer) in stream.episodes.iter().enumerate() {
        let round_seed = derive_seed(seed, round as u64);
        let mut maximizer = hyper.maximizer.clone();
        maximizer.seed = round_seed;
        let true_slice = buffer
            .true_slice
            .ok_or_else(|| Error::InvalidStream(format!("episode {round} has no slice")))?;

        let (identified, granted, gamma, selected) = if method.is_streamline() {
            if let Some(ratio) = hyper.rare_by_size {
                pool.flag_rare_by_size(ratio);
            }
            let mut cfg = RoundConfig::shared(&featurizer, metric, maximizer.clone());
            cfg.slice_aware = method != Method::StreamlineNoBudget;
            let report = streamline_round_with(
                &mut pool,
                buffer,
                &mut state,
                &cfg,
                stream,
                |pool, buffer, t, b| match method {
                    Method::StreamlineNoScg => Ok(random_select(buffer, b, round_seed)),
                    Method::StreamlineReplScg => {
                        let (probs, feats) = predictions(&learner, buffer);
                        badge_select(buffer, &probs, &feats, b, round_seed)
                    }
                    _ => Ok(scg_select(pool, buffer, t, b, &featurizer, metric, &maximizer)?.ids),
                },
            )?;
            (
                Some(report.identified()),
                report.granted,
                report.gamma,
                report.selected,
            )
        } else {
            let b = hyper.budget.min(buffer.len());
            let ids = match method {
                Method::Random => random_select(buffer, b, round_seed),
                Method::Entropy | Method::Margin | Method::LeastConf => {
                    let mode = match method {
                        Method::Entropy => UncertaintyMode::Entropy,
                        Method::Margin => UncertaintyMode::Margin,
                        _ => UncertaintyMode::LeastConfidence,
                    };
                    let preds: Vec<PredictionRecord> = predictions(&learner, buffer)
                        .0
                        .into_iter()
                        .map(PredictionRecord::Classification)
                        .collect();
                    uncertainty_select(buffer, &preds, mode, b)?
                }
                Method::Submodular => {
                    submodular_fl_select(buffer, b, &featurizer, metric, &maximizer)?.ids
                }
                Method::Similar => {
                    let query = rare.first().copied().unwrap_or(true_slice);
                    similar_select(buffer, &pool, query, b, &featurizer, metric, &maximizer)?.ids
                }
                Method::Badge => {
                    let (probs, feats) = predictions(&learner, buffer);
                    badge_select(buffer, &probs, &feats, b, round_seed)?
                }
                _ => unreachable!("streamline variants handled above"),
            };
            let labeled = ids
                .iter()
                .map(|id| {
                    let item = buffer
                        .items
                        .iter()
                        .find(|i| i.id == *id)
                        .ok_or(Error::UnknownItem(id.0))?;
                    Ok(LabeledItem {
                        id: *id,
                        label: stream.label(*id)?,
                        payload: item.payload.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            pool.augment(true_slice, labeled)?;
            (None, b, 0.0, ids)
        };

        labels_total += selected.len();
        learner = train_learner(&pool, stream.classes, &hyper.learner)?;
        let eval = evaluate(|x| learner.predict(x), &stream.eval, slices);
        log.rows.push(RoundMetrics {
            round,
            labels_total,
            full_metric: eval.full,
            rare_metric: rare_metric(&eval, &rare),
            identified_slice: identified,
            true_slice,
            granted_b: granted,
            gamma,
            slice_sizes: pool.sizes(),
            selected,
        });
    }
    Ok(log)
}

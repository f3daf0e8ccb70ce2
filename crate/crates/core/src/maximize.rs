//! Cardinality-constrained greedy maximization of monotone submodular
//! functions.
//!
//! All argmax steps break ties toward the smallest item id, which makes
//! [`naive_greedy`] and [`lazy_greedy`] pick identical sequences.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::submodular::{IncrementalGain, SetFunctionInstance};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Naive,
    #[default]
    Lazy,
    Stochastic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximizerConfig {
    pub algorithm: Algorithm,
    pub budget: usize,
    /// Sampling slack for stochastic greedy; must be set exactly when the
    /// algorithm is stochastic.
    pub epsilon: Option<f64>,
    pub seed: u64,
    /// Number of ground-set partitions; 1 disables partitioning.
    pub partitions: usize,
}

impl Default for MaximizerConfig {
    fn default() -> Self {
        Self::new(Algorithm::default(), 0)
    }
}

impl MaximizerConfig {
    pub fn new(algorithm: Algorithm, budget: usize) -> Self {
        Self {
            algorithm,
            budget,
            epsilon: None,
            seed: 0,
            partitions: 1,
        }
    }

    pub fn with_budget(&self, budget: usize) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.algorithm, self.epsilon) {
            (Algorithm::Stochastic, Some(e)) if e > 0.0 && e < 1.0 => {}
            (Algorithm::Stochastic, Some(e)) => {
                return Err(Error::InvalidMaximizer(format!(
                    "epsilon must lie in (0, 1), got {e}"
                )))
            }
            (Algorithm::Stochastic, None) => {
                return Err(Error::InvalidMaximizer(
                    "stochastic greedy requires epsilon".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidMaximizer(
                    "epsilon is only meaningful for stochastic greedy".into(),
                ))
            }
            (_, None) => {}
        }
        if self.partitions == 0 {
            return Err(Error::InvalidMaximizer("partitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one maximization run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelectionTrace {
    /// Picked ground items in pick order.
    pub chosen: Vec<usize>,
    /// Marginal gain of each pick at the time it was made.
    pub gains: Vec<f64>,
    /// Number of marginal-gain queries issued.
    pub evaluations: usize,
}

impl SelectionTrace {
    pub fn total_gain(&self) -> f64 {
        self.gains.iter().sum()
    }
}

/// Exhaustive greedy: every remaining item is evaluated at every step.
pub fn naive_greedy<F: IncrementalGain + ?Sized>(f: &F, budget: usize) -> SelectionTrace {
    let n = f.ground_size();
    let picks = budget.min(n);
    let mut cache = f.empty_cache();
    let mut taken = vec![false; n];
    let mut trace = SelectionTrace::default();
    for _ in 0..picks {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| !taken[j]) {
            let g = f.gain(&cache, j);
            trace.evaluations += 1;
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((j, g));
            }
        }
        let (j, g) = best.expect("picks never exceed the ground set");
        taken[j] = true;
        f.insert(&mut cache, j);
        trace.chosen.push(j);
        trace.gains.push(g);
    }
    trace
}

#[derive(Debug)]
struct Bound {
    gain: f64,
    item: usize,
    /// Pick index at which `gain` was computed.
    stamp: usize,
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    // Larger gain first, then smaller item id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.item.cmp(&self.item))
    }
}

/// Greedy with a priority queue of stale upper bounds on the marginal gains.
///
/// An item whose bound was refreshed during the current step and still sits
/// on top of the queue beats every other item, because submodularity keeps
/// the stale bounds above the true gains.
pub fn lazy_greedy<F: IncrementalGain + ?Sized>(f: &F, budget: usize) -> SelectionTrace {
    let n = f.ground_size();
    let picks = budget.min(n);
    let mut cache = f.empty_cache();
    let mut trace = SelectionTrace::default();
    if picks == 0 {
        return trace;
    }
    let mut heap: BinaryHeap<Bound> = (0..n)
        .map(|item| Bound {
            gain: f.gain(&cache, item),
            item,
            stamp: 0,
        })
        .collect();
    trace.evaluations = n;

    for step in 0..picks {
        loop {
            let mut top = heap.pop().expect("heap holds every unpicked item");
            if top.stamp == step {
                f.insert(&mut cache, top.item);
                trace.chosen.push(top.item);
                trace.gains.push(top.gain);
                break;
            }
            top.gain = f.gain(&cache, top.item);
            top.stamp = step;
            trace.evaluations += 1;
            heap.push(top);
        }
    }
    trace
}

/// Candidate-set size used by stochastic greedy at every step, before capping
/// at the number of remaining items.
pub fn stochastic_sample_size(ground: usize, budget: usize, epsilon: f64) -> usize {
    if ground == 0 || budget == 0 {
        return 0;
    }
    let budget = budget.min(ground);
    ((ground as f64 / budget as f64) * (1.0 / epsilon).ln()).ceil() as usize
}

/// Greedy over a fresh uniform sample of the remaining items at every step.
pub fn stochastic_greedy<F: IncrementalGain + ?Sized>(
    f: &F,
    budget: usize,
    epsilon: f64,
    seed: u64,
) -> Result<SelectionTrace> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidMaximizer(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let n = f.ground_size();
    let picks = budget.min(n);
    let sample = stochastic_sample_size(n, picks, epsilon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = f.empty_cache();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut trace = SelectionTrace::default();

    for _ in 0..picks {
        let candidates: Vec<usize> = if sample >= remaining.len() {
            (0..remaining.len()).collect()
        } else {
            let mut idx = index::sample(&mut rng, remaining.len(), sample).into_vec();
            idx.sort_unstable();
            idx
        };
        let mut best: Option<(usize, f64)> = None;
        for pos in candidates {
            let g = f.gain(&cache, remaining[pos]);
            trace.evaluations += 1;
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((pos, g));
            }
        }
        let (pos, g) = best.expect("at least one candidate");
        let item = remaining.remove(pos);
        f.insert(&mut cache, item);
        trace.chosen.push(item);
        trace.gains.push(g);
    }
    Ok(trace)
}

/// Runs the configured algorithm on the whole ground set. Partitioning is
/// ignored here; see [`partitioned_maximize`].
pub fn run_algorithm<F: IncrementalGain + ?Sized>(f: &F, cfg: &MaximizerConfig) -> Result<SelectionTrace> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::Naive => Ok(naive_greedy(f, cfg.budget)),
        Algorithm::Lazy => Ok(lazy_greedy(f, cfg.budget)),
        Algorithm::Stochastic => stochastic_greedy(
            f,
            cfg.budget,
            cfg.epsilon.expect("validated"),
            cfg.seed,
        ),
    }
}

/// Round-robin partition of `0..ground` into `parts` groups together with the
/// budget each group receives.
pub fn partition_plan(ground: usize, budget: usize, parts: usize) -> Result<Vec<(Vec<usize>, usize)>> {
    if parts == 0 {
        return Err(Error::InvalidMaximizer("partitions must be at least 1".into()));
    }
    if parts > ground {
        return Err(Error::InvalidMaximizer(format!(
            "{parts} partitions exceed the ground set of {ground} items"
        )));
    }
    let budget = budget.min(ground);
    Ok((0..parts)
        .map(|p| {
            let members: Vec<usize> = (p..ground).step_by(parts).collect();
            let share = budget / parts + usize::from(p < budget % parts);
            (members, share)
        })
        .collect())
}

/// Splits the ground set into `cfg.partitions` round-robin groups, maximizes
/// each with its share of the budget and concatenates the picks.
///
/// `build` receives the ground ids of one partition and returns a function
/// over positions `0..ids.len()` of that partition. Partitions run in
/// parallel; the output is the same as running them in order.
pub fn partitioned_maximize<F, B>(ground: usize, build: B, cfg: &MaximizerConfig) -> Result<SelectionTrace>
where
    F: IncrementalGain + Send,
    B: Fn(&[usize]) -> Result<F> + Sync,
{
    cfg.validate()?;
    let plan = partition_plan(ground, cfg.budget, cfg.partitions)?;
    let parts: Vec<SelectionTrace> = plan
        .par_iter()
        .enumerate()
        .map(|(p, (members, share))| {
            let f = build(members)?;
            let local = MaximizerConfig {
                budget: *share,
                partitions: 1,
                seed: cfg.seed.wrapping_add(p as u64),
                ..cfg.clone()
            };
            let mut t = run_algorithm(&f, &local)?;
            t.chosen.iter_mut().for_each(|c| *c = members[*c]);
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let mut out = SelectionTrace::default();
    for t in parts {
        out.chosen.extend(t.chosen);
        out.gains.extend(t.gains);
        out.evaluations += t.evaluations;
    }
    Ok(out)
}

/// Maximizes a facility-location instance, partitioning through
/// [`SetFunctionInstance::restrict`] when `cfg.partitions > 1`.
pub fn maximize(f: &SetFunctionInstance, cfg: &MaximizerConfig) -> Result<SelectionTrace> {
    cfg.validate()?;
    let n = crate::submodular::SetFunction::ground_size(f);
    if cfg.partitions <= 1 || n == 0 {
        return run_algorithm(f, cfg);
    }
    partitioned_maximize(n, |ids| f.restrict(ids), cfg)
}

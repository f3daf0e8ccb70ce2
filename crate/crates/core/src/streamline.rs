//! The three-step round: identify the slice of the incoming buffer, grant a
//! slice-aware budget, then select by conditional gain against the identified
//! slice.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{build_kernel, Metric, Representation, SimilarityMatrix};
use crate::maximize::{maximize, MaximizerConfig, SelectionTrace};
use crate::submodular::{flqmi_normalizer, SetFunction, SetFunctionInstance};
use crate::ItemId;

/// Maps an item payload to the representation a kernel is built from.
pub trait Featurizer: Sync {
    fn featurize(&self, payload: &Representation) -> Result<Representation>;
}

/// Uses payloads as they are.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityFeaturizer;

impl Featurizer for IdentityFeaturizer {
    fn featurize(&self, payload: &Representation) -> Result<Representation> {
        Ok(payload.clone())
    }
}

impl<F> Featurizer for F
where
    F: Fn(&Representation) -> Result<Representation> + Sync,
{
    fn featurize(&self, payload: &Representation) -> Result<Representation> {
        self(payload)
    }
}

/// Supplies ground-truth labels for selected items.
pub trait LabelOracle {
    fn label(&self, id: ItemId) -> Result<usize>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledItem {
    pub id: ItemId,
    pub label: usize,
    pub payload: Representation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnlabeledItem {
    pub id: ItemId,
    pub payload: Representation,
}

/// One episode of unlabeled data.
#[derive(Clone, Debug, PartialEq)]
pub struct UnlabeledBuffer {
    pub items: Vec<UnlabeledItem>,
    /// Slice the episode was drawn from. Known only to a test harness and
    /// never read by identification.
    pub true_slice: Option<usize>,
}

impl UnlabeledBuffer {
    pub fn new(items: Vec<UnlabeledItem>, true_slice: Option<usize>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyCollection("unlabeled buffer"));
        }
        let mut seen = HashSet::new();
        for it in &items {
            if !seen.insert(it.id) {
                return Err(Error::DuplicateItem(it.id.0));
            }
        }
        Ok(Self { items, true_slice })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> Vec<ItemId> {
        self.items.iter().map(|i| i.id).collect()
    }

    fn features(&self, featurizer: &dyn Featurizer) -> Result<Vec<Representation>> {
        self.items
            .par_iter()
            .map(|i| featurizer.featurize(&i.payload))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Slice {
    pub items: Vec<LabeledItem>,
    pub rare: bool,
}

impl Slice {
    pub fn new(items: Vec<LabeledItem>, rare: bool) -> Self {
        Self { items, rare }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn features(&self, featurizer: &dyn Featurizer) -> Result<Vec<Representation>> {
        self.items
            .par_iter()
            .map(|i| featurizer.featurize(&i.payload))
            .collect()
    }
}

/// Labeled data partitioned into slices, each flagged rare or common.
#[derive(Clone, Debug, PartialEq)]
pub struct SlicedLabeledPool {
    slices: Vec<Slice>,
    ids: HashSet<ItemId>,
}

impl SlicedLabeledPool {
    /// Every slice must be nonempty and item ids must be unique across the
    /// whole pool.
    pub fn new(slices: Vec<Slice>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::EmptyCollection("labeled pool"));
        }
        let mut ids = HashSet::new();
        for (s, slice) in slices.iter().enumerate() {
            if slice.is_empty() {
                return Err(Error::EmptySlice(s));
            }
            for it in &slice.items {
                if !ids.insert(it.id) {
                    return Err(Error::DuplicateItem(it.id.0));
                }
            }
        }
        Ok(Self { slices, ids })
    }

    pub fn slice_count(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn slice(&self, t: usize) -> Result<&Slice> {
        self.slices.get(t).ok_or(Error::SliceOutOfRange {
            slice: t,
            count: self.slices.len(),
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.slices.iter().map(Slice::len).collect()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.ids.contains(&id)
    }

    pub fn rare_flags(&self) -> Vec<bool> {
        self.slices.iter().map(|s| s.rare).collect()
    }

    pub fn set_rare_flags(&mut self, flags: &[bool]) -> Result<()> {
        if flags.len() != self.slices.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} rarity flags for {} slices",
                flags.len(),
                self.slices.len()
            )));
        }
        for (s, &f) in self.slices.iter_mut().zip(flags) {
            s.rare = f;
        }
        Ok(())
    }

    /// Flags a slice rare when it holds fewer than `ratio` times the mean size
    /// of the other slices.
    pub fn flag_rare_by_size(&mut self, ratio: f64) {
        let sizes = self.sizes();
        let total: usize = sizes.iter().sum();
        let others = sizes.len().saturating_sub(1).max(1) as f64;
        for (s, &n) in self.slices.iter_mut().zip(&sizes) {
            let mean_others = (total - n) as f64 / others;
            s.rare = sizes.len() > 1 && (n as f64) < ratio * mean_others;
        }
    }

    /// Appends labeled items to slice `t`.
    pub fn augment(&mut self, t: usize, items: Vec<LabeledItem>) -> Result<()> {
        let count = self.slices.len();
        if t >= count {
            return Err(Error::SliceOutOfRange { slice: t, count });
        }
        for it in &items {
            if self.ids.contains(&it.id) {
                return Err(Error::DuplicateItem(it.id.0));
            }
        }
        for it in items {
            self.ids.insert(it.id);
            self.slices[t].items.push(it);
        }
        Ok(())
    }

    /// All labeled items in slice order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &LabeledItem)> {
        self.slices
            .iter()
            .enumerate()
            .flat_map(|(s, slice)| slice.items.iter().map(move |it| (s, it)))
    }
}

/// Outcome of slice identification.
#[derive(Clone, Debug, PartialEq)]
pub struct Identification {
    pub slice: usize,
    /// Normalized mutual information of the buffer with every slice.
    pub scores: Vec<f64>,
}

/// Picks the slice with the largest normalized FLQMI score given the
/// `|U| x |P_i|` kernel of every slice. Ties go to the smallest slice index.
pub fn identify_from_kernels(kernels: &[SimilarityMatrix]) -> Result<Identification> {
    if kernels.is_empty() {
        return Err(Error::EmptyCollection("identification kernels"));
    }
    let scores = kernels
        .iter()
        .enumerate()
        .map(|(i, k)| {
            if k.cols() == 0 {
                return Err(Error::EmptySlice(i));
            }
            let f = SetFunctionInstance::flqmi(k.clone());
            let all: Vec<usize> = (0..k.rows()).collect();
            Ok(f.value(&all)? / flqmi_normalizer(k.rows(), k.cols()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut slice = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[slice] {
            slice = i;
        }
    }
    Ok(Identification { slice, scores })
}

/// Identifies the slice an unlabeled buffer belongs to.
pub fn smidentify(
    pool: &SlicedLabeledPool,
    buffer: &UnlabeledBuffer,
    featurizer: &dyn Featurizer,
    metric: Metric,
) -> Result<Identification> {
    for (i, s) in pool.slices.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::EmptySlice(i));
        }
    }
    let u = buffer.features(featurizer)?;
    let kernels = pool
        .slices
        .par_iter()
        .map(|s| build_kernel(&u, &s.features(featurizer)?, metric))
        .collect::<Result<Vec<_>>>()?;
    identify_from_kernels(&kernels)
}

/// Accumulated excess budget together with the fixed budget parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetState {
    /// Base per-round budget in items.
    pub base: usize,
    /// Fraction of the base budget always spent on a common slice.
    pub rho: f64,
    /// Saved budget, in items.
    pub gamma: f64,
}

impl BudgetState {
    pub fn new(base: usize, rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidBudget(format!("rho must lie in [0, 1], got {rho}")));
        }
        Ok(Self {
            base,
            rho,
            gamma: 0.0,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetBranch {
    Rare,
    Common,
    /// Budgeting disabled; the base budget is granted every round.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetDecision {
    pub branch: BudgetBranch,
    /// Granted budget before capping at the buffer size.
    pub budget: usize,
    /// Rare branch: mean common-slice size minus the identified slice size.
    pub deficit: Option<f64>,
    /// Common branch: size of the smallest slice.
    pub beta: Option<usize>,
    /// Rare branch: items drawn from the saved budget.
    pub sigma: usize,
    pub gamma_before: f64,
    pub gamma_after: f64,
}

/// Grants the round budget for identified slice `t`.
///
/// Common slices get `floor(B rho + (1 - rho) B beta / |P_t|)` and the
/// remainder of `B` is saved. Rare slices get `B` plus up to
/// `mean(common sizes) - |P_t| - B` items from the savings.
pub fn slice_aware_budget(
    pool: &SlicedLabeledPool,
    state: &BudgetState,
    t: usize,
) -> Result<(BudgetDecision, BudgetState)> {
    let target = pool.slice(t)?;
    if !(0.0..=1.0).contains(&state.rho) || state.gamma < 0.0 {
        return Err(Error::InvalidBudget(format!(
            "rho {} / gamma {} out of range",
            state.rho, state.gamma
        )));
    }
    let base = state.base as f64;
    let size_t = target.len();
    let mut next = state.clone();

    let all_rare = pool.slices.iter().all(|s| s.rare);
    let decision = if target.rare || all_rare {
        let common: Vec<usize> = pool
            .slices
            .iter()
            .filter(|s| !s.rare)
            .map(Slice::len)
            .collect();
        let deficit = if common.is_empty() {
            0.0
        } else {
            common.iter().sum::<usize>() as f64 / common.len() as f64 - size_t as f64
        };
        let sigma = (deficit - base).min(state.gamma).clamp(0.0, state.gamma).floor();
        next.gamma = state.gamma - sigma;
        BudgetDecision {
            branch: BudgetBranch::Rare,
            budget: state.base + sigma as usize,
            deficit: Some(deficit),
            beta: None,
            sigma: sigma as usize,
            gamma_before: state.gamma,
            gamma_after: next.gamma,
        }
    } else {
        let beta = pool.slices.iter().map(Slice::len).min().unwrap_or(size_t);
        let scaled = base * state.rho + (1.0 - state.rho) * base * beta as f64 / size_t as f64;
        let budget = ((scaled + 1e-9).floor() as usize).min(state.base);
        next.gamma = state.gamma + (state.base - budget) as f64;
        BudgetDecision {
            branch: BudgetBranch::Common,
            budget,
            deficit: None,
            beta: Some(beta),
            sigma: 0,
            gamma_before: state.gamma,
            gamma_after: next.gamma,
        }
    };
    Ok((decision, next))
}

/// Caps a granted budget at the number of available items and credits the
/// excess back to the saved budget.
pub fn cap_budget(budget: usize, available: usize, state: &mut BudgetState) -> usize {
    if budget > available {
        state.gamma += (budget - available) as f64;
        available
    } else {
        budget
    }
}

/// Items picked by a selector together with the maximizer trace.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Selection {
    pub ids: Vec<ItemId>,
    pub trace: SelectionTrace,
}

/// Builds the conditional-gain instance of a buffer against slice `t`.
pub fn flcg_instance(
    pool: &SlicedLabeledPool,
    buffer: &UnlabeledBuffer,
    t: usize,
    featurizer: &dyn Featurizer,
    metric: Metric,
) -> Result<SetFunctionInstance> {
    let slice = pool.slice(t)?;
    let u = buffer.features(featurizer)?;
    let ground = build_kernel(&u, &u, metric)?;
    let private = if slice.is_empty() {
        SimilarityMatrix::empty_cols(u.len())
    } else {
        build_kernel(&u, &slice.features(featurizer)?, metric)?
    };
    SetFunctionInstance::flcg(ground, private)
}

/// Selects up to `budget` buffer items that add the most coverage beyond
/// slice `t`.
pub fn scg_select(
    pool: &SlicedLabeledPool,
    buffer: &UnlabeledBuffer,
    t: usize,
    budget: usize,
    featurizer: &dyn Featurizer,
    metric: Metric,
    maximizer: &MaximizerConfig,
) -> Result<Selection> {
    let budget = budget.min(buffer.len());
    if budget == 0 {
        return Ok(Selection::default());
    }
    let f = flcg_instance(pool, buffer, t, featurizer, metric)?;
    let trace = maximize(&f, &maximizer.with_budget(budget))?;
    Ok(Selection {
        ids: trace.chosen.iter().map(|&i| buffer.items[i].id).collect(),
        trace,
    })
}

/// Settings shared by every round of a run.
pub struct RoundConfig<'a> {
    pub identify_featurizer: &'a dyn Featurizer,
    pub select_featurizer: &'a dyn Featurizer,
    pub identify_metric: Metric,
    pub select_metric: Metric,
    pub maximizer: MaximizerConfig,
    /// When false every round is granted the base budget and nothing is saved.
    pub slice_aware: bool,
}

impl<'a> RoundConfig<'a> {
    /// One featurizer and metric for both identification and selection.
    pub fn shared(featurizer: &'a dyn Featurizer, metric: Metric, maximizer: MaximizerConfig) -> Self {
        Self {
            identify_featurizer: featurizer,
            select_featurizer: featurizer,
            identify_metric: metric,
            select_metric: metric,
            maximizer,
            slice_aware: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport {
    pub identification: Identification,
    pub true_slice: Option<usize>,
    pub decision: BudgetDecision,
    /// Budget actually used for selection after capping at the buffer size.
    pub granted: usize,
    pub selected: Vec<ItemId>,
    /// Saved budget after the round.
    pub gamma: f64,
    pub slice_sizes: Vec<usize>,
}

impl RoundReport {
    pub fn identified(&self) -> usize {
        self.identification.slice
    }

    pub fn identification_correct(&self) -> Option<bool> {
        self.true_slice.map(|t| t == self.identification.slice)
    }
}

/// One round with a caller-supplied selection step.
///
/// `select` receives the pool, the buffer, the identified slice and the
/// granted budget and returns the buffer ids to label. The chosen items are
/// labeled through `oracle` and appended to the identified slice whether or
/// not the identification was right.
pub fn streamline_round_with<S>(
    pool: &mut SlicedLabeledPool,
    buffer: &UnlabeledBuffer,
    state: &mut BudgetState,
    cfg: &RoundConfig<'_>,
    oracle: &dyn LabelOracle,
    select: S,
) -> Result<RoundReport>
where
    S: FnOnce(&SlicedLabeledPool, &UnlabeledBuffer, usize, usize) -> Result<Vec<ItemId>>,
{
    let identification = smidentify(pool, buffer, cfg.identify_featurizer, cfg.identify_metric)?;
    let t = identification.slice;

    let (decision, mut next) = if cfg.slice_aware {
        slice_aware_budget(pool, state, t)?
    } else {
        (
            BudgetDecision {
                branch: BudgetBranch::Fixed,
                budget: state.base,
                deficit: None,
                beta: None,
                sigma: 0,
                gamma_before: state.gamma,
                gamma_after: state.gamma,
            },
            state.clone(),
        )
    };
    let granted = if cfg.slice_aware {
        cap_budget(decision.budget, buffer.len(), &mut next)
    } else {
        decision.budget.min(buffer.len())
    };

    let selected = select(pool, buffer, t, granted)?;
    if selected.len() > granted {
        return Err(Error::InvalidBudget(format!(
            "selector returned {} items for a budget of {granted}",
            selected.len()
        )));
    }
    let mut labeled = Vec::with_capacity(selected.len());
    for id in &selected {
        let item = buffer
            .items
            .iter()
            .find(|i| i.id == *id)
            .ok_or(Error::UnknownItem(id.0))?;
        labeled.push(LabeledItem {
            id: *id,
            label: oracle.label(*id)?,
            payload: item.payload.clone(),
        });
    }
    pool.augment(t, labeled)?;
    *state = next;

    Ok(RoundReport {
        identification,
        true_slice: buffer.true_slice,
        decision,
        granted,
        selected,
        gamma: state.gamma,
        slice_sizes: pool.sizes(),
    })
}

/// Identify, budget, select by conditional gain, label and augment.
pub fn streamline_round(
    pool: &mut SlicedLabeledPool,
    buffer: &UnlabeledBuffer,
    state: &mut BudgetState,
    cfg: &RoundConfig<'_>,
    oracle: &dyn LabelOracle,
) -> Result<RoundReport> {
    streamline_round_with(pool, buffer, state, cfg, oracle, |pool, buffer, t, b| {
        Ok(scg_select(
            pool,
            buffer,
            t,
            b,
            cfg.select_featurizer,
            cfg.select_metric,
            &cfg.maximizer,
        )?
        .ids)
    })
}

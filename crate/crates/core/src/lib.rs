//! Slice-aware streaming active learning.
//!
//! An episodic stream delivers unlabeled buffers that each come from one
//! slice of the data distribution. Every round the library
//!
//! 1. identifies the slice of the incoming buffer by normalized
//!    facility-location mutual information against each labeled slice
//!    ([`streamline::smidentify`]),
//! 2. grants a labeling budget that saves part of the base budget on common
//!    slices and spends the savings on rare ones
//!    ([`streamline::slice_aware_budget`]),
//! 3. picks the items that add the most coverage beyond the identified slice
//!    by maximizing facility-location conditional gain
//!    ([`streamline::scg_select`]).
//!
//! The [`baselines`] module holds the comparison selectors, [`simulator`]
//! a synthetic stream generator with a small softmax learner, and [`cli`]
//! the configuration, file formats and experiment runner behind the
//! `streamline` binary.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod kernel;
pub mod maximize;
pub mod simulator;
pub mod streamline;
pub mod submodular;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Stable identifier of a data item across buffers, pools and output files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u64);

impl std::fmt::Display for ItemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

//! Budget bookkeeping over a common, common, rare schedule. Common rounds
//! save part of the base budget; the rare round spends the savings.

use streamline_core::kernel::{Embedding, Representation};
use streamline_core::streamline::{
    slice_aware_budget, BudgetState, LabeledItem, Slice, SlicedLabeledPool,
};
use streamline_core::ItemId;

fn main() -> streamline_core::Result<()> {
    let mut next_id = 0u64;
    let mut items = |n: usize| -> streamline_core::Result<Vec<LabeledItem>> {
        (0..n)
            .map(|_| {
                next_id += 1;
                Ok(LabeledItem {
                    id: ItemId(next_id),
                    label: 0,
                    payload: Representation::Flat(Embedding::new(vec![1.0])?),
                })
            })
            .collect()
    };
    let mut pool = SlicedLabeledPool::new(vec![
        Slice::new(items(600)?, false),
        Slice::new(items(300)?, false),
        Slice::new(items(100)?, true),
    ])?;
    let mut state = BudgetState::new(100, 0.5)?;

    println!("round slice branch  granted  sigma  gamma  sizes");
    for (round, t) in [0, 1, 2, 0, 1, 2].into_iter().enumerate() {
        let (decision, next) = slice_aware_budget(&pool, &state, t)?;
        pool.augment(t, items(decision.budget)?)?;
        state = next;
        println!(
            "{:>5} {:>5} {:<7} {:>7} {:>6} {:>6.1}  {:?}",
            round + 1,
            t,
            format!("{:?}", decision.branch).to_lowercase(),
            decision.budget,
            decision.sigma,
            state.gamma,
            pool.sizes()
        );
    }
    Ok(())
}

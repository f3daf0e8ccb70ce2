//! Naive, lazy, stochastic and partitioned greedy on one random facility
//! location instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streamline_core::kernel::SimilarityMatrix;
use streamline_core::maximize::{
    lazy_greedy, maximize, naive_greedy, stochastic_greedy, Algorithm, MaximizerConfig,
};
use streamline_core::submodular::{SetFunction, SetFunctionInstance};

fn main() -> streamline_core::Result<()> {
    let n = 200;
    let b = 15;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
    let rows = points
        .iter()
        .map(|p| {
            points
                .iter()
                .map(|q| (-((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)) / 0.02).exp())
                .collect()
        })
        .collect();
    let f = SetFunctionInstance::facility_location(SimilarityMatrix::from_rows(rows)?);

    let report = |name: &str, t: &streamline_core::maximize::SelectionTrace| -> streamline_core::Result<()> {
        println!(
            "{name:<22} value {:>8.3}  evaluations {:>6}",
            f.value(&t.chosen)?,
            t.evaluations
        );
        Ok(())
    };
    report("naive", &naive_greedy(&f, b))?;
    report("lazy", &lazy_greedy(&f, b))?;
    report("stochastic eps=0.1", &stochastic_greedy(&f, b, 0.1, 3)?)?;
    let parted = MaximizerConfig {
        partitions: 4,
        ..MaximizerConfig::new(Algorithm::Lazy, b)
    };
    report("lazy, 4 partitions", &maximize(&f, &parted)?)?;
    Ok(())
}

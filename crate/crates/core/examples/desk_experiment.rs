//! Every method on the imbalanced desk-scale stream, four seeds each, with
//! seed-averaged final accuracies and rare-slice pool sizes.
//!
//! cargo run --release --example desk_experiment

use rayon::prelude::*;
use streamline_core::simulator::{run_experiment, ExperimentHyper, Method, MetricsLog, StreamSpec};

fn mean(logs: &[&MetricsLog], f: impl Fn(&MetricsLog) -> f64) -> f64 {
    logs.iter().map(|l| f(l)).sum::<f64>() / logs.len() as f64
}

fn main() -> streamline_core::Result<()> {
    let base = StreamSpec {
        dim: 32,
        classes: 5,
        class_separation: 3.0,
        shared_class_weight: 0.3,
        ..StreamSpec::default()
    };
    let rare = base.rare_slices[0];
    let hyper = ExperimentHyper::default();
    let seeds = [0u64, 1, 2, 3];
    let jobs: Vec<(Method, u64)> = Method::ALL
        .iter()
        .flat_map(|&m| seeds.iter().map(move |&s| (m, s)))
        .collect();
    let logs = jobs
        .par_iter()
        .map(|&(m, seed)| run_experiment(&StreamSpec { seed, ..base.clone() }, m, &hyper))
        .collect::<streamline_core::Result<Vec<_>>>()?;

    println!(
        "{:<22} {:>8} {:>8} {:>10} {:>10}",
        "method", "rare", "full", "rare_pool", "labels"
    );
    for m in Method::ALL {
        let mine: Vec<&MetricsLog> = logs.iter().filter(|l| l.method == m).collect();
        let last = |l: &MetricsLog| l.last().cloned().expect("at least one round");
        println!(
            "{:<22} {:>8.4} {:>8.4} {:>10.1} {:>10.1}",
            m.name(),
            mean(&mine, |l| last(l).rare_metric),
            mean(&mine, |l| last(l).full_metric),
            mean(&mine, |l| last(l).slice_sizes[rare] as f64),
            mean(&mine, |l| last(l).labels_total as f64),
        );
    }
    Ok(())
}

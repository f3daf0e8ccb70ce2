//! Slice identification on a synthetic stream: how often the normalized
//! FLQMI score points at the slice an episode came from.

use streamline_core::kernel::Metric;
use streamline_core::simulator::{generate_stream, Schedule, StreamSpec};
use streamline_core::streamline::{smidentify, IdentityFeaturizer};

fn main() -> streamline_core::Result<()> {
    for separation in [0.1, 0.25, 0.5, 1.0, 6.0] {
        let spec = StreamSpec {
            slice_separation: separation,
            schedule: Schedule::Sequential,
            rounds: 40,
            episode_size: 20,
            eval_per_slice: 0,
            ..StreamSpec::default()
        };
        let stream = generate_stream(&spec)?;
        let metric = Metric::Rbf {
            bandwidth: (spec.dim as f64).sqrt(),
        };
        let mut correct = 0;
        for ep in &stream.episodes {
            let id = smidentify(&stream.pool, ep, &IdentityFeaturizer, metric)?;
            if Some(id.slice) == ep.true_slice {
                correct += 1;
            }
        }
        println!(
            "slice separation {separation:>4}: {correct}/{} episodes identified",
            stream.episodes.len()
        );
    }
    Ok(())
}

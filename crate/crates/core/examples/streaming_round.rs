//! Drives the identify / budget / select loop by hand on a generated stream
//! and prints one line per round.

use streamline_core::kernel::Metric;
use streamline_core::maximize::MaximizerConfig;
use streamline_core::simulator::{generate_stream, StreamSpec};
use streamline_core::streamline::{streamline_round, BudgetState, IdentityFeaturizer, RoundConfig};

fn main() -> streamline_core::Result<()> {
    let spec = StreamSpec {
        rounds: 9,
        ..StreamSpec::default()
    };
    let stream = generate_stream(&spec)?;
    let mut pool = stream.pool.clone();
    let mut state = BudgetState::new(50, 0.5)?;
    let metric = Metric::Rbf {
        bandwidth: (spec.dim as f64).sqrt() * spec.noise_std * 2.0,
    };
    let cfg = RoundConfig::shared(&IdentityFeaturizer, metric, MaximizerConfig::default());

    for (r, buffer) in stream.episodes.iter().enumerate() {
        let report = streamline_round(&mut pool, buffer, &mut state, &cfg, &stream)?;
        println!(
            "round {:>2}: true {} identified {} | granted {:>3} | gamma {:>5.1} | sizes {:?}",
            r + 1,
            buffer.true_slice.unwrap_or(usize::MAX),
            report.identified(),
            report.granted,
            report.gamma,
            report.slice_sizes
        );
    }
    Ok(())
}

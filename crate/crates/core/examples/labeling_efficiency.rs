//! Labeling efficiency against random sampling from seed-averaged curves of
//! a short experiment.

use streamline_core::cli::config::parse_config_str;
use streamline_core::cli::run::{efficiencies, metrics_rows, run_all};
use streamline_core::simulator::Efficiency;

fn main() -> streamline_core::Result<()> {
    let cfg = parse_config_str(
        r#"
seeds = [0, 1]
methods = ["random", "streamline", "entropy"]

[stream]
dim = 32
shared_class_weight = 0.3
rounds = 9
"#,
    )?;
    let rows = metrics_rows(&run_all(&cfg, 2)?);
    for target in [0.5, 0.55, 0.6, 0.62] {
        let line: Vec<String> = efficiencies(&rows, target, true)
            .into_iter()
            .map(|(m, e)| match e {
                Efficiency::Ratio(r) => format!("{m} {r:.2}x"),
                Efficiency::Undefined => format!("{m} undefined"),
            })
            .collect();
        println!("rare accuracy {target}: {}", line.join(", "));
    }
    Ok(())
}

//! Experiment configuration files (TOML).
//!
//! ```toml
//! seeds = [0, 1, 2, 3]          # or `seed = 0`
//! methods = ["streamline", "random"]   # or `method = "streamline"`
//! budget = 50
//! rho = 0.5
//! out = "results"               # optional, `run --out` wins
//! embeddings = "features.slem"  # optional, replaces the synthetic stream
//! rare_by_size = 0.5            # optional, re-flag rare slices by size
//!
//! [stream]                      # any StreamSpec field except `seed`
//! dim = 32
//! schedule = { kind = "every_k", k = 3 }
//!
//! [maximizer]
//! algorithm = "lazy"            # naive | lazy | stochastic
//! epsilon = 0.05                # stochastic only
//! partitions = 1
//!
//! [learner]
//! epochs = 100
//! l2 = 0.001
//!
//! [kernel]
//! kind = "auto"                 # auto | cosine | rbf (with `bandwidth`)
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::kernel::Metric;
use crate::maximize::{Algorithm, MaximizerConfig};
use crate::simulator::{ExperimentHyper, LearnerHyper, Method, StreamSpec};

/// Environment variable that replaces the configured seeds with one seed.
pub const SEED_ENV: &str = "STREAMLINE_SEED";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    seeds: Option<Vec<u64>>,
    method: Option<String>,
    methods: Option<Vec<String>>,
    budget: Option<usize>,
    rho: Option<f64>,
    out: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    rare_by_size: Option<f64>,
    #[serde(default)]
    stream: StreamSpec,
    #[serde(default)]
    maximizer: RawMaximizer,
    #[serde(default)]
    learner: LearnerHyper,
    #[serde(default)]
    kernel: KernelChoice,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawMaximizer {
    algorithm: Algorithm,
    epsilon: Option<f64>,
    partitions: usize,
}

impl Default for RawMaximizer {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Lazy,
            epsilon: None,
            partitions: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelChoice {
    #[default]
    Auto,
    Cosine,
    Rbf {
        bandwidth: f64,
    },
}

impl KernelChoice {
    pub fn metric(self) -> Option<Metric> {
        match self {
            KernelChoice::Auto => None,
            KernelChoice::Cosine => Some(Metric::Cosine),
            KernelChoice::Rbf { bandwidth } => Some(Metric::Rbf { bandwidth }),
        }
    }
}

/// A validated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub stream: StreamSpec,
    pub hyper: ExperimentHyper,
    pub out: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
}

fn field_err(field: &str, reason: impl Into<String>) -> Error {
    Error::config(field, reason)
}

/// Parses and validates configuration text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| field_err("<document>", e.message().to_string()))?;
    if table
        .get("stream")
        .and_then(|s| s.as_table())
        .is_some_and(|s| s.contains_key("seed"))
    {
        return Err(field_err("stream.seed", "set seeds with the top-level `seed` or `seeds`"));
    }
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let field = e
            .message()
            .split('`')
            .nth(1)
            .filter(|_| e.message().starts_with("unknown field"))
            .unwrap_or("<document>")
            .to_string();
        field_err(&field, e.message().trim().to_string())
    })?;

    let seeds = match (raw.seed, raw.seeds) {
        (Some(_), Some(_)) => return Err(field_err("seeds", "give either `seed` or `seeds`")),
        (Some(s), None) => vec![s],
        (None, Some(v)) if v.is_empty() => return Err(field_err("seeds", "must be nonempty")),
        (None, Some(v)) => v,
        (None, None) => vec![0],
    };
    let names = match (raw.method, raw.methods) {
        (Some(_), Some(_)) => {
            return Err(field_err("methods", "give either `method` or `methods`"))
        }
        (Some(m), None) => vec![m],
        (None, Some(v)) if v.is_empty() => {
            return Err(field_err("methods", "must be nonempty"))
        }
        (None, Some(v)) => v,
        (None, None) => return Err(field_err("method", "at least one method is required")),
    };
    let mut methods = Vec::with_capacity(names.len());
    for n in &names {
        let m: Method = n
            .parse()
            .map_err(|_| field_err("methods", format!("unknown method `{n}`")))?;
        if methods.contains(&m) {
            return Err(field_err("methods", format!("`{n}` listed twice")));
        }
        methods.push(m);
    }

    let budget = raw.budget.unwrap_or(50);
    if budget == 0 {
        return Err(field_err("budget", "must be at least 1"));
    }
    let rho = raw.rho.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&rho) {
        return Err(field_err("rho", format!("must lie in [0, 1], got {rho}")));
    }

    let maximizer = MaximizerConfig {
        algorithm: raw.maximizer.algorithm,
        budget,
        epsilon: raw.maximizer.epsilon,
        seed: 0,
        partitions: raw.maximizer.partitions,
    };
    maximizer
        .validate()
        .map_err(|e| field_err("maximizer", e.to_string()))?;

    if raw.learner.epochs == 0 {
        return Err(field_err("learner.epochs", "must be at least 1"));
    }
    if !(raw.learner.l2 >= 0.0 && raw.learner.l2.is_finite()) {
        return Err(field_err("learner.l2", "must be finite and nonnegative"));
    }
    if let Some(s) = raw.learner.step_size {
        if !(s > 0.0 && s.is_finite()) {
            return Err(field_err("learner.step_size", "must be positive"));
        }
    }
    if let KernelChoice::Rbf { bandwidth } = raw.kernel {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(field_err("kernel.bandwidth", "must be positive"));
        }
    }
    if let Some(r) = raw.rare_by_size {
        if !(r > 0.0 && r.is_finite()) {
            return Err(field_err("rare_by_size", "must be positive"));
        }
    }
    raw.stream
        .validate()
        .map_err(|e| field_err("stream", e.to_string()))?;

    Ok(ExperimentConfig {
        seeds,
        methods,
        stream: raw.stream,
        hyper: ExperimentHyper {
            budget,
            rho,
            maximizer,
            learner: raw.learner,
            metric: raw.kernel.metric(),
            rare_by_size: raw.rare_by_size,
        },
        out: raw.out,
        embeddings: raw.embeddings,
    })
}

/// Reads and validates a configuration file. Relative embedding paths are
/// resolved against the file's directory.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config_str(&text)?;
    if let (Some(emb), Some(dir)) = (&cfg.embeddings, path.parent()) {
        if emb.is_relative() {
            cfg.embeddings = Some(dir.join(emb));
        }
    }
    Ok(cfg)
}

/// Applies the seed override from [`SEED_ENV`] when it is set.
pub fn apply_seed_override(cfg: &mut ExperimentConfig, value: Option<&str>) -> Result<()> {
    if let Some(v) = value {
        let seed = v
            .trim()
            .parse()
            .map_err(|_| field_err(SEED_ENV, format!("`{v}` is not an unsigned integer")))?;
        cfg.seeds = vec![seed];
    }
    Ok(())
}

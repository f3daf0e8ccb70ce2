//! Experiment orchestration and result files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cli::config::ExperimentConfig;
use crate::cli::embedding_file::{read_embeddings, stream_from_table};
use crate::error::{Error, Result};
use crate::simulator::{
    generate_stream, labeling_efficiency, run_on_stream, Efficiency, Method, MetricsLog, StreamSpec,
};
use crate::ItemId;

pub const METRICS_FILE: &str = "metrics.csv";
pub const SELECTIONS_FILE: &str = "selections.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

/// One line of `metrics.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: String,
    pub seed: u64,
    pub round: usize,
    pub labels_total: usize,
    pub full_metric: f64,
    pub rare_metric: f64,
    pub identified_slice: Option<usize>,
    pub true_slice: usize,
    pub granted_b: usize,
    pub gamma: f64,
}

/// One line of `selections.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub method: String,
    pub seed: u64,
    pub round: usize,
    pub identified_slice: Option<usize>,
    pub true_slice: usize,
    pub selected: Vec<ItemId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub seeds: usize,
    pub final_rare_mean: f64,
    pub final_rare_std: f64,
    pub final_full_mean: f64,
    pub final_full_std: f64,
    pub final_labels_mean: f64,
    /// Mean final size of each slice of the labeled pool.
    pub final_slice_sizes_mean: Vec<f64>,
    /// Labeling efficiency against random at random's final mean metric;
    /// `null` when random was not run or the target is not reached.
    pub rare_efficiency: Option<f64>,
    pub full_efficiency: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rare_target: Option<f64>,
    pub full_target: Option<f64>,
    pub methods: Vec<MethodSummary>,
}

/// Flattens logs into `metrics.csv` rows.
pub fn metrics_rows(logs: &[MetricsLog]) -> Vec<MetricsRow> {
    logs.iter()
        .flat_map(|log| {
            log.rows.iter().map(move |r| MetricsRow {
                method: log.method.name().to_string(),
                seed: log.seed,
                round: r.round,
                labels_total: r.labels_total,
                full_metric: r.full_metric,
                rare_metric: r.rare_metric,
                identified_slice: r.identified_slice,
                true_slice: r.true_slice,
                granted_b: r.granted_b,
                gamma: r.gamma,
            })
        })
        .collect()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Seed-averaged `(labels, metric)` curve of every method, in first-seen
/// method order.
pub fn mean_curves(rows: &[MetricsRow], rare: bool) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut order: Vec<String> = Vec::new();
    let mut acc: BTreeMap<(String, usize), (f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        if !order.contains(&r.method) {
            order.push(r.method.clone());
        }
        let e = acc.entry((r.method.clone(), r.round)).or_default();
        e.0 += r.labels_total as f64;
        e.1 += if rare { r.rare_metric } else { r.full_metric };
        e.2 += 1;
    }
    order
        .into_iter()
        .map(|m| {
            let curve = acc
                .range((m.clone(), 0)..=(m.clone(), usize::MAX))
                .map(|(_, &(l, v, n))| (l / n as f64, v / n as f64))
                .collect();
            (m, curve)
        })
        .collect()
}

/// Efficiency of every method against `random` at `target`.
pub fn efficiencies(rows: &[MetricsRow], target: f64, rare: bool) -> Vec<(String, Efficiency)> {
    let curves = mean_curves(rows, rare);
    let random = curves
        .iter()
        .find(|(m, _)| m == Method::Random.name())
        .map(|(_, c)| c.clone());
    curves
        .iter()
        .map(|(m, c)| {
            let e = match &random {
                Some(r) => labeling_efficiency(c, r, target),
                None => Efficiency::Undefined,
            };
            (m.clone(), e)
        })
        .collect()
}

/// Per-method summary with efficiencies against random.
pub fn summarize(logs: &[MetricsLog]) -> Summary {
    let rows = metrics_rows(logs);
    let mut methods: Vec<Method> = Vec::new();
    for l in logs {
        if !methods.contains(&l.method) {
            methods.push(l.method);
        }
    }
    let final_of = |m: Method, rare: bool| -> Vec<f64> {
        logs.iter()
            .filter(|l| l.method == m)
            .filter_map(|l| l.last())
            .map(|r| if rare { r.rare_metric } else { r.full_metric })
            .collect()
    };
    let target = |rare: bool| {
        methods
            .contains(&Method::Random)
            .then(|| mean_std(&final_of(Method::Random, rare)).0)
    };
    let (rare_target, full_target) = (target(true), target(false));
    let eff = |t: Option<f64>, rare: bool| -> BTreeMap<String, Option<f64>> {
        match t {
            Some(t) => efficiencies(&rows, t, rare)
                .into_iter()
                .map(|(m, e)| {
                    (
                        m,
                        match e {
                            Efficiency::Ratio(r) => Some(r),
                            Efficiency::Undefined => None,
                        },
                    )
                })
                .collect(),
            None => BTreeMap::new(),
        }
    };
    let (rare_eff, full_eff) = (eff(rare_target, true), eff(full_target, false));

    let summaries = methods
        .iter()
        .map(|&m| {
            let mine: Vec<&MetricsLog> = logs.iter().filter(|l| l.method == m).collect();
            let (rare_mean, rare_std) = mean_std(&final_of(m, true));
            let (full_mean, full_std) = mean_std(&final_of(m, false));
            let lasts: Vec<_> = mine.iter().filter_map(|l| l.last()).collect();
            let labels: Vec<f64> = lasts.iter().map(|r| r.labels_total as f64).collect();
            let slices = lasts.first().map_or(0, |r| r.slice_sizes.len());
            let sizes = (0..slices)
                .map(|s| {
                    lasts.iter().map(|r| r.slice_sizes[s] as f64).sum::<f64>() / lasts.len() as f64
                })
                .collect();
            MethodSummary {
                method: m.name().to_string(),
                seeds: mine.len(),
                final_rare_mean: rare_mean,
                final_rare_std: rare_std,
                final_full_mean: full_mean,
                final_full_std: full_std,
                final_labels_mean: mean_std(&labels).0,
                final_slice_sizes_mean: sizes,
                rare_efficiency: rare_eff.get(m.name()).copied().flatten(),
                full_efficiency: full_eff.get(m.name()).copied().flatten(),
            }
        })
        .collect();
    Summary {
        rare_target,
        full_target,
        methods: summaries,
    }
}

/// Fails unless `dir` exists (or can be created) and accepts new files.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write-probe");
    File::create(&probe).map_err(|e| Error::io(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Runs every `(method, seed)` pair of the config on a pool of `workers`
/// threads. Logs come back ordered by method (config order) and seed.
pub fn run_all(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<MetricsLog>> {
    let table = match &cfg.embeddings {
        Some(p) => Some(read_embeddings(p)?),
        None => None,
    };
    let jobs: Vec<(usize, Method, u64)> = cfg
        .methods
        .iter()
        .enumerate()
        .flat_map(|(i, &m)| cfg.seeds.iter().map(move |&s| (i, m, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let mut logs: Vec<(usize, MetricsLog)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, method, seed)| {
                let spec = StreamSpec {
                    seed,
                    ..cfg.stream.clone()
                };
                let stream = match &table {
                    Some(t) => stream_from_table(t, &spec, seed)?,
                    None => generate_stream(&spec)?,
                };
                Ok((i, run_on_stream(&stream, seed, method, &cfg.hyper)?))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    logs.sort_by_key(|(i, l)| (*i, l.seed));
    Ok(logs.into_iter().map(|(_, l)| l).collect())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

/// Writes `metrics.csv`, `selections.jsonl` and `summary.json` into `dir`.
pub fn write_outputs(dir: &Path, logs: &[MetricsLog]) -> Result<()> {
    let metrics = dir.join(METRICS_FILE);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(&metrics)?);
    for row in metrics_rows(logs) {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(&metrics, e))?;

    let selections = dir.join(SELECTIONS_FILE);
    let mut w = create(&selections)?;
    for log in logs {
        for r in &log.rows {
            let rec = SelectionRecord {
                method: log.method.name().to_string(),
                seed: log.seed,
                round: r.round,
                identified_slice: r.identified_slice,
                true_slice: r.true_slice,
                selected: r.selected.clone(),
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n").map_err(|e| Error::io(&selections, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&selections, e))?;

    let summary = dir.join(SUMMARY_FILE);
    let mut w = create(&summary)?;
    serde_json::to_writer_pretty(&mut w, &summarize(logs))?;
    w.write_all(b"\n").map_err(|e| Error::io(&summary, e))?;
    w.flush().map_err(|e| Error::io(&summary, e))
}

/// Checks the output directory, runs the experiment and writes the results.
pub fn run(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<Vec<MetricsLog>> {
    ensure_writable(out)?;
    let logs = run_all(cfg, workers)?;
    write_outputs(out, &logs)?;
    Ok(logs)
}

/// Reads `metrics.csv` back.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

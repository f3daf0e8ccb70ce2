//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line to
//! stderr (uncaptured) and then asserts.

mod common;

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use streamline_core::cli::config::parse_config_str;
use streamline_core::cli::run::{run, METRICS_FILE, SELECTIONS_FILE, SUMMARY_FILE};
use streamline_core::kernel::{build_kernel, Embedding, Metric, Representation, SimilarityMatrix};
use streamline_core::maximize::{
    lazy_greedy, naive_greedy, stochastic_greedy, stochastic_sample_size, MaximizerConfig,
};
use streamline_core::simulator::{
    generate_stream, labeling_efficiency, run_experiment, Efficiency, ExperimentHyper, Method,
    MetricsLog, Schedule, StreamSpec,
};
use streamline_core::streamline::{
    cap_budget, identify_from_kernels, scg_select, slice_aware_budget, smidentify, BudgetBranch,
    BudgetState, IdentityFeaturizer, LabeledItem, Slice, SlicedLabeledPool, UnlabeledBuffer,
    UnlabeledItem,
};
use streamline_core::submodular::{scg_value, smi_value, SetFunction, SetFunctionInstance};
use streamline_core::ItemId;

const GREEDY_RATIO: f64 = 1.0 - 1.0 / std::f64::consts::E;
const EXACT_TOL: f64 = 1e-9;
const STOCHASTIC_FRACTION: f64 = 0.9;
const IDENTIFICATION_RATE: f64 = 0.95;
const RARE_GAIN_POINTS: f64 = 0.03;
const FULL_SLACK_POINTS: f64 = 0.02;
const ABLATION_SLACK_POINTS: f64 = 0.005;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "acceptance criterion {id:>2} [{status}] {name}: {detail}"
    );
}

fn matrix(rows: &[Vec<f64>]) -> SimilarityMatrix {
    SimilarityMatrix::from_rows(rows.to_vec()).unwrap()
}

#[test]
fn criterion_01_greedy_ratio() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let emb = common::unit_vectors(&mut rng, 12, 5);
        let s = common::cosine_kernel(&emb, &emb);
        let f = SetFunctionInstance::facility_location(matrix(&s));
        let greedy = naive_greedy(&f, 3);
        let value = common::fl(&s, &greedy.chosen);
        let opt = common::subsets(12, 3)
            .iter()
            .map(|a| common::fl(&s, a))
            .fold(0.0, f64::max);
        worst = worst.min(value / opt);
    }
    let elapsed = start.elapsed();
    let pass = worst >= GREEDY_RATIO && elapsed < Duration::from_secs(10);
    report(
        1,
        "greedy approximation",
        pass,
        &format!("worst ratio {worst:.4} >= {GREEDY_RATIO:.4}, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_lazy_matches_naive() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut failures = Vec::new();
    for case in 0..100 {
        let n = rng.random_range(4..=20);
        let b = rng.random_range(1..=n);
        let p = rng.random_range(1..=6);
        let f = match case % 3 {
            0 => SetFunctionInstance::facility_location(matrix(&common::random_kernel(
                &mut rng, n, n,
            ))),
            1 => SetFunctionInstance::flqmi(matrix(&common::random_kernel(&mut rng, n, p))),
            _ => SetFunctionInstance::flcg(
                matrix(&common::random_kernel(&mut rng, n, n)),
                matrix(&common::random_kernel(&mut rng, n, p)),
            )
            .unwrap(),
        };
        let naive = naive_greedy(&f, b);
        let lazy = lazy_greedy(&f, b);
        let same_gains = naive
            .gains
            .iter()
            .zip(&lazy.gains)
            .all(|(a, b)| (a - b).abs() <= EXACT_TOL);
        if naive.chosen != lazy.chosen || !same_gains || lazy.evaluations > naive.evaluations {
            failures.push(case);
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(30);
    report(
        2,
        "lazy greedy equals naive greedy",
        pass,
        &format!("{} mismatching instances of 100, {elapsed:.2?}", failures.len()),
    );
    assert!(pass, "mismatches: {failures:?}");
}

#[test]
fn criterion_03_stochastic_greedy() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (n, b) = (20, 5);

    // ln(1/eps) >= b makes the sample cover the ground set.
    let covering = (-(b as f64) - 0.5).exp();
    assert!(stochastic_sample_size(n, b, covering) >= n);
    let mut identical = true;
    let (mut sum_stoch, mut sum_naive) = (0.0, 0.0);
    for i in 0..100 {
        let s = common::random_kernel(&mut rng, n, n);
        let f = SetFunctionInstance::facility_location(matrix(&s));
        let naive = naive_greedy(&f, b);
        let full = stochastic_greedy(&f, b, covering, i).unwrap();
        identical &= full.chosen == naive.chosen;
        let sampled = stochastic_greedy(&f, b, 0.05, i).unwrap();
        sum_stoch += common::fl(&s, &sampled.chosen);
        sum_naive += common::fl(&s, &naive.chosen);
    }
    let ratio = sum_stoch / sum_naive;
    let elapsed = start.elapsed();
    let pass = identical && ratio >= STOCHASTIC_FRACTION && elapsed < Duration::from_secs(30);
    report(
        3,
        "stochastic greedy",
        pass,
        &format!(
            "covering sample identical: {identical}; eps=0.05 mean ratio {ratio:.4} >= {STOCHASTIC_FRACTION}, {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_set_function_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=7);
        let s = common::random_kernel(&mut rng, n, n);
        let f = SetFunctionInstance::facility_location(matrix(&s));
        let pick = |rng: &mut ChaCha8Rng| -> Vec<usize> {
            (0..n).filter(|_| rng.random_bool(0.4)).collect()
        };
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        let ab = common::union(&a, &b);
        let smi_oracle = common::fl(&s, &a) + common::fl(&s, &b) - common::fl(&s, &ab);
        let scg_oracle = common::fl(&s, &ab) - common::fl(&s, &b);
        worst = worst
            .max((smi_value(&f, &a, &b).unwrap() - smi_oracle).abs())
            .max((scg_value(&f, &a, &b).unwrap() - scg_oracle).abs());

        // Conditional gain against a private set equals the FL gain on the
        // joined kernel [U x U | U x P].
        let p = rng.random_range(1..=4);
        let private = common::random_kernel(&mut rng, n, p);
        let joined: Vec<Vec<f64>> = s
            .iter()
            .zip(&private)
            .map(|(g, q)| g.iter().chain(q).copied().collect())
            .collect();
        let cg = SetFunctionInstance::flcg(matrix(&s), matrix(&private)).unwrap();
        let p_idx: Vec<usize> = (n..n + p).collect();
        let joined_fl = common::fl(&joined, &common::union(&a, &p_idx)) - common::fl(&joined, &p_idx);
        worst = worst.max((cg.value(&a).unwrap() - joined_fl).abs());
    }
    let pass = worst <= EXACT_TOL;
    report(
        4,
        "set-function identities",
        pass,
        &format!("max deviation {worst:.2e} over 200 instances"),
    );
    assert!(pass);
}

fn labeled(id: u64) -> LabeledItem {
    LabeledItem {
        id: ItemId(id),
        label: 0,
        payload: Representation::Flat(Embedding::new(vec![1.0]).unwrap()),
    }
}

fn sized_pool(sizes: &[usize], rare: &[bool], next: &mut u64) -> SlicedLabeledPool {
    let slices = sizes
        .iter()
        .zip(rare)
        .map(|(&n, &r)| {
            let items = (0..n)
                .map(|_| {
                    *next += 1;
                    labeled(*next)
                })
                .collect();
            Slice::new(items, r)
        })
        .collect();
    SlicedLabeledPool::new(slices).unwrap()
}

fn grow(pool: &mut SlicedLabeledPool, t: usize, n: usize, next: &mut u64) {
    let items = (0..n)
        .map(|_| {
            *next += 1;
            labeled(*next)
        })
        .collect();
    pool.augment(t, items).unwrap();
}

#[test]
fn criterion_05_budget_arithmetic() {
    // Slices: common 600, common 300, rare 100. B = 100, rho = 0.5.
    // Round 1 (slice 0): b = floor(50 + 50 * 100/600) = 58, gamma = 42.
    // Round 2 (slice 1): b = floor(50 + 50 * 100/300) = 66, gamma = 76.
    // Round 3 (slice 2): d = (658 + 366)/2 - 100 = 412,
    //                    sigma = min(76, 412 - 100) = 76, b = 176, gamma = 0.
    let expected = [
        (BudgetBranch::Common, 58usize, 0usize, 42.0),
        (BudgetBranch::Common, 66, 0, 76.0),
        (BudgetBranch::Rare, 176, 76, 0.0),
    ];
    let mut next = 0;
    let mut pool = sized_pool(&[600, 300, 100], &[false, false, true], &mut next);
    let mut state = BudgetState::new(100, 0.5).unwrap();
    let mut trace_ok = true;
    for (t, &(branch, b, sigma, gamma)) in expected.iter().enumerate() {
        let (d, next_state) = slice_aware_budget(&pool, &state, t).unwrap();
        trace_ok &= d.branch == branch
            && d.budget == b
            && d.sigma == sigma
            && next_state.gamma == gamma
            && d.sigma as f64 <= d.gamma_before;
        trace_ok &= (next_state.gamma + d.budget as f64) == (state.gamma + 100.0);
        state = next_state;
        grow(&mut pool, t, d.budget, &mut next);
    }
    trace_ok &= pool.sizes() == vec![658, 366, 276];

    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut violations = 0;
    for _ in 0..1000 {
        let slices = rng.random_range(1..=5);
        let sizes: Vec<usize> = (0..slices).map(|_| rng.random_range(1..400)).collect();
        let rare: Vec<bool> = (0..slices).map(|_| rng.random_bool(0.3)).collect();
        let base = rng.random_range(0..120);
        let rho = rng.random_range(0.0..=1.0);
        let rounds = rng.random_range(1..=15);
        let mut next = 0;
        let mut pool = sized_pool(&sizes, &rare, &mut next);
        let mut state = BudgetState::new(base, rho).unwrap();
        let mut spent = 0usize;
        for _ in 0..rounds {
            let t = rng.random_range(0..slices);
            let (d, mut s) = slice_aware_budget(&pool, &state, t).unwrap();
            let available = rng.random_range(1..300);
            let b = cap_budget(d.budget, available, &mut s);
            spent += b;
            state = s;
            grow(&mut pool, t, b, &mut next);
            if state.gamma < 0.0 {
                violations += 1;
            }
        }
        let minted = spent as f64 + state.gamma - (rounds * base) as f64;
        if spent > rounds * base || minted.abs() > 1e-6 {
            violations += 1;
        }
    }
    let pass = trace_ok && violations == 0;
    report(
        5,
        "budget arithmetic",
        pass,
        &format!("hand trace matches: {trace_ok}; {violations} violations over 1000 random schedules"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_identification() {
    let spec = StreamSpec {
        slices: 4,
        dim: 16,
        classes: 2,
        slice_separation: 6.0,
        class_separation: 0.0,
        noise_std: 1.0,
        common_initial: 50,
        imbalance: 1.0,
        rare_slices: vec![],
        schedule: Schedule::Sequential,
        rounds: 100,
        episode_size: 20,
        redundancy: 1,
        eval_per_slice: 0,
        seed: 606,
        ..StreamSpec::default()
    };
    let stream = generate_stream(&spec).unwrap();
    let metric = Metric::Rbf {
        bandwidth: (spec.dim as f64).sqrt() * spec.noise_std,
    };
    let correct = stream
        .episodes
        .iter()
        .filter(|ep| {
            let id = smidentify(&stream.pool, ep, &IdentityFeaturizer, metric).unwrap();
            Some(id.slice) == ep.true_slice
        })
        .count();
    let rate = correct as f64 / stream.episodes.len() as f64;

    let mut invariant = true;
    for ep in stream.episodes.iter().take(25) {
        let u: Vec<Representation> = ep.items.iter().map(|i| i.payload.clone()).collect();
        let kernels: Vec<SimilarityMatrix> = stream
            .pool
            .slices()
            .iter()
            .map(|s| {
                let p: Vec<Representation> = s.items.iter().map(|i| i.payload.clone()).collect();
                build_kernel(&u, &p, metric).unwrap()
            })
            .collect();
        let base = identify_from_kernels(&kernels).unwrap().slice;
        for c in [1e-3, 0.37, 2.0, 1e3] {
            let scaled: Vec<SimilarityMatrix> = kernels.iter().map(|k| k.scaled(c).unwrap()).collect();
            invariant &= identify_from_kernels(&scaled).unwrap().slice == base;
        }
    }
    let pass = rate >= IDENTIFICATION_RATE && invariant;
    report(
        6,
        "slice identification",
        pass,
        &format!("{correct}/100 correct (need {IDENTIFICATION_RATE}); scale invariant: {invariant}"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_redundancy() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut violations = 0;
    let mut checked = 0;
    for case in 0..200 {
        let unique = rng.random_range(2..=4);
        let base = common::unit_vectors(&mut rng, unique, 3);
        let mut order: Vec<usize> = (0..2 * unique).map(|i| i / 2).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let u: Vec<Vec<f64>> = order.iter().map(|&k| base[k].clone()).collect();
        let private_n = rng.random_range(1..=3);
        let private = common::unit_vectors(&mut rng, private_n, 3);

        let rep = |v: &Vec<f64>| Representation::Flat(Embedding::new(v.clone()).unwrap());
        let buffer = UnlabeledBuffer::new(
            u.iter()
                .enumerate()
                .map(|(i, v)| UnlabeledItem {
                    id: ItemId(1000 + i as u64),
                    payload: rep(v),
                })
                .collect(),
            None,
        )
        .unwrap();
        let pool = SlicedLabeledPool::new(vec![Slice::new(
            private
                .iter()
                .enumerate()
                .map(|(i, v)| LabeledItem {
                    id: ItemId(i as u64),
                    label: 0,
                    payload: rep(v),
                })
                .collect(),
            false,
        )])
        .unwrap();

        let b = rng.random_range(1..=unique);
        let cfg = MaximizerConfig::default();
        let sel = scg_select(&pool, &buffer, 0, b, &IdentityFeaturizer, Metric::Cosine, &cfg).unwrap();
        let chosen = sel.trace.chosen.clone();

        let ground = common::cosine_kernel(&u, &u);
        let priv_k = common::cosine_kernel(&u, &private);
        for step in 0..chosen.len() {
            let before = &chosen[..step];
            let dup = before.iter().any(|&c| order[c] == order[chosen[step]]);
            if dup {
                let base_val = common::flcg(&ground, &priv_k, before);
                let novel_positive = (0..u.len()).any(|j| {
                    !before.iter().any(|&c| order[c] == order[j])
                        && common::flcg(&ground, &priv_k, &common::union(before, &[j])) - base_val
                            > 1e-12
                });
                if novel_positive {
                    violations += 1;
                }
            }
        }

        // Brute force: some optimal b-subset uses distinct pairs, and the
        // greedy value meets the approximation bound.
        let all = common::subsets(u.len(), b);
        let opt = all
            .iter()
            .map(|a| common::flcg(&ground, &priv_k, a))
            .fold(0.0, f64::max);
        let opt_distinct = all
            .iter()
            .filter(|a| {
                let mut pairs: Vec<usize> = a.iter().map(|&i| order[i]).collect();
                pairs.sort_unstable();
                pairs.dedup();
                pairs.len() == a.len()
            })
            .map(|a| common::flcg(&ground, &priv_k, a))
            .fold(0.0, f64::max);
        let greedy_val = common::flcg(&ground, &priv_k, &chosen);
        if (opt - opt_distinct).abs() > EXACT_TOL || greedy_val < GREEDY_RATIO * opt - EXACT_TOL {
            violations += 1;
        }
        checked += 1;
        let _ = case;
    }
    let pass = violations == 0;
    report(
        7,
        "redundancy handling",
        pass,
        &format!("{violations} violations over {checked} duplicated buffers"),
    );
    assert!(pass);
}

/// Stream used by the end-to-end and ablation checks.
fn desk_spec(seed: u64) -> StreamSpec {
    StreamSpec {
        slices: 4,
        dim: 32,
        classes: 5,
        class_separation: 3.0,
        shared_class_weight: 0.3,
        common_initial: 500,
        imbalance: 5.0,
        rare_slices: vec![3],
        schedule: Schedule::EveryK { k: 3 },
        rounds: 12,
        episode_size: 200,
        redundancy: 2,
        eval_per_slice: 500,
        seed,
        ..StreamSpec::default()
    }
}

const DESK_SEEDS: [u64; 4] = [0, 1, 2, 3];
const DESK_METHODS: [Method; 10] = [
    Method::Streamline,
    Method::StreamlineNoScg,
    Method::StreamlineNoBudget,
    Method::Random,
    Method::Entropy,
    Method::Margin,
    Method::LeastConf,
    Method::Submodular,
    Method::Similar,
    Method::Badge,
];
const FIXED_BUDGET: [Method; 7] = [
    Method::Random,
    Method::Entropy,
    Method::Margin,
    Method::LeastConf,
    Method::Submodular,
    Method::Similar,
    Method::Badge,
];

fn desk_runs() -> &'static (Vec<MetricsLog>, Duration) {
    static RUNS: OnceLock<(Vec<MetricsLog>, Duration)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let hyper = ExperimentHyper {
            budget: 50,
            rho: 0.5,
            ..ExperimentHyper::default()
        };
        let jobs: Vec<(Method, u64)> = DESK_METHODS
            .iter()
            .flat_map(|&m| DESK_SEEDS.iter().map(move |&s| (m, s)))
            .collect();
        let logs = jobs
            .par_iter()
            .map(|&(m, s)| run_experiment(&desk_spec(s), m, &hyper).unwrap())
            .collect();
        (logs, start.elapsed())
    })
}

fn final_mean(logs: &[MetricsLog], m: Method, rare: bool) -> f64 {
    let v: Vec<f64> = logs
        .iter()
        .filter(|l| l.method == m)
        .map(|l| {
            let r = l.last().unwrap();
            if rare {
                r.rare_metric
            } else {
                r.full_metric
            }
        })
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn rare_pool(logs: &[MetricsLog], m: Method, seed: u64) -> usize {
    logs.iter()
        .find(|l| l.method == m && l.seed == seed)
        .unwrap()
        .last()
        .unwrap()
        .slice_sizes[3]
}

#[test]
fn criterion_08_end_to_end() {
    let (logs, elapsed) = desk_runs();
    let sl_rare = final_mean(logs, Method::Streamline, true);
    let rnd_rare = final_mean(logs, Method::Random, true);
    let a = sl_rare - rnd_rare >= RARE_GAIN_POINTS;

    let b = DESK_SEEDS.iter().all(|&s| {
        let mine = rare_pool(logs, Method::Streamline, s);
        FIXED_BUDGET.iter().all(|&m| mine >= rare_pool(logs, m, s))
    });

    let sl_full = final_mean(logs, Method::Streamline, false);
    let (best_m, best_full) = FIXED_BUDGET
        .iter()
        .map(|&m| (m, final_mean(logs, m, false)))
        .fold((Method::Random, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let c = sl_full >= best_full - FULL_SLACK_POINTS;
    let fast = *elapsed < Duration::from_secs(300);

    let pass = a && b && c && fast;
    report(
        8,
        "end-to-end desk experiment",
        pass,
        &format!(
            "rare acc {sl_rare:.4} vs random {rnd_rare:.4} (gap {:.2} pts, need 3); rare pool >= baselines: {b}; full {sl_full:.4} vs best baseline {best_m} {best_full:.4}; {elapsed:.1?}",
            100.0 * (sl_rare - rnd_rare)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_ablation_order() {
    let (logs, _) = desk_runs();
    let full = final_mean(logs, Method::Streamline, true);
    let no_budget = final_mean(logs, Method::StreamlineNoBudget, true);
    let no_scg = final_mean(logs, Method::StreamlineNoScg, true);
    let submodular = final_mean(logs, Method::Submodular, true);
    let pass = no_budget <= full + ABLATION_SLACK_POINTS
        && no_scg <= full + ABLATION_SLACK_POINTS
        && full >= submodular;
    report(
        9,
        "ablation ordering",
        pass,
        &format!(
            "rare acc: full {full:.4}, no_budget {no_budget:.4}, no_scg {no_scg:.4}, submodular {submodular:.4}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_labeling_efficiency() {
    // Method reaches the target at 100 labels, random at 200.
    let method = [(0.0, 0.5), (100.0, 0.8)];
    let random = [(0.0, 0.5), (100.0, 0.65), (200.0, 0.8)];
    let two_x = labeling_efficiency(&method, &random, 0.8) == Efficiency::Ratio(2.0);

    // Interpolated crossings: random at 60 labels, method at 20.
    let random_b = [(0.0, 0.25), (120.0, 0.75)];
    let method_b = [(0.0, 0.25), (40.0, 0.75)];
    let three_x = labeling_efficiency(&method_b, &random_b, 0.5) == Efficiency::Ratio(3.0);

    // Crossing inside the second segment: method at 150, random at 250.
    let method_c = [(100.0, 0.25), (200.0, 0.75)];
    let random_c = [(100.0, 0.0), (200.0, 0.25), (300.0, 0.75)];
    let five_thirds =
        labeling_efficiency(&method_c, &random_c, 0.5) == Efficiency::Ratio(250.0 / 150.0);

    let same = labeling_efficiency(&random, &random, 0.65) == Efficiency::Ratio(1.0);
    let undefined = labeling_efficiency(&method, &random, 0.9) == Efficiency::Undefined
        && labeling_efficiency(&[(10.0, 0.1)], &random, 0.7) == Efficiency::Undefined;

    let pass = two_x && three_x && five_thirds && same && undefined;
    report(
        10,
        "labeling efficiency",
        pass,
        &format!(
            "2x: {two_x}, 3x: {three_x}, 5/3x: {five_thirds}, identity: {same}, undefined: {undefined}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_determinism() {
    let text = r#"
seeds = [3, 4]
methods = ["streamline", "random", "badge", "margin"]
budget = 20

[stream]
common_initial = 120
rounds = 4
episode_size = 60
eval_per_slice = 60

[learner]
epochs = 30
"#;
    let cfg = parse_config_str(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (one, two) = (dir.path().join("one"), dir.path().join("two"));
    run(&cfg, &one, 1).unwrap();
    run(&cfg, &two, 2).unwrap();
    let same = |f: &str| std::fs::read(one.join(f)).unwrap() == std::fs::read(two.join(f)).unwrap();
    let metrics = same(METRICS_FILE);
    let others = same(SELECTIONS_FILE) && same(SUMMARY_FILE);
    let pass = metrics && others;
    report(
        11,
        "determinism",
        pass,
        &format!("metrics.csv identical: {metrics}; selections and summary identical: {others}"),
    );
    assert!(pass);
}

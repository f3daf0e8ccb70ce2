mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use streamline_core::kernel::SimilarityMatrix;
use streamline_core::submodular::{
    flqmi_normalizer, marginal_gain, scg_value, smi_value, SetFunction, SetFunctionInstance,
};
use streamline_core::Error;

fn m(rows: &[&[f64]]) -> SimilarityMatrix {
    SimilarityMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn mat(rows: &[Vec<f64>]) -> SimilarityMatrix {
    SimilarityMatrix::from_rows(rows.to_vec()).unwrap()
}

#[test]
fn facility_location_examples() {
    let f = SetFunctionInstance::facility_location(m(&[&[1.0, 0.2], &[0.2, 1.0]]));
    assert_eq!(f.value(&[]).unwrap(), 0.0);
    assert!((f.value(&[0]).unwrap() - 1.2).abs() < 1e-12);
    assert!((f.value(&[0, 1]).unwrap() - 2.0).abs() < 1e-12);
    assert!(matches!(f.value(&[2]), Err(Error::IndexOutOfRange { index: 2, size: 2 })));
}

#[test]
fn flqmi_examples() {
    let f = SetFunctionInstance::flqmi(m(&[&[0.9, 0.1], &[0.2, 0.8]]));
    assert_eq!(f.value(&[]).unwrap(), 0.0);
    assert!((f.value(&[0, 1]).unwrap() - 3.4).abs() < 1e-12);
    let single = SetFunctionInstance::flqmi(m(&[&[0.35]]));
    assert!((single.value(&[0]).unwrap() - 0.7).abs() < 1e-12);
}

#[test]
fn flcg_examples() {
    let f = SetFunctionInstance::flcg(m(&[&[1.0, 0.5], &[0.5, 1.0]]), m(&[&[0.9], &[0.1]])).unwrap();
    assert_eq!(f.value(&[]).unwrap(), 0.0);
    assert!((f.value(&[1]).unwrap() - 0.9).abs() < 1e-12);

    let ground = m(&[&[1.0, 0.3, 0.6], &[0.3, 1.0, 0.2], &[0.6, 0.2, 1.0]]);
    let empty_p = SetFunctionInstance::flcg(ground.clone(), SimilarityMatrix::empty_cols(3)).unwrap();
    let fl = SetFunctionInstance::facility_location(ground);
    for a in common::subsets(3, 2) {
        assert_eq!(empty_p.value(&a).unwrap(), fl.value(&a).unwrap());
    }
}

#[test]
fn flcg_rejects_mismatched_axes() {
    let ground = m(&[&[1.0, 0.5], &[0.5, 1.0]]);
    assert!(SetFunctionInstance::flcg(ground, m(&[&[0.1]])).is_err());
}

#[test]
fn marginal_gain_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = common::random_kernel(&mut rng, 6, 6);
    let f = SetFunctionInstance::facility_location(mat(&s));
    for x in 0..6 {
        assert!((marginal_gain(&f, &[], x).unwrap() - common::fl(&s, &[x])).abs() < 1e-12);
    }
    let a = [1, 4];
    for x in [0, 2, 3, 5] {
        let oracle = common::fl(&s, &common::union(&a, &[x])) - common::fl(&s, &a);
        assert!((marginal_gain(&f, &a, x).unwrap() - oracle).abs() < 1e-9);
    }
    assert!(matches!(marginal_gain(&f, &a, 4), Err(Error::AlreadySelected(4))));

    // Item 2 duplicates item 0.
    let dup = vec![
        vec![1.0, 0.3, 1.0],
        vec![0.3, 1.0, 0.3],
        vec![1.0, 0.3, 1.0],
    ];
    let f = SetFunctionInstance::facility_location(mat(&dup));
    assert_eq!(marginal_gain(&f, &[0], 2).unwrap(), 0.0);
}

#[test]
fn smi_scg_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = common::random_kernel(&mut rng, 5, 5);
    let f = SetFunctionInstance::facility_location(mat(&s));
    let a = [0, 3];
    assert_eq!(smi_value(&f, &a, &[]).unwrap(), 0.0);
    assert!((scg_value(&f, &a, &[]).unwrap() - f.value(&a).unwrap()).abs() < 1e-12);
    assert!((smi_value(&f, &a, &a).unwrap() - f.value(&a).unwrap()).abs() < 1e-12);
}

#[test]
fn normalizer_is_axis_sum() {
    assert_eq!(flqmi_normalizer(7, 3), 10.0);
    assert_eq!(flqmi_normalizer(1, 0), 1.0);
}

fn kernel(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..=1.0, cols), rows)
}

/// `(kind, ground kernel, private/query kernel)` for one of the three kinds.
fn instance() -> impl Strategy<Value = (u8, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (2usize..7, 1usize..4, 0u8..3).prop_flat_map(|(n, p, kind)| (Just(kind), kernel(n, n), kernel(n, p)))
}

fn build(kind: u8, g: &[Vec<f64>], p: &[Vec<f64>]) -> SetFunctionInstance {
    match kind {
        0 => SetFunctionInstance::facility_location(mat(g)),
        1 => SetFunctionInstance::flqmi(mat(p)),
        _ => SetFunctionInstance::flcg(mat(g), mat(p)).unwrap(),
    }
}

fn oracle(kind: u8, g: &[Vec<f64>], p: &[Vec<f64>], a: &[usize]) -> f64 {
    match kind {
        0 => common::fl(g, a),
        1 => common::flqmi(p, a),
        _ => common::flcg(g, p, a),
    }
}

proptest! {
    #[test]
    fn value_matches_definition((kind, g, p) in instance(), bits in any::<u8>()) {
        let n = g.len();
        let a: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
        let f = build(kind, &g, &p);
        prop_assert!((f.value(&a).unwrap() - oracle(kind, &g, &p, &a)).abs() <= 1e-9);
    }

    #[test]
    fn monotone((kind, g, p) in instance(), bits in any::<u8>()) {
        let n = g.len();
        let a: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
        let f = build(kind, &g, &p);
        let base = f.value(&a).unwrap();
        for x in 0..n {
            prop_assert!(f.value(&common::union(&a, &[x])).unwrap() >= base - 1e-9);
        }
    }

    #[test]
    fn diminishing_returns((kind, g, p) in instance(), small in any::<u8>(), extra in any::<u8>()) {
        let n = g.len();
        let a: Vec<usize> = (0..n).filter(|i| small >> i & 1 == 1).collect();
        let b: Vec<usize> = (0..n).filter(|i| (small | extra) >> i & 1 == 1).collect();
        let f = build(kind, &g, &p);
        for x in (0..n).filter(|x| !b.contains(x)) {
            let ga = marginal_gain(&f, &a, x).unwrap();
            let gb = marginal_gain(&f, &b, x).unwrap();
            prop_assert!(ga >= gb - 1e-9);
        }
    }

    #[test]
    fn flcg_is_fl_gain_on_joined_kernel((_, g, p) in instance(), bits in any::<u8>()) {
        let n = g.len();
        let a: Vec<usize> = (0..n).filter(|i| bits >> i & 1 == 1).collect();
        let joined = mat(&g).hconcat(&mat(&p)).unwrap();
        let fl = SetFunctionInstance::facility_location(joined);
        let p_idx: Vec<usize> = (n..n + p[0].len()).collect();
        let expected = fl.value(&common::union(&a, &p_idx)).unwrap() - fl.value(&p_idx).unwrap();
        let cg = SetFunctionInstance::flcg(mat(&g), mat(&p)).unwrap();
        prop_assert!((cg.value(&a).unwrap() - expected).abs() <= 1e-9);
    }
}

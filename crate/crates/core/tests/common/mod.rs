//! Definitional oracles shared by the integration tests. Nothing here calls
//! into the library's evaluation code.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn unit_vectors(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

pub fn normalize(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// Clamped cosine between unit vectors.
pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(0.0, 1.0)
}

pub fn cosine_kernel(rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| cols.iter().map(|c| cos(r, c)).collect())
        .collect()
}

pub fn random_kernel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect()
}

fn max_over(row: &[f64], set: &[usize]) -> f64 {
    set.iter().map(|&j| row[j]).fold(0.0, f64::max)
}

pub fn fl(s: &[Vec<f64>], a: &[usize]) -> f64 {
    s.iter().map(|row| max_over(row, a)).sum()
}

pub fn flqmi(s: &[Vec<f64>], a: &[usize]) -> f64 {
    let cols = s.first().map_or(0, Vec::len);
    let first: f64 = a.iter().map(|&i| s[i].iter().copied().fold(0.0, f64::max)).sum();
    let second: f64 = (0..cols)
        .map(|j| a.iter().map(|&i| s[i][j]).fold(0.0, f64::max))
        .sum();
    first + second
}

pub fn flcg(ground: &[Vec<f64>], private: &[Vec<f64>], a: &[usize]) -> f64 {
    ground
        .iter()
        .zip(private)
        .map(|(g, p)| {
            let pm = p.iter().copied().fold(0.0, f64::max);
            (max_over(g, a) - pm).max(0.0)
        })
        .sum()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

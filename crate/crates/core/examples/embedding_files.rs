//! Writes precomputed embeddings with an id/label/slice sidecar, reads them
//! back and runs a short experiment on them through a config file.
//!
//! cargo run --release --example embedding_files

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use streamline_core::cli::config::parse_config;
use streamline_core::cli::embedding_file::{read_embeddings, sidecar_path, write_embeddings, RowMeta};
use streamline_core::cli::run::{run, SUMMARY_FILE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("streamline-embedding-example");
    std::fs::create_dir_all(&dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let noise = Normal::new(0.0f32, 1.0).expect("valid normal");
    let (slices, dim) = (3usize, 8usize);
    let mut rows = Vec::new();
    let mut meta = Vec::new();
    for id in 0..900u64 {
        let slice = id as usize % slices;
        let label = (id as usize / slices) % 2;
        let mut v: Vec<f32> = (0..dim).map(|_| noise.sample(&mut rng)).collect();
        v[slice] += 5.0;
        v[dim - 1] += if label == 0 { 1.5 } else { -1.5 };
        rows.push(v);
        meta.push(RowMeta { id, label, slice });
    }
    let path = dir.join("features.slem");
    write_embeddings(&path, &rows, Some(&meta))?;
    let table = read_embeddings(&path)?;
    println!(
        "{} rows of dim {} in {} (+ {})",
        table.len(),
        table.dim,
        path.display(),
        sidecar_path(&path).display()
    );

    let cfg_path = dir.join("experiment.toml");
    let config = r#"
seeds = [0, 1]
methods = ["streamline", "random", "submodular"]
budget = 20
embeddings = "features.slem"

[stream]
common_initial = 120
imbalance = 4.0
rare_slices = [2]
rounds = 6
episode_size = 40
eval_per_slice = 60
"#;
    std::fs::write(&cfg_path, config)?;
    let cfg = parse_config(&cfg_path)?;
    let out = dir.join("results");
    run(&cfg, &out, 1)?;
    let summary = std::fs::read_to_string(out.join(SUMMARY_FILE))?;
    println!("{summary}");
    Ok(())
}

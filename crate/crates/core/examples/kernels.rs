//! Pairwise similarities and kernel matrices for flat embeddings and object
//! sets.

use streamline_core::kernel::{
    build_kernel, Embedding, Metric, ObjectSetEmbedding, Representation,
};

fn flat(v: &[f64]) -> streamline_core::Result<Representation> {
    Ok(Representation::Flat(Embedding::new(v.to_vec())?))
}

fn print(name: &str, k: &streamline_core::kernel::SimilarityMatrix) {
    println!("{name} ({} x {}):", k.rows(), k.cols());
    for r in 0..k.rows() {
        let row: Vec<String> = k.row(r).iter().map(|v| format!("{v:.3}")).collect();
        println!("  [{}]", row.join(", "));
    }
}

fn main() -> streamline_core::Result<()> {
    let items = vec![
        flat(&[1.0, 0.0, 0.0])?,
        flat(&[0.8, 0.6, 0.0])?,
        flat(&[0.0, 0.0, 1.0])?,
        flat(&[-1.0, 0.1, 0.0])?,
    ];
    print("cosine", &build_kernel(&items, &items, Metric::Cosine)?);
    print("rbf, bandwidth 1", &build_kernel(&items, &items, Metric::Rbf { bandwidth: 1.0 })?);

    // Object sets, e.g. per-box detector features of an image.
    let set = |objs: &[&[f64]]| -> streamline_core::Result<Representation> {
        let objs = objs
            .iter()
            .map(|o| Embedding::new(o.to_vec()))
            .collect::<streamline_core::Result<Vec<_>>>()?;
        Ok(Representation::Objects(ObjectSetEmbedding::new(objs)?))
    };
    let images = vec![
        set(&[&[1.0, 0.0], &[0.0, 1.0]])?,
        set(&[&[1.0, 0.0]])?,
        set(&[&[0.6, 0.8], &[0.0, 1.0], &[0.1, 1.0]])?,
    ];
    print("object sets", &build_kernel(&images, &images, Metric::ObjectSet)?);
    Ok(())
}

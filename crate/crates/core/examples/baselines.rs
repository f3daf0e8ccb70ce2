//! What each baseline selector picks from one buffer given a trained model.

use streamline_core::baselines::{
    badge_select, random_select, similar_select, submodular_fl_select, uncertainty_select,
    PredictionRecord, UncertaintyMode,
};
use streamline_core::kernel::Metric;
use streamline_core::maximize::MaximizerConfig;
use streamline_core::simulator::{generate_stream, payload_vector, train_learner, LearnerHyper, StreamSpec};
use streamline_core::streamline::IdentityFeaturizer;
use streamline_core::ItemId;

fn show(name: &str, ids: &[ItemId]) {
    let ids: Vec<u64> = ids.iter().map(|i| i.0).collect();
    println!("{name:<16} {ids:?}");
}

fn main() -> streamline_core::Result<()> {
    let spec = StreamSpec {
        rounds: 3,
        ..StreamSpec::default()
    };
    let stream = generate_stream(&spec)?;
    let learner = train_learner(&stream.pool, stream.classes, &LearnerHyper::default())?;
    let buffer = &stream.episodes[0];
    let b = 8;

    let feats: Vec<Vec<f64>> = buffer.items.iter().map(|i| payload_vector(&i.payload)).collect();
    let probs: Vec<Vec<f64>> = feats.iter().map(|x| learner.predict_proba(x)).collect();
    let preds: Vec<PredictionRecord> = probs.iter().cloned().map(PredictionRecord::Classification).collect();
    let metric = Metric::Rbf {
        bandwidth: (spec.dim as f64).sqrt() * 2.0,
    };
    let cfg = MaximizerConfig::default();

    show("random", &random_select(buffer, b, 1));
    show("entropy", &uncertainty_select(buffer, &preds, UncertaintyMode::Entropy, b)?);
    show("least confidence", &uncertainty_select(buffer, &preds, UncertaintyMode::LeastConfidence, b)?);
    show("margin", &uncertainty_select(buffer, &preds, UncertaintyMode::Margin, b)?);
    show("facility loc.", &submodular_fl_select(buffer, b, &IdentityFeaturizer, metric, &cfg)?.ids);
    show("similar (rare)", &similar_select(buffer, &stream.pool, 3, b, &IdentityFeaturizer, metric, &cfg)?.ids);
    show("badge", &badge_select(buffer, &probs, &feats, b, 1)?);
    Ok(())
}

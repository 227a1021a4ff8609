//! Fit the boosted-tree survival regressor on synthetic subjects:
//! normalize, train, rank features by split gain, refit on the top
//! features, and score with the survival metrics.
//!
//! ```bash
//! cargo run -p survoxel --example survival_gbdt
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use survoxel::survreg::{
    evaluate, feature_importance, gbdt_fit, gbdt_predict, normalize_apply, normalize_fit,
    select_top_k, FeatureMatrix, GbdtConfig, SurvivalBuckets, EVAL_CSV_HEADER,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 120;

    // survival driven by age and tumor volume; the rest is noise
    let names: Vec<String> = ["age", "tumor_volume", "noise_1", "noise_2", "noise_3"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::with_capacity(n);
    let mut days = Vec::with_capacity(n);
    for _ in 0..n {
        let age: f64 = rng.random_range(30.0..85.0);
        let volume: f64 = rng.random_range(5_000.0..120_000.0);
        let noise: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = (1200.0 - 9.0 * age - volume / 180.0 + rng.random_range(-40.0..40.0)).max(10.0);
        rows.push(vec![age, volume, noise[0], noise[1], noise[2]]);
        days.push(y);
    }
    let (train_rows, test_rows) = rows.split_at(90);
    let (train_y, test_y) = days.split_at(90);
    let train = FeatureMatrix::new(names.clone(), train_rows.to_vec())?;
    let test = FeatureMatrix::new(names, test_rows.to_vec())?;

    let stats = normalize_fit(&train)?;
    let train_z = normalize_apply(&train, &stats)?;
    let test_z = normalize_apply(&test, &stats)?;

    let model = gbdt_fit(&train_z, train_y, &GbdtConfig::default())?;
    println!("feature importance (total squared-error reduction):");
    let importance = feature_importance(&model);
    for (name, score) in model.feature_names.iter().zip(&importance) {
        println!("  {name:<14} {score:>14.1}");
    }

    // keep the two strongest features and refit
    let top = select_top_k(&importance, 2)?;
    let top_names: Vec<String> = top.iter().map(|&i| model.feature_names[i].clone()).collect();
    println!("refitting on: {}", top_names.join(", "));
    let slim = gbdt_fit(&train_z.select(&top_names)?, train_y, &GbdtConfig::default())?;

    let buckets = SurvivalBuckets::default();
    println!("\n{}", EVAL_CSV_HEADER);
    for (label, m) in [("all features", &model), ("top-2 features", &slim)] {
        let pred = gbdt_predict(m, &test_z)?;
        let report = evaluate(&pred, test_y, &buckets)?;
        println!("{}  <- {label}", report.to_csv_row());
    }
    Ok(())
}

//! The `train`, `predict` and `evaluate` commands.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use super::config::PipelineConfig;
use super::dataset::{read_feature_csv, read_survival_csv, IdMatrix};
use crate::survreg::{
    evaluate, feature_importance, gbdt_fit, gbdt_predict, normalize_apply, normalize_fit,
    pca_apply, pca_fit, select_top_k, DeepFeatureBlock, FeatureMatrix, SurvivalBuckets,
    SurvivalModel, EVAL_CSV_HEADER, MODEL_FORMAT_VERSION,
};

fn list_offenders(mut offenders: Vec<String>) -> String {
    offenders.sort();
    let shown: Vec<String> = offenders.iter().take(10).cloned().collect();
    let suffix = if offenders.len() > 10 {
        format!(" (and {} more)", offenders.len() - 10)
    } else {
        String::new()
    };
    format!("{}{}", shown.join(", "), suffix)
}

/// Joins a deep-feature CSV onto the subject rows, applying the given or a
/// freshly fitted PCA. Returns the projected block and the fitted model.
fn deep_block_for(
    ids: &[String],
    deep: &IdMatrix,
    pca: Option<&DeepFeatureBlock>,
    target_dims: usize,
) -> Result<(FeatureMatrix, DeepFeatureBlock)> {
    let by_id: std::collections::BTreeMap<&str, usize> = deep
        .ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let missing: Vec<String> = ids
        .iter()
        .filter(|id| !by_id.contains_key(id.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() {
        bail!(
            "deep-feature CSV lacks rows for: {}",
            list_offenders(missing)
        );
    }
    // align deep rows to the subject order
    let aligned_rows: Vec<Vec<f64>> = ids
        .iter()
        .map(|id| deep.matrix.row(by_id[id.as_str()]).to_vec())
        .collect();
    let aligned = FeatureMatrix::new(deep.matrix.names().to_vec(), aligned_rows)?;

    let block = match pca {
        Some(block) => {
            if block.input_columns != deep.matrix.names() {
                bail!(
                    "deep-feature CSV columns do not match the columns the model \
                     was trained with"
                );
            }
            block.clone()
        }
        None => {
            let max_k = (aligned.rows() - 1).min(aligned.cols());
            let k = target_dims.min(max_k);
            if k < target_dims {
                eprintln!(
                    "note: reducing deep features to {k} dims ({} rows, {} cols \
                     cannot support {target_dims})",
                    aligned.rows(),
                    aligned.cols()
                );
            }
            DeepFeatureBlock {
                input_columns: deep.matrix.names().to_vec(),
                pca: pca_fit(&aligned, k)?,
            }
        }
    };
    let projected = pca_apply(&aligned, &block.pca)?;
    // prefix so deep columns never collide with handcrafted/posenc names
    let renamed = FeatureMatrix::from_flat(
        projected
            .names()
            .iter()
            .map(|n| format!("deep_{n}"))
            .collect(),
        projected.rows(),
        (0..projected.rows())
            .flat_map(|r| projected.row(r).to_vec())
            .collect(),
    )?;
    Ok((renamed, block))
}

pub fn train(
    config: &PipelineConfig,
    features_path: &Path,
    deep_path: Option<&Path>,
    out_path: Option<&Path>,
) -> Result<i32> {
    let features = read_feature_csv(features_path)?;
    if features.ids.is_empty() {
        bail!("{} holds no subjects", features_path.display());
    }
    let metadata = config
        .metadata
        .as_ref()
        .context("training needs the metadata CSV (config key metadata or --metadata)")?;
    let survival = read_survival_csv(metadata)?;
    let missing: Vec<String> = features
        .ids
        .iter()
        .filter(|id| !survival.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        bail!(
            "subjects without survival labels in {}: {}",
            metadata.display(),
            list_offenders(missing)
        );
    }
    let y: Vec<f64> = features.ids.iter().map(|id| survival[id]).collect();

    let (matrix, deep_block) = match deep_path {
        Some(p) => {
            let deep = read_feature_csv(p)?;
            let (projected, block) =
                deep_block_for(&features.ids, &deep, None, config.pca_deep_dims)?;
            (features.matrix.hstack(&projected)?, Some(block))
        }
        None => (features.matrix.clone(), None),
    };

    let norm = normalize_fit(&matrix)?;
    let normalized = normalize_apply(&matrix, &norm)?;
    let mut gbdt = gbdt_fit(&normalized, &y, &config.gbdt)?;
    let mut final_norm = norm.clone();

    if let Some(k) = config.select_top {
        let importances = feature_importance(&gbdt);
        let chosen = select_top_k(&importances, k)?;
        let names: Vec<String> = chosen
            .iter()
            .map(|&i| normalized.names()[i].clone())
            .collect();
        println!("selected top {k} features: {}", names.join(", "));
        let subset = normalized.select(&names)?;
        gbdt = gbdt_fit(&subset, &y, &config.gbdt)?;
        final_norm = norm.subset(&chosen);
    }

    let model = SurvivalModel {
        format_version: MODEL_FORMAT_VERSION,
        gbdt,
        norm: final_norm,
        buckets: config.buckets,
        deep: deep_block,
    };
    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("creating {}", config.output_dir.display()))?;
    let out = out_path
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| config.output_dir.join("model.json"));
    model.save(&out)?;
    println!(
        "train: {} subjects, {} features -> {}",
        features.ids.len(),
        model.gbdt.feature_names.len(),
        out.display()
    );
    Ok(0)
}

pub fn predict(
    model_path: &Path,
    features_path: &Path,
    deep_path: Option<&Path>,
    out_path: &Path,
) -> Result<i32> {
    let model = SurvivalModel::load(model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    let features = read_feature_csv(features_path)?;

    let matrix = match (&model.deep, deep_path) {
        (Some(block), Some(p)) => {
            let deep = read_feature_csv(p)?;
            let (projected, _) = deep_block_for(&features.ids, &deep, Some(block), 0)?;
            features.matrix.hstack(&projected)?
        }
        (Some(_), None) => bail!(
            "the model was trained with deep features; pass the deep-feature CSV via --deep"
        ),
        (None, _) => features.matrix.clone(),
    };

    let selected = matrix
        .select(&model.gbdt.feature_names)
        .context("features CSV does not cover the model manifest")?;
    let normalized = normalize_apply(&selected, &model.norm)?;
    let days = gbdt_predict(&model.gbdt, &normalized)?;

    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = csv::Writer::from_path(out_path)
        .with_context(|| format!("creating {}", out_path.display()))?;
    w.write_record(["id", "Survival_days"])?;
    for (id, d) in features.ids.iter().zip(&days) {
        w.write_record([id.as_str(), &d.to_string()])?;
    }
    w.flush()?;
    println!(
        "predict: {} subjects -> {}",
        features.ids.len(),
        out_path.display()
    );
    Ok(0)
}

pub fn evaluate_cmd(
    predictions_path: &Path,
    truth_path: &Path,
    out_path: Option<&Path>,
    buckets: &SurvivalBuckets,
) -> Result<i32> {
    let predictions = read_survival_csv(predictions_path)?;
    let truth = read_survival_csv(truth_path)?;
    if predictions.is_empty() {
        bail!("{} holds no predictions", predictions_path.display());
    }
    let missing: Vec<String> = predictions
        .keys()
        .filter(|id| !truth.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        bail!(
            "no ground truth for predicted subjects: {}",
            list_offenders(missing)
        );
    }
    let ids: BTreeSet<&String> = predictions.keys().collect();
    let y_pred: Vec<f64> = ids.iter().map(|id| predictions[*id]).collect();
    let y_true: Vec<f64> = ids.iter().map(|id| truth[*id]).collect();
    let report = evaluate(&y_pred, &y_true, buckets)?;

    let csv_text = format!("{}\n{}\n", EVAL_CSV_HEADER, report.to_csv_row());
    match out_path {
        Some(p) => {
            std::fs::write(p, &csv_text)?;
            println!("evaluate: {} subjects -> {}", ids.len(), p.display());
            print!("{csv_text}");
        }
        None => {
            print!("{csv_text}");
            std::io::stdout().flush()?;
        }
    }
    Ok(0)
}

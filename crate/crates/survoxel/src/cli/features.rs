//! The `features` command: per-subject handcrafted and position-encoding
//! feature extraction into one rectangular CSV.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use super::config::{FeatureSet, PipelineConfig};
use super::dataset::{find_subject_file, load_seg, read_metadata, write_feature_csv};
use crate::posenc::{pooled_segmentation, PosEncFeatures};
use crate::radiomics::{assemble_handcrafted, AtlasLabelMap, FEATURE_NAMES};
use crate::segmetrics::BinaryMask;
use crate::volio::{read_nifti, SubjectRecord};

struct SubjectRow {
    id: String,
    values: Vec<f64>,
    notes: Vec<String>,
}

fn brain_mask_for(config: &PipelineConfig, id: &str) -> Result<BinaryMask> {
    if let Some(dir) = &config.brain_mask_dir {
        let path = find_subject_file(dir, id)
            .ok_or_else(|| anyhow!("no brain mask for {id} in {}", dir.display()))?;
        let (grid, _) = read_nifti(&path)?;
        return Ok(BinaryMask::from_nonzero(&grid));
    }
    let dir = config.t1ce_dir.as_ref().expect("validated");
    let path = find_subject_file(dir, id)
        .ok_or_else(|| anyhow!("no T1ce volume for {id} in {}", dir.display()))?;
    let (grid, _) = read_nifti(&path)?;
    // skull-stripped volumes: nonzero intensity marks brain tissue
    Ok(BinaryMask::from_nonzero(&grid))
}

fn extract_one(
    config: &PipelineConfig,
    subject: &SubjectRecord,
    atlas: Option<&AtlasLabelMap>,
    age_fallback: f64,
) -> Result<SubjectRow> {
    let seg_dir = config.seg_dir.as_ref().expect("validated");
    let seg_path = find_subject_file(seg_dir, &subject.id).ok_or_else(|| {
        anyhow!(
            "no segmentation for {} in {}",
            subject.id,
            seg_dir.display()
        )
    })?;
    let seg = load_seg(&seg_path)?;
    let mut values = Vec::new();
    let mut notes = Vec::new();

    if config.wants(FeatureSet::B) {
        let brain = brain_mask_for(config, &subject.id)?;
        let atlas = atlas.expect("atlas loaded when set b is active");
        let (features, prov) =
            assemble_handcrafted(subject, &seg, &brain, atlas, age_fallback)
                .with_context(|| format!("handcrafted features for {}", subject.id))?;
        if prov.age_imputed {
            notes.push(format!("age missing, imputed {age_fallback}"));
        }
        if prov.enhancing_fallback {
            notes.push("empty enhancing region, epicenter fell back to whole tumor".into());
        }
        values.extend_from_slice(features.values());
    }
    if config.wants(FeatureSet::C) {
        let pooled = pooled_segmentation(&seg)
            .with_context(|| format!("position-encoding features for {}", subject.id))?;
        values.extend_from_slice(pooled.values());
    }
    Ok(SubjectRow {
        id: subject.id.clone(),
        values,
        notes,
    })
}

/// Runs extraction for every subject in the metadata CSV. Returns the exit
/// code: 0 on full success, 2 when some subjects failed (their errors go to
/// stderr and `errors.csv`).
pub fn run(config: &PipelineConfig, out_file: Option<&Path>) -> Result<i32> {
    config.validate_for_features()?;
    let metadata = config.metadata.as_ref().expect("validated");
    let mut subjects = read_metadata(metadata)?;
    subjects.sort_by(|a, b| a.id.cmp(&b.id));
    if subjects.is_empty() {
        anyhow::bail!("metadata {} lists no subjects", metadata.display());
    }

    let atlas = if config.wants(FeatureSet::B) {
        let path = config.atlas.as_ref().expect("validated");
        let (grid, _) = read_nifti(path)?;
        Some(AtlasLabelMap::new(grid).context("atlas volume")?)
    } else {
        None
    };

    let known_ages: Vec<f64> = subjects.iter().filter_map(|s| s.age).collect();
    if config.wants(FeatureSet::B) && known_ages.is_empty() {
        anyhow::bail!("no subject has an age; nothing to impute missing ages from");
    }
    let age_fallback = if known_ages.is_empty() {
        0.0
    } else {
        known_ages.iter().sum::<f64>() / known_ages.len() as f64
    };

    let mut names: Vec<String> = Vec::new();
    if config.wants(FeatureSet::B) {
        names.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    }
    if config.wants(FeatureSet::C) {
        names.extend(PosEncFeatures::column_names());
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .context("building worker pool")?;
    let results: Vec<(String, Result<SubjectRow>)> = pool.install(|| {
        subjects
            .par_iter()
            .map(|s| {
                (
                    s.id.clone(),
                    extract_one(config, s, atlas.as_ref(), age_fallback),
                )
            })
            .collect()
    });

    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("creating {}", config.output_dir.display()))?;
    let out_path = out_file
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| config.output_dir.join("features.csv"));

    let mut rows = Vec::new();
    let mut failures: Vec<(String, String)> = Vec::new();
    for (id, result) in results {
        match result {
            Ok(row) => {
                for note in &row.notes {
                    eprintln!("note: {id}: {note}");
                }
                rows.push((row.id, row.values));
            }
            Err(e) => {
                eprintln!("error: {id}: {e:#}");
                failures.push((id, format!("{e:#}")));
            }
        }
    }
    write_feature_csv(&out_path, &names, &rows)?;
    println!(
        "features: wrote {} subjects x {} columns to {}",
        rows.len(),
        names.len() + 1,
        out_path.display()
    );
    if failures.is_empty() {
        Ok(0)
    } else {
        let err_path = config.output_dir.join("errors.csv");
        let mut w = csv::Writer::from_path(&err_path)?;
        w.write_record(["id", "error"])?;
        for (id, msg) in &failures {
            w.write_record([id, msg])?;
        }
        w.flush()?;
        eprintln!(
            "{} subject(s) failed; details in {}",
            failures.len(),
            err_path.display()
        );
        Ok(2)
    }
}

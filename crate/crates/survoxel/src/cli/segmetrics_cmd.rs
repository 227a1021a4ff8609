//! The `segmetrics` command: per-subject Dice and Hausdorff for the ET, WT
//! and TC regions of paired predicted / ground-truth label maps.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;

use super::dataset::{subject_stem, load_seg};
use crate::segmetrics::{dice, hausdorff_percentile, region_masks, MetricError};

pub const SEG_CSV_HEADER: [&str; 7] = [
    "id",
    "Dice_ET",
    "Dice_WT",
    "Dice_TC",
    "Hausdorff_ET",
    "Hausdorff_WT",
    "Hausdorff_TC",
];

struct SubjectMetrics {
    id: String,
    values: [f64; 6],
}

fn nifti_stems(dir: &Path) -> Result<BTreeSet<String>> {
    let mut stems = BTreeSet::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if let Some(stem) = subject_stem(&path) {
            stems.insert(stem);
        }
    }
    Ok(stems)
}

fn find_by_stem(dir: &Path, id: &str) -> Option<PathBuf> {
    for name in [
        format!("{id}.nii"),
        format!("{id}.nii.gz"),
        format!("{id}_seg.nii"),
        format!("{id}_seg.nii.gz"),
    ] {
        let p = dir.join(name);
        if p.is_file() {
            return Some(p);
        }
    }
    None
}

fn score_subject(pred_path: &Path, gt_path: &Path, percentile: f64) -> Result<[f64; 6]> {
    let pred = load_seg(pred_path)?;
    let gt = load_seg(gt_path)?;
    let pr = region_masks(&pred);
    let gr = region_masks(&gt);
    let mut out = [0.0; 6];
    for (i, (p, g)) in [(&pr.et, &gr.et), (&pr.wt, &gr.wt), (&pr.tc, &gr.tc)]
        .into_iter()
        .enumerate()
    {
        out[i] = dice(&p.mask, &g.mask)?;
        out[3 + i] = match hausdorff_percentile(&p.mask, &g.mask, percentile) {
            Ok(d) => d,
            // both regions absent is exact agreement; one side absent has
            // no defined distance and is reported as NaN
            Err(MetricError::EmptyMask) => {
                if p.mask.is_region_empty() && g.mask.is_region_empty() {
                    0.0
                } else {
                    f64::NAN
                }
            }
            Err(e) => return Err(e.into()),
        };
    }
    Ok(out)
}

pub fn run(
    pred_dir: &Path,
    gt_dir: &Path,
    out_path: Option<&Path>,
    percentile: f64,
    workers: usize,
) -> Result<i32> {
    let pred_stems = nifti_stems(pred_dir)?;
    let gt_stems = nifti_stems(gt_dir)?;
    if pred_stems.is_empty() {
        anyhow::bail!("no NIfTI volumes in {}", pred_dir.display());
    }

    let mut partial = false;
    for missing_gt in pred_stems.difference(&gt_stems) {
        eprintln!("warning: {missing_gt}: no ground truth in {}; skipped", gt_dir.display());
        partial = true;
    }
    for missing_pred in gt_stems.difference(&pred_stems) {
        eprintln!(
            "warning: {missing_pred}: no prediction in {}; skipped",
            pred_dir.display()
        );
        partial = true;
    }
    let paired: Vec<String> = pred_stems.intersection(&gt_stems).cloned().collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("building worker pool")?;
    let results: Vec<(String, Result<[f64; 6]>)> = pool.install(|| {
        paired
            .par_iter()
            .map(|id| {
                let r = (|| {
                    let pred = find_by_stem(pred_dir, id)
                        .with_context(|| format!("prediction file for {id}"))?;
                    let gt = find_by_stem(gt_dir, id)
                        .with_context(|| format!("ground-truth file for {id}"))?;
                    score_subject(&pred, &gt, percentile)
                })();
                (id.clone(), r)
            })
            .collect()
    });

    let mut rows: Vec<SubjectMetrics> = Vec::new();
    for (id, result) in results {
        match result {
            Ok(values) => rows.push(SubjectMetrics { id, values }),
            Err(e) => {
                eprintln!("error: {id}: {e:#}");
                partial = true;
            }
        }
    }

    let mut lines = Vec::with_capacity(rows.len() + 2);
    lines.push(SEG_CSV_HEADER.join(","));
    for row in &rows {
        let mut cells = vec![row.id.clone()];
        cells.extend(row.values.iter().map(|v| v.to_string()));
        lines.push(cells.join(","));
    }
    // mean row over the defined (finite) values per column
    let mut means = vec!["mean".to_string()];
    for c in 0..6 {
        let finite: Vec<f64> = rows
            .iter()
            .map(|r| r.values[c])
            .filter(|v| v.is_finite())
            .collect();
        let mean = if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        means.push(mean.to_string());
    }
    lines.push(means.join(","));
    let text = format!("{}\n", lines.join("\n"));
    match out_path {
        Some(p) => {
            std::fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
            println!("segmetrics: {} subjects -> {}", rows.len(), p.display());
        }
        None => print!("{text}"),
    }
    Ok(if partial { 2 } else { 0 })
}

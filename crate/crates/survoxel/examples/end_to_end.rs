//! The whole pipeline in-process on synthetic subjects: build label maps,
//! extract handcrafted + position-encoding features, fit the boosted-tree
//! regressor, predict, and score. The `survoxel` binary drives the same
//! steps from the command line over NIfTI files and CSVs.
//!
//! ```bash
//! cargo run -p survoxel --example end_to_end
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use survoxel::posenc::{pooled_segmentation, PosEncFeatures, SEG_DIMS};
use survoxel::radiomics::{assemble_handcrafted, AtlasLabelMap, FEATURE_NAMES};
use survoxel::segmetrics::BinaryMask;
use survoxel::survreg::{
    evaluate, gbdt_fit, gbdt_predict, normalize_apply, normalize_fit, FeatureMatrix, GbdtConfig,
    SurvivalBuckets, EVAL_CSV_HEADER,
};
use survoxel::volio::{Resection, SegLabelMap, SubjectRecord, ValueKind, VolumeGrid};

/// A subject with a box tumor whose size and position depend on the seed.
fn synth_subject(rng: &mut ChaCha8Rng, id: usize) -> (SubjectRecord, SegLabelMap, f64) {
    let n = SEG_DIMS.0 * SEG_DIMS.1 * SEG_DIMS.2;
    let mut labels = vec![0.0; n];
    let side = rng.random_range(10..40usize);
    let cx = rng.random_range(40..SEG_DIMS.0 - 40 - side);
    let cy = rng.random_range(40..SEG_DIMS.1 - 40 - side);
    let cz = rng.random_range(20..SEG_DIMS.2 - 20 - side);
    for z in cz..cz + side {
        for y in cy..cy + side {
            for x in cx..cx + side {
                let label = if x < cx + side / 3 {
                    1.0
                } else if x < cx + 2 * side / 3 {
                    4.0
                } else {
                    2.0
                };
                labels[x + SEG_DIMS.0 * (y + SEG_DIMS.1 * z)] = label;
            }
        }
    }
    let seg = SegLabelMap::new(
        VolumeGrid::new(SEG_DIMS, (1.0, 1.0, 1.0), ValueKind::Label, labels).unwrap(),
    )
    .unwrap();
    let age = rng.random_range(35.0..80.0);
    let survival = (1500.0 - 10.0 * age - (side as f64).powi(3) / 50.0).max(30.0);
    let subject = SubjectRecord::new(
        format!("subj-{id:02}"),
        Some(age),
        if id % 2 == 0 { Resection::Gtr } else { Resection::Str },
        Some(survival),
    )
    .unwrap();
    (subject, seg, survival)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n_vox = SEG_DIMS.0 * SEG_DIMS.1 * SEG_DIMS.2;

    // shared brain mask and a two-parcel toy atlas
    let brain = BinaryMask::new(SEG_DIMS, (1.0, 1.0, 1.0), vec![true; n_vox])?;
    let atlas_data: Vec<f64> = (0..n_vox)
        .map(|i| if i % SEG_DIMS.0 < SEG_DIMS.0 / 2 { 7.0 } else { 21.0 })
        .collect();
    let atlas = AtlasLabelMap::new(VolumeGrid::new(
        SEG_DIMS,
        (1.0, 1.0, 1.0),
        ValueKind::Atlas,
        atlas_data,
    )?)?;

    let mut names: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    names.extend(PosEncFeatures::column_names());

    let mut rows = Vec::new();
    let mut days = Vec::new();
    let mut ids = Vec::new();
    for i in 0..10 {
        let (subject, seg, survival) = synth_subject(&mut rng, i);
        let (handcrafted, _) = assemble_handcrafted(&subject, &seg, &brain, &atlas, 60.0)?;
        let pooled = pooled_segmentation(&seg)?;
        let mut row = handcrafted.values().to_vec();
        row.extend_from_slice(pooled.values());
        println!(
            "{}: age {:>5.1}  tumor volume {:>9.0} mm^3  survival {:>6.1} days",
            subject.id,
            subject.age.unwrap(),
            handcrafted.get("V_whole").unwrap(),
            survival
        );
        ids.push(subject.id);
        rows.push(row);
        days.push(survival);
    }

    let matrix = FeatureMatrix::new(names, rows)?;
    println!(
        "\nfeature matrix: {} subjects x {} columns (36 handcrafted + 12400 position encoding)",
        matrix.rows(),
        matrix.cols()
    );

    let stats = normalize_fit(&matrix)?;
    let z = normalize_apply(&matrix, &stats)?;

    // memorization configuration: one full-depth tree, no shrinkage
    let config = GbdtConfig {
        n_trees: 1,
        max_depth: None,
        learning_rate: 1.0,
        min_leaf: 1,
    };
    let model = gbdt_fit(&z, &days, &config)?;
    let pred = gbdt_predict(&model, &z)?;
    let report = evaluate(&pred, &days, &SurvivalBuckets::default())?;
    println!("\ntraining-set fit ({EVAL_CSV_HEADER}):");
    println!("{}", report.to_csv_row());
    assert_eq!(report.accuracy, 1.0);
    Ok(())
}

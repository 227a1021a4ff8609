//! Acceptance suite: one test per criterion, each printing a `[PASS]` line
//! (visible with `cargo test --test acceptance -- --nocapture`). Budgets on
//! wall time are asserted where the criterion carries one.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use survoxel::neural::{
    grad_check_semisup, semisup_loss, softmax_head, update_centroids, BatchItem, Centroids,
    LossParams, MiniBatch, SoftmaxHead,
};
use survoxel::posenc::{pooled_segmentation, BLOCK_VOLUME, FEATURE_LEN, SEG_DIMS};
use survoxel::radiomics::{epicenter, surface_area, FEATURE_NAMES};
use survoxel::segmetrics::{dice, weighted_dice_loss, BinaryMask, DiceWeights, ProbMaps};
use survoxel::survreg::{
    evaluate, gbdt_fit, gbdt_predict, pca_fit, spearman, FeatureMatrix, GbdtConfig,
    SurvivalBuckets,
};
use survoxel::volio::{
    read_nifti, write_nifti_as, DataType, SegLabelMap, ValueKind, VolumeGrid,
};

fn seg_from(dims: (usize, usize, usize), data: Vec<f64>) -> SegLabelMap {
    SegLabelMap::new(VolumeGrid::new(dims, (1.0, 1.0, 1.0), ValueKind::Label, data).unwrap())
        .unwrap()
}

#[test]
fn c01_dice_matches_exhaustive_counting_oracle() {
    let start = Instant::now();
    let dims = (2, 2, 2);
    let spacing = (1.0, 1.0, 1.0);
    let masks: Vec<BinaryMask> = (0u16..256)
        .map(|bits| {
            let m: Vec<bool> = (0..8).map(|b| bits & (1 << b) != 0).collect();
            BinaryMask::new(dims, spacing, m).unwrap()
        })
        .collect();
    for a in 0..256usize {
        for b in 0..256usize {
            let inter = (a & b).count_ones() as f64;
            let total = (a.count_ones() + b.count_ones()) as f64;
            let oracle = if total == 0.0 { 1.0 } else { 2.0 * inter / total };
            let got = dice(&masks[a], &masks[b]).unwrap();
            assert_eq!(got, oracle, "masks {a:#010b} vs {b:#010b}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("[PASS] criterion 1: dice equals the counting oracle on all 65536 mask pairs ({elapsed:?})");
}

#[test]
fn c02_weighted_dice_loss_fixtures() {
    let weights = DiceWeights::default();

    // perfect one-hot prediction scores (near) zero
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data: Vec<f64> = (0..6 * 6 * 6)
        .map(|_| [0.0, 1.0, 2.0, 4.0][rng.random_range(0..4)])
        .collect();
    let gt = seg_from((6, 6, 6), data);
    let perfect = ProbMaps::one_hot(&gt);
    let loss = weighted_dice_loss(&perfect, &gt, &weights).unwrap();
    assert!(loss.abs() < 1e-4, "perfect-prediction loss {loss}");

    // the uniform-prediction fixture against its frozen scalar-script value
    let mut fixture = Vec::with_capacity(64);
    fixture.extend(std::iter::repeat(1.0).take(16));
    fixture.extend(std::iter::repeat(2.0).take(16));
    fixture.extend(std::iter::repeat(4.0).take(16));
    fixture.extend(std::iter::repeat(0.0).take(16));
    let gt = seg_from((4, 4, 4), fixture);
    let uniform = ProbMaps::new((4, 4, 4), std::array::from_fn(|_| vec![0.25; 64])).unwrap();
    let loss = weighted_dice_loss(&uniform, &gt, &weights).unwrap();
    assert!(
        (loss - 0.74999976562507331).abs() < 1e-10,
        "uniform fixture loss {loss}"
    );
    println!("[PASS] criterion 2: weighted dice loss matches the paper weights and the scalar oracle");
}

#[test]
fn c03_position_encoding_length_and_partition() {
    let start = Instant::now();
    let n = SEG_DIMS.0 * SEG_DIMS.1 * SEG_DIMS.2;
    let zero = seg_from(SEG_DIMS, vec![0.0; n]);
    assert_eq!(pooled_segmentation(&zero).unwrap().values().len(), 12400);
    assert_eq!(FEATURE_LEN, 12400);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let labels = [0.0, 1.0, 2.0, 4.0];
    let mut bytes = vec![0u8; n];
    for _ in 0..100 {
        rand::RngCore::fill_bytes(&mut rng, &mut bytes);
        let mut total: u64 = 0;
        let data: Vec<f64> = bytes
            .iter()
            .map(|&b| {
                let l = labels[(b & 3) as usize];
                total += l as u64;
                l
            })
            .collect();
        let seg = seg_from(SEG_DIMS, data);
        let pooled = pooled_segmentation(&seg).unwrap();
        // every block mean times the block volume is an integer label sum
        // to within ~1e-12; recovering it exactly and summing proves the
        // partition is lossless
        let mut recovered: u64 = 0;
        for &v in pooled.values() {
            let scaled = v * BLOCK_VOLUME as f64;
            let rounded = scaled.round();
            assert!((scaled - rounded).abs() < 1e-9, "block sum {scaled} not integral");
            recovered += rounded as u64;
        }
        assert_eq!(recovered, total);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("[PASS] criterion 3: 12400-dim pooling conserves label mass on 100 random maps ({elapsed:?})");
}

#[test]
fn c04_handcrafted_features_structure() {
    assert_eq!(FEATURE_NAMES.len(), 36);

    // surface area of a solid a x b x c box is 2(ab + bc + ca)
    for a in 1..=3usize {
        for b in 1..=3usize {
            for c in 1..=3usize {
                let dims = (a + 2, b + 2, c + 2);
                let mut m = vec![false; dims.0 * dims.1 * dims.2];
                for z in 1..1 + c {
                    for y in 1..1 + b {
                        for x in 1..1 + a {
                            m[x + dims.0 * (y + dims.1 * z)] = true;
                        }
                    }
                }
                let mask = BinaryMask::new(dims, (1.0, 1.0, 1.0), m).unwrap();
                assert_eq!(surface_area(&mask), 2.0 * (a * b + b * c + c * a) as f64);
            }
        }
    }

    // translation covariance on 50 random masks
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dims = (24, 24, 24);
    for _ in 0..50 {
        let n_points = rng.random_range(1..30usize);
        let points: Vec<(usize, usize, usize)> = (0..n_points)
            .map(|_| {
                (
                    rng.random_range(0..8usize),
                    rng.random_range(0..8usize),
                    rng.random_range(0..8usize),
                )
            })
            .collect();
        let (dx, dy, dz) = (
            rng.random_range(0..16usize),
            rng.random_range(0..16usize),
            rng.random_range(0..16usize),
        );
        let build = |off: (usize, usize, usize)| {
            let mut m = vec![false; dims.0 * dims.1 * dims.2];
            for &(x, y, z) in &points {
                m[(x + off.0) + dims.0 * ((y + off.1) + dims.1 * (z + off.2))] = true;
            }
            BinaryMask::new(dims, (1.0, 1.0, 1.0), m).unwrap()
        };
        let e0 = epicenter(&build((0, 0, 0))).unwrap();
        let e1 = epicenter(&build((dx, dy, dz))).unwrap();
        assert!((e1.0 - e0.0 - dx as f64).abs() < 1e-9);
        assert!((e1.1 - e0.1 - dy as f64).abs() < 1e-9);
        assert!((e1.2 - e0.2 - dz as f64).abs() < 1e-9);
    }
    println!("[PASS] criterion 4: 36-slot manifest, box surface areas, translation covariance");
}

fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

#[test]
fn c05_gradient_check_scale_invariance_entropy_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for point in 0..20 {
        let n = rng.random_range(2..=4usize);
        let dim = rng.random_range(2..=16usize);
        let head =
            SoftmaxHead::new(n, dim, normal_vec(&mut rng, n * dim), normal_vec(&mut rng, n))
                .unwrap();
        let centroids =
            Centroids::new((0..n).map(|_| normal_vec(&mut rng, dim)).collect()).unwrap();
        let params = LossParams::new(n).unwrap();
        let items: Vec<BatchItem> = (0..3)
            .map(|i| {
                let z = normal_vec(&mut rng, dim);
                if i % 2 == 0 {
                    BatchItem::labeled(z, rng.random_range(0..n))
                } else {
                    BatchItem::unlabeled(z)
                }
            })
            .collect();
        let batch = MiniBatch::new(items.clone()).unwrap();
        let report = grad_check_semisup(&batch, &centroids, &head, &params, 1e-5).unwrap();
        assert!(
            report.max_rel_error < 1e-3,
            "point {point}: rel error {}",
            report.max_rel_error
        );

        // entropy of the head output is within [0, log n] for every item
        for item in &items {
            let p = softmax_head(&item.features, &head).unwrap();
            let h: f64 = p.iter().map(|&pj| -pj * pj.ln()).sum();
            assert!(h >= -1e-15 && h <= (n as f64).ln() + 1e-12);
        }
    }

    // alpha-term scale invariance for s in {0.1, 1, 10}
    let n = 3;
    let dim = 5;
    let head = SoftmaxHead::new(n, dim, vec![0.0; n * dim], vec![0.0; n]).unwrap();
    let params = LossParams::with_coefficients(0.5, 0.0, 0.0, n).unwrap();
    let z = normal_vec(&mut rng, dim);
    let cvecs: Vec<Vec<f64>> = (0..n).map(|_| normal_vec(&mut rng, dim)).collect();
    let loss_at = |s: f64| {
        let zs: Vec<f64> = z.iter().map(|v| v * s).collect();
        let cs: Vec<Vec<f64>> = cvecs
            .iter()
            .map(|c| c.iter().map(|v| v * s).collect())
            .collect();
        semisup_loss(
            &MiniBatch::new(vec![BatchItem::labeled(zs, 0)]).unwrap(),
            &Centroids::new(cs).unwrap(),
            &head,
            &params,
        )
        .unwrap()
    };
    let base = loss_at(1.0);
    for s in [0.1, 1.0, 10.0] {
        assert!((loss_at(s) - base).abs() < 1e-9, "s = {s}");
    }
    println!("[PASS] criterion 5: gradient check < 1e-3 at 20 points, scale invariance, entropy bound");
}

#[test]
fn c06_centroid_update() {
    // fixed hand case: c = (0,0), one sample z = (1,0) -> c' = (0.25, 0)
    let c = Centroids::zeros(2, 2);
    let batch = MiniBatch::new(vec![BatchItem::labeled(vec![1.0, 0.0], 0)]).unwrap();
    let next = update_centroids(&c, &batch).unwrap();
    assert_eq!(next.class(0), &[0.25, 0.0]);

    // no-member classes unchanged bitwise on 100 random batches
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(2..=5usize);
        let dim = rng.random_range(1..=6usize);
        let centroids =
            Centroids::new((0..n).map(|_| normal_vec(&mut rng, dim)).collect()).unwrap();
        let present: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        let mut items: Vec<BatchItem> = present
            .iter()
            .flat_map(|&class| {
                let count = rng.random_range(1..=3usize);
                (0..count)
                    .map(|_| BatchItem::labeled(normal_vec(&mut rng, dim), class))
                    .collect::<Vec<_>>()
            })
            .collect();
        items.push(BatchItem::unlabeled(normal_vec(&mut rng, dim)));
        let next = update_centroids(&centroids, &MiniBatch::new(items).unwrap()).unwrap();
        for j in 0..n {
            if !present.contains(&j) {
                assert_eq!(next.class(j), centroids.class(j), "class {j} moved");
            }
        }
    }
    println!("[PASS] criterion 6: centroid update fixture exact, absent classes untouched");
}

#[test]
fn c07_gbdt_properties() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    // stage-wise training loss non-increasing on 20 random problems
    for problem in 0..20 {
        let rows = rng.random_range(20..60usize);
        let cols = rng.random_range(1..5usize);
        let data: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let y: Vec<f64> = data
            .iter()
            .map(|r| 200.0 + 40.0 * r[0] + rng.random_range(-30.0..30.0))
            .collect();
        let x = FeatureMatrix::new(
            (0..cols).map(|i| format!("f{i}")).collect(),
            data,
        )
        .unwrap();
        let cfg = GbdtConfig {
            n_trees: 40,
            ..Default::default()
        };
        let model = gbdt_fit(&x, &y, &cfg).unwrap();
        let mut pred = vec![model.init; x.rows()];
        let loss = |p: &[f64]| -> f64 {
            p.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
        };
        let mut prev = loss(&pred);
        for tree in &model.trees {
            for (i, p) in pred.iter_mut().enumerate() {
                *p += model.learning_rate * tree.predict(x.row(i));
            }
            let cur = loss(&pred);
            assert!(
                cur <= prev * (1.0 + 1e-12) + 1e-12,
                "problem {problem}: stage loss rose {prev} -> {cur}"
            );
            prev = cur;
        }
    }

    // memorization: distinct rows, unbounded depth, lr 1 reproduce dyadic
    // targets exactly
    let n = 32;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
    let y: Vec<f64> = (0..n)
        .map(|_| rng.random_range(0..4000) as f64 / 8.0)
        .collect();
    let cfg = GbdtConfig {
        n_trees: 1,
        max_depth: None,
        learning_rate: 1.0,
        min_leaf: 1,
    };
    let x = FeatureMatrix::new(vec!["f0".into()], rows).unwrap();
    let model = gbdt_fit(&x, &y, &cfg).unwrap();
    assert_eq!(gbdt_predict(&model, &x).unwrap(), y);

    // the 1-feature linear problem reaches MSE < 1% of var(y)
    let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64]).collect();
    let y: Vec<f64> = (0..50).map(|i| i as f64).collect();
    let x = FeatureMatrix::new(vec!["f0".into()], rows).unwrap();
    let cfg = GbdtConfig {
        n_trees: 500,
        max_depth: Some(3),
        learning_rate: 0.1,
        min_leaf: 2,
    };
    let model = gbdt_fit(&x, &y, &cfg).unwrap();
    let pred = gbdt_predict(&model, &x).unwrap();
    let mse: f64 = pred.iter().zip(&y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / 50.0;
    let mean = y.iter().sum::<f64>() / 50.0;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 50.0;
    assert!(mse < 0.01 * var, "mse {mse}, var {var}");

    // identical fits are bit-identical
    let a = gbdt_fit(&x, &y, &cfg).unwrap();
    let b = gbdt_fit(&x, &y, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("[PASS] criterion 7: GBDT loss monotone, memorization exact, linear convergence, determinism ({elapsed:?})");
}

#[test]
fn c08_metrics_fixtures_and_pca() {
    // hand-bucketed fixture: 2/3 accuracy
    let y_true = [100.0, 400.0, 600.0];
    let y_pred = [250.0, 500.0, 700.0];
    let report = evaluate(&y_pred, &y_true, &SurvivalBuckets::default()).unwrap();
    assert_eq!(report.accuracy, 2.0 / 3.0);

    // spearman extremes are exact
    let up = [1.0, 2.0, 3.0, 4.0];
    let down = [9.0, 7.0, 5.0, 3.0];
    assert_eq!(spearman(&up, &up), 1.0);
    assert_eq!(spearman(&up, &down), -1.0);

    // PCA first component of a diagonal cloud
    let mut rows = Vec::new();
    for i in 0..60 {
        let t = (i as f64 - 29.5) / 15.0;
        let noise = 0.01 * ((i % 5) as f64 - 2.0) / 2.0;
        rows.push(vec![t + noise, t - noise]);
    }
    let m = FeatureMatrix::new(vec!["x".into(), "y".into()], rows).unwrap();
    let model = pca_fit(&m, 1).unwrap();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    assert!((model.components[0][0] - inv_sqrt2).abs() < 1e-2);
    assert!((model.components[0][1] - inv_sqrt2).abs() < 1e-2);
    println!("[PASS] criterion 8: evaluation fixtures exact, PCA component within 1e-2");
}

#[test]
fn c09_nifti_roundtrip_all_datatypes() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for datatype in [
        DataType::U8,
        DataType::I16,
        DataType::I32,
        DataType::F32,
        DataType::F64,
    ] {
        let data: Vec<f64> = (0..3 * 4 * 5)
            .map(|_| match datatype {
                DataType::U8 => rng.random_range(0..=255u32) as f64,
                DataType::I16 => rng.random_range(-32768..=32767i32) as f64,
                DataType::I32 => rng.random_range(-1_000_000..=1_000_000i32) as f64,
                DataType::F32 => (rng.random::<f32>() * 100.0) as f64,
                DataType::F64 => rng.random::<f64>() * 1e6 - 5e5,
            })
            .collect();
        let grid = VolumeGrid::new(
            (3, 4, 5),
            (0.5, 1.0, 2.5),
            ValueKind::Intensity,
            data,
        )
        .unwrap();
        for gz in [false, true] {
            let path = dir.path().join(format!(
                "vol_{}{}.nii{}",
                datatype.code(),
                if gz { "_gz" } else { "" },
                if gz { ".gz" } else { "" }
            ));
            write_nifti_as(&grid, &path, datatype).unwrap();
            let (back, meta) = read_nifti(&path).unwrap();
            assert_eq!(meta.datatype, datatype);
            assert_eq!(back.dims(), grid.dims());
            assert_eq!(back.spacing(), grid.spacing());
            assert_eq!(back.data(), grid.data(), "{datatype:?} gz={gz}");
        }
    }
    println!("[PASS] criterion 9: NIfTI round-trip bit-exact for all 5 datatypes, plain and gzip");
}

#[test]
fn c10_end_to_end_smoke_via_binary() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let data = common::write_synth_dataset(dir.path(), 10, common::FULL_DIMS, 11);
    let out_dir = dir.path().join("out");
    let bin = env!("CARGO_BIN_EXE_survoxel");
    let run = |args: &[&str]| {
        let output = std::process::Command::new(bin)
            .args(args)
            .output()
            .expect("binary runs");
        assert!(
            output.status.success(),
            "{args:?} failed:\n{}\n{}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        String::from_utf8_lossy(&output.stdout).to_string()
    };

    run(&[
        "features",
        "--seg-dir",
        data.seg_dir.to_str().unwrap(),
        "--t1ce-dir",
        data.t1ce_dir.to_str().unwrap(),
        "--atlas",
        data.atlas.to_str().unwrap(),
        "--metadata",
        data.metadata.to_str().unwrap(),
        "--feature-sets",
        "b,c",
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--workers",
        "4",
    ]);
    let features_csv = out_dir.join("features.csv");
    let header = std::fs::read_to_string(&features_csv)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .split(',')
        .count();
    assert_eq!(header, 1 + 36 + 12400);

    // memorization configuration: exact training fit
    run(&[
        "train",
        "--features",
        features_csv.to_str().unwrap(),
        "--metadata",
        data.metadata.to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--n-trees",
        "1",
        "--max-depth",
        "0",
        "--learning-rate",
        "1.0",
        "--min-leaf",
        "1",
    ]);
    run(&[
        "predict",
        "--model",
        out_dir.join("model.json").to_str().unwrap(),
        "--features",
        features_csv.to_str().unwrap(),
        "--out",
        out_dir.join("predictions.csv").to_str().unwrap(),
    ]);
    let stdout = run(&[
        "evaluate",
        "--predictions",
        out_dir.join("predictions.csv").to_str().unwrap(),
        "--truth",
        data.metadata.to_str().unwrap(),
        "--out",
        out_dir.join("metrics.csv").to_str().unwrap(),
    ]);
    assert!(stdout.contains("Accuracy,MSE,medianSE,stdSE,SpearmanR"));
    let metrics = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let row = metrics.lines().nth(1).unwrap();
    let accuracy: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert_eq!(accuracy, 1.0, "memorization accuracy from {row}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!("[PASS] criterion 10: features -> train -> predict -> evaluate, accuracy 1.0 ({elapsed:?})");
}

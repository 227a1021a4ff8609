//! Command-line orchestration for the whole pipeline.
//!
//! Subcommands: `features`, `train`, `predict`, `evaluate`, `segmetrics`,
//! `gradcheck`. Exit codes: 0 success, 1 validation or tolerance failure,
//! 2 partial data failure (some subjects failed or were skipped).

mod config;
mod dataset;
mod features;
mod gradcheck_cmd;
mod model_cmds;
mod segmetrics_cmd;

pub use config::{ConfigOverrides, FeatureSet, PipelineConfig, WORKERS_ENV};
pub use dataset::{
    find_subject_file, read_feature_csv, read_metadata, read_survival_csv, subject_stem,
    write_feature_csv,
};
pub use segmetrics_cmd::SEG_CSV_HEADER;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::survreg::SurvivalBuckets;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Parser)]
#[command(
    name = "survoxel",
    version,
    about = "Tumor segmentation metrics and overall-survival prediction from label-map volumes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonConfigArgs {
    /// TOML configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory with per-subject segmentation volumes (<id>.nii[.gz] or <id>_seg.nii[.gz])
    #[arg(long)]
    seg_dir: Option<PathBuf>,
    /// Directory with T1ce volumes; their nonzero voxels become the brain mask
    #[arg(long)]
    t1ce_dir: Option<PathBuf>,
    /// Directory with explicit brain masks (overrides --t1ce-dir)
    #[arg(long)]
    brain_mask_dir: Option<PathBuf>,
    /// Atlas parcellation volume (integer labels 0..=56)
    #[arg(long)]
    atlas: Option<PathBuf>,
    /// Survival metadata CSV: BraTS19ID,Age,Survival_days,ResectionStatus
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// Feature sets to extract/use: a (deep CSV), b (handcrafted), c (position encoding)
    #[arg(long, value_delimiter = ',')]
    feature_sets: Option<Vec<String>>,
    /// Output directory
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads for per-subject work (env SURVOXEL_WORKERS wins)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Default)]
struct GbdtArgs {
    /// Boosting stages
    #[arg(long)]
    n_trees: Option<usize>,
    /// Tree depth limit; 0 means unbounded
    #[arg(long)]
    max_depth: Option<usize>,
    /// Shrinkage per stage
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Minimum rows per leaf
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Refit on the k most important features after a first fit
    #[arg(long)]
    select_top: Option<usize>,
    /// Dimensions kept when PCA-reducing deep features
    #[arg(long)]
    pca_deep_dims: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract per-subject feature rows into a CSV
    Features {
        #[command(flatten)]
        common: CommonConfigArgs,
        /// Output CSV path (default <output_dir>/features.csv)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the survival regression model and save it as JSON
    Train {
        #[command(flatten)]
        common: CommonConfigArgs,
        #[command(flatten)]
        gbdt: GbdtArgs,
        /// Features CSV produced by the features command
        #[arg(long)]
        features: PathBuf,
        /// Deep-feature CSV (feature set a), id column plus numeric columns
        #[arg(long)]
        deep: Option<PathBuf>,
        /// Output model path (default <output_dir>/model.json)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Survival bucket boundary: short < this
        #[arg(long)]
        short_max: Option<f64>,
        /// Survival bucket boundary: long > this
        #[arg(long)]
        long_min: Option<f64>,
    },
    /// Predict survival days for a features CSV with a saved model
    Predict {
        /// Saved model JSON
        #[arg(long)]
        model: PathBuf,
        /// Features CSV covering the model manifest
        #[arg(long)]
        features: PathBuf,
        /// Deep-feature CSV, required when the model was trained with one
        #[arg(long)]
        deep: Option<PathBuf>,
        /// Output predictions CSV (id,Survival_days)
        #[arg(long, default_value = "predictions.csv")]
        out: PathBuf,
    },
    /// Score predictions against ground-truth survival days
    Evaluate {
        /// Predictions CSV (id,Survival_days)
        #[arg(long)]
        predictions: PathBuf,
        /// Truth: metadata CSV or another id,Survival_days CSV
        #[arg(long)]
        truth: PathBuf,
        /// Metrics CSV output (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Survival bucket boundary: short < this
        #[arg(long, default_value_t = 300.0)]
        short_max: f64,
        /// Survival bucket boundary: long > this
        #[arg(long, default_value_t = 450.0)]
        long_min: f64,
    },
    /// Dice and Hausdorff per subject for paired label-map directories
    Segmetrics {
        /// Directory of predicted label maps
        #[arg(long)]
        pred_dir: PathBuf,
        /// Directory of ground-truth label maps
        #[arg(long)]
        gt_dir: PathBuf,
        /// Metrics CSV output (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Hausdorff percentile (100 = classic, 95 = HD95)
        #[arg(long, default_value_t = 100.0)]
        percentile: f64,
        /// Worker threads (env SURVOXEL_WORKERS wins)
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Finite-difference check of the semi-supervised loss gradient
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = gradcheck_cmd::DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Number of random evaluation points
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
}

impl CommonConfigArgs {
    fn overrides(
        self,
        gbdt: GbdtArgs,
        short_max: Option<f64>,
        long_min: Option<f64>,
    ) -> (Option<PathBuf>, ConfigOverrides) {
        (
            self.config,
            ConfigOverrides {
                seg_dir: self.seg_dir,
                t1ce_dir: self.t1ce_dir,
                brain_mask_dir: self.brain_mask_dir,
                atlas: self.atlas,
                metadata: self.metadata,
                deep_features: None,
                output_dir: self.output_dir,
                feature_sets: self.feature_sets,
                workers: self.workers,
                pca_deep_dims: gbdt.pca_deep_dims,
                select_top: gbdt.select_top,
                n_trees: gbdt.n_trees,
                max_depth: gbdt.max_depth,
                learning_rate: gbdt.learning_rate,
                min_leaf: gbdt.min_leaf,
                short_max,
                long_min,
            },
        )
    }
}

/// Parses `std::env::args`, runs the chosen command and returns the process
/// exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Features { common, out } => {
            let (config_path, ov) = common.overrides(GbdtArgs::default(), None, None);
            PipelineConfig::resolve(config_path.as_deref(), &ov)
                .and_then(|cfg| features::run(&cfg, out.as_deref()))
        }
        Command::Train {
            common,
            gbdt,
            features,
            deep,
            out,
            short_max,
            long_min,
        } => {
            let (config_path, ov) = common.overrides(gbdt, short_max, long_min);
            PipelineConfig::resolve(config_path.as_deref(), &ov).and_then(|cfg| {
                let deep = deep.or_else(|| cfg.deep_features.clone());
                model_cmds::train(&cfg, &features, deep.as_deref(), out.as_deref())
            })
        }
        Command::Predict {
            model,
            features,
            deep,
            out,
        } => model_cmds::predict(&model, &features, deep.as_deref(), &out),
        Command::Evaluate {
            predictions,
            truth,
            out,
            short_max,
            long_min,
        } => SurvivalBuckets::new(short_max, long_min)
            .map_err(Into::into)
            .and_then(|buckets| {
                model_cmds::evaluate_cmd(&predictions, &truth, out.as_deref(), &buckets)
            }),
        Command::Segmetrics {
            pred_dir,
            gt_dir,
            out,
            percentile,
            workers,
        } => {
            let workers = std::env::var(WORKERS_ENV)
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(workers);
            segmetrics_cmd::run(&pred_dir, &gt_dir, out.as_deref(), percentile, workers)
        }
        Command::Gradcheck {
            seed,
            tolerance,
            points,
        } => gradcheck_cmd::run(seed, tolerance, points),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_FAILURE
        }
    }
}

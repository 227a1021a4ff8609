//! Pipeline configuration: a TOML document plus command-line overrides,
//! where flags always win.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::survreg::{GbdtConfig, SurvivalBuckets};

/// Which of the three feature groups participate:
/// `a` external deep features, `b` handcrafted, `c` position-encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeatureSet {
    A,
    B,
    C,
}

impl FeatureSet {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "a" | "A" => Ok(Self::A),
            "b" | "B" => Ok(Self::B),
            "c" | "C" => Ok(Self::C),
            other => bail!("unknown feature set {other:?} (expected a, b or c)"),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seg_dir: Option<PathBuf>,
    t1ce_dir: Option<PathBuf>,
    brain_mask_dir: Option<PathBuf>,
    atlas: Option<PathBuf>,
    metadata: Option<PathBuf>,
    deep_features: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    feature_sets: Option<Vec<String>>,
    workers: Option<usize>,
    pca_deep_dims: Option<usize>,
    select_top: Option<usize>,
    #[serde(default)]
    gbdt: RawGbdt,
    #[serde(default)]
    buckets: RawBuckets,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGbdt {
    n_trees: Option<usize>,
    /// 0 means unbounded depth.
    max_depth: Option<usize>,
    learning_rate: Option<f64>,
    min_leaf: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawBuckets {
    short_max: Option<f64>,
    long_min: Option<f64>,
}

/// Fully resolved configuration after merging the TOML document and flags.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub seg_dir: Option<PathBuf>,
    pub t1ce_dir: Option<PathBuf>,
    pub brain_mask_dir: Option<PathBuf>,
    pub atlas: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub deep_features: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub feature_sets: BTreeSet<FeatureSet>,
    pub workers: usize,
    pub pca_deep_dims: usize,
    pub select_top: Option<usize>,
    pub gbdt: GbdtConfig,
    pub buckets: SurvivalBuckets,
}

/// Unresolved flag-level overrides (everything optional).
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub seg_dir: Option<PathBuf>,
    pub t1ce_dir: Option<PathBuf>,
    pub brain_mask_dir: Option<PathBuf>,
    pub atlas: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub deep_features: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub feature_sets: Option<Vec<String>>,
    pub workers: Option<usize>,
    pub pca_deep_dims: Option<usize>,
    pub select_top: Option<usize>,
    pub n_trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub learning_rate: Option<f64>,
    pub min_leaf: Option<usize>,
    pub short_max: Option<f64>,
    pub long_min: Option<f64>,
}

pub const WORKERS_ENV: &str = "SURVOXEL_WORKERS";
const DEFAULT_WORKERS: usize = 4;

impl PipelineConfig {
    /// Loads the TOML document (if given) and applies overrides on top.
    /// Worker count resolution: `SURVOXEL_WORKERS` env var, then the flag,
    /// then the config file, then the default of 4.
    pub fn resolve(config_path: Option<&Path>, ov: &ConfigOverrides) -> Result<Self> {
        let raw: RawConfig = match config_path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => RawConfig::default(),
        };

        let feature_sets_raw = ov
            .feature_sets
            .clone()
            .or(raw.feature_sets)
            .unwrap_or_else(|| vec!["b".into(), "c".into()]);
        let mut feature_sets = BTreeSet::new();
        for s in &feature_sets_raw {
            feature_sets.insert(FeatureSet::parse(s)?);
        }

        let env_workers = std::env::var(WORKERS_ENV)
            .ok()
            .map(|v| {
                v.parse::<usize>()
                    .with_context(|| format!("{WORKERS_ENV}={v} is not a worker count"))
            })
            .transpose()?;
        let workers = env_workers
            .or(ov.workers)
            .or(raw.workers)
            .unwrap_or(DEFAULT_WORKERS)
            .max(1);

        let defaults = GbdtConfig::default();
        let max_depth = match ov.max_depth.or(raw.gbdt.max_depth) {
            Some(0) => None,
            Some(d) => Some(d),
            None => defaults.max_depth,
        };
        let gbdt = GbdtConfig {
            n_trees: ov.n_trees.or(raw.gbdt.n_trees).unwrap_or(defaults.n_trees),
            max_depth,
            learning_rate: ov
                .learning_rate
                .or(raw.gbdt.learning_rate)
                .unwrap_or(defaults.learning_rate),
            min_leaf: ov.min_leaf.or(raw.gbdt.min_leaf).unwrap_or(defaults.min_leaf),
        };
        let bucket_defaults = SurvivalBuckets::default();
        let buckets = SurvivalBuckets::new(
            ov.short_max
                .or(raw.buckets.short_max)
                .unwrap_or(bucket_defaults.short_max),
            ov.long_min
                .or(raw.buckets.long_min)
                .unwrap_or(bucket_defaults.long_min),
        )?;

        Ok(Self {
            seg_dir: ov.seg_dir.clone().or(raw.seg_dir),
            t1ce_dir: ov.t1ce_dir.clone().or(raw.t1ce_dir),
            brain_mask_dir: ov.brain_mask_dir.clone().or(raw.brain_mask_dir),
            atlas: ov.atlas.clone().or(raw.atlas),
            metadata: ov.metadata.clone().or(raw.metadata),
            deep_features: ov.deep_features.clone().or(raw.deep_features),
            output_dir: ov
                .output_dir
                .clone()
                .or(raw.output_dir)
                .unwrap_or_else(|| PathBuf::from("out")),
            feature_sets,
            workers,
            pca_deep_dims: ov.pca_deep_dims.or(raw.pca_deep_dims).unwrap_or(50),
            select_top: ov.select_top.or(raw.select_top),
            gbdt,
            buckets,
        })
    }

    pub fn wants(&self, set: FeatureSet) -> bool {
        self.feature_sets.contains(&set)
    }

    /// Validates everything the `features` command needs, before any work.
    pub fn validate_for_features(&self) -> Result<()> {
        if !self.wants(FeatureSet::B) && !self.wants(FeatureSet::C) {
            bail!("features needs at least one of the feature sets b or c");
        }
        let seg = self
            .seg_dir
            .as_ref()
            .context("seg_dir is required (config key seg_dir or --seg-dir)")?;
        require_dir(seg, "seg_dir")?;
        let meta = self
            .metadata
            .as_ref()
            .context("metadata CSV is required (config key metadata or --metadata)")?;
        require_file(meta, "metadata")?;
        if self.wants(FeatureSet::B) {
            let atlas = self
                .atlas
                .as_ref()
                .context("atlas volume is required for handcrafted features (set b)")?;
            require_file(atlas, "atlas")?;
            match (&self.brain_mask_dir, &self.t1ce_dir) {
                (Some(d), _) => require_dir(d, "brain_mask_dir")?,
                (None, Some(d)) => require_dir(d, "t1ce_dir")?,
                (None, None) => bail!(
                    "handcrafted features (set b) need a brain source: \
                     t1ce_dir or brain_mask_dir"
                ),
            }
        }
        Ok(())
    }
}

fn require_dir(p: &Path, what: &str) -> Result<()> {
    if !p.is_dir() {
        bail!("{what} {} is not a directory", p.display());
    }
    Ok(())
}

fn require_file(p: &Path, what: &str) -> Result<()> {
    if !p.is_file() {
        bail!("{what} {} does not exist", p.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(
            &cfg,
            r#"
seg_dir = "/from/config"
feature_sets = ["b"]
workers = 2

[gbdt]
n_trees = 10
max_depth = 0

[buckets]
short_max = 200.0
"#,
        )
        .unwrap();
        let ov = ConfigOverrides {
            seg_dir: Some(PathBuf::from("/from/flag")),
            n_trees: Some(99),
            ..Default::default()
        };
        let c = PipelineConfig::resolve(Some(&cfg), &ov).unwrap();
        assert_eq!(c.seg_dir.as_deref(), Some(Path::new("/from/flag")));
        assert_eq!(c.gbdt.n_trees, 99);
        assert_eq!(c.gbdt.max_depth, None); // 0 means unbounded
        assert_eq!(c.buckets.short_max, 200.0);
        assert_eq!(c.buckets.long_min, 450.0);
        assert!(c.wants(FeatureSet::B) && !c.wants(FeatureSet::C));
    }

    #[test]
    fn defaults_without_config() {
        let c = PipelineConfig::resolve(None, &ConfigOverrides::default()).unwrap();
        assert_eq!(c.gbdt.n_trees, 200);
        assert_eq!(c.gbdt.max_depth, Some(3));
        assert_eq!(c.pca_deep_dims, 50);
        assert!(c.wants(FeatureSet::B) && c.wants(FeatureSet::C));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "not_a_key = 1\n").unwrap();
        assert!(PipelineConfig::resolve(Some(&cfg), &ConfigOverrides::default()).is_err());
    }

    #[test]
    fn bad_feature_set_is_rejected() {
        let ov = ConfigOverrides {
            feature_sets: Some(vec!["z".into()]),
            ..Default::default()
        };
        assert!(PipelineConfig::resolve(None, &ov).is_err());
    }
}

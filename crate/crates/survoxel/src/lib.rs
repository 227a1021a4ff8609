//! Volumetric analysis of brain-tumor segmentations and overall-survival
//! regression.
//!
//! The crate turns tumor label maps (BraTS-style NIfTI volumes over the
//! label alphabet {0, 1, 2, 4}) plus clinical metadata into survival
//! predictions, and scores segmentations against references:
//!
//! - [`volio`] — NIfTI-1 volume I/O, zero padding and the shared grid types
//! - [`segmetrics`] — region composition, Dice, weighted dice loss, Hausdorff
//! - [`radiomics`] — the 36 handcrafted geometry/location/clinical features
//! - [`posenc`] — fixed-kernel pooling of a label map into a 12400-dim vector
//! - [`neural`] — position-encoding convolution, semi-supervised loss,
//!   class centroids, and a finite-difference gradient checker
//! - [`survreg`] — normalization, PCA, gradient-boosted regression trees,
//!   and the survival evaluation metrics
//! - [`cli`] — the `survoxel` command-line pipeline built on all of the above
//!
//! Every runnable capability has a worked example under `examples/`; start
//! with `end_to_end.rs` for the whole pipeline on synthetic data.

pub mod cli;
pub mod neural;
pub mod posenc;
pub mod radiomics;
pub mod segmetrics;
pub mod survreg;
pub mod volio;

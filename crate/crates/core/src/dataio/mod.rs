//! Loading, summarising and generating labelled compositional datasets.
//!
//! A component counts as zero when its value in the source is exactly 0;
//! nothing is thresholded or imputed.

mod dataset;
pub mod summary;
pub mod synthetic;

pub use dataset::{
    load_dataset, parse_dataset_bytes, read_dataset, DatasetSchema, LabeledCompositionDataset,
    Provenance,
};
pub use summary::{group_summary, render_summary, zero_summary, GroupSummaryRow, ZeroSummary};
pub use synthetic::{generate_synthetic, Regime, SyntheticSpec};

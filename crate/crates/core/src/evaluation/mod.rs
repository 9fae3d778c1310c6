//! Repeated stratified hold-out evaluation and grid search.

mod cv;
mod grid;
pub mod seeds;
mod split;

pub use cv::{
    breakdown_by_group, breakdown_by_zero_count, correct_rate, cv_evaluate, cv_outcomes,
    make_splits, CvConfig, EvalReport, GroupAccuracy, Method, MethodFamily, Outcomes,
    ZeroBinAccuracy, ZeroBinning,
};
pub use grid::{
    grid_search, parse_int_range, parse_range, FamilyBest, FigureData, GridFailure, GridResult,
    GridSpec, Series,
};
pub use split::{allocate_test_counts, stratified_split, Split};

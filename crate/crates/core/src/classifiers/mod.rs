//! Classifiers for compositional data: RDA on alpha-transformed coordinates
//! (QDA and LDA are its corners) and k-NN under any [`MetricSpec`].
//!
//! [`MetricSpec`]: crate::metrics::MetricSpec

pub mod gaussian;
pub mod knn;
pub mod rda;

pub use gaussian::{
    fit_gaussian_groups, regularize_covariances, GaussianGroupModel, GroupEstimates,
};
pub use knn::{knn_predict, KnnFit};
pub use rda::{
    fit_rda, rda_predict, rda_scores, FactoredCovariance, PriorMode, RdaModel, RdaParams,
};

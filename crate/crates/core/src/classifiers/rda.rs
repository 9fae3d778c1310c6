//! Regularised discriminant analysis on alpha-transformed compositions.
//!
//! Each group gets the Gaussian discriminant score
//!
//! ```text
//! delta_i(z) = -1/2 log|2 pi S_i(lambda, gamma)| - 1/2 (z - mu_i)^T S_i(lambda, gamma)^-1 (z - mu_i) + log pi_i
//! ```
//!
//! and a point is assigned to the group with the largest score. `lambda = 1`
//! is QDA, `(lambda, gamma) = (0, 1)` is LDA.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::gaussian::{fit_gaussian_groups, regularize_covariances, GroupEstimates};
use crate::dataio::LabeledCompositionDataset;
use crate::error::{Error, Result};
use crate::simplex::{Alpha, Composition, ContrastMatrix};

/// Covariances with a condition estimate above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMode {
    /// `pi_i = n_i / n`.
    #[default]
    Proportional,
    /// `pi_i = 1 / g`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdaParams {
    pub alpha: Alpha,
    pub lambda: f64,
    pub gamma: f64,
    #[serde(default)]
    pub prior_mode: PriorMode,
}

impl RdaParams {
    pub fn new(alpha: Alpha, lambda: f64, gamma: f64) -> Self {
        RdaParams {
            alpha,
            lambda,
            gamma,
            prior_mode: PriorMode::Proportional,
        }
    }

    /// `RDA(alpha, 0, 1)`.
    pub fn lda(alpha: Alpha) -> Self {
        RdaParams::new(alpha, 0.0, 1.0)
    }

    /// `RDA(alpha, 1, 0)`.
    pub fn qda(alpha: Alpha) -> Self {
        RdaParams::new(alpha, 1.0, 0.0)
    }

    pub fn with_prior_mode(mut self, prior_mode: PriorMode) -> Self {
        self.prior_mode = prior_mode;
        self
    }
}

/// A regularised covariance with its lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct FactoredCovariance {
    pub matrix: DMatrix<f64>,
    lower: DMatrix<f64>,
    pub log_det: f64,
    pub condition: f64,
}

impl FactoredCovariance {
    fn new(group: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let eig = SymmetricEigen::new(matrix.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { group, condition });
        }
        let chol = matrix
            .clone()
            .cholesky()
            .ok_or(Error::IllConditioned { group, condition })?;
        let lower = chol.unpack();
        let log_det = 2.0 * lower.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(FactoredCovariance {
            matrix,
            lower,
            log_det,
            condition,
        })
    }

    /// `r^T S^-1 r` by forward substitution.
    fn mahalanobis(&self, r: &[f64]) -> f64 {
        let d = r.len();
        let mut y = vec![0.0; d];
        let mut total = 0.0;
        for i in 0..d {
            let mut s = r[i];
            for j in 0..i {
                s -= self.lower[(i, j)] * y[j];
            }
            y[i] = s / self.lower[(i, i)];
            total += y[i] * y[i];
        }
        total
    }
}

#[derive(Debug, Clone)]
pub struct RdaModel {
    params: RdaParams,
    basis: ContrastMatrix,
    estimates: GroupEstimates,
    regularized: Vec<FactoredCovariance>,
    priors: Vec<f64>,
}

impl RdaModel {
    /// Transforms `points` with the Helmert contrast matrix and fits.
    pub fn fit(
        points: &[Composition],
        labels: &[usize],
        n_groups: usize,
        params: RdaParams,
    ) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyInput)?.dim();
        Self::fit_with_basis(
            points,
            labels,
            n_groups,
            params,
            ContrastMatrix::helmert(dim)?,
        )
    }

    pub fn fit_with_basis(
        points: &[Composition],
        labels: &[usize],
        n_groups: usize,
        params: RdaParams,
        basis: ContrastMatrix,
    ) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: labels.len(),
            });
        }
        let z = transform_rows(points, params.alpha, &basis)?;
        let estimates = fit_gaussian_groups(&z, labels, n_groups)?;
        Self::from_estimates(&estimates, params, basis)
    }

    /// Regularises and factors pre-computed group estimates.
    pub fn from_estimates(
        estimates: &GroupEstimates,
        params: RdaParams,
        basis: ContrastMatrix,
    ) -> Result<Self> {
        if estimates.dim() + 1 != basis.source_dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.source_dim() - 1,
                found: estimates.dim(),
            });
        }
        let covs = regularize_covariances(
            &estimates.groups,
            &estimates.pooled,
            params.lambda,
            params.gamma,
        )?;
        let regularized = covs
            .into_iter()
            .enumerate()
            .map(|(g, m)| FactoredCovariance::new(g, m))
            .collect::<Result<Vec<_>>>()?;
        let g = estimates.groups.len();
        let n = estimates.total_count() as f64;
        let priors = match params.prior_mode {
            PriorMode::Proportional => estimates
                .groups
                .iter()
                .map(|grp| grp.count as f64 / n)
                .collect(),
            PriorMode::Uniform => vec![1.0 / g as f64; g],
        };
        Ok(RdaModel {
            params,
            basis,
            estimates: estimates.clone(),
            regularized,
            priors,
        })
    }

    /// Replaces the prior probabilities; they must be positive and sum to 1.
    pub fn with_priors(mut self, priors: Vec<f64>) -> Result<Self> {
        if priors.len() != self.priors.len() {
            return Err(Error::InvalidPriors(format!(
                "expected {} priors, got {}",
                self.priors.len(),
                priors.len()
            )));
        }
        if priors.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidPriors("priors must be positive".into()));
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPriors(format!("priors sum to {sum}")));
        }
        self.priors = priors;
        Ok(self)
    }

    pub fn params(&self) -> RdaParams {
        self.params
    }

    pub fn estimates(&self) -> &GroupEstimates {
        &self.estimates
    }

    pub fn regularized(&self) -> &[FactoredCovariance] {
        &self.regularized
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn n_groups(&self) -> usize {
        self.priors.len()
    }

    pub fn basis(&self) -> &ContrastMatrix {
        &self.basis
    }

    /// Scores for an already transformed point.
    pub fn scores_transformed(&self, z: &[f64]) -> Result<Vec<f64>> {
        let d = self.estimates.dim();
        if z.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: z.len(),
            });
        }
        let mut r = vec![0.0; d];
        Ok(self
            .estimates
            .groups
            .iter()
            .zip(&self.regularized)
            .zip(&self.priors)
            .map(|((grp, cov), prior)| {
                for (k, rk) in r.iter_mut().enumerate() {
                    *rk = z[k] - grp.mean[k];
                }
                -0.5 * (d as f64 * LN_2PI + cov.log_det) - 0.5 * cov.mahalanobis(&r) + prior.ln()
            })
            .collect())
    }

    pub fn scores(&self, x: &Composition) -> Result<Vec<f64>> {
        let z = self.basis.transform(x, self.params.alpha)?;
        self.scores_transformed(&z.coords)
    }

    pub fn predict_transformed(&self, z: &[f64]) -> Result<usize> {
        Ok(argmax(&self.scores_transformed(z)?))
    }

    pub fn predict(&self, x: &Composition) -> Result<usize> {
        Ok(argmax(&self.scores(x)?))
    }
}

/// First index of the maximum.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Stacks the transformed compositions as rows of an `n x d` matrix.
pub fn transform_rows(
    points: &[Composition],
    alpha: Alpha,
    basis: &ContrastMatrix,
) -> Result<DMatrix<f64>> {
    let d = basis.source_dim() - 1;
    let mut z = DMatrix::zeros(points.len(), d);
    for (i, p) in points.iter().enumerate() {
        let t = basis.transform(p, alpha)?;
        z.set_row(i, &DVector::from_vec(t.coords).transpose());
    }
    Ok(z)
}

pub fn fit_rda(dataset: &LabeledCompositionDataset, params: RdaParams) -> Result<RdaModel> {
    RdaModel::fit(dataset.rows(), dataset.labels(), dataset.n_groups(), params)
}

pub fn rda_scores(model: &RdaModel, x: &Composition) -> Result<Vec<f64>> {
    model.scores(x)
}

pub fn rda_predict(model: &RdaModel, x: &Composition) -> Result<usize> {
    model.predict(x)
}

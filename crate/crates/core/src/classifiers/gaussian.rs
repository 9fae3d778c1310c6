use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Sample mean and covariance (divisor `n_i - 1`) of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianGroupModel {
    pub label: usize,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub count: usize,
}

/// Per-group estimates plus the pooled covariance
/// `sum_i (n_i - 1) S_i / (n - g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupEstimates {
    pub groups: Vec<GaussianGroupModel>,
    pub pooled: DMatrix<f64>,
}

impl GroupEstimates {
    pub fn dim(&self) -> usize {
        self.pooled.nrows()
    }

    pub fn total_count(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }
}

/// Fits one Gaussian per group to the rows of `z` (`n x d`).
pub fn fit_gaussian_groups(
    z: &DMatrix<f64>,
    labels: &[usize],
    n_groups: usize,
) -> Result<GroupEstimates> {
    if z.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: z.nrows(),
            right: labels.len(),
        });
    }
    let d = z.ncols();
    let mut counts = vec![0usize; n_groups];
    let mut sums = vec![DVector::<f64>::zeros(d); n_groups];
    for (row, &label) in labels.iter().enumerate() {
        if label >= n_groups {
            return Err(Error::LabelOutOfRange {
                label,
                groups: n_groups,
            });
        }
        counts[label] += 1;
        sums[label] += z.row(row).transpose();
    }
    if let Some((group, &size)) = counts.iter().enumerate().find(|(_, &c)| c < 2) {
        return Err(Error::GroupTooSmall { group, size });
    }

    let means: Vec<DVector<f64>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let mut scatter = vec![DMatrix::<f64>::zeros(d, d); n_groups];
    for (row, &label) in labels.iter().enumerate() {
        let diff = z.row(row).transpose() - &means[label];
        scatter[label].syger(1.0, &diff, &diff, 1.0);
    }

    let n: usize = counts.iter().sum();
    let mut pooled = DMatrix::<f64>::zeros(d, d);
    let mut groups = Vec::with_capacity(n_groups);
    for (label, ((mean, s), &count)) in means.into_iter().zip(scatter).zip(&counts).enumerate() {
        pooled += &s;
        let covariance = symmetrised(s / (count - 1) as f64);
        groups.push(GaussianGroupModel {
            label,
            mean,
            covariance,
            count,
        });
    }
    if n > n_groups {
        pooled /= (n - n_groups) as f64;
    }
    Ok(GroupEstimates {
        groups,
        pooled: symmetrised(pooled),
    })
}

fn symmetrised(mut m: DMatrix<f64>) -> DMatrix<f64> {
    // syger fills the lower triangle only
    for i in 0..m.nrows() {
        for j in 0..i {
            m[(j, i)] = m[(i, j)];
        }
    }
    m
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ParameterOutOfRange { name, value });
    }
    Ok(())
}

/// `S_p(gamma) = gamma S_p + (1 - gamma) tr(S_p) I / d` and
/// `S_i(lambda, gamma) = lambda S_i + (1 - lambda) S_p(gamma)`.
pub fn regularize_covariances(
    groups: &[GaussianGroupModel],
    pooled: &DMatrix<f64>,
    lambda: f64,
    gamma: f64,
) -> Result<Vec<DMatrix<f64>>> {
    check_unit("lambda", lambda)?;
    check_unit("gamma", gamma)?;
    let d = pooled.nrows();
    let shrunk_pooled = if gamma == 1.0 {
        pooled.clone()
    } else {
        let spherical = pooled.trace() / d as f64;
        let mut m = pooled * gamma;
        for i in 0..d {
            m[(i, i)] += (1.0 - gamma) * spherical;
        }
        m
    };
    Ok(groups
        .iter()
        .map(|g| {
            if lambda == 1.0 {
                g.covariance.clone()
            } else if lambda == 0.0 {
                shrunk_pooled.clone()
            } else {
                &g.covariance * lambda + &shrunk_pooled * (1.0 - lambda)
            }
        })
        .collect())
}

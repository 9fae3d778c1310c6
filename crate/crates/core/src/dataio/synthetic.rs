//! Synthetic labelled compositions whose groups are Gaussian either in
//! log-ratio coordinates or in raw simplex coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::LabeledCompositionDataset;
use crate::error::{Error, Result};
use crate::simplex::{Alpha, ContrastMatrix};

/// Rejection sampling gives up after this many draws per requested point.
const MAX_DRAWS_PER_POINT: usize = 10_000;

/// Slab thickness for the raw-coordinate regime, as a fraction of the
/// simplex inradius.
const SLAB_SD: f64 = 0.01;

/// Spread along the slab, as a fraction of the simplex inradius.
const SLAB_SPREAD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Unit-covariance Gaussians in isometric log-ratio coordinates, mapped
    /// back with the inverse clr. Log-ratio methods are exact for these.
    LraFavored,
    /// Thin parallel Gaussian slabs in raw simplex coordinates, truncated to
    /// the interior. The groups are linearly separable in raw coordinates but
    /// the slabs span most of the simplex, so any power transform with
    /// alpha < 1 bends them.
    EdaFavored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub regime: Regime,
    /// Number of parts `D`.
    pub dim: usize,
    pub groups: usize,
    pub group_size: usize,
    /// Distance between consecutive group means, in within-group standard
    /// deviations.
    pub separation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let min_dim = match self.regime {
            Regime::LraFavored => 3,
            Regime::EdaFavored => 2,
        };
        if self.dim < min_dim {
            return Err(Error::InvalidSpec(format!(
                "D must be at least {min_dim} for {:?}",
                self.regime
            )));
        }
        if self.groups == 0 {
            return Err(Error::InvalidSpec("need at least one group".into()));
        }
        if self.group_size < 2 {
            return Err(Error::InvalidSpec("group size must be at least 2".into()));
        }
        if !(self.separation >= 0.0) || !self.separation.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "separation must be finite and non-negative, got {}",
                self.separation
            )));
        }
        Ok(())
    }

    /// Offset of group `j`'s mean along the separating direction.
    fn offset(&self, j: usize) -> f64 {
        (j as f64 - (self.groups as f64 - 1.0) / 2.0) * self.separation
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LabeledCompositionDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let basis = ContrastMatrix::helmert(spec.dim)?;
    let n = spec.groups * spec.group_size;
    let mut raw = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for j in 0..spec.groups {
        let rows = match spec.regime {
            Regime::LraFavored => lra_group(spec, j, &basis, &mut rng)?,
            Regime::EdaFavored => eda_group(spec, j, &basis, &mut rng)?,
        };
        raw.extend(rows);
        labels.extend(std::iter::repeat_n(format!("g{}", j + 1), spec.group_size));
    }
    let names = (1..=spec.dim).map(|i| format!("x{i}")).collect();
    let regime = match spec.regime {
        Regime::LraFavored => "lra_favored",
        Regime::EdaFavored => "eda_favored",
    };
    let source = format!(
        "synthetic {regime} D={} groups={} size={} separation={} seed={}",
        spec.dim, spec.groups, spec.group_size, spec.separation, spec.seed
    );
    LabeledCompositionDataset::from_raw(names, raw, labels, source)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn lra_group(
    spec: &SyntheticSpec,
    j: usize,
    basis: &ContrastMatrix,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let d = spec.dim - 1;
    let shift = spec.offset(j);
    (0..spec.group_size)
        .map(|_| {
            let mut z: Vec<f64> = (0..d).map(|_| normal(rng)).collect();
            z[0] += shift;
            Ok(basis.inverse(&z, Alpha::ZERO)?.into_parts())
        })
        .collect()
}

fn eda_group(
    spec: &SyntheticSpec,
    j: usize,
    basis: &ContrastMatrix,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let dim = spec.dim;
    let d = dim - 1;
    let inradius = 1.0 / ((dim * d) as f64).sqrt();
    let sd = SLAB_SD * inradius;
    let spread = SLAB_SPREAD * inradius;
    let directions = slab_directions(dim, basis);
    let centre = spec.offset(j);
    let mut rows = Vec::with_capacity(spec.group_size);
    let mut draws = 0usize;
    while rows.len() < spec.group_size {
        draws += 1;
        if draws > MAX_DRAWS_PER_POINT * spec.group_size {
            return Err(Error::InvalidSpec(format!(
                "group {} does not fit inside the simplex; reduce the separation",
                j + 1
            )));
        }
        let mut x = vec![1.0 / dim as f64; dim];
        for (k, dir) in directions.iter().enumerate() {
            let step = if k == 0 {
                sd * (centre + normal(rng))
            } else {
                spread * normal(rng)
            };
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi += step * di;
            }
        }
        if x.iter().all(|&v| v > 0.0) {
            rows.push(x);
        }
    }
    Ok(rows)
}

/// Orthonormal zero-sum directions; the first contrasts the first half of
/// the parts with the second half, the rest span its complement.
fn slab_directions(dim: usize, basis: &ContrastMatrix) -> Vec<Vec<f64>> {
    let half = dim.div_ceil(2);
    let mut first: Vec<f64> = (0..dim)
        .map(|i| {
            if i < half {
                1.0 / half as f64
            } else {
                -1.0 / (dim - half) as f64
            }
        })
        .collect();
    normalise(&mut first);
    let mut out = vec![first];
    let h = basis.matrix();
    for r in 0..h.nrows() {
        if out.len() == dim - 1 {
            break;
        }
        let mut v: Vec<f64> = h.row(r).iter().copied().collect();
        for u in &out {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= dot * ui;
            }
        }
        if normalise(&mut v) > 1e-8 {
            out.push(v);
        }
    }
    out
}

fn normalise(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

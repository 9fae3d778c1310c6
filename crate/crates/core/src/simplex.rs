//! Simplex geometry: closure, the compositional power transformation, the
//! Helmert contrast matrix and the alpha-transformation with its inverse.
//!
//! A composition with `D` parts is mapped to `d = D - 1` real coordinates by
//!
//! ```text
//! z_alpha(x) = H (D u_alpha(x) - 1_D) / alpha,     u_alpha(x)_i = x_i^alpha / sum_j x_j^alpha
//! ```
//!
//! and `alpha = 0` is the centred log-ratio (clr) followed by `H`. The zero
//! case is a separate branch, never approximated by a small alpha.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(parts) - 1` accepted by [`Composition::new`].
pub const CLOSURE_TOLERANCE: f64 = 1e-10;

/// Tolerance used when validating a user supplied contrast matrix.
const BASIS_TOLERANCE: f64 = 1e-10;

/// Slack on the inverse membership test: `alpha H^T v + 1` entries in
/// `(-IMAGE_SLACK, 0]` are rounding noise around a zero part.
const IMAGE_SLACK: f64 = 1e-12;

/// A point of the simplex: `D >= 2` non-negative parts summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Composition {
    parts: Vec<f64>,
}

impl Composition {
    /// Accepts an already closed vector. Use [`closure`] for raw data.
    pub fn new(parts: Vec<f64>) -> Result<Self> {
        validate_parts(&parts)?;
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > CLOSURE_TOLERANCE {
            return Err(Error::NotClosed { sum });
        }
        Ok(Composition { parts })
    }

    /// The uniform composition `(1/D, ..., 1/D)`.
    pub fn uniform(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::TooShort { len: dim });
        }
        Ok(Composition {
            parts: vec![1.0 / dim as f64; dim],
        })
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    /// Number of parts `D`.
    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn zero_count(&self) -> usize {
        self.parts.iter().filter(|&&p| p == 0.0).count()
    }

    pub fn has_zeros(&self) -> bool {
        self.parts.contains(&0.0)
    }

    /// Reorders the parts; `perm[i]` is the source index of output part `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: perm.len(),
            });
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::InvalidBasis(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        Ok(Composition {
            parts: perm.iter().map(|&p| self.parts[p]).collect(),
        })
    }

    pub fn into_parts(self) -> Vec<f64> {
        self.parts
    }
}

impl TryFrom<Vec<f64>> for Composition {
    type Error = Error;

    fn try_from(parts: Vec<f64>) -> Result<Self> {
        Composition::new(parts)
    }
}

impl From<Composition> for Vec<f64> {
    fn from(c: Composition) -> Self {
        c.parts
    }
}

fn validate_parts(parts: &[f64]) -> Result<()> {
    if parts.len() < 2 {
        return Err(Error::TooShort { len: parts.len() });
    }
    for (index, &p) in parts.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if p < 0.0 {
            return Err(Error::NegativeComponent { index });
        }
    }
    Ok(())
}

/// Divides a non-negative vector by its sum.
pub fn closure(raw: &[f64]) -> Result<Composition> {
    validate_parts(raw)?;
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(Error::AllZero);
    }
    if !sum.is_finite() {
        // finite parts whose sum overflows; closure ignores scale
        let max = raw.iter().cloned().fold(0.0, f64::max);
        let scaled: Vec<f64> = raw.iter().map(|&p| p / max).collect();
        return closure(&scaled);
    }
    // -0.0 is normalised to 0.0 so zero checks are sign-agnostic
    let parts = raw.iter().map(|&p| (p / sum) + 0.0).collect();
    Ok(Composition { parts })
}

/// The transformation parameter. Any finite real; non-positive values are
/// rejected at use sites when the data contain zeros.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub const ZERO: Alpha = Alpha(0.0);
    pub const ONE: Alpha = Alpha(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFiniteAlpha(value));
        }
        // collapse -0.0
        Ok(Alpha(value + 0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// Checks that this alpha may be applied to `x`.
    pub fn check(self, x: &Composition) -> Result<()> {
        if self.0 <= 0.0 && x.has_zeros() {
            return Err(Error::ZeroWithNonpositiveAlpha { alpha: self.0 });
        }
        Ok(())
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `x_i^alpha / sum_j x_j^alpha`.
pub fn power_transform(x: &Composition, alpha: Alpha) -> Result<Composition> {
    alpha.check(x)?;
    let a = alpha.value();
    let powered: Vec<f64> = x.parts.iter().map(|&p| p.powf(a)).collect();
    let sum: f64 = powered.iter().sum();
    Ok(Composition {
        parts: powered.into_iter().map(|p| p / sum).collect(),
    })
}

/// Centred log-ratio: `log(x_i / g(x))` with `g` the geometric mean.
pub fn clr(x: &Composition) -> Result<Vec<f64>> {
    Alpha::ZERO.check(x)?;
    let logs: Vec<f64> = x.parts.iter().map(|p| p.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    Ok(logs.into_iter().map(|l| l - mean).collect())
}

/// The zero-sum vector `(D u_alpha(x) - 1_D) / alpha`, or `clr(x)` at alpha 0.
pub fn centred_power(x: &Composition, alpha: Alpha) -> Result<Vec<f64>> {
    if alpha.is_zero() {
        return clr(x);
    }
    let u = power_transform(x, alpha)?;
    let d = x.dim() as f64;
    let a = alpha.value();
    Ok(u.parts.iter().map(|&ui| (d * ui - 1.0) / a).collect())
}

/// A `(D-1) x D` matrix with orthonormal rows, each orthogonal to `1_D`.
///
/// [`ContrastMatrix::helmert`] is the default choice. Any other valid matrix
/// gives the same distances and the same Gaussian discriminant scores; the
/// general constructor exists so that invariance can be checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastMatrix {
    entries: DMatrix<f64>,
}

impl ContrastMatrix {
    /// Helmert matrix with the first row removed. Row `j` (1-based) holds
    /// `h_j` repeated `j` times, then `-j h_j`, then zeros, with
    /// `h_j = -1/sqrt(j (j + 1))`.
    pub fn helmert(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::TooShort { len: dim });
        }
        let d = dim - 1;
        let mut entries = DMatrix::zeros(d, dim);
        for j in 1..=d {
            let jf = j as f64;
            let h = -1.0 / (jf * (jf + 1.0)).sqrt();
            for c in 0..j {
                entries[(j - 1, c)] = h;
            }
            entries[(j - 1, j)] = -jf * h;
        }
        Ok(ContrastMatrix { entries })
    }

    /// Validates an arbitrary contrast matrix.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if cols < 2 || rows + 1 != cols {
            return Err(Error::InvalidBasis(format!(
                "expected a (D-1) x D matrix, got {rows} x {cols}"
            )));
        }
        let gram = &entries * entries.transpose();
        let off = (gram - DMatrix::<f64>::identity(rows, rows)).amax();
        if off > BASIS_TOLERANCE {
            return Err(Error::InvalidBasis(format!(
                "rows are not orthonormal (max deviation {off:e})"
            )));
        }
        let row_sums = entries.column_sum();
        if row_sums.amax() > BASIS_TOLERANCE {
            return Err(Error::InvalidBasis("rows are not orthogonal to 1".into()));
        }
        Ok(ContrastMatrix { entries })
    }

    /// `R H` for a `d x d` orthogonal `R`.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Self> {
        if rotation.ncols() != self.entries.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.entries.nrows(),
                found: rotation.ncols(),
            });
        }
        ContrastMatrix::from_matrix(rotation * &self.entries)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Number of composition parts `D`.
    pub fn source_dim(&self) -> usize {
        self.entries.ncols()
    }

    /// `H v` for a length-`D` vector.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.expect_dim(v.len())?;
        let out = &self.entries * DVector::from_column_slice(v);
        Ok(out.iter().copied().collect())
    }

    /// `H^T z` for a length-`d` vector.
    pub fn lift(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() + 1 != self.source_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim() - 1,
                found: z.len(),
            });
        }
        let out = self.entries.tr_mul(&DVector::from_column_slice(z));
        Ok(out.iter().copied().collect())
    }

    pub fn transform(&self, x: &Composition, alpha: Alpha) -> Result<TransformedVector> {
        self.expect_dim(x.dim())?;
        let centred = centred_power(x, alpha)?;
        Ok(TransformedVector {
            coords: self.project(&centred)?,
            alpha,
            source_dim: x.dim(),
        })
    }

    pub fn inverse(&self, coords: &[f64], alpha: Alpha) -> Result<Composition> {
        let lifted = self.lift(coords)?;
        if alpha.is_zero() {
            let max = lifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = lifted.iter().map(|l| (l - max).exp()).collect();
            return closure(&exps);
        }
        let a = alpha.value();
        let mut base = Vec::with_capacity(lifted.len());
        for (index, l) in lifted.iter().enumerate() {
            let value = a * l + 1.0;
            if value > 0.0 {
                base.push(value);
            } else if value > -IMAGE_SLACK && a > 0.0 {
                base.push(0.0);
            } else {
                return Err(Error::OutsideImage { index, value });
            }
        }
        let inv = 1.0 / a;
        let powered: Vec<f64> = base.iter().map(|b| b.powf(inv)).collect();
        if powered.iter().any(|p| !p.is_finite()) {
            return Err(Error::OutsideImage {
                index: 0,
                value: f64::INFINITY,
            });
        }
        closure(&powered)
    }

    fn expect_dim(&self, found: usize) -> Result<()> {
        if found != self.source_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim(),
                found,
            });
        }
        Ok(())
    }
}

pub fn helmert_submatrix(dim: usize) -> Result<ContrastMatrix> {
    ContrastMatrix::helmert(dim)
}

/// Image of a composition in `R^d`, tagged with the alpha that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedVector {
    pub coords: Vec<f64>,
    pub alpha: Alpha,
    pub source_dim: usize,
}

impl TransformedVector {
    pub fn invert(&self) -> Result<Composition> {
        inverse_alpha_transform(&self.coords, self.alpha)
    }
}

/// The alpha-transformation with the Helmert contrast matrix.
pub fn alpha_transform(x: &Composition, alpha: Alpha) -> Result<TransformedVector> {
    ContrastMatrix::helmert(x.dim())?.transform(x, alpha)
}

/// Inverse of [`alpha_transform`]. `D` is `coords.len() + 1`.
pub fn inverse_alpha_transform(coords: &[f64], alpha: Alpha) -> Result<Composition> {
    ContrastMatrix::helmert(coords.len() + 1)?.inverse(coords, alpha)
}

/// Box-Cox applied to every part: `(x_i^theta - 1) / theta`, `log x_i` at 0.
pub fn boxcox_componentwise(x: &Composition, theta: f64) -> Result<Vec<f64>> {
    if !theta.is_finite() {
        return Err(Error::NonFiniteAlpha(theta));
    }
    if theta <= 0.0 && x.has_zeros() {
        return Err(Error::ZeroWithNonpositiveTheta { theta });
    }
    if theta == 0.0 {
        return Ok(x.parts.iter().map(|p| p.ln()).collect());
    }
    Ok(x.parts
        .iter()
        .map(|p| (p.powf(theta) - 1.0) / theta)
        .collect())
}

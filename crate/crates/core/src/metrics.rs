//! Distances between compositions.
//!
//! The alpha-metric is evaluated through its closed form
//! `D/|alpha| * ||u_alpha(x) - u_alpha(y)||` (Aitchison distance at alpha 0),
//! which never materialises the contrast matrix. [`transform_distance`] is the
//! route through transformed coordinates and is kept for cross-checking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{clr, power_transform, Alpha, Composition, ContrastMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    /// The alpha-metric; alpha 0 is Aitchison's distance, alpha 1 is `D` times
    /// the Euclidean distance.
    Alpha { alpha: Alpha },
    /// Square root of the symmetrised Jensen-Shannon sum. Accepts zeros.
    Esov,
}

impl MetricSpec {
    pub fn alpha(alpha: Alpha) -> Self {
        MetricSpec::Alpha { alpha }
    }

    /// Coordinates in which the metric becomes a simple vector formula.
    pub(crate) fn embed(&self, x: &Composition) -> Result<Vec<f64>> {
        match *self {
            MetricSpec::Alpha { alpha } if alpha.is_zero() => clr(x),
            MetricSpec::Alpha { alpha } => Ok(power_transform(x, alpha)?.into_parts()),
            MetricSpec::Esov => Ok(x.parts().to_vec()),
        }
    }

    /// Distance between two embedded points of equal length.
    pub(crate) fn embedded_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            MetricSpec::Alpha { alpha } => {
                let ss: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                if alpha.is_zero() {
                    ss.sqrt()
                } else {
                    a.len() as f64 / alpha.value().abs() * ss.sqrt()
                }
            }
            MetricSpec::Esov => esov_sum(a, b).max(0.0).sqrt(),
        }
    }

    pub fn distance(&self, x: &Composition, y: &Composition) -> Result<f64> {
        check_dims(x, y)?;
        Ok(self.embedded_distance(&self.embed(x)?, &self.embed(y)?))
    }
}

impl std::fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricSpec::Alpha { alpha } => write!(f, "alpha({alpha})"),
            MetricSpec::Esov => write!(f, "esov"),
        }
    }
}

fn check_dims(x: &Composition, y: &Composition) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

fn esov_sum(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let m = xi + yi;
            // |t| keeps the term exactly symmetric in x and y
            let t = ((xi - yi) / m).abs();
            if xi > 0.0 && yi > 0.0 && t < 0.5 {
                // same value as below without cancelling O(t) terms
                return 0.5 * m * (2.0 * t * t.atanh() + (-t * t).ln_1p());
            }
            let mut s = 0.0;
            if xi > 0.0 {
                s += xi * (2.0 * xi / m).ln();
            }
            if yi > 0.0 {
                s += yi * (2.0 * yi / m).ln();
            }
            s
        })
        .sum()
}

pub fn alpha_distance(x: &Composition, y: &Composition, alpha: Alpha) -> Result<f64> {
    MetricSpec::alpha(alpha).distance(x, y)
}

pub fn esov_distance(x: &Composition, y: &Composition) -> Result<f64> {
    MetricSpec::Esov.distance(x, y)
}

/// `||z_alpha(x) - z_alpha(y)||` with an explicit contrast matrix.
pub fn transform_distance(
    x: &Composition,
    y: &Composition,
    alpha: Alpha,
    basis: &ContrastMatrix,
) -> Result<f64> {
    check_dims(x, y)?;
    let zx = basis.transform(x, alpha)?;
    let zy = basis.transform(y, alpha)?;
    Ok(zx
        .coords
        .iter()
        .zip(&zy.coords)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt())
}

/// Row-major `rows x cols` matrix of distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    metric: MetricSpec,
}

impl DistanceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn metric(&self) -> MetricSpec {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn embed_all(
    points: &[Composition],
    metric: &MetricSpec,
    dim: usize,
) -> std::result::Result<Vec<Vec<f64>>, (usize, Error)> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.dim() != dim {
                return Err((
                    i,
                    Error::DimensionMismatch {
                        expected: dim,
                        found: p.dim(),
                    },
                ));
            }
            metric.embed(p).map_err(|e| (i, e))
        })
        .collect()
}

/// Distances between every `a[i]` and `b[j]`. Rows are computed in parallel;
/// entries are identical to calling [`MetricSpec::distance`] pair by pair.
pub fn pairwise_distances(
    a: &[Composition],
    b: &[Composition],
    metric: MetricSpec,
) -> Result<DistanceMatrix> {
    let dim = match a.first().or(b.first()) {
        Some(p) => p.dim(),
        None => {
            return Ok(DistanceMatrix {
                rows: 0,
                cols: 0,
                values: Vec::new(),
                metric,
            })
        }
    };
    let ea = embed_all(a, &metric, dim).map_err(|(row, e)| Error::PairFailed {
        row,
        col: 0,
        source: Box::new(e),
    })?;
    let eb = embed_all(b, &metric, dim).map_err(|(col, e)| Error::PairFailed {
        row: 0,
        col,
        source: Box::new(e),
    })?;
    let cols = b.len();
    let mut values = vec![0.0; a.len() * cols];
    if cols > 0 {
        values
            .par_chunks_mut(cols)
            .zip(ea.par_iter())
            .for_each(|(out, x)| {
                for (o, y) in out.iter_mut().zip(&eb) {
                    *o = metric.embedded_distance(x, y);
                }
            });
    }
    Ok(DistanceMatrix {
        rows: a.len(),
        cols,
        values,
        metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::closure;

    fn comp(v: &[f64]) -> Composition {
        closure(v).unwrap()
    }

    #[test]
    fn zero_self_distance() {
        let x = comp(&[0.1, 0.0, 0.9]);
        assert_eq!(
            alpha_distance(&x, &x, Alpha::new(0.5).unwrap()).unwrap(),
            0.0
        );
        assert_eq!(esov_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn alpha_one_hand_value() {
        let d = alpha_distance(&comp(&[0.2, 0.8]), &comp(&[0.5, 0.5]), Alpha::ONE).unwrap();
        assert!((d - 2.0 * 0.18f64.sqrt()).abs() < 1e-12);
        assert!((d - 0.848528).abs() < 1e-6);
    }

    #[test]
    fn aitchison_hand_value() {
        let d = alpha_distance(&comp(&[0.2, 0.8]), &comp(&[0.5, 0.5]), Alpha::ZERO).unwrap();
        assert!((d - 0.25f64.ln().abs() / 2f64.sqrt()).abs() < 1e-12);
        assert!((d - 0.980258).abs() < 1e-6);
    }

    #[test]
    fn esov_disjoint_support() {
        let d = esov_distance(&comp(&[1.0, 0.0]), &comp(&[0.0, 1.0])).unwrap();
        assert!((d - (2.0 * 2f64.ln()).sqrt()).abs() < 1e-12);
        assert!((d - 1.177410).abs() < 1e-6);
    }

    #[test]
    fn esov_close_pair_keeps_precision() {
        // d^2 = e^2 / (1 - e^2) + O(e^4) for (1/2 + e, 1/2 - e) against (1/2, 1/2)
        let e = 1e-6;
        let d = esov_distance(&comp(&[0.5 + e, 0.5 - e]), &comp(&[0.5, 0.5])).unwrap();
        assert!((d - e).abs() / e < 1e-9, "{d:e}");
    }

    #[test]
    fn esov_scalar_oracle() {
        // written out term by term
        let x = [0.6f64, 0.4];
        let y = [0.4f64, 0.6];
        let mut s = 0.0f64;
        for i in 0..2 {
            let m = x[i] + y[i];
            s += x[i] * (2.0 * x[i] / m).ln() + y[i] * (2.0 * y[i] / m).ln();
        }
        let expected = s.sqrt();
        let got = esov_distance(&comp(&x), &comp(&y)).unwrap();
        assert!((got - expected).abs() < 1e-14);
        assert!(got > esov_distance(&comp(&[0.5, 0.5]), &comp(&[0.5, 0.5])).unwrap());
        assert!((expected - 0.200676).abs() < 1e-6, "{expected}");
    }

    #[test]
    fn errors() {
        let x = comp(&[0.5, 0.5]);
        let y = comp(&[0.2, 0.3, 0.5]);
        assert!(matches!(
            alpha_distance(&x, &y, Alpha::ONE),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            esov_distance(&x, &y),
            Err(Error::DimensionMismatch { .. })
        ));
        let z = comp(&[0.0, 1.0]);
        assert!(matches!(
            alpha_distance(&x, &z, Alpha::ZERO),
            Err(Error::ZeroWithNonpositiveAlpha { .. })
        ));
        assert!(alpha_distance(&x, &z, Alpha::new(0.1).unwrap()).is_ok());
    }

    #[test]
    fn pairwise_single_and_symmetric() {
        let x = comp(&[0.3, 0.7]);
        let m = pairwise_distances(&[x.clone()], &[x], MetricSpec::Esov).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert_eq!(m.get(0, 0), 0.0);

        let pts: Vec<_> = [[0.1, 0.2, 0.7], [0.3, 0.3, 0.4], [0.5, 0.4, 0.1]]
            .iter()
            .map(|p| comp(p))
            .collect();
        for metric in [MetricSpec::Esov, MetricSpec::alpha(Alpha::ZERO)] {
            let m = pairwise_distances(&pts, &pts, metric).unwrap();
            for i in 0..3 {
                assert_eq!(m.get(i, i), 0.0);
                for j in 0..3 {
                    assert!((m.get(i, j) - m.get(j, i)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn pairwise_reports_offending_index() {
        let a = vec![comp(&[0.5, 0.5]), comp(&[0.0, 1.0])];
        let err = pairwise_distances(&a, &a, MetricSpec::alpha(Alpha::ZERO)).unwrap_err();
        assert!(matches!(err, Error::PairFailed { row: 1, col: 0, .. }));
        let b = vec![comp(&[0.5, 0.5]), comp(&[0.2, 0.3, 0.5])];
        let err = pairwise_distances(&a[..1], &b, MetricSpec::Esov).unwrap_err();
        assert!(matches!(err, Error::PairFailed { row: 0, col: 1, .. }));
    }
}

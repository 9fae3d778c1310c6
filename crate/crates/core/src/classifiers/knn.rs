use std::cmp::Ordering;

use rand::Rng;

use crate::dataio::LabeledCompositionDataset;
use crate::error::{Error, Result};
use crate::metrics::MetricSpec;
use crate::simplex::Composition;

/// Training data for k-NN. Points are stored together with their metric
/// embedding so a query costs one embedding plus `n` vector distances.
#[derive(Debug, Clone)]
pub struct KnnFit {
    points: Vec<Composition>,
    embedded: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_groups: usize,
    k: usize,
    metric: MetricSpec,
}

impl KnnFit {
    pub fn new(
        points: Vec<Composition>,
        labels: Vec<usize>,
        n_groups: usize,
        k: usize,
        metric: MetricSpec,
    ) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: labels.len(),
            });
        }
        if k == 0 || k > points.len() {
            return Err(Error::InvalidK { k, n: points.len() });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= n_groups) {
            return Err(Error::LabelOutOfRange {
                label,
                groups: n_groups,
            });
        }
        let dim = points[0].dim();
        let embedded = points
            .iter()
            .map(|p| {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: p.dim(),
                    });
                }
                metric.embed(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KnnFit {
            points,
            embedded,
            labels,
            n_groups,
            k,
            metric,
        })
    }

    pub fn from_dataset(
        dataset: &LabeledCompositionDataset,
        k: usize,
        metric: MetricSpec,
    ) -> Result<Self> {
        Self::new(
            dataset.rows().to_vec(),
            dataset.labels().to_vec(),
            dataset.n_groups(),
            k,
            metric,
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> MetricSpec {
        self.metric
    }

    pub fn points(&self) -> &[Composition] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn distances(&self, x: &Composition) -> Result<Vec<f64>> {
        let dim = self.points[0].dim();
        if x.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.dim(),
            });
        }
        let q = self.metric.embed(x)?;
        Ok(self
            .embedded
            .iter()
            .map(|e| self.metric.embedded_distance(&q, e))
            .collect())
    }

    /// Indices of the `k` nearest training points, nearest first. Equal
    /// distances are ordered by training index.
    pub fn neighbours(&self, x: &Composition) -> Result<Vec<usize>> {
        let dist = self.distances(x)?;
        let mut idx: Vec<usize> = (0..dist.len()).collect();
        let by_distance = |a: &usize, b: &usize| compare(&dist, *a, *b);
        if self.k < idx.len() {
            idx.select_nth_unstable_by(self.k - 1, by_distance);
            idx.truncate(self.k);
        }
        idx.sort_unstable_by(by_distance);
        Ok(idx)
    }

    /// Majority label among the `k` nearest neighbours. Ties between labels
    /// are resolved uniformly at random with `rng`.
    pub fn predict<R: Rng + ?Sized>(&self, x: &Composition, rng: &mut R) -> Result<usize> {
        let nn = self.neighbours(x)?;
        Ok(vote(nn.iter().map(|&i| self.labels[i]), self.n_groups, rng))
    }
}

pub(crate) fn compare(dist: &[f64], a: usize, b: usize) -> Ordering {
    dist[a].total_cmp(&dist[b]).then(a.cmp(&b))
}

/// Modal label; when several labels share the top count one is drawn
/// uniformly. The random stream is only consumed on a tie.
pub(crate) fn vote<R: Rng + ?Sized>(
    labels: impl Iterator<Item = usize>,
    n_groups: usize,
    rng: &mut R,
) -> usize {
    let mut counts = vec![0usize; n_groups];
    for l in labels {
        counts[l] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(0);
    let tied: Vec<usize> = (0..n_groups).filter(|&g| counts[g] == top).collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    }
}

pub fn knn_predict<R: Rng + ?Sized>(fit: &KnnFit, x: &Composition, rng: &mut R) -> Result<usize> {
    fit.predict(x, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::{closure, Alpha};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn comp(v: &[f64]) -> Composition {
        closure(v).unwrap()
    }

    fn line() -> (Vec<Composition>, Vec<usize>) {
        let pts = [1.0, 2.0, 3.0, 7.0, 8.0, 9.0]
            .iter()
            .map(|t| comp(&[*t, 10.0 - t]))
            .collect();
        (pts, vec![0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn one_nn_returns_nearest_label() {
        let (pts, labels) = line();
        let fit = KnnFit::new(pts, labels, 2, 1, MetricSpec::alpha(Alpha::ONE)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(fit.predict(&comp(&[2.2, 7.8]), &mut rng).unwrap(), 0);
        assert_eq!(fit.predict(&comp(&[7.6, 2.4]), &mut rng).unwrap(), 1);
    }

    #[test]
    fn neighbours_are_sorted_with_index_ties() {
        let pts = vec![
            comp(&[1.0, 1.0]),
            comp(&[1.0, 3.0]),
            comp(&[3.0, 1.0]),
            comp(&[1.0, 1.0]),
        ];
        let fit = KnnFit::new(pts, vec![0, 1, 1, 0], 2, 3, MetricSpec::Esov).unwrap();
        // 1 and 2 are equidistant from the centre, 0 and 3 coincide with it
        assert_eq!(fit.neighbours(&comp(&[1.0, 1.0])).unwrap(), vec![0, 3, 1]);
    }

    #[test]
    fn label_ties_consume_randomness_only_when_tied() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let before = rng.clone();
        assert_eq!(vote([1, 1, 0].into_iter(), 2, &mut rng), 1);
        assert_eq!(rng, before);
        let mut seen = [0; 2];
        for _ in 0..200 {
            seen[vote([0, 1].into_iter(), 2, &mut rng)] += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0);
    }

    #[test]
    fn construction_errors() {
        let (pts, labels) = line();
        let m = MetricSpec::Esov;
        assert!(matches!(
            KnnFit::new(pts.clone(), labels.clone(), 2, 0, m),
            Err(Error::InvalidK { .. })
        ));
        assert!(matches!(
            KnnFit::new(pts.clone(), labels.clone(), 2, 7, m),
            Err(Error::InvalidK { .. })
        ));
        assert!(matches!(
            KnnFit::new(pts.clone(), labels[..5].to_vec(), 2, 1, m),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            KnnFit::new(pts.clone(), vec![0, 0, 0, 1, 1, 2], 2, 1, m),
            Err(Error::LabelOutOfRange { .. })
        ));
        let with_zero = vec![comp(&[0.0, 1.0]), comp(&[1.0, 1.0])];
        assert!(matches!(
            KnnFit::new(with_zero, vec![0, 1], 2, 1, MetricSpec::alpha(Alpha::ZERO)),
            Err(Error::ZeroWithNonpositiveAlpha { .. })
        ));
        let fit = KnnFit::new(pts, labels, 2, 1, m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            fit.predict(&comp(&[1.0, 1.0, 1.0]), &mut rng),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seeds::{split_rng, tie_rng};
use super::split::{stratified_split, Split};
use crate::classifiers::knn::{compare, vote};
use crate::classifiers::rda::{argmax, transform_rows};
use crate::classifiers::{fit_gaussian_groups, RdaModel, RdaParams};
use crate::dataio::LabeledCompositionDataset;
use crate::error::{Error, Result};
use crate::metrics::MetricSpec;
use crate::simplex::{Alpha, ContrastMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub n_test: usize,
    /// Number of replicates `B`.
    pub replicates: usize,
    pub seed: u64,
}

impl CvConfig {
    pub fn new(n_test: usize, replicates: usize, seed: u64) -> Self {
        CvConfig {
            n_test,
            replicates,
            seed,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidCv("need at least one replicate".into()));
        }
        if self.n_test == 0 || self.n_test >= n {
            return Err(Error::InvalidCv(format!(
                "test size must be in 1..{n}, got {}",
                self.n_test
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodFamily {
    Rda,
    Lda,
    Qda,
    KnnAlpha,
    KnnEsov,
}

impl MethodFamily {
    pub const ALL: [MethodFamily; 5] = [
        MethodFamily::Rda,
        MethodFamily::Lda,
        MethodFamily::Qda,
        MethodFamily::KnnAlpha,
        MethodFamily::KnnEsov,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodFamily::Rda => "rda",
            MethodFamily::Lda => "lda",
            MethodFamily::Qda => "qda",
            MethodFamily::KnnAlpha => "knn_alpha",
            MethodFamily::KnnEsov => "knn_esov",
        }
    }
}

impl std::str::FromStr for MethodFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodFamily::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidGrid(format!("unknown method family '{s}'")))
    }
}

/// A classifier with all of its parameters fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Rda(RdaParams),
    Knn { k: usize, metric: MetricSpec },
}

impl Method {
    pub fn family(&self) -> MethodFamily {
        match self {
            Method::Rda(p) if p.lambda == 0.0 && p.gamma == 1.0 => MethodFamily::Lda,
            Method::Rda(p) if p.lambda == 1.0 && p.gamma == 0.0 => MethodFamily::Qda,
            Method::Rda(_) => MethodFamily::Rda,
            Method::Knn {
                metric: MetricSpec::Esov,
                ..
            } => MethodFamily::KnnEsov,
            Method::Knn { .. } => MethodFamily::KnnAlpha,
        }
    }

    /// Number of tuned parameters, used to prefer simpler models on ties.
    pub fn param_count(&self) -> usize {
        match self.family() {
            MethodFamily::Rda => 3,
            MethodFamily::KnnAlpha => 2,
            MethodFamily::Lda | MethodFamily::Qda | MethodFamily::KnnEsov => 1,
        }
    }

    /// The transformation parameter, if the method has one.
    pub fn alpha(&self) -> Option<Alpha> {
        match self {
            Method::Rda(p) => Some(p.alpha),
            Method::Knn {
                metric: MetricSpec::Alpha { alpha },
                ..
            } => Some(*alpha),
            Method::Knn { .. } => None,
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.family(), self) {
            (MethodFamily::Lda, Method::Rda(p)) => write!(f, "LDA({})", p.alpha),
            (MethodFamily::Qda, Method::Rda(p)) => write!(f, "QDA({})", p.alpha),
            (_, Method::Rda(p)) => write!(f, "RDA({},{},{})", p.alpha, p.lambda, p.gamma),
            (
                _,
                Method::Knn {
                    k,
                    metric: MetricSpec::Alpha { alpha },
                },
            ) => write!(f, "{k}-NN({alpha})"),
            (_, Method::Knn { k, .. }) => write!(f, "{k}-NN_ESOV"),
        }
    }
}

/// Per-observation results of a cross-validation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcomes {
    pub splits: Arc<Vec<Split>>,
    /// `correct[b][j]` is whether test observation `splits[b].test[j]` was
    /// classified correctly.
    pub correct: Vec<Vec<bool>>,
}

impl Outcomes {
    pub fn replicates(&self) -> usize {
        self.correct.len()
    }

    pub fn q(&self) -> Vec<f64> {
        self.correct
            .iter()
            .map(|c| c.iter().filter(|&&ok| ok).count() as f64 / c.len() as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupAccuracy {
    pub group: String,
    pub size: usize,
    /// Fraction of the group's observations with at least one zero.
    pub zero_fraction: f64,
    pub mean_accuracy: f64,
    pub sd_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroBinAccuracy {
    pub bin: String,
    pub min_zeros: usize,
    pub max_zeros: usize,
    /// Fraction of all observations falling in the bin.
    pub occupancy: f64,
    /// Replicates whose test set had a member in the bin.
    pub replicates: usize,
    pub mean_accuracy: Option<f64>,
    pub sd_accuracy: Option<f64>,
}

/// How observations are grouped by their number of zero parts: one bin per
/// count below `tail_from`, then a single bin for everything at or above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroBinning {
    pub tail_from: Option<usize>,
}

impl Default for ZeroBinning {
    fn default() -> Self {
        ZeroBinning { tail_from: Some(4) }
    }
}

impl ZeroBinning {
    /// `(min, max)` zero counts of each bin, given the largest count present.
    fn bins(&self, max_count: usize) -> Vec<(usize, usize)> {
        match self.tail_from {
            Some(t) if t <= max_count => {
                let mut out: Vec<_> = (0..t).map(|c| (c, c)).collect();
                out.push((t, max_count));
                out
            }
            _ => (0..=max_count).map(|c| (c, c)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub name: String,
    pub method: Method,
    /// Accuracy of each replicate, in replicate order.
    pub q: Vec<f64>,
    pub mean_q: f64,
    /// Standard deviation across replicates (divisor `B - 1`); absent for `B = 1`.
    pub sd_q: Option<f64>,
    /// `sd_q / sqrt(B)`.
    pub se_q: Option<f64>,
    pub per_group: Vec<GroupAccuracy>,
    pub per_zero_count: Vec<ZeroBinAccuracy>,
}

impl EvalReport {
    pub fn from_outcomes(
        method: Method,
        outcomes: &Outcomes,
        ds: &LabeledCompositionDataset,
    ) -> Result<Self> {
        let q = outcomes.q();
        let (mean_q, sd_q) = mean_sd(&q).ok_or(Error::EmptyInput)?;
        let se_q = sd_q.map(|s| s / (q.len() as f64).sqrt());
        Ok(EvalReport {
            name: method.name(),
            method,
            q,
            mean_q,
            sd_q,
            se_q,
            per_group: breakdown_by_group(outcomes, ds)?,
            per_zero_count: breakdown_by_zero_count(outcomes, ds, ZeroBinning::default())?,
        })
    }
}

/// Mean and sample standard deviation (absent for a single value).
pub(crate) fn mean_sd(v: &[f64]) -> Option<(f64, Option<f64>)> {
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.len() > 1).then(|| {
        let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    Some((mean, sd))
}

/// Fraction of positions where `predicted` and `truth` agree.
pub fn correct_rate(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    let c = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(c as f64 / predicted.len() as f64)
}

/// Accumulates per-replicate accuracy within each of `n_bins` classes, then
/// averages over the replicates in which the class was tested.
fn binned_accuracy(
    outcomes: &Outcomes,
    n_bins: usize,
    bin_of: impl Fn(usize) -> usize,
) -> Vec<Vec<f64>> {
    let mut per_bin = vec![Vec::new(); n_bins];
    for (split, correct) in outcomes.splits.iter().zip(&outcomes.correct) {
        let mut hits = vec![0usize; n_bins];
        let mut seen = vec![0usize; n_bins];
        for (&i, &ok) in split.test.iter().zip(correct) {
            let b = bin_of(i);
            seen[b] += 1;
            hits[b] += ok as usize;
        }
        for b in 0..n_bins {
            if seen[b] > 0 {
                per_bin[b].push(hits[b] as f64 / seen[b] as f64);
            }
        }
    }
    per_bin
}

/// Accuracy by number of zero components.
pub fn breakdown_by_zero_count(
    outcomes: &Outcomes,
    ds: &LabeledCompositionDataset,
    binning: ZeroBinning,
) -> Result<Vec<ZeroBinAccuracy>> {
    if outcomes.replicates() == 0 {
        return Err(Error::EmptyInput);
    }
    let counts = ds.zero_counts();
    let max_count = counts.iter().copied().max().unwrap_or(0);
    let bins = binning.bins(max_count);
    let bin_of = |i: usize| {
        bins.iter()
            .position(|&(lo, hi)| (lo..=hi).contains(&counts[i]))
            .unwrap_or(0)
    };
    let accuracy = binned_accuracy(outcomes, bins.len(), bin_of);
    let n = ds.len() as f64;
    Ok(bins
        .iter()
        .zip(accuracy)
        .map(|(&(lo, hi), acc)| {
            let occupied = counts.iter().filter(|&&c| (lo..=hi).contains(&c)).count();
            let (mean, sd) = match mean_sd(&acc) {
                Some((m, s)) => (Some(m), s),
                None => (None, None),
            };
            ZeroBinAccuracy {
                bin: if lo == hi {
                    lo.to_string()
                } else {
                    format!("{lo}-{hi}")
                },
                min_zeros: lo,
                max_zeros: hi,
                occupancy: occupied as f64 / n,
                replicates: acc.len(),
                mean_accuracy: mean,
                sd_accuracy: sd,
            }
        })
        .collect())
}

/// Accuracy per group next to the group's share of observations with zeros.
pub fn breakdown_by_group(
    outcomes: &Outcomes,
    ds: &LabeledCompositionDataset,
) -> Result<Vec<GroupAccuracy>> {
    if outcomes.replicates() == 0 {
        return Err(Error::EmptyInput);
    }
    let labels = ds.labels();
    let accuracy = binned_accuracy(outcomes, ds.n_groups(), |i| labels[i]);
    let sizes = ds.group_sizes();
    let mut with_zeros = vec![0usize; ds.n_groups()];
    for (r, &l) in ds.rows().iter().zip(labels) {
        with_zeros[l] += r.has_zeros() as usize;
    }
    Ok(ds
        .group_names()
        .iter()
        .enumerate()
        .map(|(g, name)| {
            let (mean, sd) = mean_sd(&accuracy[g]).unwrap_or((f64::NAN, None));
            GroupAccuracy {
                group: name.clone(),
                size: sizes[g],
                zero_fraction: with_zeros[g] as f64 / sizes[g] as f64,
                mean_accuracy: mean,
                sd_accuracy: sd,
            }
        })
        .collect())
}

/// The `B` train/test splits of a configuration.
pub fn make_splits(ds: &LabeledCompositionDataset, cv: &CvConfig) -> Result<Vec<Split>> {
    cv.validate(ds.len())?;
    (0..cv.replicates)
        .map(|b| {
            stratified_split(
                ds.labels(),
                ds.n_groups(),
                cv.n_test,
                &mut split_rng(cv.seed, b),
            )
        })
        .collect()
}

/// Per-observation outcomes for one method.
pub fn cv_outcomes(
    ds: &LabeledCompositionDataset,
    method: &Method,
    cv: &CvConfig,
) -> Result<Outcomes> {
    let splits = Arc::new(make_splits(ds, cv)?);
    let engine = Engine { ds, cv, splits };
    engine
        .run(std::slice::from_ref(method))
        .pop()
        .expect("one method")
}

/// Runs the full cross-validation protocol for one method.
pub fn cv_evaluate(
    ds: &LabeledCompositionDataset,
    method: &Method,
    cv: &CvConfig,
) -> Result<EvalReport> {
    let outcomes = cv_outcomes(ds, method, cv)?;
    EvalReport::from_outcomes(*method, &outcomes, ds)
}

/// Evaluates many methods over one shared set of splits. Work that depends
/// only on the transformation (RDA) or the metric (k-NN) is done once per
/// value and reused across the remaining parameters.
pub(crate) struct Engine<'a> {
    pub ds: &'a LabeledCompositionDataset,
    pub cv: &'a CvConfig,
    pub splits: Arc<Vec<Split>>,
}

type Correct = Vec<Vec<bool>>;

impl Engine<'_> {
    /// Results in the order of `methods`.
    pub fn run(&self, methods: &[Method]) -> Vec<Result<Outcomes>> {
        let mut results: Vec<Option<Result<Outcomes>>> = vec![None; methods.len()];
        let mut rda_groups: Vec<(Alpha, Vec<usize>)> = Vec::new();
        let mut knn_groups: Vec<(MetricSpec, Vec<usize>)> = Vec::new();
        for (i, m) in methods.iter().enumerate() {
            match m {
                Method::Rda(p) => match rda_groups
                    .iter_mut()
                    .find(|(a, _)| a.value().to_bits() == p.alpha.value().to_bits())
                {
                    Some((_, idx)) => idx.push(i),
                    None => rda_groups.push((p.alpha, vec![i])),
                },
                Method::Knn { metric, .. } => {
                    match knn_groups.iter_mut().find(|(mm, _)| mm == metric) {
                        Some((_, idx)) => idx.push(i),
                        None => knn_groups.push((*metric, vec![i])),
                    }
                }
            }
        }
        for (alpha, idx) in rda_groups {
            let params: Vec<RdaParams> = idx
                .iter()
                .map(|&i| match methods[i] {
                    Method::Rda(p) => p,
                    Method::Knn { .. } => unreachable!(),
                })
                .collect();
            for (&i, r) in idx.iter().zip(self.rda(alpha, &params)) {
                results[i] = Some(self.finish(&methods[i], r));
            }
        }
        for (metric, idx) in knn_groups {
            let ks: Vec<usize> = idx
                .iter()
                .map(|&i| match methods[i] {
                    Method::Knn { k, .. } => k,
                    Method::Rda(_) => unreachable!(),
                })
                .collect();
            for (&i, r) in idx.iter().zip(self.knn(metric, &ks)) {
                results[i] = Some(self.finish(&methods[i], r));
            }
        }
        results
            .into_iter()
            .map(|r| r.expect("every method evaluated"))
            .collect()
    }

    fn finish(
        &self,
        method: &Method,
        r: std::result::Result<Correct, (usize, Error)>,
    ) -> Result<Outcomes> {
        match r {
            Ok(correct) => Ok(Outcomes {
                splits: Arc::clone(&self.splits),
                correct,
            }),
            Err((replicate, e)) if e.is_ill_conditioned() => Err(Error::IllConditionedAt {
                method: method.name(),
                replicate,
                source: Box::new(e),
            }),
            Err((_, e)) => Err(e),
        }
    }

    /// One result per entry of `params`; errors carry the failing replicate.
    fn rda(
        &self,
        alpha: Alpha,
        params: &[RdaParams],
    ) -> Vec<std::result::Result<Correct, (usize, Error)>> {
        let ds = self.ds;
        let prepared = ContrastMatrix::helmert(ds.dim())
            .and_then(|basis| transform_rows(ds.rows(), alpha, &basis).map(|z| (basis, z)));
        let (basis, z) = match prepared {
            Ok(v) => v,
            Err(e) => return params.iter().map(|_| Err((0, e.clone()))).collect(),
        };
        let labels = ds.labels();
        // per_rep[b][p]
        let per_rep: Vec<Vec<Result<Vec<bool>>>> = self
            .splits
            .par_iter()
            .map(|split| {
                let train_z = z.select_rows(split.train.iter());
                let train_labels: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
                let estimates = match fit_gaussian_groups(&train_z, &train_labels, ds.n_groups()) {
                    Ok(e) => e,
                    Err(e) => return params.iter().map(|_| Err(e.clone())).collect(),
                };
                params
                    .iter()
                    .map(|p| {
                        let model = RdaModel::from_estimates(&estimates, *p, basis.clone())?;
                        split
                            .test
                            .iter()
                            .map(|&i| {
                                let zi: Vec<f64> = z.row(i).iter().copied().collect();
                                Ok(argmax(&model.scores_transformed(&zi)?) == labels[i])
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        transpose(per_rep, params.len())
    }

    fn knn(
        &self,
        metric: MetricSpec,
        ks: &[usize],
    ) -> Vec<std::result::Result<Correct, (usize, Error)>> {
        let ds = self.ds;
        let embedded = match ds
            .rows()
            .iter()
            .map(|r| metric.embed(r))
            .collect::<Result<Vec<_>>>()
        {
            Ok(e) => e,
            Err(e) => return ks.iter().map(|_| Err((0, e.clone()))).collect(),
        };
        let labels = ds.labels();
        let g = ds.n_groups();
        let seed = self.cv.seed;
        let per_rep: Vec<Vec<Result<Vec<bool>>>> = self
            .splits
            .par_iter()
            .enumerate()
            .map(|(b, split)| {
                let n_train = split.train.len();
                let mut per_k: Vec<Result<Vec<bool>>> = ks
                    .iter()
                    .map(|&k| {
                        if k == 0 || k > n_train {
                            Err(Error::InvalidK { k, n: n_train })
                        } else {
                            Ok(Vec::with_capacity(split.test.len()))
                        }
                    })
                    .collect();
                let mut dist = vec![0.0; n_train];
                let mut order: Vec<usize> = (0..n_train).collect();
                for (pos, &i) in split.test.iter().enumerate() {
                    for (d, &t) in dist.iter_mut().zip(&split.train) {
                        *d = metric.embedded_distance(&embedded[i], &embedded[t]);
                    }
                    for (o, slot) in order.iter_mut().enumerate() {
                        *slot = o;
                    }
                    order.sort_unstable_by(|&a, &c| compare(&dist, a, c));
                    for (&k, out) in ks.iter().zip(per_k.iter_mut()) {
                        if let Ok(out) = out {
                            let mut rng = tie_rng(seed, b, pos);
                            let nearest = order[..k].iter().map(|&o| labels[split.train[o]]);
                            out.push(vote(nearest, g, &mut rng) == labels[i]);
                        }
                    }
                }
                per_k
            })
            .collect();
        transpose(per_rep, ks.len())
    }
}

/// Turns per-replicate results into per-configuration results, keeping the
/// first failing replicate.
fn transpose(
    per_rep: Vec<Vec<Result<Vec<bool>>>>,
    n_configs: usize,
) -> Vec<std::result::Result<Correct, (usize, Error)>> {
    let mut out: Vec<std::result::Result<Correct, (usize, Error)>> = (0..n_configs)
        .map(|_| Ok(Vec::with_capacity(per_rep.len())))
        .collect();
    for (b, rep) in per_rep.into_iter().enumerate() {
        for (slot, r) in out.iter_mut().zip(rep) {
            if let Ok(acc) = slot {
                match r {
                    Ok(c) => acc.push(c),
                    Err(e) => *slot = Err((b, e)),
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::closure;

    fn a(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    fn separated() -> LabeledCompositionDataset {
        let mut raw = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.01;
            raw.push(vec![0.8 + t, 0.1, 0.1 + t * 0.5]);
            labels.push("a".to_string());
            raw.push(vec![0.1, 0.8 + t, 0.1 + t * 0.3]);
            labels.push("b".to_string());
        }
        let names = vec!["x".into(), "y".into(), "z".into()];
        LabeledCompositionDataset::from_raw(names, raw, labels, "test").unwrap()
    }

    #[test]
    fn correct_rate_examples() {
        assert_eq!(correct_rate(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(correct_rate(&[0, 0], &[1, 1]).unwrap(), 0.0);
        let truth = vec![0usize; 30];
        let mut pred = truth.clone();
        pred[..3].fill(1);
        assert_eq!(correct_rate(&pred, &truth).unwrap(), 0.9);
        assert!(matches!(
            correct_rate(&[1], &[1, 2]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn method_names() {
        assert_eq!(Method::Rda(RdaParams::lda(a(1.0))).name(), "LDA(1)");
        assert_eq!(Method::Rda(RdaParams::qda(a(0.5))).name(), "QDA(0.5)");
        assert_eq!(
            Method::Rda(RdaParams::new(a(1.0), 0.1, 1.0)).name(),
            "RDA(1,0.1,1)"
        );
        let knn = Method::Knn {
            k: 3,
            metric: MetricSpec::alpha(a(0.85)),
        };
        assert_eq!(knn.name(), "3-NN(0.85)");
        assert_eq!(knn.param_count(), 2);
        let esov = Method::Knn {
            k: 2,
            metric: MetricSpec::Esov,
        };
        assert_eq!(esov.name(), "2-NN_ESOV");
        assert_eq!(esov.alpha(), None);
    }

    #[test]
    fn separated_groups_are_perfect() {
        let ds = separated();
        let cv = CvConfig::new(6, 10, 3);
        for m in [
            Method::Rda(RdaParams::lda(a(0.0))),
            Method::Knn {
                k: 1,
                metric: MetricSpec::alpha(a(1.0)),
            },
        ] {
            let r = cv_evaluate(&ds, &m, &cv).unwrap();
            assert_eq!(r.mean_q, 1.0);
            assert_eq!(r.sd_q, Some(0.0));
            assert_eq!(r.q.len(), 10);
        }
    }

    #[test]
    fn single_replicate_has_no_dispersion() {
        let ds = separated();
        let r = cv_evaluate(
            &ds,
            &Method::Rda(RdaParams::lda(a(1.0))),
            &CvConfig::new(4, 1, 0),
        )
        .unwrap();
        assert_eq!(r.mean_q, r.q[0]);
        assert_eq!(r.sd_q, None);
        assert_eq!(r.se_q, None);
    }

    #[test]
    fn engine_matches_direct_classifiers() {
        use crate::classifiers::KnnFit;
        let ds = separated();
        let cv = CvConfig::new(8, 3, 11);
        let method = Method::Knn {
            k: 4,
            metric: MetricSpec::alpha(a(0.5)),
        };
        let out = cv_outcomes(&ds, &method, &cv).unwrap();
        for (b, (split, correct)) in out.splits.iter().zip(&out.correct).enumerate() {
            let fit = KnnFit::new(
                split.train.iter().map(|&i| ds.rows()[i].clone()).collect(),
                split.train.iter().map(|&i| ds.labels()[i]).collect(),
                2,
                4,
                MetricSpec::alpha(a(0.5)),
            )
            .unwrap();
            for (pos, (&i, &ok)) in split.test.iter().zip(correct).enumerate() {
                let p = fit
                    .predict(&ds.rows()[i], &mut tie_rng(11, b, pos))
                    .unwrap();
                assert_eq!(p == ds.labels()[i], ok);
            }
        }
    }

    #[test]
    fn zero_breakdown_by_hand() {
        // zero counts 0,0,1,1,2,2 ; test sets and outcomes fixed by hand
        let raw = vec![
            vec![1.0, 1.0, 1.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ];
        let labels = ["a", "b", "a", "b", "a", "b"].map(String::from).to_vec();
        let ds = LabeledCompositionDataset::from_raw(
            vec!["p".into(), "q".into(), "r".into()],
            raw,
            labels,
            "hand",
        )
        .unwrap();
        let splits = vec![
            Split {
                train: vec![1, 3, 5],
                test: vec![0, 2, 4],
            },
            Split {
                train: vec![0, 2, 4],
                test: vec![1, 3, 5],
            },
        ];
        let outcomes = Outcomes {
            splits: Arc::new(splits),
            correct: vec![vec![true, false, true], vec![false, true, true]],
        };
        let bins = breakdown_by_zero_count(&outcomes, &ds, ZeroBinning::default()).unwrap();
        assert_eq!(bins.len(), 3);
        assert_eq!(bins[0].mean_accuracy, Some(0.5));
        assert_eq!(bins[0].sd_accuracy, Some((0.5f64).sqrt()));
        assert_eq!(bins[1].mean_accuracy, Some(0.5));
        assert_eq!(bins[2].mean_accuracy, Some(1.0));
        assert_eq!(bins[2].sd_accuracy, Some(0.0));
        assert!(bins.iter().all(|b| (b.occupancy - 1.0 / 3.0).abs() < 1e-15));

        let tail =
            breakdown_by_zero_count(&outcomes, &ds, ZeroBinning { tail_from: Some(1) }).unwrap();
        assert_eq!(tail.len(), 2);
        assert_eq!(tail[1].bin, "1-2");
        // replicate accuracies in the tail: 1/2 and 2/2
        assert_eq!(tail[1].mean_accuracy, Some(0.75));

        let groups = breakdown_by_group(&outcomes, &ds).unwrap();
        assert_eq!(groups[0].mean_accuracy, 2.0 / 3.0);
        assert_eq!(groups[1].mean_accuracy, 2.0 / 3.0);
        assert_eq!(groups[0].zero_fraction, 2.0 / 3.0);
    }

    #[test]
    fn zero_free_data_has_one_bin_equal_to_overall() {
        let ds = separated();
        let r = cv_evaluate(
            &ds,
            &Method::Knn {
                k: 7,
                metric: MetricSpec::alpha(a(-1.0)),
            },
            &CvConfig::new(10, 5, 1),
        )
        .unwrap();
        assert_eq!(r.per_zero_count.len(), 1);
        assert_eq!(r.per_zero_count[0].bin, "0");
        assert_eq!(r.per_zero_count[0].mean_accuracy, Some(r.mean_q));
    }

    #[test]
    fn ill_conditioned_names_method() {
        // five parts but only a handful of points per group: QDA is singular
        let mut raw = Vec::new();
        let mut labels = Vec::new();
        for i in 0..8 {
            let t = 1.0 + i as f64;
            raw.push(
                closure(&[t, 2.0, 3.0, 4.0, 5.0 + t * t])
                    .unwrap()
                    .into_parts(),
            );
            labels.push(if i % 2 == 0 { "a" } else { "b" }.to_string());
        }
        let names = (0..5).map(|i| format!("c{i}")).collect();
        let ds = LabeledCompositionDataset::from_raw(names, raw, labels, "tiny").unwrap();
        let err = cv_evaluate(
            &ds,
            &Method::Rda(RdaParams::qda(a(1.0))),
            &CvConfig::new(2, 3, 0),
        )
        .unwrap_err();
        match err {
            Error::IllConditionedAt {
                method, replicate, ..
            } => {
                assert_eq!(method, "QDA(1)");
                assert_eq!(replicate, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

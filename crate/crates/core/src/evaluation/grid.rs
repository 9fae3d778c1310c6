use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cv::{make_splits, CvConfig, Engine, EvalReport, Method, MethodFamily};
use crate::classifiers::{PriorMode, RdaParams};
use crate::dataio::LabeledCompositionDataset;
use crate::error::{Error, Result};
use crate::metrics::MetricSpec;
use crate::simplex::Alpha;

/// Range values are rounded to this many decimals so that `0:1:0.1`
/// produces 0.3 rather than 0.30000000000000004.
const RANGE_DECIMALS: f64 = 1e10;

const MAX_RANGE_LEN: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub ks: Vec<usize>,
    pub families: Vec<MethodFamily>,
    #[serde(default)]
    pub prior_mode: PriorMode,
}

impl GridSpec {
    /// alpha in steps of 0.05 over `[-1, 1]`, or `(0, 1]` when the data have
    /// zeros; lambda and gamma in steps of 0.1; k from 1 to 10; all families.
    pub fn defaults(has_zeros: bool) -> Self {
        let alphas = if has_zeros {
            parse_range("0.05:1:0.05")
        } else {
            parse_range("-1:1:0.05")
        }
        .expect("valid literal");
        let unit = parse_range("0:1:0.1").expect("valid literal");
        GridSpec {
            alphas,
            lambdas: unit.clone(),
            gammas: unit,
            ks: (1..=10).collect(),
            families: MethodFamily::ALL.to_vec(),
            prior_mode: PriorMode::Proportional,
        }
    }

    pub fn for_dataset(ds: &LabeledCompositionDataset) -> Self {
        Self::defaults(ds.has_zeros())
    }

    pub fn with_families(mut self, families: &[MethodFamily]) -> Self {
        self.families = families.to_vec();
        self
    }

    pub fn validate(&self, ds: &LabeledCompositionDataset) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let uses = |f: MethodFamily| self.families.contains(&f);
        let needs_alpha = [
            MethodFamily::Rda,
            MethodFamily::Lda,
            MethodFamily::Qda,
            MethodFamily::KnnAlpha,
        ]
        .into_iter()
        .any(uses);
        if needs_alpha {
            if self.alphas.is_empty() {
                return Err(Error::EmptyGrid);
            }
            for &a in &self.alphas {
                if !a.is_finite() {
                    return Err(Error::InvalidGrid(format!("alpha {a} is not finite")));
                }
                if a <= 0.0 && ds.has_zeros() {
                    return Err(Error::InvalidGrid(format!(
                        "alpha {a} is not positive but the data contain zeros"
                    )));
                }
            }
        }
        if uses(MethodFamily::Rda) {
            if self.lambdas.is_empty() || self.gammas.is_empty() {
                return Err(Error::EmptyGrid);
            }
            for (name, v) in self
                .lambdas
                .iter()
                .map(|v| ("lambda", v))
                .chain(self.gammas.iter().map(|v| ("gamma", v)))
            {
                if !(0.0..=1.0).contains(v) {
                    return Err(Error::InvalidGrid(format!("{name} {v} is outside [0, 1]")));
                }
            }
        }
        if uses(MethodFamily::KnnAlpha) || uses(MethodFamily::KnnEsov) {
            if self.ks.is_empty() {
                return Err(Error::EmptyGrid);
            }
            if self.ks.contains(&0) {
                return Err(Error::InvalidGrid("k must be positive".into()));
            }
        }
        Ok(())
    }

    /// Every parameter combination, without duplicates, in a fixed order:
    /// for each alpha the LDA, QDA and RDA points, then k-NN by alpha and k,
    /// then ESOV k-NN by k.
    pub fn methods(&self) -> Result<Vec<Method>> {
        let uses = |f: MethodFamily| self.families.contains(&f);
        let mut out: Vec<Method> = Vec::new();
        let mut push = |m: Method| {
            if !out.contains(&m) {
                out.push(m);
            }
        };
        let prior = self.prior_mode;
        let alphas = self
            .alphas
            .iter()
            .map(|&a| Alpha::new(a))
            .collect::<Result<Vec<_>>>()?;
        for &alpha in &alphas {
            if uses(MethodFamily::Lda) {
                push(Method::Rda(RdaParams::lda(alpha).with_prior_mode(prior)));
            }
            if uses(MethodFamily::Qda) {
                push(Method::Rda(RdaParams::qda(alpha).with_prior_mode(prior)));
            }
            if uses(MethodFamily::Rda) {
                for &lambda in &self.lambdas {
                    for &gamma in &self.gammas {
                        push(Method::Rda(
                            RdaParams::new(alpha, lambda, gamma).with_prior_mode(prior),
                        ));
                    }
                }
            }
        }
        if uses(MethodFamily::KnnAlpha) {
            for &alpha in &alphas {
                for &k in &self.ks {
                    push(Method::Knn {
                        k,
                        metric: MetricSpec::alpha(alpha),
                    });
                }
            }
        }
        if uses(MethodFamily::KnnEsov) {
            for &k in &self.ks {
                push(Method::Knn {
                    k,
                    metric: MetricSpec::Esov,
                });
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(out)
    }
}

/// A grid point that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFailure {
    pub name: String,
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyBest {
    pub family: MethodFamily,
    pub name: String,
    pub mean_q: f64,
    pub sd_q: Option<f64>,
    pub se_q: Option<f64>,
}

/// A named curve over a shared axis; missing points failed to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureData {
    pub alphas: Vec<f64>,
    /// Mean accuracy against alpha for LDA, QDA and the best RDA setting at
    /// each alpha.
    pub alpha_curves: Vec<Series>,
    pub ks: Vec<usize>,
    /// `knn_heat[k][alpha]`, alpha-metric k-NN mean accuracy.
    pub knn_heat: Vec<Vec<Option<f64>>>,
    /// Mean accuracy against k at the best k-NN alpha, plus ESOV.
    pub knn_vs_k: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub cv: CvConfig,
    /// The same `B` splits are used for every grid point.
    pub split_policy: String,
    /// Ranked by mean accuracy, then fewer parameters, then smaller |alpha|.
    pub reports: Vec<EvalReport>,
    pub failures: Vec<GridFailure>,
    pub best: Vec<FamilyBest>,
    pub figures: FigureData,
}

impl GridResult {
    pub fn best_overall(&self) -> Option<&EvalReport> {
        self.reports.first()
    }

    pub fn best_in(&self, family: MethodFamily) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.method.family() == family)
    }
}

fn rank(a: &EvalReport, b: &EvalReport) -> Ordering {
    let abs_alpha = |r: &EvalReport| r.method.alpha().map_or(0.0, |a| a.value().abs());
    b.mean_q
        .total_cmp(&a.mean_q)
        .then(a.method.param_count().cmp(&b.method.param_count()))
        .then(abs_alpha(a).total_cmp(&abs_alpha(b)))
}

/// Evaluates every grid point over one shared set of splits.
pub fn grid_search(
    ds: &LabeledCompositionDataset,
    grid: &GridSpec,
    cv: &CvConfig,
) -> Result<GridResult> {
    grid.validate(ds)?;
    let methods = grid.methods()?;
    let splits = Arc::new(make_splits(ds, cv)?);
    let engine = Engine { ds, cv, splits };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (method, outcome) in methods.iter().zip(engine.run(&methods)) {
        match outcome {
            Ok(o) => reports.push(EvalReport::from_outcomes(*method, &o, ds)?),
            Err(e @ Error::IllConditionedAt { .. }) => failures.push(GridFailure {
                name: method.name(),
                method: *method,
                error: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    let figures = figure_data(grid, &reports);
    reports.sort_by(rank);
    let best = MethodFamily::ALL
        .into_iter()
        .filter_map(|f| {
            reports
                .iter()
                .find(|r| r.method.family() == f)
                .map(|r| FamilyBest {
                    family: f,
                    name: r.name.clone(),
                    mean_q: r.mean_q,
                    sd_q: r.sd_q,
                    se_q: r.se_q,
                })
        })
        .collect();
    Ok(GridResult {
        cv: *cv,
        split_policy: "shared".into(),
        reports,
        failures,
        best,
        figures,
    })
}

fn figure_data(grid: &GridSpec, reports: &[EvalReport]) -> FigureData {
    let same_alpha = |r: &EvalReport, a: f64| r.method.alpha().is_some_and(|x| x.value() == a);
    let curve = |label: &str, family: MethodFamily| Series {
        label: label.into(),
        values: grid
            .alphas
            .iter()
            .map(|&a| {
                reports
                    .iter()
                    .filter(|r| r.method.family() == family && same_alpha(r, a))
                    .map(|r| r.mean_q)
                    .reduce(f64::max)
            })
            .collect(),
    };
    let mut alpha_curves = Vec::new();
    if grid.families.contains(&MethodFamily::Lda) {
        alpha_curves.push(curve("LDA", MethodFamily::Lda));
    }
    if grid.families.contains(&MethodFamily::Qda) {
        alpha_curves.push(curve("QDA", MethodFamily::Qda));
    }
    if grid.families.contains(&MethodFamily::Rda) {
        // best over (lambda, gamma) at each alpha, LDA and QDA corners included
        alpha_curves.push(Series {
            label: "RDA".into(),
            values: grid
                .alphas
                .iter()
                .map(|&a| {
                    reports
                        .iter()
                        .filter(|r| matches!(r.method, Method::Rda(p) if p.alpha.value() == a))
                        .filter(|r| match r.method {
                            Method::Rda(p) => {
                                grid.lambdas.contains(&p.lambda) && grid.gammas.contains(&p.gamma)
                            }
                            Method::Knn { .. } => false,
                        })
                        .map(|r| r.mean_q)
                        .reduce(f64::max)
                })
                .collect(),
        });
    }
    let knn_cell = |k: usize, a: f64| {
        reports
            .iter()
            .find(|r| matches!(r.method, Method::Knn { k: kk, metric: MetricSpec::Alpha { alpha } } if kk == k && alpha.value() == a))
            .map(|r| r.mean_q)
    };
    let knn_heat: Vec<Vec<Option<f64>>> = if grid.families.contains(&MethodFamily::KnnAlpha) {
        grid.ks
            .iter()
            .map(|&k| grid.alphas.iter().map(|&a| knn_cell(k, a)).collect())
            .collect()
    } else {
        Vec::new()
    };
    let mut knn_vs_k = Vec::new();
    let best_knn = reports
        .iter()
        .filter(|r| r.method.family() == MethodFamily::KnnAlpha)
        .min_by(|a, b| rank(a, b));
    if let Some(best) = best_knn {
        let a = best.method.alpha().map_or(0.0, Alpha::value);
        knn_vs_k.push(Series {
            label: format!("k-NN({a})"),
            values: grid.ks.iter().map(|&k| knn_cell(k, a)).collect(),
        });
    }
    if grid.families.contains(&MethodFamily::KnnEsov) {
        knn_vs_k.push(Series {
            label: "k-NN_ESOV".into(),
            values: grid
                .ks
                .iter()
                .map(|&k| {
                    reports
                        .iter()
                        .find(|r| {
                            r.method
                                == Method::Knn {
                                    k,
                                    metric: MetricSpec::Esov,
                                }
                        })
                        .map(|r| r.mean_q)
                })
                .collect(),
        });
    }
    FigureData {
        alphas: grid.alphas.clone(),
        alpha_curves,
        ks: grid.ks.clone(),
        knn_heat,
        knn_vs_k,
    }
}

fn round_range(v: f64) -> f64 {
    (v * RANGE_DECIMALS).round() / RANGE_DECIMALS + 0.0
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidRange(format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::InvalidRange(format!("'{s}' is not finite")));
    }
    Ok(v)
}

/// Parses `lo:hi:step` (both ends inclusive), a comma-separated list, or a
/// single value.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::InvalidRange("empty range".into()));
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidRange(format!("'{text}' is not lo:hi:step")));
        }
        let (lo, hi, step) = (
            parse_f64(parts[0])?,
            parse_f64(parts[1])?,
            parse_f64(parts[2])?,
        );
        if step <= 0.0 {
            return Err(Error::InvalidRange(format!("step {step} must be positive")));
        }
        if lo > hi {
            return Err(Error::InvalidRange(format!("{lo} is above {hi}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor();
        if count >= MAX_RANGE_LEN as f64 {
            return Err(Error::InvalidRange(format!("'{text}' has too many values")));
        }
        return Ok((0..=count as usize)
            .map(|i| round_range(lo + i as f64 * step))
            .collect());
    }
    text.split(',')
        .map(|s| parse_f64(s).map(round_range))
        .collect()
}

/// Integer version of [`parse_range`]; the step defaults to 1.
pub fn parse_int_range(text: &str) -> Result<Vec<usize>> {
    let int = |s: &str| -> Result<usize> {
        s.trim()
            .parse()
            .map_err(|_| Error::InvalidRange(format!("'{s}' is not a non-negative integer")))
    };
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::InvalidRange("empty range".into()));
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [lo, hi] => (int(lo)?, int(hi)?, 1),
            [lo, hi, step] => (int(lo)?, int(hi)?, int(step)?),
            _ => return Err(Error::InvalidRange(format!("'{text}' is not lo:hi[:step]"))),
        };
        if step == 0 || lo > hi {
            return Err(Error::InvalidRange(format!("'{text}' is empty")));
        }
        if (hi - lo) / step >= MAX_RANGE_LEN {
            return Err(Error::InvalidRange(format!("'{text}' has too many values")));
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    text.split(',').map(int).collect()
}

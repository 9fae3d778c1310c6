use std::collections::BTreeMap;

use anyhow::anyhow;
use serde::{Deserialize, Serialize};

use simplex_clf::classifiers::{fit_rda, KnnFit, RdaModel, RdaParams};
use simplex_clf::dataio::{
    generate_synthetic, group_summary, render_summary, zero_summary, GroupSummaryRow,
    LabeledCompositionDataset, SyntheticSpec,
};
use simplex_clf::evaluation::seeds::tie_rng;
use simplex_clf::evaluation::{
    allocate_test_counts, cv_evaluate, grid_search, parse_int_range, parse_range, CvConfig,
    EvalReport, FigureData, GridSpec, Method,
};
use simplex_clf::metrics::{pairwise_distances, MetricSpec};
use simplex_clf::simplex::{closure, Alpha, Composition, ContrastMatrix};
use simplex_clf::Error;

use crate::args::*;
use crate::io::{self, json, num, opt_num, table, DatasetInfo, Sink};
use crate::report::{Envelope, Software, SCHEMA_VERSION};
use crate::CliError;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(anyhow!(msg.into()))
}

fn zero_rows_error(alpha: Alpha, ds: &LabeledCompositionDataset) -> CliError {
    let rows = ds.rows_with_zeros();
    let mut shown: Vec<String> = rows.iter().take(20).map(|r| r.to_string()).collect();
    if rows.len() > 20 {
        shown.push("...".into());
    }
    input(format!(
        "alpha = {alpha} needs strictly positive data, but {} rows contain zeros: {}",
        rows.len(),
        shown.join(", ")
    ))
}

fn check_alpha(alpha: Alpha, ds: &LabeledCompositionDataset) -> Result<(), CliError> {
    if alpha.value() <= 0.0 && ds.has_zeros() {
        return Err(zero_rows_error(alpha, ds));
    }
    Ok(())
}

fn resolve_method(m: &MethodArgs, ds: &LabeledCompositionDataset) -> Result<Method, CliError> {
    let alpha = || -> Result<Alpha, CliError> {
        let v = m.alpha.ok_or_else(|| input("--alpha is required"))?;
        Ok(Alpha::new(v)?)
    };
    let method = if m.k.is_some() || m.metric.is_some() {
        if m.lambda.is_some() || m.gamma.is_some() {
            return Err(input("--lambda and --gamma apply to RDA, not k-NN"));
        }
        let k = m.k.ok_or_else(|| input("k-NN needs --k"))?;
        if k == 0 {
            return Err(input("--k must be positive"));
        }
        let metric = match m.metric.unwrap_or(MetricArg::Alpha) {
            MetricArg::Esov if m.alpha.is_some() => {
                return Err(input("--alpha does not apply to --metric esov"))
            }
            MetricArg::Esov => MetricSpec::Esov,
            MetricArg::Alpha => MetricSpec::alpha(alpha()?),
        };
        Method::Knn { k, metric }
    } else {
        let lambda = m.lambda.unwrap_or(0.0);
        let gamma = m.gamma.unwrap_or(1.0);
        for (name, v) in [("lambda", lambda), ("gamma", gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(input(format!("--{name} {v} is outside [0, 1]")));
            }
        }
        Method::Rda(RdaParams::new(alpha()?, lambda, gamma).with_prior_mode(m.prior.into()))
    };
    if let Some(a) = method.alpha() {
        check_alpha(a, ds)?;
    }
    Ok(method)
}

/// About one observation in seven, as in a 30 of 214 split, and never fewer
/// than the number of groups.
fn default_n_test(ds: &LabeledCompositionDataset) -> usize {
    ((ds.len() as f64 * 0.14).round() as usize).max(ds.n_groups())
}

fn cv_config(args: &CvArgsCommon, ds: &LabeledCompositionDataset) -> Result<CvConfig, CliError> {
    let cv = CvConfig::new(
        args.n_test.unwrap_or_else(|| default_n_test(ds)),
        args.reps,
        args.seed,
    );
    cv.validate(ds.len())?;
    allocate_test_counts(&ds.group_sizes(), cv.n_test)?;
    Ok(cv)
}

fn check_k(k: usize, cv: &CvConfig, ds: &LabeledCompositionDataset) -> Result<(), CliError> {
    let n_train = ds.len() - cv.n_test;
    if k > n_train {
        return Err(input(format!(
            "k = {k} exceeds the {n_train} training observations"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct RunConfig<'a, A: Serialize> {
    args: &'a A,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cv: Option<CvConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<&'a GridSpec>,
}

impl<'a, A: Serialize> RunConfig<'a, A> {
    fn of(args: &'a A) -> Self {
        RunConfig {
            args,
            method: None,
            cv: None,
            grid: None,
        }
    }
}

pub fn transform(args: &TransformArgs) -> Result<(), CliError> {
    let alpha = Alpha::new(args.alpha)?;
    let format = args.out.format.unwrap_or(Format::Csv);
    let mut sink = Sink::new(args.out.out_dir.as_deref());
    if args.inverse {
        return inverse_transform(args, alpha, format, sink);
    }
    let loaded = io::load(&args.data)?;
    let ds = &loaded.ds;
    check_alpha(alpha, ds)?;
    let basis = ContrastMatrix::helmert(ds.dim())?;
    let coords = ds
        .rows()
        .iter()
        .map(|x| Ok(basis.transform(x, alpha)?.coords))
        .collect::<Result<Vec<_>, Error>>()?;
    let columns: Vec<String> = (1..ds.dim()).map(|j| format!("z{j}")).collect();
    let labels: Vec<String> = ds
        .labels()
        .iter()
        .map(|&l| ds.group_names()[l].clone())
        .collect();
    write_matrix(
        &mut sink,
        "transformed",
        format,
        &columns,
        ds.label_name(),
        &coords,
        &labels,
        alpha,
    )?;

    #[derive(Serialize)]
    struct Manifest<'a> {
        alpha: f64,
        dim: usize,
        components: &'a [String],
        columns: &'a [String],
    }
    let manifest = Envelope::new(
        "transform",
        RunConfig::of(args),
        Manifest {
            alpha: alpha.value(),
            dim: ds.dim(),
            components: ds.component_names(),
            columns: &columns,
        },
    )
    .dataset(loaded.info);
    sink.extra("transform_manifest.json", json(&manifest)?);
    sink.commit()
}

#[allow(clippy::too_many_arguments)]
fn write_matrix(
    sink: &mut Sink,
    stem: &str,
    format: Format,
    columns: &[String],
    label_name: &str,
    rows: &[Vec<f64>],
    labels: &[String],
    alpha: Alpha,
) -> Result<(), CliError> {
    let bytes = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Matrix<'a> {
                alpha: f64,
                columns: &'a [String],
                label_column: &'a str,
                labels: &'a [String],
                rows: &'a [Vec<f64>],
            }
            json(&Matrix {
                alpha: alpha.value(),
                columns,
                label_column: label_name,
                labels,
                rows,
            })?
        }
        _ => {
            let mut header = columns.to_vec();
            header.push(label_name.to_owned());
            let body: Vec<Vec<String>> = rows
                .iter()
                .zip(labels)
                .map(|(r, l)| r.iter().map(|&v| num(v)).chain([l.clone()]).collect())
                .collect();
            table(io::delimiter(format), &header, &body)?
        }
    };
    sink.primary(format!("{stem}.{}", io::extension(format)), bytes);
    Ok(())
}

fn inverse_transform(
    args: &TransformArgs,
    alpha: Alpha,
    format: Format,
    mut sink: Sink,
) -> Result<(), CliError> {
    let bytes = io::read_bytes(&args.data.data)?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(io::sniff_delimiter(&bytes))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    let label_idx = header.iter().position(|h| *h == args.data.label_col);
    let coord_idx: Vec<usize> = (0..header.len())
        .filter(|&i| Some(i) != label_idx)
        .collect();
    if coord_idx.is_empty() {
        return Err(input("no coordinate columns"));
    }
    let dim = coord_idx.len() + 1;
    let basis = ContrastMatrix::helmert(dim)?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let z = coord_idx
            .iter()
            .map(|&c| {
                let cell = rec.get(c).unwrap_or("");
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row,
                        column: header[c].clone(),
                        message: format!("'{cell}' is not a finite number"),
                    })
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        let x = basis
            .inverse(&z, alpha)
            .map_err(|e| input(format!("row {row}: {e}")))?;
        rows.push(x.into_parts());
        labels.push(label_idx.and_then(|l| rec.get(l)).unwrap_or("").to_owned());
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            row: 1,
            column: String::new(),
            message: "no data rows".into(),
        }
        .into());
    }
    let columns: Vec<String> = (1..=dim).map(|j| format!("x{j}")).collect();
    let label_name = label_idx.map_or("label", |l| header[l].as_str());
    write_matrix(
        &mut sink,
        "compositions",
        format,
        &columns,
        label_name,
        &rows,
        &labels,
        alpha,
    )?;
    sink.commit()
}

pub fn distance(args: &DistanceArgs) -> Result<(), CliError> {
    let loaded = io::load(&args.data)?;
    let ds = &loaded.ds;
    let metric = match (args.metric, args.alpha) {
        (MetricArg::Esov, None) => MetricSpec::Esov,
        (MetricArg::Esov, Some(_)) => return Err(input("--alpha does not apply to --metric esov")),
        (MetricArg::Alpha, None) => return Err(input("--metric alpha needs --alpha")),
        (MetricArg::Alpha, Some(v)) => {
            let a = Alpha::new(v)?;
            check_alpha(a, ds)?;
            MetricSpec::alpha(a)
        }
    };
    let m = pairwise_distances(ds.rows(), ds.rows(), metric)?;
    let format = args.out.format.unwrap_or(Format::Tsv);
    let mut sink = Sink::new(args.out.out_dir.as_deref());
    let rows: Vec<Vec<f64>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
    let bytes = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Distances {
                metric: MetricSpec,
                values: Vec<Vec<f64>>,
            }
            let doc = Envelope::new(
                "distance",
                RunConfig::of(args),
                Distances {
                    metric,
                    values: rows,
                },
            )
            .dataset(loaded.info);
            json(&doc)?
        }
        _ => {
            let header: Vec<String> = std::iter::once("row".to_owned())
                .chain((1..=m.cols()).map(|j| j.to_string()))
                .collect();
            let body: Vec<Vec<String>> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    std::iter::once((i + 1).to_string())
                        .chain(r.iter().map(|&v| num(v)))
                        .collect()
                })
                .collect();
            table(io::delimiter(format), &header, &body)?
        }
    };
    sink.primary(format!("distances.{}", io::extension(format)), bytes);
    sink.commit()
}

#[derive(Serialize)]
struct ComponentZeros {
    component: String,
    zeros: usize,
    fraction: f64,
}

#[derive(Serialize)]
struct Summary {
    total_zeros: usize,
    components: Vec<ComponentZeros>,
    /// Share of observations with exactly 0, 1, 2, ... zero parts.
    zero_count_shares: Vec<f64>,
    groups: Vec<GroupSummaryRow>,
}

pub fn summarize(args: &SummarizeArgs) -> Result<(), CliError> {
    let loaded = io::load(&args.data)?;
    let ds = &loaded.ds;
    let z = zero_summary(ds);
    let components = ds
        .component_names()
        .iter()
        .enumerate()
        .map(|(j, name)| ComponentZeros {
            component: name.clone(),
            zeros: ds.rows().iter().filter(|r| r.parts()[j] == 0.0).count(),
            fraction: z.per_component_zero_fraction[j],
        })
        .collect();
    let summary = Summary {
        total_zeros: z.total_zeros(),
        components,
        zero_count_shares: z.zero_count_shares(),
        groups: group_summary(ds),
    };
    let doc = json(&Envelope::new("summarize", RunConfig::of(args), summary).dataset(loaded.info))?;
    let text = render_summary(ds).into_bytes();
    let mut sink = Sink::new(args.out.out_dir.as_deref());
    match args.out.format {
        None => {
            sink.primary("summary.txt", text);
            sink.extra("summary.json", doc);
        }
        Some(Format::Json) => {
            sink.primary("summary.json", doc);
            sink.extra("summary.txt", text);
        }
        Some(f) => {
            let mut csv = Vec::new();
            ds.write_csv(&mut csv, io::delimiter(f))?;
            sink.primary(format!("dataset.{}", io::extension(f)), csv);
            sink.extra("summary.json", doc);
            sink.extra("summary.txt", text);
        }
    }
    sink.commit()
}

/// Everything needed to rebuild a fitted classifier: the method and its
/// training data. Refitting is exact and cheap, so no fitted matrices are
/// stored.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub kind: String,
    pub software: Software,
    pub name: String,
    pub method: Method,
    pub seed: u64,
    pub dataset: DatasetInfo,
    pub training: TrainingData,
    #[serde(default)]
    pub priors: Option<Vec<f64>>,
    pub training_accuracy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainingData {
    pub components: Vec<String>,
    pub label_column: String,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

enum Fitted {
    Rda(RdaModel),
    Knn(KnnFit),
}

impl Fitted {
    fn new(method: &Method, ds: &LabeledCompositionDataset) -> Result<Self, CliError> {
        Ok(match *method {
            Method::Rda(p) => Fitted::Rda(fit_rda(ds, p)?),
            Method::Knn { k, metric } => Fitted::Knn(KnnFit::from_dataset(ds, k, metric)?),
        })
    }

    /// Ties of row `i` are broken with that row's own stream.
    fn predict(&self, x: &Composition, seed: u64, i: usize) -> Result<usize, Error> {
        match self {
            Fitted::Rda(m) => m.predict(x),
            Fitted::Knn(f) => f.predict(x, &mut tie_rng(seed, 0, i)),
        }
    }
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let loaded = io::load(&args.data)?;
    let ds = &loaded.ds;
    let method = resolve_method(&args.method, ds)?;
    if let Method::Knn { k, .. } = method {
        if k > ds.len() {
            return Err(input(format!(
                "k = {k} exceeds the {} observations",
                ds.len()
            )));
        }
    }
    let fitted = Fitted::new(&method, ds)?;
    let mut hits = 0;
    for (i, (x, &l)) in ds.rows().iter().zip(ds.labels()).enumerate() {
        hits += (fitted.predict(x, args.seed, i)? == l) as usize;
    }
    let model = ModelFile {
        schema_version: SCHEMA_VERSION,
        kind: "model".into(),
        software: Software::current(),
        name: method.name(),
        method,
        seed: args.seed,
        dataset: loaded.info,
        training: TrainingData {
            components: ds.component_names().to_vec(),
            label_column: ds.label_name().to_owned(),
            labels: ds
                .labels()
                .iter()
                .map(|&l| ds.group_names()[l].clone())
                .collect(),
            rows: ds.raw().to_vec(),
        },
        priors: match &fitted {
            Fitted::Rda(m) => Some(m.priors().to_vec()),
            Fitted::Knn(_) => None,
        },
        training_accuracy: hits as f64 / ds.len() as f64,
    };
    let mut sink = Sink::new(args.out.out_dir.as_deref());
    sink.primary("model.json", json(&model)?);
    sink.commit()
}

struct Queries {
    rows: Vec<Composition>,
    truth: Option<Vec<String>>,
}

/// Reads the model's component columns by name; the label column is optional.
fn read_queries(args: &DataArgs, components: &[String]) -> Result<Queries, CliError> {
    let bytes = io::read_bytes(&args.data)?;
    let schema = io::schema(args, &bytes);
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    let idx = components
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| Error::MissingColumn(c.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let label_idx = header.iter().position(|h| *h == schema.label_column);
    let label_map: BTreeMap<&str, &str> = schema
        .label_map
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect();
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let mut values = Vec::with_capacity(idx.len());
        for (&c, name) in idx.iter().zip(components) {
            let cell = rec.get(c).unwrap_or("");
            let v = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    column: name.clone(),
                    message: format!("'{cell}' is not a finite number"),
                })?;
            if v < 0.0 {
                return Err(Error::NegativeValue {
                    row,
                    column: name.clone(),
                }
                .into());
            }
            values.push(v);
        }
        rows.push(closure(&values).map_err(|_| Error::AllZeroRow { row })?);
        if let Some(l) = label_idx {
            let raw = rec.get(l).unwrap_or("");
            let label = if label_map.is_empty() {
                raw
            } else {
                label_map.get(raw).copied().ok_or_else(|| Error::Parse {
                    row,
                    column: schema.label_column.clone(),
                    message: format!("unknown label '{raw}'"),
                })?
            };
            truth.push(label.to_owned());
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            row: 1,
            column: String::new(),
            message: "no data rows".into(),
        }
        .into());
    }
    Ok(Queries {
        rows,
        truth: label_idx.map(|_| truth),
    })
}

#[derive(Serialize)]
struct Prediction {
    row: usize,
    predicted: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    observed: Option<String>,
}

pub fn predict(args: &PredictArgs) -> Result<(), CliError> {
    let model: ModelFile = serde_json::from_slice(&io::read_bytes(&args.model)?)
        .map_err(|e| input(format!("{}: not a model file: {e}", args.model)))?;
    if model.schema_version != SCHEMA_VERSION || model.kind != "model" {
        return Err(input(format!(
            "{}: unsupported model (kind '{}', schema {})",
            args.model, model.kind, model.schema_version
        )));
    }
    let t = &model.training;
    let ds = LabeledCompositionDataset::from_raw(
        t.components.clone(),
        t.rows.clone(),
        t.labels.clone(),
        args.model.clone(),
    )?;
    let queries = read_queries(&args.data, &t.components)?;
    if let Some(a) = model.method.alpha() {
        if a.value() <= 0.0 {
            if let Some(row) = queries.rows.iter().position(Composition::has_zeros) {
                return Err(input(format!(
                    "alpha = {a} needs strictly positive data, but row {} contains zeros",
                    row + 1
                )));
            }
        }
    }
    let fitted = Fitted::new(&model.method, &ds)?;
    let seed = args.seed.unwrap_or(model.seed);
    let mut predictions = Vec::with_capacity(queries.rows.len());
    for (i, x) in queries.rows.iter().enumerate() {
        let g = fitted.predict(x, seed, i)?;
        predictions.push(Prediction {
            row: i + 1,
            predicted: ds.group_names()[g].clone(),
            observed: queries.truth.as_ref().map(|t| t[i].clone()),
        });
    }
    let accuracy = queries.truth.as_ref().map(|_| {
        let hits = predictions
            .iter()
            .filter(|p| p.observed.as_ref() == Some(&p.predicted))
            .count();
        hits as f64 / predictions.len() as f64
    });
    let format = args.out.format.unwrap_or(Format::Tsv);
    let bytes = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Result_ {
                model: String,
                accuracy: Option<f64>,
                predictions: Vec<Prediction>,
            }
            let doc = Envelope::new(
                "predict",
                RunConfig::of(args),
                Result_ {
                    model: model.name.clone(),
                    accuracy,
                    predictions,
                },
            )
            .seed(seed);
            json(&doc)?
        }
        _ => {
            let mut header = vec!["row".to_owned(), "predicted".to_owned()];
            if queries.truth.is_some() {
                header.push("observed".into());
            }
            let body: Vec<Vec<String>> = predictions
                .iter()
                .map(|p| {
                    let mut r = vec![p.row.to_string(), p.predicted.clone()];
                    r.extend(p.observed.clone());
                    r
                })
                .collect();
            table(io::delimiter(format), &header, &body)?
        }
    };
    let mut sink = Sink::new(args.out.out_dir.as_deref());
    sink.primary(format!("predictions.{}", io::extension(format)), bytes);
    sink.commit()
}

fn group_table(report: &EvalReport, delimiter: u8) -> Result<Vec<u8>, CliError> {
    let header: Vec<String> = [
        "group",
        "size",
        "zero_fraction",
        "mean_accuracy",
        "sd_accuracy",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = report
        .per_group
        .iter()
        .map(|g| {
            vec![
                g.group.clone(),
                g.size.to_string(),
                num(g.zero_fraction),
                num(g.mean_accuracy),
                opt_num(g.sd_accuracy),
            ]
        })
        .collect();
    table(delimiter, &header, &rows)
}

fn zero_bin_table(report: &EvalReport, delimiter: u8) -> Result<Vec<u8>, CliError> {
    let header: Vec<String> = [
        "zeros",
        "min_zeros",
        "max_zeros",
        "occupancy",
        "replicates",
        "mean_accuracy",
        "sd_accuracy",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = report
        .per_zero_count
        .iter()
        .map(|b| {
            vec![
                b.bin.clone(),
                b.min_zeros.to_string(),
                b.max_zeros.to_string(),
                num(b.occupancy),
                b.replicates.to_string(),
                opt_num(b.mean_accuracy),
                opt_num(b.sd_accuracy),
            ]
        })
        .collect();
    table(delimiter, &header, &rows)
}

fn figure_tables(
    fig: &FigureData,
    delimiter: u8,
) -> Result<Vec<(&'static str, Vec<u8>)>, CliError> {
    let mut out = Vec::new();
    if !fig.alpha_curves.is_empty() {
        let header: Vec<String> = std::iter::once("alpha".to_owned())
            .chain(fig.alpha_curves.iter().map(|s| s.label.clone()))
            .collect();
        let rows: Vec<Vec<String>> = fig
            .alphas
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                std::iter::once(num(a))
                    .chain(fig.alpha_curves.iter().map(|s| opt_num(s.values[i])))
                    .collect()
            })
            .collect();
        out.push(("alpha_curves", table(delimiter, &header, &rows)?));
    }
    if !fig.knn_heat.is_empty() {
        let header: Vec<String> = std::iter::once("k".to_owned())
            .chain(fig.alphas.iter().map(|&a| num(a)))
            .collect();
        let rows: Vec<Vec<String>> = fig
            .ks
            .iter()
            .zip(&fig.knn_heat)
            .map(|(k, row)| {
                std::iter::once(k.to_string())
                    .chain(row.iter().map(|&v| opt_num(v)))
                    .collect()
            })
            .collect();
        out.push(("knn_heat", table(delimiter, &header, &rows)?));
    }
    if !fig.knn_vs_k.is_empty() {
        let header: Vec<String> = std::iter::once("k".to_owned())
            .chain(fig.knn_vs_k.iter().map(|s| s.label.clone()))
            .collect();
        let rows: Vec<Vec<String>> = fig
            .ks
            .iter()
            .enumerate()
            .map(|(i, k)| {
                std::iter::once(k.to_string())
                    .chain(fig.knn_vs_k.iter().map(|s| opt_num(s.values[i])))
                    .collect()
            })
            .collect();
        out.push(("knn_vs_k", table(delimiter, &header, &rows)?));
    }
    Ok(out)
}

fn figure_format(out: &OutArgs) -> Format {
    match out.format {
        Some(Format::Csv) => Format::Csv,
        _ => Format::Tsv,
    }
}

pub fn cv(args: &CvArgs) -> Result<(), CliError> {
    let loaded = io::load(&args.data)?;
    let ds = &loaded.ds;
    let method = resolve_method(&args.method, ds)?;
    let cv = cv_config(&args.cv, ds)?;
    if let Method::Knn { k, .. } = method {
        check_k(k, &cv, ds)?;
    }
    let report = cv_evaluate(ds, &method, &cv)?;
    let config = RunConfig {
        method: Some(method),
        cv: Some(cv),
        ..RunConfig::of(args)
    };
    let doc = Envelope::new("cv", config, &report)
        .seed(cv.seed)
        .dataset(loaded.info);
    let mut sink = Sink::new(args.out.out_dir.as_deref());
    sink.primary("report.json", json(&doc)?);
    let f = figure_format(&args.out);
    let ext = io::extension(f);
    sink.extra(
        format!("group_scatter.{ext}"),
        group_table(&report, io::delimiter(f))?,
    );
    sink.extra(
        format!("zero_bins.{ext}"),
        zero_bin_table(&report, io::delimiter(f))?,
    );
    sink.commit()
}

fn grid_spec(args: &GridArgs, ds: &LabeledCompositionDataset) -> Result<GridSpec, CliError> {
    let mut grid = GridSpec::for_dataset(ds);
    if let Some(r) = &args.alpha_grid {
        grid.alphas = parse_range(r)?;
    }
    if let Some(r) = &args.lambda_grid {
        grid.lambdas = parse_range(r)?;
    }
    if let Some(r) = &args.gamma_grid {
        grid.gammas = parse_range(r)?;
    }
    if let Some(r) = &args.k_grid {
        grid.ks = parse_int_range(r)?;
    }
    if !args.methods.is_empty() {
        let mut families = args.methods.clone();
        families.sort();
        families.dedup();
        grid = grid.with_families(&families);
    }
    grid.prior_mode = args.prior.into();
    grid.validate(ds)?;
    Ok(grid)
}

pub fn grid(args: &GridArgs) -> Result<(), CliError> {
    let loaded = io::load(&args.data)?;
    let ds = &loaded.ds;
    let grid = grid_spec(args, ds)?;
    let cv = cv_config(&args.cv, ds)?;
    if let Some(&k) = grid.ks.iter().max() {
        if grid
            .methods()?
            .iter()
            .any(|m| matches!(m, Method::Knn { .. }))
        {
            check_k(k, &cv, ds)?;
        }
    }
    let result = grid_search(ds, &grid, &cv)?;
    let config = RunConfig {
        cv: Some(cv),
        grid: Some(&grid),
        ..RunConfig::of(args)
    };
    let doc = Envelope::new("grid", config, &result)
        .seed(cv.seed)
        .dataset(loaded.info);
    let mut sink = Sink::new(args.out.out_dir.as_deref());
    sink.primary("report.json", json(&doc)?);
    let f = figure_format(&args.out);
    let (ext, delim) = (io::extension(f), io::delimiter(f));
    for (stem, bytes) in figure_tables(&result.figures, delim)? {
        sink.extra(format!("{stem}.{ext}"), bytes);
    }
    if let Some(best) = result.best_overall() {
        sink.extra(format!("group_scatter.{ext}"), group_table(best, delim)?);
        sink.extra(format!("zero_bins.{ext}"), zero_bin_table(best, delim)?);
    }
    sink.commit()?;
    if result.reports.is_empty() {
        return Err(CliError::Compute(anyhow!(
            "all {} grid points failed; see the failures in the report",
            result.failures.len()
        )));
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let format = match args.out.format {
        None | Some(Format::Csv) => Format::Csv,
        Some(Format::Tsv) => Format::Tsv,
        Some(Format::Json) => return Err(input("synth writes csv or tsv")),
    };
    let spec = SyntheticSpec {
        regime: args.regime.into(),
        dim: args.dim,
        groups: args.groups,
        group_size: args.group_size,
        separation: args.separation,
        seed: args.seed,
    };
    let ds = generate_synthetic(&spec)?;
    let mut bytes = Vec::new();
    ds.write_csv(&mut bytes, io::delimiter(format))?;
    #[derive(Serialize)]
    struct Generated<'a> {
        spec: &'a SyntheticSpec,
        file_sha256: String,
    }
    let manifest = Envelope::new(
        "synth",
        RunConfig::of(args),
        Generated {
            spec: &spec,
            file_sha256: io::sha256_hex(&bytes),
        },
    )
    .seed(args.seed);
    let mut sink = Sink::new(args.out.out_dir.as_deref());
    sink.primary(format!("synthetic.{}", io::extension(format)), bytes);
    sink.extra("synthetic.json", json(&manifest)?);
    sink.commit()
}

use std::fmt::Write as _;

use serde::Serialize;

use super::LabeledCompositionDataset;

/// Where the zeros of a dataset are.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSummary {
    /// Fraction of observations in which each component is zero.
    pub per_component_zero_fraction: Vec<f64>,
    /// Number of zero components in each observation.
    pub per_observation_zero_count: Vec<usize>,
    /// Fraction of each group's observations with at least one zero.
    pub per_group_any_zero_fraction: Vec<f64>,
}

impl ZeroSummary {
    pub fn total_zeros(&self) -> usize {
        self.per_observation_zero_count.iter().sum()
    }

    /// Share of observations with exactly `c` zeros, for `c` in
    /// `0..=max count`.
    pub fn zero_count_shares(&self) -> Vec<f64> {
        let n = self.per_observation_zero_count.len();
        let max = self
            .per_observation_zero_count
            .iter()
            .copied()
            .max()
            .unwrap_or(0);
        let mut counts = vec![0usize; max + 1];
        for &c in &self.per_observation_zero_count {
            counts[c] += 1;
        }
        counts.into_iter().map(|c| c as f64 / n as f64).collect()
    }
}

pub fn zero_summary(ds: &LabeledCompositionDataset) -> ZeroSummary {
    let n = ds.len() as f64;
    let mut per_component = vec![0usize; ds.dim()];
    let mut group_any = vec![0usize; ds.n_groups()];
    let mut per_observation = Vec::with_capacity(ds.len());
    for (row, &label) in ds.rows().iter().zip(ds.labels()) {
        let mut zeros = 0;
        for (j, &p) in row.parts().iter().enumerate() {
            if p == 0.0 {
                per_component[j] += 1;
                zeros += 1;
            }
        }
        if zeros > 0 {
            group_any[label] += 1;
        }
        per_observation.push(zeros);
    }
    let sizes = ds.group_sizes();
    ZeroSummary {
        per_component_zero_fraction: per_component.into_iter().map(|c| c as f64 / n).collect(),
        per_observation_zero_count: per_observation,
        per_group_any_zero_fraction: group_any
            .into_iter()
            .zip(sizes)
            .map(|(z, s)| if s == 0 { 0.0 } else { z as f64 / s as f64 })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSummaryRow {
    pub name: String,
    pub size: usize,
    pub with_zeros: usize,
}

pub fn group_summary(ds: &LabeledCompositionDataset) -> Vec<GroupSummaryRow> {
    let mut rows: Vec<GroupSummaryRow> = ds
        .group_names()
        .iter()
        .map(|name| GroupSummaryRow {
            name: name.clone(),
            size: 0,
            with_zeros: 0,
        })
        .collect();
    for (r, &l) in ds.rows().iter().zip(ds.labels()) {
        rows[l].size += 1;
        if r.has_zeros() {
            rows[l].with_zeros += 1;
        }
    }
    rows
}

fn pct(f: f64) -> String {
    format!("{:.2}%", 100.0 * f)
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(
        out,
        "{}",
        "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1))
    );
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
}

/// Aligned text tables: zero percentage per component, the distribution of
/// zero counts per observation, and the per-group counts.
pub fn render_summary(ds: &LabeledCompositionDataset) -> String {
    let z = zero_summary(ds);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}: n = {}, D = {}, groups = {}, zeros = {}\n",
        ds.provenance().source,
        ds.len(),
        ds.dim(),
        ds.n_groups(),
        z.total_zeros()
    );
    table(
        &mut out,
        &["component".into(), "zeros".into()],
        &ds.component_names()
            .iter()
            .zip(&z.per_component_zero_fraction)
            .map(|(n, f)| vec![n.clone(), pct(*f)])
            .collect::<Vec<_>>(),
    );
    out.push('\n');
    table(
        &mut out,
        &["zeros per observation".into(), "share".into()],
        &z.zero_count_shares()
            .iter()
            .enumerate()
            .map(|(c, f)| vec![c.to_string(), pct(*f)])
            .collect::<Vec<_>>(),
    );
    out.push('\n');
    table(
        &mut out,
        &["group".into(), "size".into(), "with zeros".into()],
        &group_summary(ds)
            .into_iter()
            .map(|g| vec![g.name, g.size.to_string(), g.with_zeros.to_string()])
            .collect::<Vec<_>>(),
    );
    out
}

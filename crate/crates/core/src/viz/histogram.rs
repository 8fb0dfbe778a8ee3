use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Two-sample Kolmogorov–Smirnov statistic: the largest gap between the
/// empirical CDFs of `a` and `b`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("KS statistic needs two non-empty samples".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Per-attribute histograms of two instance groups on shared bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleHistogram {
    pub attribute: String,
    /// `bins + 1` increasing edges; the last bin is closed.
    pub edges: Vec<f64>,
    pub counts_a: Vec<usize>,
    pub counts_b: Vec<usize>,
    pub ks: f64,
}

fn bin_edges(values: impl Iterator<Item = f64> + Clone, bins: usize) -> Vec<f64> {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect()
}

fn bin_counts(values: &[f64], edges: &[f64]) -> Vec<usize> {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut counts = vec![0; bins];
    for &v in values {
        let k = (((v - lo) / (hi - lo)) * bins as f64).floor();
        counts[(k.max(0.0) as usize).min(bins - 1)] += 1;
    }
    counts
}

/// Histograms of every feature column for rows `group_a` versus rows
/// `group_b`, ordered by KS statistic descending (ties by name).
pub fn ordered_histograms(
    features: &FeatureMatrix,
    group_a: &[usize],
    group_b: &[usize],
    bins: usize,
) -> Result<Vec<DoubleHistogram>> {
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be positive".into()));
    }
    if let Some(&bad) = group_a.iter().chain(group_b).find(|&&i| i >= features.n_rows()) {
        return Err(Error::InvalidArgument(format!("row {bad} out of range")));
    }
    let mut out = Vec::with_capacity(features.n_cols());
    for col in &features.columns {
        let a: Vec<f64> = group_a.iter().map(|&i| col.values[i]).collect();
        let b: Vec<f64> = group_b.iter().map(|&i| col.values[i]).collect();
        let edges = bin_edges(a.iter().chain(&b).copied(), bins);
        out.push(DoubleHistogram {
            attribute: col.name.clone(),
            counts_a: bin_counts(&a, &edges),
            counts_b: bin_counts(&b, &edges),
            edges,
            ks: ks_statistic(&a, &b)?,
        });
    }
    out.sort_by(|x, y| y.ks.total_cmp(&x.ks).then_with(|| x.attribute.cmp(&y.attribute)));
    Ok(out)
}

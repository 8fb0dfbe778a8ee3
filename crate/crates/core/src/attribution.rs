//! Model-agnostic Kernel SHAP over any batch scoring function.
//!
//! Missing features are filled from background rows (interventional
//! expectation). The Shapley-kernel weighted least-squares problem is solved
//! with the efficiency constraint eliminated exactly, so
//! `base_value + Σφ = f(x)` holds to floating-point precision.
//!
//! Small attribute counts use every coalition, which reproduces exact
//! Shapley values. Larger counts follow the usual budgeted scheme: subset
//! sizes (paired with their complements) are enumerated completely while the
//! budget allows, and the rest is sampled from the kernel's size
//! distribution.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplify::PipelineModel;

/// Upper bound on rows handed to the scorer in one call.
const EVAL_CHUNK_ROWS: usize = 8192;

/// A scalar function of a feature row, evaluated in batches.
pub trait Scorer: Sync {
    fn n_features(&self) -> usize;
    /// One score per row of `rows`.
    fn score_batch(&self, rows: &DMatrix<f64>) -> Result<Vec<f64>>;
}

impl Scorer for PipelineModel {
    fn n_features(&self) -> usize {
        self.mlp.input_width()
    }

    fn score_batch(&self, rows: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.score_normalized(rows)
    }
}

/// Adapts a per-row closure into a [`Scorer`].
pub struct FnScorer<F> {
    n_features: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnScorer<F> {
    pub fn new(n_features: usize, f: F) -> Self {
        Self { n_features, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Scorer for FnScorer<F> {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score_batch(&self, rows: &DMatrix<f64>) -> Result<Vec<f64>> {
        let mut buf = vec![0.0; rows.ncols()];
        Ok(rows
            .row_iter()
            .map(|r| {
                buf.iter_mut().zip(r.iter()).for_each(|(b, v)| *b = *v);
                (self.f)(&buf)
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapConfig {
    /// Coalition budget for the sampled estimator.
    pub n_samples: usize,
    /// At or below this many features every coalition is enumerated.
    pub exact_max_features: usize,
    /// Maximum number of background rows.
    pub background_cap: usize,
    pub seed: u64,
}

impl Default for ShapConfig {
    fn default() -> Self {
        Self {
            n_samples: 2048,
            exact_max_features: 12,
            background_cap: 100,
            seed: 0,
        }
    }
}

/// A coalition: `present[j]` keeps feature `j` from the explained instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Coalition {
    pub present: Vec<bool>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub phi: Vec<f64>,
    pub base_value: f64,
    /// Model output for the explained instance.
    pub output: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Shapley kernel weight of a coalition of size `s` out of `m` features.
pub fn shapley_kernel_weight(m: usize, s: usize) -> f64 {
    (m - 1) as f64 / (binomial(m, s) * s as f64 * (m - s) as f64)
}

/// Every proper non-empty coalition with its Shapley kernel weight.
pub fn all_coalitions(m: usize) -> Vec<Coalition> {
    assert!(m < 31, "exhaustive enumeration of {m} features is not feasible");
    (1u32..(1u32 << m) - 1)
        .map(|bits| {
            let present: Vec<bool> = (0..m).map(|j| bits >> j & 1 == 1).collect();
            let s = bits.count_ones() as usize;
            Coalition {
                present,
                weight: shapley_kernel_weight(m, s),
            }
        })
        .collect()
}

fn for_each_subset(m: usize, size: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(&idx);
        let mut i = size;
        while i > 0 && idx[i - 1] == m - size + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for k in i..size {
            idx[k] = idx[k - 1] + 1;
        }
    }
}

/// Budgeted coalition design: complete subset sizes first, then samples
/// drawn from the remaining kernel mass.
pub fn sampled_coalitions(m: usize, n_samples: usize, rng: &mut impl Rng) -> Vec<Coalition> {
    assert!(m >= 2);
    let max_coalitions = if m >= 63 { usize::MAX } else { (1usize << m) - 2 };
    let n_samples = n_samples.min(max_coalitions);

    let num_sizes = m / 2; // ceil((m - 1) / 2)
    let num_paired = (m - 1) / 2;
    let mut weight_vector: Vec<f64> = (1..=num_sizes)
        .map(|s| (m - 1) as f64 / (s * (m - s)) as f64)
        .collect();
    for w in weight_vector.iter_mut().take(num_paired) {
        *w *= 2.0;
    }
    let total: f64 = weight_vector.iter().sum();
    weight_vector.iter_mut().for_each(|w| *w /= total);

    let mut out: Vec<Coalition> = Vec::with_capacity(n_samples);
    let mut num_full = 0;
    let mut samples_left = n_samples as f64;
    let mut remaining = weight_vector.clone();
    for size in 1..=num_sizes {
        let paired = size <= num_paired;
        let mut nsubsets = binomial(m, size);
        if paired {
            nsubsets *= 2.0;
        }
        if samples_left * remaining[size - 1] / nsubsets < 1.0 - 1e-8 {
            break;
        }
        num_full += 1;
        samples_left -= nsubsets;
        if remaining[size - 1] < 1.0 {
            let scale = 1.0 - remaining[size - 1];
            remaining.iter_mut().for_each(|w| *w /= scale);
        }
        let mut w = weight_vector[size - 1] / binomial(m, size);
        if paired {
            w /= 2.0;
        }
        for_each_subset(m, size, |idx| {
            let mut present = vec![false; m];
            idx.iter().for_each(|&j| present[j] = true);
            if paired {
                let complement = present.iter().map(|p| !p).collect();
                out.push(Coalition { present, weight: w });
                out.push(Coalition {
                    present: complement,
                    weight: w,
                });
            } else {
                out.push(Coalition { present, weight: w });
            }
        });
    }

    let n_fixed = out.len();
    let mut samples_left = samples_left.max(0.0).round() as usize;
    if num_full < num_sizes && samples_left > 0 {
        let mut dist: Vec<f64> = weight_vector.clone();
        for w in dist.iter_mut().take(num_paired) {
            *w /= 2.0;
        }
        let dist = &dist[num_full..];
        let dist_total: f64 = dist.iter().sum();
        let mut seen: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut order: Vec<usize> = (0..m).collect();
        let max_draws = 4 * samples_left;
        let mut draws = 0;
        while samples_left > 0 && draws < max_draws {
            draws += 1;
            let mut u = rng.random::<f64>() * dist_total;
            let mut k = 0;
            while k + 1 < dist.len() && u >= dist[k] {
                u -= dist[k];
                k += 1;
            }
            let size = k + num_full + 1;
            order.shuffle(rng);
            let mut present = vec![false; m];
            order[..size].iter().for_each(|&j| present[j] = true);

            let existing = seen.get(&present).copied();
            match existing {
                Some(i) => out[i].weight += 1.0,
                None => {
                    seen.insert(present.clone(), out.len());
                    out.push(Coalition {
                        present: present.clone(),
                        weight: 1.0,
                    });
                    samples_left -= 1;
                }
            }
            if samples_left > 0 && size <= num_paired {
                let complement: Vec<bool> = present.iter().map(|p| !p).collect();
                match existing {
                    Some(_) => {
                        let i = seen[&complement];
                        out[i].weight += 1.0;
                    }
                    None => {
                        seen.insert(complement.clone(), out.len());
                        out.push(Coalition {
                            present: complement,
                            weight: 1.0,
                        });
                        samples_left -= 1;
                    }
                }
            }
        }
        let weight_left: f64 = weight_vector[num_full..].iter().sum();
        let sampled: f64 = out[n_fixed..].iter().map(|c| c.weight).sum();
        if sampled > 0.0 {
            out[n_fixed..].iter_mut().for_each(|c| c.weight *= weight_left / sampled);
        }
    }
    out
}

fn check_width(expected: usize, actual: usize, context: &'static str) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            expected,
            actual,
            context,
        });
    }
    Ok(())
}

/// Mean model output over the background rows.
pub fn background_value(scorer: &dyn Scorer, background: &DMatrix<f64>) -> Result<f64> {
    if background.nrows() == 0 {
        return Err(Error::InvalidArgument("background set is empty".into()));
    }
    let scores = scorer.score_batch(background)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Expected output for each coalition, features outside the coalition
/// taken from each background row in turn.
fn coalition_values(
    scorer: &dyn Scorer,
    instance: &[f64],
    background: &DMatrix<f64>,
    coalitions: &[Coalition],
) -> Result<Vec<f64>> {
    let m = instance.len();
    let nb = background.nrows();
    let per_chunk = (EVAL_CHUNK_ROWS / nb).max(1);
    let mut values = Vec::with_capacity(coalitions.len());
    for chunk in coalitions.chunks(per_chunk) {
        let mut rows = DMatrix::zeros(chunk.len() * nb, m);
        for (c, coal) in chunk.iter().enumerate() {
            for j in 0..m {
                if coal.present[j] {
                    for r in 0..nb {
                        rows[(c * nb + r, j)] = instance[j];
                    }
                } else {
                    for r in 0..nb {
                        rows[(c * nb + r, j)] = background[(r, j)];
                    }
                }
            }
        }
        let scores = scorer.score_batch(&rows)?;
        for c in 0..chunk.len() {
            values.push(scores[c * nb..(c + 1) * nb].iter().sum::<f64>() / nb as f64);
        }
    }
    Ok(values)
}

/// Kernel SHAP for an explicit coalition design, with a precomputed
/// background expectation.
pub fn kernel_shap_with_design(
    scorer: &dyn Scorer,
    instance: &[f64],
    background: &DMatrix<f64>,
    base_value: f64,
    coalitions: &[Coalition],
) -> Result<Explanation> {
    let m = instance.len();
    check_width(scorer.n_features(), m, "instance width")?;
    check_width(m, background.ncols(), "background width")?;
    let x = DMatrix::from_row_slice(1, m, instance);
    let output = scorer.score_batch(&x)?[0];
    let delta = output - base_value;
    if m == 0 {
        return Ok(Explanation {
            phi: vec![],
            base_value,
            output,
        });
    }
    if m == 1 {
        return Ok(Explanation {
            phi: vec![delta],
            base_value,
            output,
        });
    }

    let values = coalition_values(scorer, instance, background, coalitions)?;
    // eliminate the last feature: φ_last = Δ − Σ_{j<last} φ_j
    let k = m - 1;
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    let mut a = vec![0.0; k];
    for (coal, v) in coalitions.iter().zip(&values) {
        let z_last = if coal.present[k] { 1.0 } else { 0.0 };
        for j in 0..k {
            a[j] = if coal.present[j] { 1.0 } else { 0.0 } - z_last;
        }
        let y = v - base_value - z_last * delta;
        let w = coal.weight;
        for i in 0..k {
            if a[i] == 0.0 {
                continue;
            }
            rhs[i] += w * a[i] * y;
            for j in 0..k {
                gram[(i, j)] += w * a[i] * a[j];
            }
        }
    }
    let diag_max = gram.diagonal().iter().fold(0.0f64, |acc, v| acc.max(*v));
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::RankDeficient(format!("{} coalitions for {m} features", coalitions.len())))?;
    let l_min = chol.l().diagonal().iter().fold(f64::INFINITY, |acc, v| acc.min(*v));
    if !(diag_max > 0.0) || l_min * l_min <= diag_max * 1e-12 {
        return Err(Error::RankDeficient(format!(
            "{} coalitions for {m} features",
            coalitions.len()
        )));
    }
    let sol = chol.solve(&rhs);
    let mut phi: Vec<f64> = sol.iter().copied().collect();
    let last = delta - phi.iter().sum::<f64>();
    phi.push(last);
    Ok(Explanation {
        phi,
        base_value,
        output,
    })
}

/// Explains one instance. Uses every coalition when the feature count is at
/// most `cfg.exact_max_features`, the budgeted sampler otherwise.
pub fn kernel_shap(
    scorer: &dyn Scorer,
    instance: &[f64],
    background: &DMatrix<f64>,
    cfg: &ShapConfig,
    rng: &mut impl Rng,
) -> Result<Explanation> {
    let m = instance.len();
    let base = background_value(scorer, background)?;
    let design = if m <= cfg.exact_max_features {
        if m < 2 { Vec::new() } else { all_coalitions(m) }
    } else {
        if cfg.n_samples < 2 * m + 2 {
            return Err(Error::InvalidArgument(format!(
                "n_samples must be at least 2·features + 2 = {}, got {}",
                2 * m + 2,
                cfg.n_samples
            )));
        }
        sampled_coalitions(m, cfg.n_samples, rng)
    };
    kernel_shap_with_design(scorer, instance, background, base, &design)
}

/// Per-instance, per-attribute contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapMatrix {
    pub instance_ids: Vec<String>,
    pub attribute_names: Vec<String>,
    /// `values[i][j]`: contribution of attribute `j` for instance `i`.
    pub values: Vec<Vec<f64>>,
    pub base_value: f64,
    /// Model output per instance.
    pub outputs: Vec<f64>,
}

impl ShapMatrix {
    /// Largest `|base + Σφ − output|` over all instances.
    pub fn efficiency_residual(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.outputs)
            .map(|(phi, out)| (self.base_value + phi.iter().sum::<f64>() - out).abs())
            .fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }
}

/// Seeded background subsample (row indices, ascending).
pub fn background_indices(n: usize, cap: usize, seed: u64) -> Vec<usize> {
    if n <= cap {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, cap).into_vec();
    idx.sort_unstable();
    idx
}

/// Explains every row of `x` against a background subsampled from `x`
/// itself. Rows are processed in parallel; results keep row order.
pub fn explain_rows(
    scorer: &dyn Scorer,
    ids: &[String],
    names: &[String],
    x: &DMatrix<f64>,
    cfg: &ShapConfig,
) -> Result<ShapMatrix> {
    let bg_idx = background_indices(x.nrows(), cfg.background_cap.max(1), cfg.seed);
    explain_rows_against(scorer, ids, names, x, &x.select_rows(&bg_idx), cfg)
}

/// Explains every row of `x` against an explicit background sample.
pub fn explain_rows_against(
    scorer: &dyn Scorer,
    ids: &[String],
    names: &[String],
    x: &DMatrix<f64>,
    background: &DMatrix<f64>,
    cfg: &ShapConfig,
) -> Result<ShapMatrix> {
    check_width(x.nrows(), ids.len(), "instance ids")?;
    check_width(x.ncols(), names.len(), "attribute names")?;
    check_width(x.ncols(), background.ncols(), "background width")?;
    if x.nrows() == 0 {
        return Err(Error::InvalidArgument("no instances to explain".into()));
    }
    if background.nrows() == 0 {
        return Err(Error::InvalidArgument("empty background sample".into()));
    }
    let base = background_value(scorer, background)?;
    let m = x.ncols();
    let exact = if m <= cfg.exact_max_features && m >= 2 {
        Some(all_coalitions(m))
    } else {
        None
    };
    if exact.is_none() && m >= 2 && cfg.n_samples < 2 * m + 2 {
        return Err(Error::InvalidArgument(format!(
            "n_samples must be at least 2·features + 2 = {}, got {}",
            2 * m + 2,
            cfg.n_samples
        )));
    }

    let explanations: Vec<Explanation> = (0..x.nrows())
        .into_par_iter()
        .map(|i| {
            let row: Vec<f64> = x.row(i).iter().copied().collect();
            let design = match &exact {
                Some(d) => std::borrow::Cow::Borrowed(d),
                None if m < 2 => std::borrow::Cow::Owned(Vec::new()),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(i as u64 + 1);
                    std::borrow::Cow::Owned(sampled_coalitions(m, cfg.n_samples, &mut rng))
                }
            };
            kernel_shap_with_design(scorer, &row, background, base, &design)
        })
        .collect::<Result<_>>()?;

    Ok(ShapMatrix {
        instance_ids: ids.to_vec(),
        attribute_names: names.to_vec(),
        outputs: explanations.iter().map(|e| e.output).collect(),
        values: explanations.into_iter().map(|e| e.phi).collect(),
        base_value: base,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAttribute {
    pub name: String,
    pub mean_abs_shap: f64,
}

/// Attributes by descending mean |φ|; ties broken by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRanking {
    pub entries: Vec<RankedAttribute>,
}

impl AttributeRanking {
    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }
}

pub fn rank_attributes(shap: &ShapMatrix) -> AttributeRanking {
    let n = shap.values.len().max(1) as f64;
    let mut entries: Vec<RankedAttribute> = shap
        .attribute_names
        .iter()
        .enumerate()
        .map(|(j, name)| RankedAttribute {
            name: name.clone(),
            mean_abs_shap: shap.values.iter().map(|r| r[j].abs()).sum::<f64>() / n,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.mean_abs_shap
            .total_cmp(&a.mean_abs_shap)
            .then_with(|| a.name.cmp(&b.name))
    });
    AttributeRanking { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact Shapley values by the subset formula, independent of the
    /// regression route.
    fn shapley_oracle(f: &dyn Fn(&[f64]) -> f64, x: &[f64], bg: &DMatrix<f64>) -> Vec<f64> {
        let m = x.len();
        let value = |mask: u32| -> f64 {
            let mut total = 0.0;
            for r in 0..bg.nrows() {
                let row: Vec<f64> = (0..m)
                    .map(|j| if mask >> j & 1 == 1 { x[j] } else { bg[(r, j)] })
                    .collect();
                total += f(&row);
            }
            total / bg.nrows() as f64
        };
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        (0..m)
            .map(|i| {
                let mut phi = 0.0;
                for mask in 0u32..(1 << m) {
                    if mask >> i & 1 == 1 {
                        continue;
                    }
                    let s = mask.count_ones() as usize;
                    let w = fact(s) * fact(m - s - 1) / fact(m);
                    phi += w * (value(mask | 1 << i) - value(mask));
                }
                phi
            })
            .collect()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn linear_model_closed_form() {
        let w = [0.5, -2.0, 1.5, 3.0];
        let f = move |r: &[f64]| r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 0.25;
        let scorer = FnScorer::new(4, f);
        let bg = DMatrix::from_row_slice(3, 4, &[0., 1., 2., 3., 1., -1., 0., 2., 4., 0., 1., 1.]);
        let x = [1.0, 2.0, -1.0, 0.5];
        let e = kernel_shap(&scorer, &x, &bg, &ShapConfig::default(), &mut rng()).unwrap();
        let oracle = shapley_oracle(&f, &x, &bg);
        for j in 0..4 {
            let mean_bg = bg.column(j).mean();
            assert!((e.phi[j] - w[j] * (x[j] - mean_bg)).abs() < 1e-8);
            assert!((e.phi[j] - oracle[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn nonlinear_model_matches_oracle() {
        let f = |r: &[f64]| (r[0] * r[1]).tanh() + r[2].max(0.0) * r[3] - r[4] * r[4];
        let scorer = FnScorer::new(5, f);
        let bg = DMatrix::from_fn(4, 5, |i, j| ((i * 5 + j) as f64 * 0.37).sin());
        let x = [0.9, -0.4, 1.2, 0.3, -0.8];
        let e = kernel_shap(&scorer, &x, &bg, &ShapConfig::default(), &mut rng()).unwrap();
        let oracle = shapley_oracle(&f, &x, &bg);
        for j in 0..5 {
            assert!((e.phi[j] - oracle[j]).abs() < 1e-8, "{j}: {} vs {}", e.phi[j], oracle[j]);
        }
        assert!((e.base_value + e.phi.iter().sum::<f64>() - e.output).abs() < 1e-12);
    }

    #[test]
    fn instance_equal_to_background() {
        let scorer = FnScorer::new(3, |r: &[f64]| r[0] * r[1] + r[2].exp());
        let x = [0.3, 1.0, -2.0];
        let bg = DMatrix::from_row_slice(1, 3, &x);
        let e = kernel_shap(&scorer, &x, &bg, &ShapConfig::default(), &mut rng()).unwrap();
        assert!(e.phi.iter().all(|p| p.abs() < 1e-12));
    }

    #[test]
    fn symmetric_attributes_share_credit() {
        let scorer = FnScorer::new(3, |r: &[f64]| r[0] * r[1] + 0.5 * r[2]);
        let x = [2.0, 2.0, 1.0];
        let bg = DMatrix::from_row_slice(2, 3, &[0., 0., 0., 1., 1., 3.]);
        let e = kernel_shap(&scorer, &x, &bg, &ShapConfig::default(), &mut rng()).unwrap();
        assert!((e.phi[0] - e.phi[1]).abs() < 1e-8);
    }

    #[test]
    fn dummy_attribute_gets_nothing() {
        let f = |r: &[f64]| r[0].sin() * r[2] + r[3];
        let x = [1.0, 5.0, -1.0, 2.0];
        let bg = DMatrix::from_fn(5, 4, |i, j| (i as f64 - 2.0) * (j as f64 + 0.5));
        let e = kernel_shap(&FnScorer::new(4, f), &x, &bg, &ShapConfig::default(), &mut rng()).unwrap();
        assert!(e.phi[1].abs() < 1e-10);
    }

    #[test]
    fn sampled_design_on_many_features() {
        // 14 features exceed the exact threshold; an additive model is
        // recovered exactly by any full-rank design
        let m = 14;
        let w: Vec<f64> = (0..m).map(|j| (j as f64 - 6.5) * 0.3).collect();
        let wc = w.clone();
        let f = move |r: &[f64]| r.iter().zip(&wc).map(|(a, b)| a * b).sum::<f64>();
        let bg = DMatrix::from_fn(6, m, |i, j| ((i * m + j) as f64).cos());
        let x: Vec<f64> = (0..m).map(|j| j as f64 * 0.1).collect();
        let cfg = ShapConfig {
            n_samples: 200,
            ..ShapConfig::default()
        };
        let e = kernel_shap(&FnScorer::new(m, f), &x, &bg, &cfg, &mut rng()).unwrap();
        for j in 0..m {
            let expect = w[j] * (x[j] - bg.column(j).mean());
            assert!((e.phi[j] - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn budget_design_counts() {
        // 8 features, budget above 2^8 - 2: the design is exhaustive
        let d = sampled_coalitions(8, 2048, &mut rng());
        assert_eq!(d.len(), 254);
        let mut seen = std::collections::HashSet::new();
        assert!(d.iter().all(|c| seen.insert(c.present.clone())));
        // kernel weights proportional to the exact ones
        let exact = all_coalitions(8);
        let lookup: HashMap<Vec<bool>, f64> = exact.into_iter().map(|c| (c.present, c.weight)).collect();
        let ratio = d[0].weight / lookup[&d[0].present];
        for c in &d {
            assert!((c.weight / lookup[&c.present] - ratio).abs() < 1e-9);
        }
        // partial budget
        let d = sampled_coalitions(16, 300, &mut rng());
        assert!(d.len() <= 300 && d.len() >= 32);
        assert!(d.iter().all(|c| c.weight > 0.0));
    }

    #[test]
    fn identical_coalitions_are_rank_deficient() {
        let scorer = FnScorer::new(3, |r: &[f64]| r.iter().sum());
        let bg = DMatrix::zeros(1, 3);
        let c = Coalition {
            present: vec![true, false, false],
            weight: 1.0,
        };
        let design = vec![c.clone(), c.clone(), c];
        assert!(matches!(
            kernel_shap_with_design(&scorer, &[1., 2., 3.], &bg, 0.0, &design),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn too_few_samples_rejected() {
        let m = 13;
        let scorer = FnScorer::new(m, |r: &[f64]| r[0]);
        let bg = DMatrix::zeros(1, m);
        let cfg = ShapConfig {
            n_samples: 10,
            ..ShapConfig::default()
        };
        assert!(kernel_shap(&scorer, &vec![1.0; m], &bg, &cfg, &mut rng()).is_err());
    }

    #[test]
    fn constant_scorer() {
        let scorer = FnScorer::new(3, |_: &[f64]| 4.5);
        let x = DMatrix::from_fn(5, 3, |i, j| (i + j) as f64);
        let ids: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let names = vec!["a".into(), "b".into(), "c".into()];
        let shap = explain_rows(&scorer, &ids, &names, &x, &ShapConfig::default()).unwrap();
        assert_eq!(shap.base_value, 4.5);
        assert!(shap.values.iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn ranking_order_and_ties() {
        let mk = |values: Vec<Vec<f64>>, names: &[&str]| ShapMatrix {
            instance_ids: (0..values.len()).map(|i| i.to_string()).collect(),
            attribute_names: names.iter().map(|s| s.to_string()).collect(),
            outputs: vec![0.0; values.len()],
            values,
            base_value: 0.0,
        };
        let r = rank_attributes(&mk(vec![vec![0.3, -0.1, 0.2], vec![-0.3, 0.1, -0.2]], &["x", "y", "z"]));
        assert_eq!(r.names(), vec!["x", "z", "y"]);

        let r = rank_attributes(&mk(vec![vec![0.0; 3]; 2], &["m", "k", "q"]));
        assert_eq!(r.names(), vec!["k", "m", "q"]);

        let r = rank_attributes(&mk(vec![vec![0.1, 0.5, 0.5]], &["c", "b", "a"]));
        assert_eq!(r.names(), vec!["a", "b", "c"]);
    }
}

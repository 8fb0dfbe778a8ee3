//! Composite variables: unit-norm linear combinations of selected
//! attributes that maximize a dependence measure with the 1D
//! representation.
//!
//! For Pearson correlation the optimum is the least-squares fit of the
//! target on the selected columns (intercept included, then dropped, since
//! correlation ignores shifts). Spearman correlation is piecewise constant
//! in the weights, so it is maximized with a derivative-free trust-region
//! search seeded with the Pearson solution.

mod trust_region;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use crate::stats::{pearson, spearman};
pub use trust_region::{minimize, Minimum, TrustRegionOptions};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Pearson,
    Spearman,
}

impl Measure {
    pub fn evaluate(self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            Measure::Pearson => pearson(x, y),
            Measure::Spearman => spearman(x, y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeVariable {
    pub attribute_names: Vec<String>,
    /// Unit Euclidean norm.
    pub weights: Vec<f64>,
    /// Weights rounded to one decimal for display.
    pub display_weights: Vec<f64>,
    pub measure: Measure,
    /// Dependence with the target; non-negative by sign convention.
    pub achieved_dependence: f64,
}

impl CompositeVariable {
    fn new(attribute_names: Vec<String>, weights: Vec<f64>, measure: Measure, achieved: f64) -> Self {
        let display_weights = weights.iter().map(|w| round_to_tenth(*w)).collect();
        Self {
            attribute_names,
            weights,
            display_weights,
            measure,
            achieved_dependence: achieved,
        }
    }

    /// Composite value per instance.
    pub fn apply(&self, columns: &[Vec<f64>]) -> Vec<f64> {
        combine(columns, &self.weights)
    }

    /// Rounded formula such as `-0.4 open + 0.7 consci`.
    pub fn formula(&self) -> String {
        let mut out = String::new();
        for (i, (w, name)) in self.display_weights.iter().zip(&self.attribute_names).enumerate() {
            if i == 0 {
                out.push_str(&format!("{w:.1} {name}"));
            } else if *w < 0.0 {
                out.push_str(&format!(" - {:.1} {name}", -w));
            } else {
                out.push_str(&format!(" + {w:.1} {name}"));
            }
        }
        out
    }
}

fn round_to_tenth(w: f64) -> f64 {
    let r = (w * 10.0).round() / 10.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn combine(columns: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = columns.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| columns.iter().zip(weights).map(|(c, w)| c[i] * w).sum())
        .collect()
}

fn normalize(w: &[f64]) -> Vec<f64> {
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter().map(|v| v / norm).collect()
}

fn validate(names: &[String], columns: &[Vec<f64>], target: &[f64]) -> Result<()> {
    if columns.is_empty() {
        return Err(Error::InvalidArgument("select at least one attribute".into()));
    }
    if names.len() != columns.len() {
        return Err(Error::DimensionMismatch {
            expected: columns.len(),
            actual: names.len(),
            context: "attribute names",
        });
    }
    if target.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 instances, got {}",
            target.len()
        )));
    }
    for c in columns {
        if c.len() != target.len() {
            return Err(Error::DimensionMismatch {
                expected: target.len(),
                actual: c.len(),
                context: "selected column length",
            });
        }
    }
    Ok(())
}

/// Thin QR of the centered columns by modified Gram–Schmidt with one
/// reorthogonalization pass. Fails on a column that is (numerically) in the
/// span of the earlier ones.
fn centered_qr(names: &[String], columns: &[Vec<f64>]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = columns[0].len();
    let k = columns.len();
    let mut q = DMatrix::<f64>::zeros(n, k);
    let mut r = DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        let mean = crate::stats::mean(&columns[j]);
        let mut v = DVector::from_iterator(n, columns[j].iter().map(|x| x - mean));
        let original = v.norm();
        for _pass in 0..2 {
            for i in 0..j {
                let proj = q.column(i).dot(&v);
                r[(i, j)] += proj;
                v.axpy(-proj, &q.column(i), 1.0);
            }
        }
        let norm = v.norm();
        if !(norm > 1e-10 * original.max(f64::MIN_POSITIVE)) || original == 0.0 {
            return Err(Error::Collinear {
                dependent: names[j].clone(),
                basis: names[..j].to_vec(),
            });
        }
        r[(j, j)] = norm;
        q.set_column(j, &(v / norm));
    }
    Ok((q, r))
}

/// Maximizes Pearson correlation with `target` over unit-norm weights.
pub fn optimize_pearson(names: &[String], columns: &[Vec<f64>], target: &[f64]) -> Result<CompositeVariable> {
    validate(names, columns, target)?;
    let (q, r) = centered_qr(names, columns)?;
    let tm = crate::stats::mean(target);
    let tc = DVector::from_iterator(target.len(), target.iter().map(|t| t - tm));
    if tc.norm() == 0.0 {
        return Err(Error::UndefinedCorrelation("the target is constant".into()));
    }
    let qt = q.transpose() * &tc;
    let beta = r
        .solve_upper_triangular(&qt)
        .ok_or_else(|| Error::UndefinedCorrelation("singular triangular factor".into()))?;
    if beta.norm() == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "the target is uncorrelated with every selected attribute".into(),
        ));
    }
    let mut weights = normalize(beta.as_slice());
    let mut achieved = pearson(&combine(columns, &weights), target)?;
    if achieved < 0.0 {
        weights.iter_mut().for_each(|w| *w = -*w);
        achieved = -achieved;
    }
    Ok(CompositeVariable::new(names.to_vec(), weights, Measure::Pearson, achieved))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpearmanOptions {
    pub rho_begin: f64,
    pub rho_end: f64,
    pub max_evals: usize,
    /// Extra seeded random starting directions besides the Pearson init.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SpearmanOptions {
    fn default() -> Self {
        Self {
            rho_begin: 0.5,
            rho_end: 1e-4,
            max_evals: 1500,
            restarts: 4,
            seed: 0,
        }
    }
}

/// Maximizes Spearman correlation starting from `init` (normally the
/// Pearson optimum). Returns the better of the init and the search result.
pub fn optimize_spearman(
    names: &[String],
    columns: &[Vec<f64>],
    target: &[f64],
    init: &[f64],
    opts: &SpearmanOptions,
) -> Result<CompositeVariable> {
    validate(names, columns, target)?;
    centered_qr(names, columns)?;
    if init.len() != columns.len() {
        return Err(Error::DimensionMismatch {
            expected: columns.len(),
            actual: init.len(),
            context: "initial weights",
        });
    }
    let init_norm = init.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(init_norm > 0.0) {
        return Err(Error::InvalidArgument("initial weights must be non-zero".into()));
    }
    let init = normalize(init);
    let target_ranks = crate::stats::average_ranks(target);
    let score = |w: &[f64]| -> f64 {
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return f64::NEG_INFINITY;
        }
        let comp = combine(columns, w);
        pearson(&crate::stats::average_ranks(&comp), &target_ranks).unwrap_or(f64::NEG_INFINITY)
    };

    let init_value = score(&init);
    let mut best_w = init.clone();
    let mut best_value = init_value;

    if columns.len() == 1 {
        if best_value < 0.0 {
            best_w = vec![-best_w[0]];
            best_value = -best_value;
        }
        return Ok(CompositeVariable::new(names.to_vec(), best_w, Measure::Spearman, best_value));
    }

    let tr = TrustRegionOptions {
        rho_begin: opts.rho_begin,
        rho_end: opts.rho_end,
        max_evals: opts.max_evals,
    };
    let mut starts = vec![init.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        let d: Vec<f64> = (0..columns.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        starts.push(normalize(&d));
    }
    for start in starts {
        let m = minimize(|w| -score(w), &start, &tr);
        let w = normalize(&m.x);
        let v = score(&w);
        if v > best_value {
            best_value = v;
            best_w = w;
        }
    }
    if best_value < 0.0 {
        best_w.iter_mut().for_each(|w| *w = -*w);
    }
    let achieved = spearman(&combine(columns, &best_w), target)?;
    Ok(CompositeVariable::new(names.to_vec(), best_w, Measure::Spearman, achieved))
}

/// Builds a composite for either measure; Spearman starts from the
/// Pearson optimum.
pub fn construct(
    names: &[String],
    columns: &[Vec<f64>],
    target: &[f64],
    measure: Measure,
    opts: &SpearmanOptions,
) -> Result<CompositeVariable> {
    let pearson_opt = optimize_pearson(names, columns, target)?;
    match measure {
        Measure::Pearson => Ok(pearson_opt),
        Measure::Spearman => optimize_spearman(names, columns, target, &pearson_opt.weights, opts),
    }
}

/// Correlation-strength bands on `|c|`. Defaults follow the
/// Dancey–Reidy categorization: below 0.1 negligible, then weak up to 0.4,
/// moderate up to 0.7, strong below 1 and perfect at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrengthBands {
    pub weak: f64,
    pub moderate: f64,
    pub strong: f64,
}

impl Default for StrengthBands {
    fn default() -> Self {
        Self {
            weak: 0.1,
            moderate: 0.4,
            strong: 0.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Negligible,
    Weak,
    Moderate,
    Strong,
    Perfect,
}

pub fn label_correlation_strength(c: f64, bands: &StrengthBands) -> Result<Strength> {
    const EPS: f64 = 1e-12;
    if !c.is_finite() || c.abs() > 1.0 + EPS {
        return Err(Error::InvalidArgument(format!("correlation {c} outside [-1, 1]")));
    }
    let a = c.abs();
    Ok(if a >= 1.0 - EPS {
        Strength::Perfect
    } else if a >= bands.strong {
        Strength::Strong
    } else if a >= bands.moderate {
        Strength::Moderate
    } else if a >= bands.weak {
        Strength::Weak
    } else {
        Strength::Negligible
    })
}

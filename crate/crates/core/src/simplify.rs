//! One-dimensional simplification of the hidden representation with
//! two-class regularized LDA, and the composed scoring model.
//!
//! The discriminant direction is `(S_w + γI)⁻¹ (μ₁ − μ₀)`, normalized to unit
//! length and oriented so class 1 projects to the positive side. `S_w` is the
//! pooled within-class covariance: the sum of both classes' scatter
//! matrices divided by the number of labeled instances.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{Class, HiddenRepresentation, MlpModel, Normalizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaDirection {
    /// Unit-norm discriminant axis in hidden space.
    pub direction: Vec<f64>,
    /// `direction · pooled_mean`; subtracting it centers projections.
    pub offset: f64,
    pub gamma: f64,
    /// Whether the raw solve had to be negated to put class 1 on the
    /// positive side.
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representation1D {
    pub instance_ids: Vec<String>,
    pub values: Vec<f64>,
    pub class_of: Vec<Option<Class>>,
}

/// Pooled within-class covariance and the two class means.
pub fn within_class_scatter(h: &DMatrix<f64>, labels: &[Class]) -> Result<(DMatrix<f64>, DVector<f64>, DVector<f64>)> {
    if labels.len() != h.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            actual: labels.len(),
            context: "class labels for hidden rows",
        });
    }
    let d = h.ncols();
    let mut means = [DVector::zeros(d), DVector::zeros(d)];
    let mut counts = [0usize; 2];
    for (row, c) in h.row_iter().zip(labels) {
        let k = *c as usize;
        means[k] += row.transpose();
        counts[k] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::EmptyClass("both classes must be present to fit LDA".into()));
    }
    for k in 0..2 {
        means[k] /= counts[k] as f64;
    }
    let mut centered = h.clone();
    for (mut row, c) in centered.row_iter_mut().zip(labels) {
        row -= means[*c as usize].transpose();
    }
    let sw = centered.transpose() * &centered / h.nrows() as f64;
    let [m0, m1] = means;
    Ok((sw, m0, m1))
}

/// Scale-aware default regularization: `1e-3 · trace(S_w) / width`.
pub fn default_gamma(sw: &DMatrix<f64>) -> f64 {
    1e-3 * sw.trace() / sw.nrows().max(1) as f64
}

/// Fits the regularized two-class discriminant. `gamma = None` picks
/// [`default_gamma`].
pub fn fit_regularized_lda(h: &HiddenRepresentation, labels: &[Class], gamma: Option<f64>) -> Result<LdaDirection> {
    fit_on_matrix(&h.matrix, labels, gamma)
}

pub fn fit_on_matrix(h: &DMatrix<f64>, labels: &[Class], gamma: Option<f64>) -> Result<LdaDirection> {
    let (sw, m0, m1) = within_class_scatter(h, labels)?;
    let gamma = gamma.unwrap_or_else(|| default_gamma(&sw));
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be a finite value >= 0, got {gamma}")));
    }
    let d = sw.nrows();
    let reg = &sw + DMatrix::identity(d, d) * gamma;
    let diff = &m1 - &m0;
    let chol = reg.cholesky().ok_or(Error::SingularScatter)?;
    // guard against a numerically singular factorization when gamma == 0
    let l = chol.l();
    let (lmin, lmax) = l
        .diagonal()
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if gamma == 0.0 && lmin <= lmax * 1e-8 {
        return Err(Error::SingularScatter);
    }
    let raw = chol.solve(&diff);
    let norm = raw.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::CoincidentMeans);
    }
    let mut direction = raw / norm;
    let flipped = direction.dot(&m1) < direction.dot(&m0);
    if flipped {
        direction = -direction;
    }
    let pooled = h.row_sum().transpose() / h.nrows() as f64;
    let offset = direction.dot(&pooled);
    Ok(LdaDirection {
        direction: direction.iter().copied().collect(),
        offset,
        gamma,
        flipped,
    })
}

impl LdaDirection {
    pub fn width(&self) -> usize {
        self.direction.len()
    }

    /// `direction · h − offset` for each row.
    pub fn project_matrix(&self, h: &DMatrix<f64>) -> Result<Vec<f64>> {
        if h.ncols() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                actual: h.ncols(),
                context: "hidden representation width",
            });
        }
        let dir = DVector::from_column_slice(&self.direction);
        Ok((h * dir).iter().map(|v| v - self.offset).collect())
    }
}

pub fn project_1d(dir: &LdaDirection, h: &HiddenRepresentation, class_of: Vec<Option<Class>>) -> Result<Representation1D> {
    if class_of.len() != h.instance_ids.len() {
        return Err(Error::DimensionMismatch {
            expected: h.instance_ids.len(),
            actual: class_of.len(),
            context: "class assignments",
        });
    }
    Ok(Representation1D {
        instance_ids: h.instance_ids.clone(),
        values: dir.project_matrix(&h.matrix)?,
        class_of,
    })
}

/// Raw features → z-score → MLP hidden layer → LDA projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub normalizer: Normalizer,
    pub mlp: MlpModel,
    pub lda: LdaDirection,
}

impl PipelineModel {
    /// Scores already-normalized rows (one per matrix row).
    pub fn score_normalized(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let h = self.mlp.hidden(x)?;
        self.lda.project_matrix(&h)
    }

    /// Scores one raw (unnormalized) feature row.
    pub fn score_instance(&self, raw: &[f64]) -> Result<f64> {
        let row = self.normalizer.transform_row(raw)?;
        let x = DMatrix::from_row_slice(1, row.len(), &row);
        Ok(self.score_normalized(&x)?[0])
    }
}

/// Midpoint-threshold accuracy of a 1D projection: the threshold is the
/// midpoint of the two class means of `reference` (typically the training
/// projection), applied to `values`.
pub fn midpoint_accuracy(reference: (&[f64], &[Class]), values: &[f64], labels: &[Class]) -> f64 {
    let (rv, rl) = reference;
    let mean_of = |c: Class| {
        let (s, n) = rv
            .iter()
            .zip(rl)
            .filter(|(_, l)| **l == c)
            .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
        s / n.max(1) as f64
    };
    let threshold = 0.5 * (mean_of(Class::Zero) + mean_of(Class::One));
    let correct = values
        .iter()
        .zip(labels)
        .filter(|(v, l)| (**v > threshold) == (**l == Class::One))
        .count();
    correct as f64 / values.len().max(1) as f64
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::stats;

/// Per-column z-score statistics (population standard deviation). A zero
/// `std` marks a constant column, which maps to all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Normalizer {
    pub fn fit(fm: &FeatureMatrix) -> Self {
        let means = fm.columns.iter().map(|c| stats::mean(&c.values)).collect();
        let stds = fm.columns.iter().map(|c| stats::std_dev(&c.values)).collect();
        Self {
            names: fm.names(),
            means,
            stds,
        }
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    fn scale(&self, j: usize, x: f64) -> f64 {
        if self.stds[j] == 0.0 {
            0.0
        } else {
            (x - self.means[j]) / self.stds[j]
        }
    }

    pub fn transform_row(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                actual: raw.len(),
                context: "raw feature row",
            });
        }
        Ok(raw.iter().enumerate().map(|(j, &x)| self.scale(j, x)).collect())
    }

    pub fn transform(&self, fm: &FeatureMatrix) -> Result<FeatureMatrix> {
        if fm.n_cols() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                actual: fm.n_cols(),
                context: "feature matrix width",
            });
        }
        let mut out = fm.clone();
        for (j, col) in out.columns.iter_mut().enumerate() {
            col.values.iter_mut().for_each(|x| *x = self.scale(j, *x));
        }
        out.normalized = true;
        Ok(out)
    }
}

/// Z-score normalizes every column; constant columns become zeros.
pub fn zscore_normalize(fm: &FeatureMatrix) -> FeatureMatrix {
    Normalizer::fit(fm)
        .transform(fm)
        .expect("normalizer fitted on the same matrix")
}

//! Derivative-free minimization by linear approximation inside a trust
//! region, in the spirit of Powell's COBYLA for the unconstrained case.
//!
//! A simplex of `n + 1` points defines a linear model of the objective.
//! Each iteration steps from the best vertex to the trust-region boundary
//! along the model's steepest descent. Successful steps replace the vertex
//! farthest from the new best point; a failed step on a well-shaped simplex
//! halves the radius `rho`, a failed step on a distorted one rebuilds it.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionOptions {
    pub rho_begin: f64,
    pub rho_end: f64,
    pub max_evals: usize,
}

impl Default for TrustRegionOptions {
    fn default() -> Self {
        Self {
            rho_begin: 0.5,
            rho_end: 1e-4,
            max_evals: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

struct Simplex {
    points: Vec<DVector<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn best(&self) -> usize {
        let mut b = 0;
        for i in 1..self.values.len() {
            if self.values[i] < self.values[b] {
                b = i;
            }
        }
        b
    }

    /// Gradient of the interpolating linear model, `None` if degenerate.
    fn model_gradient(&self, best: usize) -> Option<DVector<f64>> {
        let n = self.points[0].len();
        let others: Vec<usize> = (0..self.points.len()).filter(|&i| i != best).collect();
        let d = DMatrix::from_fn(n, n, |r, c| self.points[others[r]][c] - self.points[best][c]);
        let df = DVector::from_iterator(n, others.iter().map(|&i| self.values[i] - self.values[best]));
        d.lu().solve(&df)
    }

    /// Well shaped: every edge from the best vertex has length in
    /// [rho/4, 2 rho] and the edge matrix is not close to singular.
    fn acceptable(&self, best: usize, rho: f64) -> bool {
        let n = self.points[0].len();
        let others: Vec<usize> = (0..self.points.len()).filter(|&i| i != best).collect();
        let d = DMatrix::from_fn(n, n, |r, c| (self.points[others[r]][c] - self.points[best][c]) / rho);
        let lengths_ok = others.iter().all(|&i| {
            let len = (&self.points[i] - &self.points[best]).norm();
            len <= 2.0 * rho && len >= 0.25 * rho
        });
        lengths_ok && d.determinant().abs() > 1e-3
    }
}

fn build_simplex(f: &mut impl FnMut(&[f64]) -> f64, center: &DVector<f64>, center_value: f64, rho: f64, evals: &mut usize) -> Simplex {
    let n = center.len();
    let mut points = vec![center.clone()];
    let mut values = vec![center_value];
    for i in 0..n {
        let mut p = center.clone();
        p[i] += rho;
        values.push(f(p.as_slice()));
        *evals += 1;
        points.push(p);
    }
    Simplex { points, values }
}

pub fn minimize(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &TrustRegionOptions) -> Minimum {
    let n = x0.len();
    let mut evals = 1;
    let start = DVector::from_column_slice(x0);
    let f0 = f(x0);
    if n == 0 {
        return Minimum {
            x: vec![],
            value: f0,
            evals,
        };
    }
    let mut rho = opts.rho_begin;
    let mut simplex = build_simplex(&mut f, &start, f0, rho, &mut evals);

    while rho > opts.rho_end && evals < opts.max_evals {
        let best = simplex.best();
        let x_best = simplex.points[best].clone();
        let f_best = simplex.values[best];

        let step = simplex
            .model_gradient(best)
            .filter(|g| g.norm() > 0.0 && g.iter().all(|v| v.is_finite()));
        let improved = match step {
            Some(g) => {
                let trial = &x_best - &g * (rho / g.norm());
                let ft = f(trial.as_slice());
                evals += 1;
                if ft < f_best {
                    // drop the vertex farthest from the new best point
                    let far = (0..simplex.points.len())
                        .max_by(|&a, &b| {
                            let da = (&simplex.points[a] - &trial).norm();
                            let db = (&simplex.points[b] - &trial).norm();
                            da.total_cmp(&db)
                        })
                        .expect("non-empty simplex");
                    simplex.points[far] = trial;
                    simplex.values[far] = ft;
                    true
                } else {
                    false
                }
            }
            None => false,
        };
        if improved {
            continue;
        }
        if simplex.acceptable(best, rho) {
            rho *= 0.5;
        }
        simplex = build_simplex(&mut f, &x_best, f_best, rho, &mut evals);
    }

    let best = simplex.best();
    Minimum {
        x: simplex.points[best].iter().copied().collect(),
        value: simplex.values[best],
        evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let m = minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &TrustRegionOptions {
                rho_begin: 1.0,
                rho_end: 1e-7,
                max_evals: 5000,
            },
        );
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] + 2.0).abs() < 1e-4, "{m:?}");
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| (x[0] * 3.0).floor().abs() + x[1].abs().sqrt();
        let m = minimize(f, &[2.3, -1.1], &TrustRegionOptions::default());
        assert!(m.value <= f(&[2.3, -1.1]));
    }

    #[test]
    fn respects_evaluation_budget() {
        let mut count = 0;
        let m = minimize(
            |x| {
                count += 1;
                x.iter().map(|v| v.sin()).sum()
            },
            &[0.1; 4],
            &TrustRegionOptions {
                max_evals: 30,
                ..TrustRegionOptions::default()
            },
        );
        assert!(count <= 30 + 4 + 1);
        assert_eq!(count, m.evals);
    }
}

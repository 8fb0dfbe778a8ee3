use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::Class;
use crate::stats;

/// Kernel mass (in bandwidth-normalized units) below which a class is
/// considered absent from a cell.
pub const UNDERFLOW: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMode {
    /// `n₀f₀ / (n₀f₀ + n₁f₁)`
    CountWeighted,
    /// `f₀ / (f₀ + f₁)`: each class gets the same total mass.
    EqualWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Scott's rule per axis on the pooled points: `σ · n^(-1/6)`.
    Scott,
    Fixed { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KdeOptions {
    pub width: usize,
    pub height: usize,
    pub bandwidth: Bandwidth,
    pub mode: RatioMode,
    /// Relative margin added on each side of the points' bounding box.
    pub margin: f64,
    /// Allow one class to be empty.
    pub single_class_preview: bool,
}

impl Default for KdeOptions {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            bandwidth: Bandwidth::Scott,
            mode: RatioMode::CountWeighted,
            margin: 0.05,
            single_class_preview: false,
        }
    }
}

/// Gridded total density and class-0 ratio. Grids are row-major with row 0
/// at the lowest `y`; cell values are taken at cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub width: usize,
    pub height: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub bandwidth: [f64; 2],
    pub mode: RatioMode,
    pub n0: usize,
    pub n1: usize,
    /// Probability density of all points.
    pub f_all: Vec<f64>,
    pub g0: Vec<f64>,
    /// Class-1 ratio, computed with the same formula as `g0` with the
    /// classes swapped.
    pub g1: Vec<f64>,
}

impl DensityField {
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        let dx = (self.x_range[1] - self.x_range[0]) / self.width as f64;
        let dy = (self.y_range[1] - self.y_range[0]) / self.height as f64;
        (
            self.x_range[0] + (col as f64 + 0.5) * dx,
            self.y_range[0] + (row as f64 + 0.5) * dy,
        )
    }

    pub fn cell_area(&self) -> f64 {
        (self.x_range[1] - self.x_range[0]) / self.width as f64 * (self.y_range[1] - self.y_range[0])
            / self.height as f64
    }
}

fn axis_range(values: impl Iterator<Item = f64> + Clone, margin: f64) -> [f64; 2] {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if span > 0.0 {
        [lo - margin * span, hi + margin * span]
    } else {
        [lo - 0.5, hi + 0.5]
    }
}

fn scott(values: &[f64], extent: [f64; 2]) -> f64 {
    let n = values.len() as f64;
    let sd = stats::std_dev(values);
    if sd > 0.0 {
        sd * n.powf(-1.0 / 6.0)
    } else {
        // degenerate spread: a tenth of the plotted extent
        0.1 * (extent[1] - extent[0])
    }
}

/// Unnormalized Gaussian kernel sums `Σ exp(-½(u² + v²))` over the grid,
/// using separability.
fn kernel_sums(points: &[[f64; 2]], xs: &[f64], ys: &[f64], h: [f64; 2]) -> Vec<f64> {
    let mut out = vec![0.0; xs.len() * ys.len()];
    let mut kx = vec![0.0; xs.len()];
    let mut ky = vec![0.0; ys.len()];
    for p in points {
        for (k, x) in kx.iter_mut().zip(xs) {
            let u = (x - p[0]) / h[0];
            *k = (-0.5 * u * u).exp();
        }
        for (k, y) in ky.iter_mut().zip(ys) {
            let v = (y - p[1]) / h[1];
            *k = (-0.5 * v * v).exp();
        }
        for (row, &wy) in ky.iter().enumerate() {
            if wy == 0.0 {
                continue;
            }
            let line = &mut out[row * xs.len()..(row + 1) * xs.len()];
            for (cell, &wx) in line.iter_mut().zip(&kx) {
                *cell += wy * wx;
            }
        }
    }
    out
}

/// Two-class Gaussian product-kernel density estimate on a grid.
pub fn kde2d(points: &[[f64; 2]], labels: &[Class], opts: &KdeOptions) -> Result<DensityField> {
    if points.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            actual: labels.len(),
            context: "point labels",
        });
    }
    if opts.width == 0 || opts.height == 0 {
        return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
    }
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidArgument("points must be finite".into()));
    }
    let (p0, p1): (Vec<[f64; 2]>, Vec<[f64; 2]>) = {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (p, c) in points.iter().zip(labels) {
            match c {
                Class::Zero => a.push(*p),
                Class::One => b.push(*p),
            }
        }
        (a, b)
    };
    if points.is_empty() {
        return Err(Error::EmptyClass("no points to estimate a density from".into()));
    }
    if !opts.single_class_preview && (p0.is_empty() || p1.is_empty()) {
        return Err(Error::EmptyClass(format!(
            "density needs both classes (class 0: {}, class 1: {})",
            p0.len(),
            p1.len()
        )));
    }

    let x_range = axis_range(points.iter().map(|p| p[0]), opts.margin);
    let y_range = axis_range(points.iter().map(|p| p[1]), opts.margin);
    let h = match opts.bandwidth {
        Bandwidth::Fixed { x, y } => {
            if !(x > 0.0 && y > 0.0) {
                return Err(Error::InvalidArgument(format!("bandwidth must be positive, got ({x}, {y})")));
            }
            [x, y]
        }
        Bandwidth::Scott => {
            let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
            let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
            [scott(&xs, x_range), scott(&ys, y_range)]
        }
    };

    let dx = (x_range[1] - x_range[0]) / opts.width as f64;
    let dy = (y_range[1] - y_range[0]) / opts.height as f64;
    let xs: Vec<f64> = (0..opts.width).map(|i| x_range[0] + (i as f64 + 0.5) * dx).collect();
    let ys: Vec<f64> = (0..opts.height).map(|j| y_range[0] + (j as f64 + 0.5) * dy).collect();

    let s0 = kernel_sums(&p0, &xs, &ys, h);
    let s1 = kernel_sums(&p1, &xs, &ys, h);
    let (n0, n1) = (p0.len(), p1.len());
    let n = (n0 + n1) as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * h[0] * h[1]);

    let mut f_all = Vec::with_capacity(s0.len());
    let mut g0 = Vec::with_capacity(s0.len());
    let mut g1 = Vec::with_capacity(s0.len());
    for (a, b) in s0.iter().zip(&s1) {
        f_all.push((a + b) * norm / n);
        // per-class mean kernel mass, i.e. f_c in bandwidth units
        let m0 = if n0 > 0 { a / n0 as f64 } else { 0.0 };
        let m1 = if n1 > 0 { b / n1 as f64 } else { 0.0 };
        let (r0, r1) = if m0 < UNDERFLOW && m1 < UNDERFLOW {
            (0.5, 0.5)
        } else {
            match opts.mode {
                RatioMode::CountWeighted => (a / (a + b), b / (a + b)),
                RatioMode::EqualWeighted => (m0 / (m0 + m1), m1 / (m0 + m1)),
            }
        };
        g0.push(r0);
        g1.push(r1);
    }

    Ok(DensityField {
        width: opts.width,
        height: opts.height,
        x_range,
        y_range,
        bandwidth: h,
        mode: opts.mode,
        n0,
        n1,
        f_all,
        g0,
        g1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> KdeOptions {
        KdeOptions {
            width: 41,
            height: 31,
            ..KdeOptions::default()
        }
    }

    #[test]
    fn single_point_peaks_at_nearest_cell() {
        let opts = KdeOptions {
            single_class_preview: true,
            ..small()
        };
        let f = kde2d(&[[0.3, -2.0]], &[Class::Zero], &opts).unwrap();
        let (imax, _) = f
            .f_all
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let mut best = (0, f64::INFINITY);
        for row in 0..f.height {
            for col in 0..f.width {
                let (x, y) = f.cell_center(col, row);
                let d = (x - 0.3).powi(2) + (y + 2.0).powi(2);
                if d < best.1 {
                    best = (f.index(col, row), d);
                }
            }
        }
        assert_eq!(imax, best.0);
    }

    #[test]
    fn missing_class_rejected_outside_preview() {
        assert!(matches!(
            kde2d(&[[0.0, 0.0], [1.0, 1.0]], &[Class::Zero, Class::Zero], &small()),
            Err(Error::EmptyClass(_))
        ));
    }

    #[test]
    fn bad_bandwidth() {
        let opts = KdeOptions {
            bandwidth: Bandwidth::Fixed { x: 0.0, y: 1.0 },
            ..small()
        };
        assert!(kde2d(&[[0.0, 0.0], [1.0, 1.0]], &[Class::Zero, Class::One], &opts).is_err());
    }

    #[test]
    fn balanced_cell_gives_half() {
        // identical class clouds: n0 f0 = n1 f1 everywhere
        let pts = [[0.0, 0.0], [1.0, 0.5], [0.0, 0.0], [1.0, 0.5]];
        let labels = [Class::Zero, Class::Zero, Class::One, Class::One];
        let f = kde2d(&pts, &labels, &small()).unwrap();
        assert!(f.g0.iter().all(|g| (g - 0.5).abs() < 1e-12));
    }

    #[test]
    fn far_from_class_one_is_pure_class_zero() {
        let pts = [[0.0, 0.0], [0.1, 0.0], [20.0, 0.0]];
        let labels = [Class::Zero, Class::Zero, Class::One];
        let opts = KdeOptions {
            bandwidth: Bandwidth::Fixed { x: 0.5, y: 0.5 },
            ..small()
        };
        let f = kde2d(&pts, &labels, &opts).unwrap();
        // cell nearest the class-0 cluster
        let col = ((0.05 - f.x_range[0]) / (f.x_range[1] - f.x_range[0]) * f.width as f64) as usize;
        let row = f.height / 2;
        assert!((f.g0[f.index(col, row)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn equal_weight_mode_ignores_counts() {
        let pts = [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]];
        let labels = [Class::Zero, Class::Zero, Class::Zero, Class::One];
        let cw = kde2d(&pts, &labels, &small()).unwrap();
        let ew = kde2d(
            &pts,
            &labels,
            &KdeOptions {
                mode: RatioMode::EqualWeighted,
                ..small()
            },
        )
        .unwrap();
        let c = cw.index(20, 15);
        assert!((cw.g0[c] - 0.75).abs() < 1e-12);
        assert!((ew.g0[c] - 0.5).abs() < 1e-12);
    }
}

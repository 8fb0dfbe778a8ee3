//! Visualization computations: density fields and their color encoding,
//! 1D swarm placement, attribute histograms, and node-link layout.
//!
//! Everything here produces plain data (grids, coordinates, RGB bytes); no
//! drawing toolkit is involved.

mod colormap;
mod density;
mod histogram;
mod layout;
mod swarm;

pub use colormap::{
    bivariate_color, polar_legend, ramp_color, render_two_class, ColorRaster, Rgb, RgbImage, BLUE_RAMP, LEGEND_SIZE,
    RED_RAMP, WHITE,
};
pub use density::{kde2d, Bandwidth, DensityField, KdeOptions, RatioMode, UNDERFLOW};
pub use histogram::{ks_statistic, ordered_histograms, DoubleHistogram};
pub use layout::{force_layout, Layout, LayoutOptions};
pub use swarm::swarm_coordinates;

//! Bivariate color encoding for two-class density fields: lightness from
//! total density, hue from the class-0 ratio.
//!
//! Two sequential ramps (red for class 0, blue for class 1) are sampled at
//! the normalized density level and the pair is blended linearly by `g0`.
//! The ramp control points are fixed tables (the 9-class ColorBrewer
//! "Reds" and "Blues" sequences), interpolated in RGB, so output bytes are
//! identical on every platform.

use std::io::Cursor;

use serde::{Deserialize, Serialize};

use super::DensityField;
use crate::error::Result;

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];

pub const RED_RAMP: [Rgb; 9] = [
    [0xff, 0xf5, 0xf0],
    [0xfe, 0xe0, 0xd2],
    [0xfc, 0xbb, 0xa1],
    [0xfc, 0x92, 0x72],
    [0xfb, 0x6a, 0x4a],
    [0xef, 0x3b, 0x2c],
    [0xcb, 0x18, 0x1d],
    [0xa5, 0x0f, 0x15],
    [0x67, 0x00, 0x0d],
];

pub const BLUE_RAMP: [Rgb; 9] = [
    [0xf7, 0xfb, 0xff],
    [0xde, 0xeb, 0xf7],
    [0xc6, 0xdb, 0xef],
    [0x9e, 0xca, 0xe1],
    [0x6b, 0xae, 0xd6],
    [0x42, 0x92, 0xc6],
    [0x21, 0x71, 0xb5],
    [0x08, 0x51, 0x9c],
    [0x08, 0x30, 0x6b],
];

/// Ramp color at `level` in [0, 1], linear between control points.
pub fn ramp_color(ramp: &[Rgb], level: f64) -> Rgb {
    let level = level.clamp(0.0, 1.0);
    let pos = level * (ramp.len() - 1) as f64;
    let i = (pos.floor() as usize).min(ramp.len() - 2);
    let t = pos - i as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        let a = ramp[i][c] as f64;
        let b = ramp[i + 1][c] as f64;
        out[c] = (a + (b - a) * t).round() as u8;
    }
    out
}

/// Blend of the two ramp colors at `level`; `g0 = 1` is pure red-ramp.
pub fn bivariate_color(level: f64, g0: f64) -> Rgb {
    let red = ramp_color(&RED_RAMP, level);
    let blue = ramp_color(&BLUE_RAMP, level);
    let g = g0.clamp(0.0, 1.0);
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (blue[c] as f64 + (red[c] as f64 - blue[c] as f64) * g).round() as u8;
    }
    out
}

/// RGB image, row-major with row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        {
            let mut enc = png::Encoder::new(Cursor::new(&mut buf), self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header()?;
            let data: Vec<u8> = self.pixels.iter().flatten().copied().collect();
            writer.write_image_data(&data)?;
        }
        Ok(buf)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorRaster {
    pub image: RgbImage,
    pub legend: RgbImage,
}

pub const LEGEND_SIZE: usize = 128;

/// Renders the field (top row = highest `y`) and the polar legend.
pub fn render_two_class(field: &DensityField) -> ColorRaster {
    let max = field.f_all.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut pixels = Vec::with_capacity(field.width * field.height);
    for y in (0..field.height).rev() {
        for x in 0..field.width {
            let i = field.index(x, y);
            let f = field.f_all[i];
            pixels.push(if f == 0.0 || max == 0.0 {
                WHITE
            } else {
                bivariate_color(f / max, field.g0[i])
            });
        }
    }
    ColorRaster {
        image: RgbImage {
            width: field.width,
            height: field.height,
            pixels,
        },
        legend: polar_legend(LEGEND_SIZE),
    }
}

/// Quarter-disc legend: radius is the density level, angle the ratio
/// (the horizontal axis is `g0 = 0`, the vertical axis `g0 = 1`).
pub fn polar_legend(size: usize) -> RgbImage {
    let mut pixels = Vec::with_capacity(size * size);
    let scale = size.max(2) as f64 - 1.0;
    for row in 0..size {
        for col in 0..size {
            let u = col as f64 / scale;
            let v = (size - 1 - row) as f64 / scale;
            let r = (u * u + v * v).sqrt();
            pixels.push(if r > 1.0 {
                WHITE
            } else {
                let g0 = if r == 0.0 { 0.5 } else { v.atan2(u) / std::f64::consts::FRAC_PI_2 };
                bivariate_color(r, g0)
            });
        }
    }
    RgbImage {
        width: size,
        height: size,
        pixels,
    }
}

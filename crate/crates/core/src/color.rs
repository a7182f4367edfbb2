//! Colour descriptors: quantized RGB histogram, HSV auto-correlogram and the
//! 5x5 naive signature.

use crate::imaging::{rescale, Histogram256, Raster};

pub const COLOR_BINS: usize = 256;
pub const DEFAULT_MAX_DISTANCE: usize = 4;
pub const SIGNATURE_POINTS: usize = 25;

const SIGNATURE_BASE: usize = 300;
const SIGNATURE_HALF_WINDOW: usize = 15;
const SIGNATURE_FRACTIONS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// 3-3-2 bit allocation.
#[inline]
pub fn quantize_rgb(r: u8, g: u8, b: u8) -> usize {
    (((r >> 5) << 5) | ((g >> 5) << 2) | (b >> 6)) as usize
}

/// 16 hue levels x 4 saturation levels x 4 value levels.
pub fn quantize_hsv(r: u8, g: u8, b: u8) -> usize {
    let (r, g, b) = (u32::from(r), u32::from(g), u32::from(b));
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v_idx = (4 * max / 255).min(3);
    let s_idx = if max == 0 { 0 } else { (4 * delta / max).min(3) };
    let h_idx = if delta == 0 {
        0
    } else {
        let d = delta as f64;
        let (rf, gf, bf) = (r as f64, g as f64, b as f64);
        let h = if max == r {
            60.0 * ((gf - bf) / d).rem_euclid(6.0)
        } else if max == g {
            60.0 * ((bf - rf) / d + 2.0)
        } else {
            60.0 * ((rf - gf) / d + 4.0)
        };
        ((h * 16.0 / 360.0) as usize).min(15)
    };
    h_idx * 16 + (s_idx as usize) * 4 + v_idx as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorHistogram {
    pub bins: [u64; COLOR_BINS],
}

impl ColorHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    pub fn to_histogram256(&self) -> Histogram256 {
        Histogram256::from_bins(self.bins)
    }
}

pub fn rgb_histogram(r: &Raster) -> ColorHistogram {
    let mut bins = [0u64; COLOR_BINS];
    for &[cr, cg, cb] in r.pixels() {
        bins[quantize_rgb(cr, cg, cb)] += 1;
    }
    ColorHistogram { bins }
}

/// Per (colour, distance) same-colour probabilities, colour-major:
/// `values[c * max_distance + (d - 1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoCorrelogram {
    pub max_distance: usize,
    pub values: Vec<f32>,
}

impl AutoCorrelogram {
    pub fn get(&self, color: usize, distance: usize) -> f32 {
        self.values[color * self.max_distance + distance - 1]
    }
}

fn quantized_hsv_plane(r: &Raster) -> Vec<u8> {
    r.pixels()
        .iter()
        .map(|&[cr, cg, cb]| quantize_hsv(cr, cg, cb) as u8)
        .collect()
}

/// Unnormalized counts: for every pixel of colour `c` and every distance
/// `d`, the number of in-bounds pixels of colour `c` on the Chebyshev ring at
/// exactly `d`. Layout matches [`AutoCorrelogram::values`].
pub fn correlogram_counts(r: &Raster, max_distance: usize) -> Vec<u64> {
    let (w, h) = (r.width() as isize, r.height() as isize);
    let q = quantized_hsv_plane(r);
    let at = |x: isize, y: isize| q[(y * w + x) as usize];
    let mut counts = vec![0u64; COLOR_BINS * max_distance];
    for y in 0..h {
        for x in 0..w {
            let c = at(x, y);
            let row = &mut counts[c as usize * max_distance..][..max_distance];
            for d in 1..=max_distance as isize {
                let mut n = 0u64;
                let (x0, x1) = ((x - d).max(0), (x + d).min(w - 1));
                for yy in [y - d, y + d] {
                    if (0..h).contains(&yy) {
                        n += (x0..=x1).filter(|&xx| at(xx, yy) == c).count() as u64;
                    }
                }
                let (y0, y1) = ((y - d + 1).max(0), (y + d - 1).min(h - 1));
                for xx in [x - d, x + d] {
                    if (0..w).contains(&xx) {
                        n += (y0..=y1).filter(|&yy| at(xx, yy) == c).count() as u64;
                    }
                }
                row[d as usize - 1] += n;
            }
        }
    }
    counts
}

/// Counts normalized per distance column by the column maximum over colours.
/// A column with no mass stays zero.
pub fn auto_correlogram(r: &Raster, max_distance: usize) -> AutoCorrelogram {
    assert!(max_distance >= 1, "max_distance must be at least 1");
    let counts = correlogram_counts(r, max_distance);
    let mut col_max = vec![0u64; max_distance];
    for row in counts.chunks_exact(max_distance) {
        for (m, &v) in col_max.iter_mut().zip(row) {
            *m = (*m).max(v);
        }
    }
    let values = counts
        .chunks_exact(max_distance)
        .flat_map(|row| {
            row.iter().zip(&col_max).map(|(&v, &m)| {
                if m == 0 {
                    0.0
                } else {
                    (v as f64 / m as f64) as f32
                }
            })
        })
        .collect();
    AutoCorrelogram {
        max_distance,
        values,
    }
}

/// 25 window-mean colours on a 5x5 grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveSignature {
    pub points: [[f64; 3]; SIGNATURE_POINTS],
}

pub fn naive_signature(r: &Raster) -> NaiveSignature {
    let base = rescale(r, SIGNATURE_BASE, SIGNATURE_BASE).expect("non-zero base size");
    let mut points = [[0.0; 3]; SIGNATURE_POINTS];
    for (row, fy) in SIGNATURE_FRACTIONS.iter().enumerate() {
        for (col, fx) in SIGNATURE_FRACTIONS.iter().enumerate() {
            points[row * 5 + col] = window_mean(&base, fx * SIGNATURE_BASE as f64, fy * SIGNATURE_BASE as f64);
        }
    }
    NaiveSignature { points }
}

fn window_mean(r: &Raster, cx: f64, cy: f64) -> [f64; 3] {
    let span = |c: f64, limit: usize| {
        let lo = (c - SIGNATURE_HALF_WINDOW as f64).max(0.0) as usize;
        let hi = ((c + SIGNATURE_HALF_WINDOW as f64) as usize).min(limit);
        lo..hi
    };
    let (xs, ys) = (span(cx, r.width()), span(cy, r.height()));
    let mut acc = [0u64; 3];
    let mut n = 0u64;
    for y in ys {
        for x in xs.clone() {
            let p = r.get(x, y);
            for c in 0..3 {
                acc[c] += u64::from(p[c]);
            }
            n += 1;
        }
    }
    acc.map(|a| a as f64 / n as f64)
}

//! Tamura coarseness, contrast and a 16-bin directionality histogram.

use std::f64::consts::PI;

use super::TextureError;
use crate::imaging::GrayRaster;

pub const TAMURA_LEN: usize = 18;
pub const DIRECTION_BINS: usize = 16;
/// Smallest side the coarseness windows (up to 32 pixels) need.
pub const MIN_SIDE: usize = 32;
const COARSENESS_LEVELS: u32 = 5;
const GRADIENT_THRESHOLD: f64 = 12.0;

/// `[coarseness, contrast, direction bin counts x 16]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TamuraVector {
    pub values: [f64; TAMURA_LEN],
}

impl TamuraVector {
    pub fn coarseness(&self) -> f64 {
        self.values[0]
    }

    pub fn contrast(&self) -> f64 {
        self.values[1]
    }

    pub fn directionality(&self) -> &[f64] {
        &self.values[2..]
    }
}

pub fn tamura_features(g: &GrayRaster) -> Result<TamuraVector, TextureError> {
    let (w, h) = (g.width(), g.height());
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(TextureError::ImageTooSmall {
            width: w,
            height: h,
            min: MIN_SIDE,
        });
    }
    let mut values = [0.0; TAMURA_LEN];
    values[0] = coarseness(g);
    values[1] = contrast(g);
    values[2..].copy_from_slice(&direction_histogram(g));
    Ok(TamuraVector { values })
}

struct Integral {
    width: usize,
    sums: Vec<u64>,
}

impl Integral {
    fn new(g: &GrayRaster) -> Self {
        let (w, h) = (g.width(), g.height());
        let stride = w + 1;
        let mut sums = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            for x in 0..w {
                row += u64::from(g.get(x, y));
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { width: w, sums }
    }

    /// Mean over `[x0, x1) x [y0, y1)`, which must be non-empty.
    fn mean(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let s = self.width + 1;
        let total = self.sums[y1 * s + x1] + self.sums[y0 * s + x0]
            - self.sums[y0 * s + x1]
            - self.sums[y1 * s + x0];
        total as f64 / ((x1 - x0) * (y1 - y0)) as f64
    }
}

/// Mean over pixels of the window size 2^k that maximizes the difference
/// between averages of opposing neighbouring windows. Windows are clipped at
/// the border; ties go to the smaller window.
fn coarseness(g: &GrayRaster) -> f64 {
    let (w, h) = (g.width(), g.height());
    let integral = Integral::new(g);
    let averages: Vec<Vec<f64>> = (1..=COARSENESS_LEVELS)
        .map(|k| {
            let half = 1usize << (k - 1);
            let mut a = Vec::with_capacity(w * h);
            for y in 0..h {
                let (y0, y1) = (y.saturating_sub(half), (y + half).min(h));
                for x in 0..w {
                    let (x0, x1) = (x.saturating_sub(half), (x + half).min(w));
                    a.push(integral.mean(x0, y0, x1, y1));
                }
            }
            a
        })
        .collect();

    let mut total = 0.0;
    for y in 0..h {
        for x in 0..w {
            let mut best_k = 1u32;
            let mut best_e = f64::NEG_INFINITY;
            for (ki, a) in averages.iter().enumerate() {
                let half = 1usize << ki;
                let (xl, xr) = (x.saturating_sub(half), (x + half).min(w - 1));
                let (yt, yb) = (y.saturating_sub(half), (y + half).min(h - 1));
                let eh = (a[y * w + xr] - a[y * w + xl]).abs();
                let ev = (a[yb * w + x] - a[yt * w + x]).abs();
                let e = eh.max(ev);
                if e > best_e {
                    best_e = e;
                    best_k = ki as u32 + 1;
                }
            }
            total += f64::from(1u32 << best_k);
        }
    }
    total / (w * h) as f64
}

/// sigma / kurtosis^(1/4), i.e. variance / (fourth central moment)^(1/4).
fn contrast(g: &GrayRaster) -> f64 {
    let n = g.pixels().len() as f64;
    let mean = g.pixels().iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &v in g.pixels() {
        let d = f64::from(v) - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    let (var, m4) = (m2 / n, m4 / n);
    if var == 0.0 || m4 == 0.0 {
        return 0.0;
    }
    var / m4.powf(0.25)
}

/// Raw counts of Sobel gradient directions (mod pi) over interior pixels whose
/// gradient magnitude `(|gx| + |gy|) / 2` reaches the threshold. Bin 0 holds
/// horizontal gradients, i.e. vertical edges.
fn direction_histogram(g: &GrayRaster) -> [f64; DIRECTION_BINS] {
    let (w, h) = (g.width(), g.height());
    let p = |x: usize, y: usize| i32::from(g.get(x, y));
    let mut bins = [0.0; DIRECTION_BINS];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = (p(x + 1, y - 1) + 2 * p(x + 1, y) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2 * p(x - 1, y) + p(x - 1, y + 1));
            let gy = (p(x - 1, y + 1) + 2 * p(x, y + 1) + p(x + 1, y + 1))
                - (p(x - 1, y - 1) + 2 * p(x, y - 1) + p(x + 1, y - 1));
            let magnitude = f64::from(gx.abs() + gy.abs()) / 2.0;
            if magnitude < GRADIENT_THRESHOLD {
                continue;
            }
            let theta = f64::from(gy).atan2(f64::from(gx)).rem_euclid(PI);
            let bin = ((theta * DIRECTION_BINS as f64 / PI) as usize).min(DIRECTION_BINS - 1);
            bins[bin] += 1.0;
        }
    }
    bins
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image() {
        let t = tamura_features(&GrayRaster::filled(40, 36, 77).unwrap()).unwrap();
        assert_eq!(t.coarseness(), 2.0);
        assert_eq!(t.contrast(), 0.0);
        assert!(t.directionality().iter().all(|&b| b == 0.0));
        assert_eq!(t.values.len(), 18);
    }

    #[test]
    fn vertical_edge_lands_in_bin_zero() {
        let g = GrayRaster::from_fn(40, 40, |x, _| if x < 20 { 10 } else { 200 }).unwrap();
        let t = tamura_features(&g).unwrap();
        let d = t.directionality();
        // two interior columns straddle the edge on each of 38 interior rows
        assert_eq!(d[0], 76.0);
        assert_eq!(d.iter().sum::<f64>(), 76.0);
    }

    #[test]
    fn horizontal_edge_lands_in_middle_bin() {
        let g = GrayRaster::from_fn(40, 40, |_, y| if y < 20 { 10 } else { 200 }).unwrap();
        let d = tamura_features(&g).unwrap().directionality().to_vec();
        assert_eq!(d[8], 76.0);
    }

    #[test]
    fn two_level_contrast() {
        // half 0, half 200: sigma^2 = 100^2, m4 = 100^4 -> contrast 100
        let g = GrayRaster::from_fn(32, 32, |x, _| if x < 16 { 0 } else { 200 }).unwrap();
        let t = tamura_features(&g).unwrap();
        assert!((t.contrast() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn too_small() {
        assert!(matches!(
            tamura_features(&GrayRaster::filled(31, 100, 0).unwrap()),
            Err(TextureError::ImageTooSmall { .. })
        ));
    }
}

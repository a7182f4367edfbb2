//! Multi-scale, multi-orientation Gabor filter bank.
//!
//! Filters follow the Manjunath-Ma dictionary: a mother wavelet at the upper
//! centre frequency, dilated by `a^-m` for scale `m` and rotated by `n*pi/N`
//! for orientation `n`, with Gaussian widths chosen so neighbouring filters
//! meet at half power. Each kernel's real part is shifted to zero mean so the
//! bank rejects DC exactly.
//!
//! Responses are valid-region convolutions, evaluated with FFTs.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::TextureError;
use crate::imaging::GrayRaster;

pub const DEFAULT_SCALES: usize = 5;
pub const DEFAULT_ORIENTATIONS: usize = 6;
/// Kernel half-size in both directions.
pub const HALF_WINDOW: usize = 15;
pub const LOWER_FREQUENCY: f64 = 0.05;
pub const UPPER_FREQUENCY: f64 = 0.4;

/// Mean and spread of response magnitudes per filter:
/// `values[2 * (m * N + n)]` is the mean, `values[2 * (m * N + n) + 1]` the
/// spread, both divided by the image area.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborVector {
    pub values: Vec<f64>,
}

impl GaborVector {
    /// Mean magnitude of filter `index = m * N + n`.
    pub fn mean(&self, index: usize) -> f64 {
        self.values[2 * index]
    }

    pub fn spread(&self, index: usize) -> f64 {
        self.values[2 * index + 1]
    }
}

struct Spectra {
    width: usize,
    height: usize,
    plan: Plan2d,
    filters: Vec<Vec<Complex64>>,
}

pub struct GaborBank {
    scales: usize,
    orientations: usize,
    kernels: Vec<Vec<Complex64>>,
    spectra: Mutex<Option<Arc<Spectra>>>,
}

impl std::fmt::Debug for GaborBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaborBank")
            .field("scales", &self.scales)
            .field("orientations", &self.orientations)
            .finish_non_exhaustive()
    }
}

impl Default for GaborBank {
    fn default() -> Self {
        Self::new(DEFAULT_SCALES, DEFAULT_ORIENTATIONS)
    }
}

impl GaborBank {
    pub fn new(scales: usize, orientations: usize) -> Self {
        assert!(scales >= 2 && orientations >= 1, "bank needs >= 2 scales and >= 1 orientation");
        let mut kernels = Vec::with_capacity(scales * orientations);
        for m in 0..scales {
            for n in 0..orientations {
                kernels.push(build_kernel(scales, orientations, m, n));
            }
        }
        Self {
            scales,
            orientations,
            kernels,
            spectra: Mutex::new(None),
        }
    }

    pub fn scales(&self) -> usize {
        self.scales
    }

    pub fn orientations(&self) -> usize {
        self.orientations
    }

    /// Spatial kernel for filter (m, n), row-major over offsets
    /// `(s, t)` in `[-HALF_WINDOW, HALF_WINDOW]^2`, index
    /// `(t + HALF_WINDOW) * side + (s + HALF_WINDOW)`.
    pub fn kernel(&self, m: usize, n: usize) -> &[Complex64] {
        &self.kernels[m * self.orientations + n]
    }

    /// Centre frequency of scale `m` in cycles per pixel.
    pub fn center_frequency(&self, m: usize) -> f64 {
        UPPER_FREQUENCY * dilation(self.scales).powi(-(m as i32))
    }

    pub fn orientation(&self, n: usize) -> f64 {
        n as f64 * PI / self.orientations as f64
    }

    fn spectra_for(&self, width: usize, height: usize) -> Arc<Spectra> {
        let mut slot = self.spectra.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(s) = slot.as_ref() {
            if s.width == width && s.height == height {
                return Arc::clone(s);
            }
        }
        let plan = Plan2d::new(width, height);
        let side = 2 * HALF_WINDOW + 1;
        let filters = self
            .kernels
            .iter()
            .map(|k| {
                let mut buf = vec![Complex64::new(0.0, 0.0); width * height];
                for t in 0..side {
                    for s in 0..side {
                        let x = (s + width - HALF_WINDOW) % width;
                        let y = (t + height - HALF_WINDOW) % height;
                        buf[y * width + x] += k[t * side + s];
                    }
                }
                plan.forward(&mut buf)
            })
            .collect();
        let s = Arc::new(Spectra {
            width,
            height,
            plan,
            filters,
        });
        *slot = Some(Arc::clone(&s));
        s
    }
}

fn dilation(scales: usize) -> f64 {
    (UPPER_FREQUENCY / LOWER_FREQUENCY).powf(1.0 / (scales as f64 - 1.0))
}

fn build_kernel(scales: usize, orientations: usize, m: usize, n: usize) -> Vec<Complex64> {
    let a = dilation(scales);
    let ln2 = 2f64.ln();
    let uh = UPPER_FREQUENCY;
    let sigma_u = (a - 1.0) * uh / ((a + 1.0) * (2.0 * ln2).sqrt());
    let sigma_v = (PI / (2.0 * orientations as f64)).tan() * (uh - 2.0 * ln2 * sigma_u * sigma_u / uh)
        / (2.0 * ln2 - (2.0 * ln2).powi(2) * sigma_u * sigma_u / (uh * uh)).sqrt();
    let sigma_x = 1.0 / (2.0 * PI * sigma_u);
    let sigma_y = 1.0 / (2.0 * PI * sigma_v);
    let scale = a.powi(-(m as i32));
    let theta = n as f64 * PI / orientations as f64;
    let (sin_t, cos_t) = theta.sin_cos();
    let norm = scale / (2.0 * PI * sigma_x * sigma_y);

    let half = HALF_WINDOW as isize;
    let mut k = Vec::with_capacity((2 * HALF_WINDOW + 1).pow(2));
    for t in -half..=half {
        for s in -half..=half {
            let (x, y) = (s as f64, t as f64);
            let xr = scale * (x * cos_t + y * sin_t);
            let yr = scale * (-x * sin_t + y * cos_t);
            let envelope =
                norm * (-0.5 * (xr * xr / (sigma_x * sigma_x) + yr * yr / (sigma_y * sigma_y))).exp();
            let phase = 2.0 * PI * uh * xr;
            k.push(Complex64::new(envelope * phase.cos(), envelope * phase.sin()));
        }
    }
    let dc = k.iter().map(|c| c.re).sum::<f64>() / k.len() as f64;
    for c in &mut k {
        c.re -= dc;
    }
    // the imaginary part is odd; clear residual rounding the same way
    let dc_im = k.iter().map(|c| c.im).sum::<f64>() / k.len() as f64;
    for c in &mut k {
        c.im -= dc_im;
    }
    k
}

struct Plan2d {
    width: usize,
    height: usize,
    row: Arc<dyn Fft<f64>>,
    col: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Plan2d {
    fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            width,
            height,
            row: planner.plan_fft_forward(width),
            col: planner.plan_fft_forward(height),
            row_inv: planner.plan_fft_inverse(width),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    /// Forward 2D transform. The spectrum is returned column-major
    /// (`x * height + y`), which saves a transpose on every inverse.
    fn forward(&self, buf: &mut [Complex64]) -> Vec<Complex64> {
        self.row.process(buf);
        let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
        transpose_into(buf, self.width, self.height, &mut t);
        self.col.process(&mut t);
        t
    }

    /// Unnormalized inverse of a column-major spectrum into row-major `out`.
    /// Only rows in `rows` are completed; the others are left partial.
    fn inverse_rows(&self, spectrum: &mut [Complex64], out: &mut [Complex64], rows: Range<usize>) {
        self.col_inv.process(spectrum);
        transpose_into(spectrum, self.height, self.width, out);
        self.row_inv
            .process(&mut out[rows.start * self.width..rows.end * self.width]);
    }
}

/// Writes the transpose of the row-major `width` x `height` matrix `src`.
fn transpose_into(src: &[Complex64], width: usize, height: usize, out: &mut [Complex64]) {
    const TILE: usize = 16;
    for y0 in (0..height).step_by(TILE) {
        for x0 in (0..width).step_by(TILE) {
            for y in y0..(y0 + TILE).min(height) {
                for x in x0..(x0 + TILE).min(width) {
                    out[x * height + y] = src[y * width + x];
                }
            }
        }
    }
}

pub fn gabor_features(g: &GrayRaster, bank: &GaborBank) -> Result<GaborVector, TextureError> {
    let (w, h) = (g.width(), g.height());
    let min = 2 * HALF_WINDOW + 1;
    if w < min || h < min {
        return Err(TextureError::ImageTooSmall {
            width: w,
            height: h,
            min,
        });
    }
    let spectra = bank.spectra_for(w, h);
    let plan = &spectra.plan;
    let mut image: Vec<Complex64> = g
        .pixels()
        .iter()
        .map(|&v| Complex64::new(f64::from(v), 0.0))
        .collect();
    let image = plan.forward(&mut image);

    let image_size = (w * h) as f64;
    let inv_n = 1.0 / image_size;
    let mut values = vec![0.0; 2 * bank.kernels.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); w * h];
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    let mut magnitudes = Vec::with_capacity((w - 2 * HALF_WINDOW) * (h - 2 * HALF_WINDOW));
    for (i, filter) in spectra.filters.iter().enumerate() {
        for ((b, &x), &f) in buf.iter_mut().zip(&image).zip(filter) {
            *b = x * f;
        }
        plan.inverse_rows(&mut buf, &mut out, HALF_WINDOW..h - HALF_WINDOW);
        magnitudes.clear();
        for y in HALF_WINDOW..h - HALF_WINDOW {
            for x in HALF_WINDOW..w - HALF_WINDOW {
                magnitudes.push((out[y * w + x] * inv_n).norm());
            }
        }
        let mean = magnitudes.iter().sum::<f64>() / image_size;
        let spread = magnitudes.iter().map(|m| (m - mean).powi(2)).sum::<f64>().sqrt() / image_size;
        values[2 * i] = mean;
        values[2 * i + 1] = spread;
    }
    Ok(GaborVector { values })
}

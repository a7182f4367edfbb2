//! Gray-level co-occurrence matrix at a horizontal offset and its summary
//! statistics.

use super::TextureError;
use crate::imaging::GrayRaster;

/// Matrix side. One larger than the intensity range, kept for format parity.
pub const GLCM_LEVELS: usize = 257;

#[derive(Debug, Clone, PartialEq)]
pub struct GlcmMatrix {
    cells: Vec<f64>,
    pixel_counter: u64,
}

impl GlcmMatrix {
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.cells[a * GLCM_LEVELS + b]
    }

    pub fn pixel_counter(&self) -> u64 {
        self.pixel_counter
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }
}

/// Symmetric co-occurrence counts of (g(x, y), g(x + step, y)), normalized
/// to unit mass.
pub fn glcm_matrix(g: &GrayRaster, step: usize) -> Result<GlcmMatrix, TextureError> {
    let (w, h) = (g.width(), g.height());
    if w <= step {
        return Err(TextureError::ImageTooNarrow { width: w, step });
    }
    let mut counts = vec![0u64; GLCM_LEVELS * GLCM_LEVELS];
    let mut pixel_counter = 0u64;
    for y in 0..h {
        for x in 0..w - step {
            let a = g.get(x, y) as usize;
            let b = g.get(x + step, y) as usize;
            counts[a * GLCM_LEVELS + b] += 1;
            counts[b * GLCM_LEVELS + a] += 1;
            pixel_counter += 2;
        }
    }
    let total = pixel_counter as f64;
    Ok(GlcmMatrix {
        cells: counts.into_iter().map(|c| c as f64 / total).collect(),
        pixel_counter,
    })
}

/// How correlation is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationMode {
    /// Covariance divided by the product of the marginal variances.
    #[default]
    VarianceProduct,
    /// Haralick's form: covariance over the product of standard deviations.
    Standard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlcmFeatures {
    pub pixel_counter: u64,
    pub asm: f64,
    pub contrast: f64,
    pub correlation: f64,
    pub idm: f64,
    pub entropy: f64,
}

impl GlcmFeatures {
    /// The five statistics, in serialization order.
    pub fn statistics(&self) -> [f64; 5] {
        [
            self.asm,
            self.contrast,
            self.correlation,
            self.idm,
            self.entropy,
        ]
    }
}

fn statistics(m: &GlcmMatrix, mode: CorrelationMode) -> (GlcmFeatures, bool) {
    let n = GLCM_LEVELS;
    let (mut asm, mut contrast, mut idm, mut entropy) = (0.0, 0.0, 0.0, 0.0);
    let (mut mean_x, mut mean_y) = (0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let p = m.get(a, b);
            if p == 0.0 {
                continue;
            }
            let d = a as f64 - b as f64;
            asm += p * p;
            contrast += d * d * p;
            idm += p / (1.0 + d * d);
            entropy -= p * p.ln();
            mean_x += a as f64 * p;
            mean_y += b as f64 * p;
        }
    }
    let (mut var_x, mut var_y, mut cov) = (0.0, 0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let p = m.get(a, b);
            if p == 0.0 {
                continue;
            }
            let (dx, dy) = (a as f64 - mean_x, b as f64 - mean_y);
            var_x += dx * dx * p;
            var_y += dy * dy * p;
            cov += dx * dy * p;
        }
    }
    let denom = match mode {
        CorrelationMode::VarianceProduct => var_x * var_y,
        CorrelationMode::Standard => (var_x * var_y).sqrt(),
    };
    let degenerate = denom == 0.0;
    let correlation = if degenerate { 0.0 } else { cov / denom };
    (
        GlcmFeatures {
            pixel_counter: m.pixel_counter,
            asm,
            contrast,
            correlation,
            idm,
            entropy,
        },
        degenerate,
    )
}

/// Fails with `DegenerateTexture` when either marginal has zero variance.
pub fn glcm_features(m: &GlcmMatrix, mode: CorrelationMode) -> Result<GlcmFeatures, TextureError> {
    match statistics(m, mode) {
        (_, true) => Err(TextureError::DegenerateTexture),
        (f, false) => Ok(f),
    }
}

/// Like [`glcm_features`] but reports an undefined correlation as 0.
pub fn glcm_features_or_zero(m: &GlcmMatrix, mode: CorrelationMode) -> GlcmFeatures {
    statistics(m, mode).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image() {
        let g = GrayRaster::filled(5, 4, 42).unwrap();
        let m = glcm_matrix(&g, 1).unwrap();
        assert_eq!(m.get(42, 42), 1.0);
        assert_eq!(m.cells().iter().filter(|&&c| c != 0.0).count(), 1);
        assert_eq!(
            glcm_features(&m, CorrelationMode::default()),
            Err(TextureError::DegenerateTexture)
        );
        let f = glcm_features_or_zero(&m, CorrelationMode::default());
        assert_eq!((f.asm, f.contrast, f.idm, f.entropy, f.correlation), (1.0, 0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn single_pair() {
        let g = GrayRaster::new(2, 1, vec![0, 255]).unwrap();
        let m = glcm_matrix(&g, 1).unwrap();
        assert_eq!(m.pixel_counter(), 2);
        assert_eq!(m.get(0, 255), 0.5);
        assert_eq!(m.get(255, 0), 0.5);
        let f = glcm_features(&m, CorrelationMode::VarianceProduct).unwrap();
        assert_eq!(f.asm, 0.5);
        assert!((f.entropy - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((f.idm - 1.0 / 65026.0).abs() < 1e-18);
        assert!((f.idm - 1.5379e-5).abs() < 1e-9);
        assert_eq!(f.contrast, 65025.0);
        // covariance -127.5^2 over variance product 127.5^4
        assert!((f.correlation + 1.0 / 16256.25).abs() < 1e-15);
        let s = glcm_features(&m, CorrelationMode::Standard).unwrap();
        assert!((s.correlation + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pixel_counter_excludes_boundary() {
        let g = GrayRaster::from_fn(9, 7, |x, y| (x * y) as u8).unwrap();
        for step in 1..4 {
            let m = glcm_matrix(&g, step).unwrap();
            assert_eq!(m.pixel_counter(), (2 * (9 - step) * 7) as u64);
        }
    }

    #[test]
    fn too_narrow() {
        let g = GrayRaster::filled(1, 10, 0).unwrap();
        assert_eq!(
            glcm_matrix(&g, 1),
            Err(TextureError::ImageTooNarrow { width: 1, step: 1 })
        );
    }
}

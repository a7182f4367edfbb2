//! Pixel grids and the handful of pixel kernels every extractor builds on.

mod pnm;

pub use pnm::{encode_pgm, encode_ppm};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("unsupported image format")]
    UnsupportedFormat,
    #[error("corrupt image: {0}")]
    CorruptImage(String),
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("binary raster values must be 0 or 1")]
    NotBinary,
}

/// Encoded formats `load_frame` understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    /// Binary portable graymap / pixmap (P5 / P6).
    Pnm,
    Png,
    Jpeg,
}

impl FrameFormat {
    /// Guesses the format from a file extension (case-insensitive).
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "ppm" | "pgm" | "pnm" => Some(Self::Pnm),
            "png" => Some(Self::Png),
            "jpg" | "jpeg" => Some(Self::Jpeg),
            _ => None,
        }
    }

    fn sniff(bytes: &[u8]) -> Option<Self> {
        match bytes {
            [b'P', b'5' | b'6', ..] => Some(Self::Pnm),
            [0x89, b'P', b'N', b'G', ..] => Some(Self::Png),
            [0xFF, 0xD8, ..] => Some(Self::Jpeg),
            _ => None,
        }
    }
}

fn check_dims(width: usize, height: usize) -> Result<usize, ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::InvalidDimensions { width, height });
    }
    width
        .checked_mul(height)
        .ok_or(ImageError::InvalidDimensions { width, height })
}

/// An RGB image, row-major, 8 bits per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Raster {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self, ImageError> {
        let expected = check_dims(width, height)?;
        if pixels.len() != expected {
            return Err(ImageError::BufferSize {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self, ImageError> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![rgb; n],
        })
    }

    /// Builds a raster by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self, ImageError> {
        let n = check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }
}

/// Single-channel intensity image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayRaster {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayRaster {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        let expected = check_dims(width, height)?;
        if pixels.len() != expected {
            return Err(ImageError::BufferSize {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, v: u8) -> Result<Self, ImageError> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            pixels: vec![v; n],
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImageError> {
        let n = check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Two-level image whose values are exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRaster {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl BinaryRaster {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        let expected = check_dims(width, height)?;
        if pixels.len() != expected {
            return Err(ImageError::BufferSize {
                expected,
                actual: pixels.len(),
            });
        }
        if pixels.iter().any(|&v| v > 1) {
            return Err(ImageError::NotBinary);
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, ImageError> {
        let n = check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y) as u8);
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// 256-bin count histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    bins: [u64; 256],
    total: u64,
}

impl Histogram256 {
    pub fn from_bins(bins: [u64; 256]) -> Self {
        let total = bins.iter().sum();
        Self { bins, total }
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Decodes a frame. Without a hint the format is sniffed from magic bytes.
pub fn load_frame(bytes: &[u8], hint: Option<FrameFormat>) -> Result<Raster, ImageError> {
    let format = hint
        .or_else(|| FrameFormat::sniff(bytes))
        .ok_or(ImageError::UnsupportedFormat)?;
    match format {
        FrameFormat::Pnm => pnm::decode(bytes),
        FrameFormat::Png => decode_with_image(bytes, image::ImageFormat::Png),
        FrameFormat::Jpeg => decode_with_image(bytes, image::ImageFormat::Jpeg),
    }
}

fn decode_with_image(bytes: &[u8], format: image::ImageFormat) -> Result<Raster, ImageError> {
    let img = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| ImageError::CorruptImage(e.to_string()))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = img.pixels().map(|p| p.0).collect();
    Raster::new(w, h, pixels)
}

/// Nearest-neighbour resampling: output (x, y) reads input
/// (floor(x * src_w / w), floor(y * src_h / h)).
pub fn rescale(r: &Raster, width: usize, height: usize) -> Result<Raster, ImageError> {
    check_dims(width, height)?;
    let xs: Vec<usize> = (0..width).map(|x| x * r.width / width).collect();
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let sy = y * r.height / height;
        let row = &r.pixels[sy * r.width..(sy + 1) * r.width];
        pixels.extend(xs.iter().map(|&sx| row[sx]));
    }
    Raster::new(width, height, pixels)
}

/// BT.601 luma, rounded half up, in exact integer arithmetic.
#[inline]
pub fn luma(rgb: [u8; 3]) -> u8 {
    let [r, g, b] = rgb.map(u32::from);
    ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
}

pub fn to_grayscale(r: &Raster) -> GrayRaster {
    GrayRaster {
        width: r.width,
        height: r.height,
        pixels: r.pixels.iter().map(|&p| luma(p)).collect(),
    }
}

pub fn gray_histogram(g: &GrayRaster) -> Histogram256 {
    let mut bins = [0u64; 256];
    for &v in &g.pixels {
        bins[v as usize] += 1;
    }
    Histogram256::from_bins(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn luma_reference_values() {
        assert_eq!(luma([255, 255, 255]), 255);
        // 0.299 * 255 = 76.245
        assert_eq!(luma([255, 0, 0]), 76);
        // 0.587 * 255 = 149.685
        assert_eq!(luma([0, 255, 0]), 150);
        assert_eq!(luma([0, 0, 255]), 29);
    }

    #[test]
    fn gray_input_is_fixed_point_of_luma() {
        for v in 0..=255u8 {
            assert_eq!(luma([v, v, v]), v);
        }
    }

    #[test]
    fn rescale_checkerboard_to_single_pixel_takes_top_left() {
        let r = Raster::new(2, 2, vec![[9, 9, 9], [0, 0, 0], [0, 0, 0], [9, 9, 9]]).unwrap();
        let out = rescale(&r, 1, 1).unwrap();
        assert_eq!(out.pixels(), &[[9, 9, 9]]);
    }

    #[test]
    fn rescale_replicates_single_pixel() {
        let r = Raster::filled(1, 1, [1, 2, 3]).unwrap();
        let out = rescale(&r, 4, 4).unwrap();
        assert_eq!(out.pixels().len(), 16);
        assert!(out.pixels().iter().all(|&p| p == [1, 2, 3]));
    }

    #[test]
    fn rescale_rejects_zero_target() {
        let r = Raster::filled(3, 3, [0, 0, 0]).unwrap();
        assert_eq!(
            rescale(&r, 0, 4),
            Err(ImageError::InvalidDimensions {
                width: 0,
                height: 4
            })
        );
    }

    #[test]
    fn histogram_examples() {
        let g = GrayRaster::filled(3, 3, 7).unwrap();
        let h = gray_histogram(&g);
        assert_eq!(h.bins()[7], 9);
        assert_eq!(h.total(), 9);
        assert_eq!(h.bins().iter().sum::<u64>(), 9);

        let g = GrayRaster::new(2, 1, vec![0, 255]).unwrap();
        let h = gray_histogram(&g);
        assert_eq!((h.bins()[0], h.bins()[255], h.total()), (1, 1, 2));
    }

    #[test]
    fn constructors_validate() {
        assert!(Raster::new(2, 2, vec![[0; 3]; 3]).is_err());
        assert!(GrayRaster::filled(0, 1, 0).is_err());
        assert_eq!(
            BinaryRaster::new(1, 2, vec![0, 2]),
            Err(ImageError::NotBinary)
        );
    }

    #[test]
    fn unknown_magic_is_unsupported() {
        assert_eq!(
            load_frame(b"GIF89a....", None),
            Err(ImageError::UnsupportedFormat)
        );
    }

    #[test]
    fn png_adapter_decodes() {
        let mut img = image::RgbImage::new(3, 2);
        img.put_pixel(2, 1, image::Rgb([10, 20, 30]));
        let mut buf = std::io::Cursor::new(Vec::new());
        img.write_to(&mut buf, image::ImageFormat::Png).unwrap();
        let r = load_frame(buf.get_ref(), None).unwrap();
        assert_eq!((r.width(), r.height()), (3, 2));
        assert_eq!(r.get(2, 1), [10, 20, 30]);
        assert_eq!(r.get(0, 0), [0, 0, 0]);
    }

    proptest! {
        #[test]
        fn histogram_mass_is_pixel_count(w in 1usize..30, h in 1usize..30, seed in any::<u64>()) {
            let g = GrayRaster::from_fn(w, h, |x, y| {
                (seed.wrapping_mul(6364136223846793005).wrapping_add((x * 31 + y * 17) as u64) >> 33) as u8
            }).unwrap();
            prop_assert_eq!(gray_histogram(&g).bins().iter().sum::<u64>(), (w * h) as u64);
        }

        #[test]
        fn rescale_to_own_size_is_identity(w in 1usize..20, h in 1usize..20, v in any::<u8>()) {
            let r = Raster::from_fn(w, h, |x, y| [v, x as u8, y as u8]).unwrap();
            prop_assert_eq!(rescale(&r, w, h).unwrap(), r);
        }
    }
}

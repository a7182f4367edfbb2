//! The per-key-frame descriptor bundle and the extractor that produces it.

use std::fmt;
use std::str::FromStr;

use crate::color::{self, AutoCorrelogram, ColorHistogram, NaiveSignature};
use crate::imaging::{rescale, to_grayscale, Raster};
use crate::range_index::{self, RangeKey};
use crate::segmentation;
use crate::texture::{
    self, gabor, glcm::glcm_features_or_zero, CorrelationMode, GaborBank, GaborVector,
    GlcmFeatures, TamuraVector, TextureError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Histogram,
    Glcm,
    Gabor,
    Tamura,
    Correlogram,
    Naive,
    Regions,
}

impl FeatureKind {
    /// Canonical order, shared by weight profiles and distance arrays.
    pub const ALL: [FeatureKind; 7] = [
        FeatureKind::Histogram,
        FeatureKind::Glcm,
        FeatureKind::Gabor,
        FeatureKind::Tamura,
        FeatureKind::Correlogram,
        FeatureKind::Naive,
        FeatureKind::Regions,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Histogram => "histogram",
            FeatureKind::Glcm => "glcm",
            FeatureKind::Gabor => "gabor",
            FeatureKind::Tamura => "tamura",
            FeatureKind::Correlogram => "correlogram",
            FeatureKind::Naive => "naive",
            FeatureKind::Regions => "regions",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown feature kind `{s}`"))
    }
}

/// Everything retrieval knows about one key frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub histogram: ColorHistogram,
    pub glcm: GlcmFeatures,
    pub gabor: GaborVector,
    pub tamura: TamuraVector,
    pub correlogram: AutoCorrelogram,
    pub naive: NaiveSignature,
    pub major_regions: u32,
    pub range_key: RangeKey,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorConfig {
    /// Frames are rescaled (nearest) to a square of this side first.
    pub working_size: usize,
    pub glcm_step: usize,
    pub correlation: CorrelationMode,
    pub correlogram_distance: usize,
    pub gabor_scales: usize,
    pub gabor_orientations: usize,
    pub major_fraction: f64,
    pub level1_threshold: f64,
    pub deeper_threshold: f64,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self {
            working_size: 300,
            glcm_step: 1,
            correlation: CorrelationMode::VarianceProduct,
            correlogram_distance: color::DEFAULT_MAX_DISTANCE,
            gabor_scales: gabor::DEFAULT_SCALES,
            gabor_orientations: gabor::DEFAULT_ORIENTATIONS,
            major_fraction: segmentation::DEFAULT_MAJOR_FRACTION,
            level1_threshold: range_index::LEVEL1_THRESHOLD,
            deeper_threshold: range_index::DEEPER_THRESHOLD,
        }
    }
}

/// Holds the precomputed Gabor bank; share one instance across threads.
#[derive(Debug)]
pub struct FeatureExtractor {
    config: ExtractorConfig,
    bank: GaborBank,
}

impl Default for FeatureExtractor {
    fn default() -> Self {
        Self::new(ExtractorConfig::default())
    }
}

impl FeatureExtractor {
    pub fn new(config: ExtractorConfig) -> Self {
        assert!(
            config.working_size >= texture::tamura::MIN_SIDE,
            "working size must be at least {}",
            texture::tamura::MIN_SIDE
        );
        let bank = GaborBank::new(config.gabor_scales, config.gabor_orientations);
        Self { config, bank }
    }

    pub fn config(&self) -> &ExtractorConfig {
        &self.config
    }

    pub fn extract(&self, frame: &Raster) -> Result<FeatureSet, TextureError> {
        let c = &self.config;
        let r = rescale(frame, c.working_size, c.working_size).expect("working size is non-zero");
        let gray = to_grayscale(&r);
        let histogram = color::rgb_histogram(&r);
        let range_key = range_index::assign_range(
            &histogram.to_histogram256(),
            c.level1_threshold,
            c.deeper_threshold,
        )
        .expect("a rescaled frame always has pixels");
        let glcm = glcm_features_or_zero(&texture::glcm_matrix(&gray, c.glcm_step)?, c.correlation);
        Ok(FeatureSet {
            histogram,
            glcm,
            gabor: texture::gabor_features(&gray, &self.bank)?,
            tamura: texture::tamura_features(&gray)?,
            correlogram: color::auto_correlogram(&r, c.correlogram_distance),
            naive: color::naive_signature(&r),
            major_regions: segmentation::major_region_count(&gray, c.major_fraction) as u32,
            range_key,
        })
    }
}

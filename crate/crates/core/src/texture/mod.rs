//! Texture descriptors computed on intensity images.

pub mod gabor;
pub mod glcm;
pub mod tamura;

pub use gabor::{gabor_features, GaborBank, GaborVector, HALF_WINDOW};
pub use glcm::{
    glcm_features, glcm_features_or_zero, glcm_matrix, CorrelationMode, GlcmFeatures, GlcmMatrix,
    GLCM_LEVELS,
};
pub use tamura::{tamura_features, TamuraVector};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextureError {
    #[error("image width {width} must exceed the co-occurrence step {step}")]
    ImageTooNarrow { width: usize, step: usize },
    #[error("image {width}x{height} is smaller than the required {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("texture has zero marginal variance; correlation is undefined")]
    DegenerateTexture,
}

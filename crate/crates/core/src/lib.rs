//! Content-based video-frame retrieval.
//!
//! Frames are collapsed into key frames, each key frame is described by seven
//! visual descriptors, bucketed by an intensity range tree, persisted in an
//! on-disk catalog and ranked against query images by a weighted combination
//! of per-feature distances.

pub mod catalog;
pub mod color;
pub mod engine;
pub mod features;
pub mod imaging;
pub mod keyframe;
pub mod range_index;
pub mod retrieval;
pub mod segmentation;
pub mod texture;

pub use catalog::{Catalog, CatalogError, FrameId, KeyFrameRecord, VideoId, VideoRecord};
pub use engine::{Engine, EngineError, IngestReport, IngestStage, SearchHit, SearchRequest};
pub use features::{FeatureExtractor, FeatureKind, FeatureSet};
pub use imaging::{BinaryRaster, GrayRaster, Histogram256, ImageError, Raster};
pub use range_index::{RangeBuckets, RangeKey};
pub use retrieval::{RankedResult, WeightProfile};

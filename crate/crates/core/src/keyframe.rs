//! Collapses an ordered frame sequence into key frames.
//!
//! The first frame is an anchor. Later frames are dropped while they stay
//! within `threshold` of the anchor; the first one that does not becomes the
//! next anchor.

use crate::imaging::{rescale, Raster};
use thiserror::Error;

/// Side length frames are rescaled to before comparison.
pub const COMPARISON_SIZE: usize = 300;

pub const DEFAULT_THRESHOLD: f64 = 800.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyframeError {
    #[error("no frames to select from")]
    EmptySequence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyFrameSelection {
    pub kept_indices: Vec<usize>,
    pub threshold: f64,
}

fn comparison_view(r: &Raster) -> Raster {
    rescale(r, COMPARISON_SIZE, COMPARISON_SIZE).expect("comparison size is non-zero")
}

fn squared_distance(a: &Raster, b: &Raster) -> u64 {
    a.pixels()
        .iter()
        .zip(b.pixels())
        .map(|(p, q)| {
            (0..3)
                .map(|c| {
                    let d = i64::from(p[c]) - i64::from(q[c]);
                    (d * d) as u64
                })
                .sum::<u64>()
        })
        .sum()
}

/// Euclidean distance over all channels of both frames rescaled to 300x300.
pub fn frame_distance(a: &Raster, b: &Raster) -> f64 {
    (squared_distance(&comparison_view(a), &comparison_view(b)) as f64).sqrt()
}

pub fn extract_keyframes(
    frames: &[Raster],
    threshold: f64,
) -> Result<KeyFrameSelection, KeyframeError> {
    extract_keyframes_by(frames.len(), threshold, |i| Ok::<_, std::convert::Infallible>(frames[i].clone()))
        .map_err(|e| match e {
            SweepError::Empty => KeyframeError::EmptySequence,
            SweepError::Load(never) => match never {},
        })
}

#[derive(Debug)]
pub(crate) enum SweepError<E> {
    Empty,
    Load(E),
}

/// Anchor-and-sweep over `len` frames fetched lazily, so callers can stream
/// frames from disk without holding the whole sequence in memory.
pub(crate) fn extract_keyframes_by<E>(
    len: usize,
    threshold: f64,
    mut load: impl FnMut(usize) -> Result<Raster, E>,
) -> Result<KeyFrameSelection, SweepError<E>> {
    if len == 0 {
        return Err(SweepError::Empty);
    }
    let view = |i: usize, load: &mut dyn FnMut(usize) -> Result<Raster, E>| {
        load(i).map(|r| comparison_view(&r)).map_err(SweepError::Load)
    };
    let mut kept = vec![0];
    let mut anchor = view(0, &mut load)?;
    for j in 1..len {
        let candidate = view(j, &mut load)?;
        let dist = (squared_distance(&anchor, &candidate) as f64).sqrt();
        if dist > threshold {
            kept.push(j);
            anchor = candidate;
        }
    }
    Ok(KeyFrameSelection {
        kept_indices: kept,
        threshold,
    })
}

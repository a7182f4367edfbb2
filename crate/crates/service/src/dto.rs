//! JSON bodies returned by the HTTP API (and `vidseek query --json`).

use std::collections::BTreeMap;

use serde::Serialize;
use vidseek_core::catalog::{CatalogSnapshot, VideoRecord};
use vidseek_core::retrieval::{EvalMethod, PrecisionReport};
use vidseek_core::{FeatureKind, IngestReport, SearchHit};

#[derive(Debug, Clone, Serialize)]
pub struct Video {
    pub v_id: u64,
    pub v_name: String,
    /// Seconds since the Unix epoch.
    pub ingested_at: u64,
    pub frame_count: usize,
    pub key_frames: Vec<u64>,
}

impl From<&VideoRecord> for Video {
    fn from(v: &VideoRecord) -> Self {
        Self {
            v_id: v.v_id.0,
            v_name: v.v_name.clone(),
            ingested_at: v.ingested_at,
            frame_count: v.key_frames.len(),
            key_frames: v.key_frames.iter().map(|f| f.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VideoList {
    pub videos: Vec<Video>,
}

impl VideoList {
    pub fn from_snapshot(snap: &CatalogSnapshot, name: Option<&str>) -> Self {
        let videos = match name {
            Some(n) => snap.find_by_name(n).into_iter().map(Video::from).collect(),
            None => snap.list_videos().map(Video::from).collect(),
        };
        Self { videos }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Ingest {
    pub v_id: u64,
    pub frames_in: usize,
    pub key_frames_kept: usize,
    pub per_frame_timings_ms: Vec<f64>,
}

impl From<&IngestReport> for Ingest {
    fn from(r: &IngestReport) -> Self {
        Self {
            v_id: r.v_id.0,
            frames_in: r.frames_in,
            key_frames_kept: r.key_frames_kept,
            per_frame_timings_ms: r.per_frame_timings_ms.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub rank: usize,
    pub frame_id: u64,
    pub v_id: u64,
    pub v_name: String,
    pub i_name: String,
    pub image_url: String,
    pub combined: f64,
    /// Raw per-feature distances keyed by feature name.
    pub distances: BTreeMap<&'static str, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResults {
    pub results: Vec<Hit>,
}

impl SearchResults {
    pub fn from_hits(hits: &[SearchHit]) -> Self {
        let results = hits
            .iter()
            .enumerate()
            .map(|(i, h)| Hit {
                rank: i + 1,
                frame_id: h.frame_id.0,
                v_id: h.v_id.0,
                v_name: h.v_name.clone(),
                i_name: h.i_name.clone(),
                image_url: format!("/api/frames/{}/image", h.frame_id),
                combined: h.result.combined,
                distances: FeatureKind::ALL
                    .iter()
                    .map(|&k| (k.name(), h.result.distance(k)))
                    .collect(),
            })
            .collect();
        Self { results }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub ks: Vec<usize>,
    pub methods: Vec<&'static str>,
    /// `precision[i][j]`: mean precision at `ks[i]` for `methods[j]`.
    pub precision: Vec<[f64; 7]>,
    pub table: String,
}

impl From<&PrecisionReport> for Evaluation {
    fn from(r: &PrecisionReport) -> Self {
        Self {
            ks: r.ks.clone(),
            methods: EvalMethod::ALL.iter().map(|m| m.title()).collect(),
            precision: r.cells.clone(),
            table: r.to_text(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
}

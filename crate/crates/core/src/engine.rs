//! Ingest, search and evaluation on top of the catalog.

use std::borrow::Cow;
use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use thiserror::Error;

use crate::catalog::{
    validate_video_name, Catalog, CatalogError, FrameId, NewKeyFrame, VideoId, WriteStage,
};
use crate::features::{ExtractorConfig, FeatureExtractor, FeatureSet};
use crate::imaging::{load_frame, FrameFormat, ImageError, Raster};
use crate::keyframe::{self, SweepError};
use crate::retrieval::{
    self, LabeledQuery, PrecisionReport, RankedResult, RetrievalError, WeightProfile,
};
use crate::texture::TextureError;

/// Lower bound on the candidate pool drawn from the range index.
pub const MIN_CANDIDATES: usize = 50;
pub const DEFAULT_K: usize = 20;

/// File extensions picked up when ingesting a directory.
pub const FRAME_EXTENSIONS: [&str; 6] = ["ppm", "pgm", "pnm", "png", "jpg", "jpeg"];

/// Checkpoints of the ingest pipeline, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IngestStage {
    Decode,
    SelectKeyFrames,
    ExtractFeatures,
    AssignRange,
    WriteStaging,
    Publish,
    UpdateCounters,
}

impl IngestStage {
    pub const ALL: [IngestStage; 7] = [
        IngestStage::Decode,
        IngestStage::SelectKeyFrames,
        IngestStage::ExtractFeatures,
        IngestStage::AssignRange,
        IngestStage::WriteStaging,
        IngestStage::Publish,
        IngestStage::UpdateCounters,
    ];
}

impl From<WriteStage> for IngestStage {
    fn from(s: WriteStage) -> Self {
        match s {
            WriteStage::Staged => IngestStage::WriteStaging,
            WriteStage::Publish => IngestStage::Publish,
            WriteStage::Counters => IngestStage::UpdateCounters,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("EmptyVideo: no frames to ingest")]
    EmptyVideo,
    #[error("EmptyCatalog: nothing has been ingested yet")]
    EmptyCatalog,
    #[error("CorruptImage: {file}: {source}")]
    CorruptImage {
        file: String,
        #[source]
        source: ImageError,
    },
    #[error("{file}: {source}")]
    Texture {
        file: String,
        #[source]
        source: TextureError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("ingest aborted at {stage:?}: {reason}")]
    Aborted { stage: IngestStage, reason: String },
    #[error("query image {0} was not provided")]
    MissingQuery(String),
    #[error("labels line {line}: {reason}")]
    Labels { line: usize, reason: String },
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Catalog(CatalogError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

impl From<CatalogError> for EngineError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::EmptyVideo => EngineError::EmptyVideo,
            CatalogError::Aborted { stage, reason } => EngineError::Aborted {
                stage: stage.into(),
                reason,
            },
            other => EngineError::Catalog(other),
        }
    }
}

#[derive(Debug, Clone)]
pub enum FrameSource {
    File(PathBuf),
    Memory(Vec<u8>),
}

/// One frame of a video to ingest.
#[derive(Debug, Clone)]
pub struct FrameInput {
    pub name: String,
    pub source: FrameSource,
}

impl FrameInput {
    pub fn from_bytes(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            source: FrameSource::Memory(bytes),
        }
    }

    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self {
            name,
            source: FrameSource::File(path),
        }
    }

    fn bytes(&self) -> Result<Cow<'_, [u8]>, EngineError> {
        match &self.source {
            FrameSource::Memory(b) => Ok(Cow::Borrowed(b)),
            FrameSource::File(p) => fs::read(p).map(Cow::Owned).map_err(|source| EngineError::Io {
                path: p.clone(),
                source,
            }),
        }
    }

    fn extension(&self) -> String {
        Path::new(&self.name)
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default()
    }

    fn decode(&self, bytes: &[u8]) -> Result<Raster, EngineError> {
        let hint = FrameFormat::from_extension(&self.extension());
        decode_named(&self.name, bytes, hint)
    }
}

/// Sniffs the format first and falls back to the hint.
fn decode_named(name: &str, bytes: &[u8], hint: Option<FrameFormat>) -> Result<Raster, EngineError> {
    load_frame(bytes, None)
        .or_else(|e| match (e, hint) {
            (ImageError::UnsupportedFormat, Some(h)) => load_frame(bytes, Some(h)),
            (e, _) => Err(e),
        })
        .map_err(|source| EngineError::CorruptImage {
            file: name.to_owned(),
            source,
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestReport {
    pub v_id: VideoId,
    pub frames_in: usize,
    pub key_frames_kept: usize,
    /// Wall time spent on each input frame, in input order. Key frames include
    /// feature extraction.
    pub per_frame_timings_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRequest {
    pub query: Vec<u8>,
    pub k: usize,
    pub weights: WeightProfile,
    /// Rank the whole catalog instead of the range-index candidates.
    pub exhaustive: bool,
}

impl SearchRequest {
    pub fn new(query: Vec<u8>) -> Self {
        Self {
            query,
            k: DEFAULT_K,
            weights: WeightProfile::equal(),
            exhaustive: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchHit {
    pub v_id: VideoId,
    pub v_name: String,
    pub frame_id: FrameId,
    pub i_name: String,
    pub result: RankedResult,
}

#[derive(Debug)]
pub struct Engine {
    catalog: Catalog,
    extractor: FeatureExtractor,
    keyframe_threshold: f64,
}

impl Engine {
    pub fn open(data_dir: impl Into<PathBuf>) -> Result<Self, EngineError> {
        Ok(Self::new(
            Catalog::open(data_dir)?,
            ExtractorConfig::default(),
            keyframe::DEFAULT_THRESHOLD,
        ))
    }

    pub fn new(catalog: Catalog, config: ExtractorConfig, keyframe_threshold: f64) -> Self {
        Self {
            catalog,
            extractor: FeatureExtractor::new(config),
            keyframe_threshold,
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn extractor(&self) -> &FeatureExtractor {
        &self.extractor
    }

    pub fn keyframe_threshold(&self) -> f64 {
        self.keyframe_threshold
    }

    /// Ingests every frame file in `dir`, in lexicographic file-name order.
    pub fn ingest_dir(&self, name: &str, dir: &Path) -> Result<IngestReport, EngineError> {
        self.ingest(name, frame_files(dir)?)
    }

    pub fn ingest(&self, name: &str, frames: Vec<FrameInput>) -> Result<IngestReport, EngineError> {
        self.ingest_with_hook(name, frames, &mut |_| Ok(()))
    }

    /// Runs the pipeline, consulting `hook` as each [`IngestStage`] is
    /// reached. An `Err` from the hook aborts the ingest with nothing
    /// persisted.
    pub fn ingest_with_hook(
        &self,
        name: &str,
        frames: Vec<FrameInput>,
        hook: &mut dyn FnMut(IngestStage) -> Result<(), String>,
    ) -> Result<IngestReport, EngineError> {
        validate_video_name(name)?;
        if frames.is_empty() {
            return Err(EngineError::EmptyVideo);
        }
        let mut check = |stage: IngestStage| {
            hook(stage).map_err(|reason| EngineError::Aborted { stage, reason })
        };
        let mut timings = vec![0.0; frames.len()];

        check(IngestStage::Decode)?;
        let selection = keyframe::extract_keyframes_by(frames.len(), self.keyframe_threshold, |i| {
            let start = Instant::now();
            let f = &frames[i];
            let r = f.bytes().and_then(|b| f.decode(&b));
            timings[i] += start.elapsed().as_secs_f64() * 1e3;
            r
        })
        .map_err(|e| match e {
            SweepError::Empty => EngineError::EmptyVideo,
            SweepError::Load(e) => e,
        })?;
        check(IngestStage::SelectKeyFrames)?;

        check(IngestStage::ExtractFeatures)?;
        let kept = &selection.kept_indices;
        let extracted = self.extract_parallel(kept.iter().map(|&i| &frames[i]).collect())?;
        check(IngestStage::AssignRange)?;

        let mut new_frames = Vec::with_capacity(kept.len());
        for (&i, (image, features, ms)) in kept.iter().zip(extracted) {
            timings[i] += ms;
            new_frames.push(NewKeyFrame {
                name: frames[i].name.clone(),
                image,
                extension: frames[i].extension(),
                features,
            });
        }
        let v_id = self.catalog.put_video_with(name, new_frames, &mut |s| {
            hook(IngestStage::from(s))
        })?;
        Ok(IngestReport {
            v_id,
            frames_in: frames.len(),
            key_frames_kept: kept.len(),
            per_frame_timings_ms: timings,
        })
    }

    /// Extracts features for each frame on a pool of scoped threads,
    /// returning (encoded bytes, features, milliseconds) in input order.
    fn extract_parallel(
        &self,
        frames: Vec<&FrameInput>,
    ) -> Result<Vec<(Vec<u8>, FeatureSet, f64)>, EngineError> {
        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(frames.len())
            .max(1);
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<_, EngineError>>>> =
            Mutex::new((0..frames.len()).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(f) = frames.get(i) else { break };
                    let start = Instant::now();
                    let out = f.bytes().and_then(|bytes| {
                        let raster = f.decode(&bytes)?;
                        let features =
                            self.extractor
                                .extract(&raster)
                                .map_err(|source| EngineError::Texture {
                                    file: f.name.clone(),
                                    source,
                                })?;
                        Ok((bytes.into_owned(), features))
                    });
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    slots.lock().unwrap_or_else(|e| e.into_inner())[i] =
                        Some(out.map(|(b, fs)| (b, fs, ms)));
                });
            }
        });
        slots
            .into_inner()
            .unwrap_or_else(|e| e.into_inner())
            .into_iter()
            .map(|s| s.expect("every slot is filled"))
            .collect()
    }

    pub fn delete(&self, id: VideoId) -> Result<(), EngineError> {
        self.catalog.delete_video(id)?;
        Ok(())
    }

    /// Decodes and describes a query image.
    pub fn describe(&self, name: &str, bytes: &[u8]) -> Result<FeatureSet, EngineError> {
        let hint = Path::new(name)
            .extension()
            .and_then(|e| FrameFormat::from_extension(&e.to_string_lossy()));
        let raster = decode_named(name, bytes, hint)?;
        self.extractor
            .extract(&raster)
            .map_err(|source| EngineError::Texture {
                file: name.to_owned(),
                source,
            })
    }

    pub fn search(&self, req: &SearchRequest) -> Result<Vec<SearchHit>, EngineError> {
        if req.k == 0 {
            return Err(EngineError::ZeroK);
        }
        let snap = self.catalog.snapshot();
        if snap.is_empty() {
            return Err(EngineError::EmptyCatalog);
        }
        let query = self.describe("query", &req.query)?;
        let ids: BTreeSet<u64> = if req.exhaustive {
            snap.all_keyframes().map(|f| f.record.i_id.0).collect()
        } else {
            snap.buckets()
                .candidates(query.range_key, req.k.max(MIN_CANDIDATES))
        };
        let candidates = ids
            .iter()
            .map(|&id| snap.frame(FrameId(id)).map(|f| (id, &*f.features)))
            .collect::<Result<Vec<_>, _>>()?;
        let ranked = retrieval::combined_rank(&query, candidates, &req.weights, req.k)?;
        ranked
            .into_iter()
            .map(|result| {
                let frame = snap.frame(FrameId(result.frame_id))?;
                let video = snap.get_video(frame.record.v_id)?;
                Ok(SearchHit {
                    v_id: video.v_id,
                    v_name: video.v_name.clone(),
                    frame_id: frame.record.i_id,
                    i_name: frame.record.i_name.clone(),
                    result,
                })
            })
            .collect()
    }

    /// Precision report over the whole catalog. Each non-empty labels line is
    /// a query image reference followed by the ids of its relevant frames;
    /// `load` resolves the reference to encoded bytes.
    pub fn evaluate(
        &self,
        labels: &str,
        ks: &[usize],
        weights: &WeightProfile,
        mut load: impl FnMut(&str) -> Result<Vec<u8>, EngineError>,
    ) -> Result<PrecisionReport, EngineError> {
        let snap = self.catalog.snapshot();
        if snap.is_empty() {
            return Err(EngineError::EmptyCatalog);
        }
        let mut queries = Vec::new();
        for (n, line) in labels.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (image, relevant) = parse_labels_line(line).map_err(|reason| {
                EngineError::Labels {
                    line: n + 1,
                    reason,
                }
            })?;
            let bytes = load(image)?;
            queries.push(LabeledQuery {
                features: self.describe(image, &bytes)?,
                relevant,
                exclude: None,
            });
        }
        let corpus: Vec<(u64, FeatureSet)> = snap
            .all_keyframes()
            .map(|f| (f.record.i_id.0, (*f.features).clone()))
            .collect();
        Ok(retrieval::precision_report(&corpus, &queries, ks, weights)?)
    }

    /// [`Engine::evaluate`] with query paths resolved relative to the labels
    /// file's directory.
    pub fn evaluate_file(
        &self,
        labels_path: &Path,
        ks: &[usize],
        weights: &WeightProfile,
    ) -> Result<PrecisionReport, EngineError> {
        let io = |path: &Path| {
            let path = path.to_owned();
            move |source| EngineError::Io { path, source }
        };
        let labels = fs::read_to_string(labels_path).map_err(io(labels_path))?;
        let base = labels_path.parent().unwrap_or(Path::new("."));
        self.evaluate(&labels, ks, weights, |image| {
            let p = base.join(image);
            fs::read(&p).map_err(|e| match e.kind() {
                io::ErrorKind::NotFound => EngineError::MissingQuery(p.display().to_string()),
                _ => io(&p)(e),
            })
        })
    }
}

fn parse_labels_line(line: &str) -> Result<(&str, BTreeSet<u64>), String> {
    let mut tokens = line.split_whitespace();
    let image = tokens.next().ok_or("missing query image")?;
    let relevant = tokens
        .map(|t| t.parse::<u64>().map_err(|_| format!("not a frame id: {t}")))
        .collect::<Result<_, _>>()?;
    Ok((image, relevant))
}

/// Frame files directly inside `dir`, sorted by file name.
pub fn frame_files(dir: &Path) -> Result<Vec<FrameInput>, EngineError> {
    let io = |source| EngineError::Io {
        path: dir.to_owned(),
        source,
    };
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let is_frame = path
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase())
            .is_some_and(|e| FRAME_EXTENSIONS.contains(&e.as_str()));
        if is_frame && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(paths.into_iter().map(FrameInput::from_path).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::encode_ppm;

    fn ppm(v: u8) -> Vec<u8> {
        encode_ppm(&Raster::filled(40, 40, [v, v / 2, 255 - v]).unwrap())
    }

    #[test]
    fn labels_grammar() {
        let (img, rel) = parse_labels_line("q/a.ppm 3 1 2").unwrap();
        assert_eq!(img, "q/a.ppm");
        assert_eq!(rel.into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(parse_labels_line("a.ppm x").is_err());
    }

    #[test]
    fn ingest_and_search() {
        let dir = tempfile::tempdir().unwrap();
        let engine = Engine::open(dir.path()).unwrap();
        let frames = vec![
            FrameInput::from_bytes("a.ppm", ppm(0)),
            FrameInput::from_bytes("b.ppm", ppm(0)),
            FrameInput::from_bytes("c.ppm", ppm(200)),
        ];
        let report = engine.ingest("clip", frames).unwrap();
        assert_eq!(report.frames_in, 3);
        assert_eq!(report.key_frames_kept, 2);
        assert_eq!(report.per_frame_timings_ms.len(), 3);

        let hits = engine.search(&SearchRequest::new(ppm(200))).unwrap();
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].i_name, "c.ppm");
        assert_eq!(hits[0].result.combined, 0.0);
        assert_eq!(hits[0].v_id, report.v_id);
    }

    #[test]
    fn empty_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let engine = Engine::open(dir.path()).unwrap();
        assert!(matches!(
            engine.search(&SearchRequest::new(ppm(1))),
            Err(EngineError::EmptyCatalog)
        ));
        assert!(matches!(engine.ingest("v", vec![]), Err(EngineError::EmptyVideo)));
        assert!(matches!(
            engine.ingest_dir("v", dir.path()),
            Err(EngineError::EmptyVideo)
        ));
    }

    #[test]
    fn corrupt_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let engine = Engine::open(dir.path()).unwrap();
        let frames = vec![
            FrameInput::from_bytes("a.ppm", ppm(0)),
            FrameInput::from_bytes("b.ppm", b"P6\n4 4\n255\nxx".to_vec()),
        ];
        let err = engine.ingest("v", frames).unwrap_err();
        assert!(err.to_string().contains("b.ppm"), "{err}");
        assert!(engine.catalog().snapshot().is_empty());
    }
}

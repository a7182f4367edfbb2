//! On-disk catalog of videos and their key frames.
//!
//! ```text
//! <root>/counters                       next_video_id N / next_frame_id M
//! <root>/videos/<v_id>/manifest         one video record
//! <root>/videos/<v_id>/frames/<i_id>.<ext>       key-frame image, original bytes
//! <root>/videos/<v_id>/frames/<i_id>.features    key-frame record + descriptor lines
//! <root>/staging/                       scratch space for in-flight writes
//! ```
//!
//! Every file is UTF-8 text of `key value` lines except the images. A video
//! becomes visible only when its fully written staging directory is renamed
//! into `videos/`, so readers never observe a partial video.
//!
//! Readers take an immutable [`CatalogSnapshot`]; writers serialize on a
//! mutex and publish a new snapshot when done.

pub mod format;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::color::{AutoCorrelogram, ColorHistogram, NaiveSignature};
use crate::features::FeatureSet;
use crate::range_index::{IndexError, RangeBuckets, RangeKey};
use crate::texture::{GaborVector, GlcmFeatures, TamuraVector};
pub use format::{FeatureString, MalformedFeatureString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VideoId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameId(pub u64);

impl fmt::Display for VideoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for FrameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown video id {0}")]
    UnknownVideo(VideoId),
    #[error("unknown key frame id {0}")]
    UnknownFrame(FrameId),
    #[error("EmptyVideo: a video needs at least one key frame")]
    EmptyVideo,
    #[error("NameRequired: video name must not be empty")]
    NameRequired,
    #[error("name must be a single line without control characters")]
    InvalidName,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("aborted at {stage:?}: {reason}")]
    Aborted { stage: WriteStage, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CatalogError + '_ {
    move |source| CatalogError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Points inside `put_video` where a caller-supplied hook may abort.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteStage {
    /// After the staging directory is fully written.
    Staged,
    /// Before the staging directory is renamed into place.
    Publish,
    /// After the rename, before the id counters are persisted.
    Counters,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoRecord {
    pub v_id: VideoId,
    pub v_name: String,
    /// Directory holding the key-frame images, relative to the catalog root.
    pub frame_dir: PathBuf,
    /// Seconds since the Unix epoch.
    pub ingested_at: u64,
    /// Key frames in sequence order.
    pub key_frames: Vec<FrameId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFrameRecord {
    pub i_id: FrameId,
    pub i_name: String,
    /// Relative to the catalog root.
    pub image_path: PathBuf,
    pub range: RangeKey,
    pub sch: String,
    pub glcm: String,
    pub gabor: String,
    pub tamura: String,
    pub acc: String,
    pub naive: String,
    pub major_regions: u32,
    pub v_id: VideoId,
}

impl KeyFrameRecord {
    fn features(&self, path: &Path) -> Result<FeatureSet, CatalogError> {
        let corrupt = |e: MalformedFeatureString| CatalogError::Corrupt {
            path: path.to_owned(),
            reason: e.to_string(),
        };
        Ok(FeatureSet {
            histogram: ColorHistogram::parse_feature_string(&self.sch).map_err(corrupt)?,
            glcm: GlcmFeatures::parse_feature_string(&self.glcm).map_err(corrupt)?,
            gabor: GaborVector::parse_feature_string(&self.gabor).map_err(corrupt)?,
            tamura: TamuraVector::parse_feature_string(&self.tamura).map_err(corrupt)?,
            correlogram: AutoCorrelogram::parse_feature_string(&self.acc).map_err(corrupt)?,
            naive: NaiveSignature::parse_feature_string(&self.naive).map_err(corrupt)?,
            major_regions: self.major_regions,
            range_key: self.range,
        })
    }

    fn to_sidecar(&self) -> String {
        format!(
            "i_id {}\ni_name {}\nimage {}\nv_id {}\nmin {}\nmax {}\nmajor_regions {}\nsch {}\nglcm {}\ngabor {}\ntamura {}\nacc {}\nnaive {}\n",
            self.i_id,
            self.i_name,
            self.image_path.display(),
            self.v_id,
            self.range.min(),
            self.range.max(),
            self.major_regions,
            self.sch,
            self.glcm,
            self.gabor,
            self.tamura,
            self.acc,
            self.naive,
        )
    }
}

/// Input to [`Catalog::put_video`] for one key frame.
#[derive(Debug, Clone)]
pub struct NewKeyFrame {
    pub name: String,
    /// Encoded image, stored as given.
    pub image: Vec<u8>,
    /// File extension for the stored image, without the dot.
    pub extension: String,
    pub features: FeatureSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredFrame {
    pub record: KeyFrameRecord,
    pub features: Arc<FeatureSet>,
}

/// A consistent, immutable view of the catalog.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CatalogSnapshot {
    videos: BTreeMap<VideoId, VideoRecord>,
    frames: BTreeMap<FrameId, StoredFrame>,
    buckets: RangeBuckets,
    next_video: u64,
    next_frame: u64,
}

impl CatalogSnapshot {
    pub fn get_video(&self, id: VideoId) -> Result<&VideoRecord, CatalogError> {
        self.videos.get(&id).ok_or(CatalogError::UnknownVideo(id))
    }

    pub fn list_videos(&self) -> impl Iterator<Item = &VideoRecord> {
        self.videos.values()
    }

    /// Case-insensitive substring match on the video name.
    pub fn find_by_name(&self, needle: &str) -> Vec<&VideoRecord> {
        let needle = needle.to_lowercase();
        self.videos
            .values()
            .filter(|v| v.v_name.to_lowercase().contains(&needle))
            .collect()
    }

    pub fn keyframes_of(&self, id: VideoId) -> Result<Vec<&StoredFrame>, CatalogError> {
        let v = self.get_video(id)?;
        Ok(v.key_frames.iter().map(|f| &self.frames[f]).collect())
    }

    pub fn all_keyframes(&self) -> impl Iterator<Item = &StoredFrame> {
        self.frames.values()
    }

    pub fn frame(&self, id: FrameId) -> Result<&StoredFrame, CatalogError> {
        self.frames.get(&id).ok_or(CatalogError::UnknownFrame(id))
    }

    pub fn buckets(&self) -> &RangeBuckets {
        &self.buckets
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug)]
pub struct Catalog {
    root: PathBuf,
    state: RwLock<Arc<CatalogSnapshot>>,
    writer: Mutex<()>,
}

const VIDEOS: &str = "videos";
const STAGING: &str = "staging";
const COUNTERS: &str = "counters";
const MANIFEST: &str = "manifest";
const FRAMES: &str = "frames";
const SIDECAR_EXT: &str = "features";

pub fn validate_video_name(name: &str) -> Result<(), CatalogError> {
    if name.trim().is_empty() {
        return Err(CatalogError::NameRequired);
    }
    if name.chars().any(char::is_control) {
        return Err(CatalogError::InvalidName);
    }
    Ok(())
}

fn clean_frame_name(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_control() { '_' } else { c })
        .collect();
    if cleaned.trim().is_empty() {
        "frame".to_owned()
    } else {
        cleaned
    }
}

fn clean_extension(ext: &str) -> String {
    let e: String = ext
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .take(8)
        .collect::<String>()
        .to_ascii_lowercase();
    if e.is_empty() || e == SIDECAR_EXT {
        "img".to_owned()
    } else {
        e
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CatalogError> {
    fs::write(path, bytes).map_err(io_err(path))
}

/// Parses `key value` lines; values run to the end of the line.
fn parse_kv(path: &Path, text: &str) -> Result<BTreeMap<String, String>, CatalogError> {
    let mut out = BTreeMap::new();
    for line in text.lines().filter(|l| !l.is_empty()) {
        let (k, v) = line.split_once(' ').unwrap_or((line, ""));
        out.insert(k.to_owned(), v.to_owned());
    }
    let _ = path;
    Ok(out)
}

struct Fields<'a> {
    path: &'a Path,
    map: BTreeMap<String, String>,
}

impl Fields<'_> {
    fn text(&mut self, key: &str) -> Result<String, CatalogError> {
        self.map.remove(key).ok_or_else(|| CatalogError::Corrupt {
            path: self.path.to_owned(),
            reason: format!("missing `{key}`"),
        })
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CatalogError> {
        let v = self.text(key)?;
        v.parse().map_err(|_| CatalogError::Corrupt {
            path: self.path.to_owned(),
            reason: format!("`{key}` is not a number: {v}"),
        })
    }
}

fn manifest_text(v: &VideoRecord) -> String {
    let frames: Vec<String> = v.key_frames.iter().map(|f| f.to_string()).collect();
    format!(
        "v_id {}\nv_name {}\ningested_at {}\nframe_dir {}\nkey_frames {}\n",
        v.v_id,
        v.v_name,
        v.ingested_at,
        v.frame_dir.display(),
        frames.join(" ")
    )
}

impl Catalog {
    /// Opens (creating if needed) the catalog rooted at `root` and loads it.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, CatalogError> {
        let root = root.into();
        for dir in [root.join(VIDEOS), root.join(STAGING)] {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        // leftovers from interrupted writes
        let staging = root.join(STAGING);
        for entry in fs::read_dir(&staging).map_err(io_err(&staging))? {
            let path = entry.map_err(io_err(&staging))?.path();
            let _ = if path.is_dir() {
                fs::remove_dir_all(&path)
            } else {
                fs::remove_file(&path)
            };
        }
        let state = load(&root)?;
        Ok(Self {
            root,
            state: RwLock::new(Arc::new(state)),
            writer: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn snapshot(&self) -> Arc<CatalogSnapshot> {
        Arc::clone(&self.state.read().unwrap_or_else(|e| e.into_inner()))
    }

    fn publish(&self, next: CatalogSnapshot) {
        *self.state.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
    }

    /// Absolute path of a stored key-frame image.
    pub fn image_path(&self, record: &KeyFrameRecord) -> PathBuf {
        self.root.join(&record.image_path)
    }

    pub fn put_video(&self, name: &str, frames: Vec<NewKeyFrame>) -> Result<VideoId, CatalogError> {
        self.put_video_with(name, frames, &mut |_| Ok(()))
    }

    /// `put_video` with a hook consulted at each [`WriteStage`]; an `Err` from
    /// the hook aborts the write and rolls back everything done so far.
    pub fn put_video_with(
        &self,
        name: &str,
        frames: Vec<NewKeyFrame>,
        hook: &mut dyn FnMut(WriteStage) -> Result<(), String>,
    ) -> Result<VideoId, CatalogError> {
        validate_video_name(name)?;
        if frames.is_empty() {
            return Err(CatalogError::EmptyVideo);
        }
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = (*self.snapshot()).clone();

        let v_id = VideoId(next.next_video);
        let first_frame = next.next_frame;
        let rel_dir = PathBuf::from(VIDEOS).join(v_id.to_string());
        let frame_dir = rel_dir.join(FRAMES);
        let staged = self.root.join(STAGING).join(format!("video-{v_id}"));
        let staged_frames = staged.join(FRAMES);
        let _ = fs::remove_dir_all(&staged);

        let result = (|| {
            fs::create_dir_all(&staged_frames).map_err(io_err(&staged_frames))?;
            let mut records = Vec::with_capacity(frames.len());
            for (i, f) in frames.into_iter().enumerate() {
                let i_id = FrameId(first_frame + i as u64);
                let file = format!("{i_id}.{}", clean_extension(&f.extension));
                write_file(&staged_frames.join(&file), &f.image)?;
                let fs_ = &f.features;
                let record = KeyFrameRecord {
                    i_id,
                    i_name: clean_frame_name(&f.name),
                    image_path: frame_dir.join(&file),
                    range: fs_.range_key,
                    sch: fs_.histogram.to_feature_string(),
                    glcm: fs_.glcm.to_feature_string(),
                    gabor: fs_.gabor.to_feature_string(),
                    tamura: fs_.tamura.to_feature_string(),
                    acc: fs_.correlogram.to_feature_string(),
                    naive: fs_.naive.to_feature_string(),
                    major_regions: fs_.major_regions,
                    v_id,
                };
                write_file(
                    &staged_frames.join(format!("{i_id}.{SIDECAR_EXT}")),
                    record.to_sidecar().as_bytes(),
                )?;
                records.push((record, f.features));
            }
            let video = VideoRecord {
                v_id,
                v_name: name.to_owned(),
                frame_dir: frame_dir.clone(),
                ingested_at: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                key_frames: records.iter().map(|(r, _)| r.i_id).collect(),
            };
            write_file(&staged.join(MANIFEST), manifest_text(&video).as_bytes())?;
            Ok((video, records))
        })();
        let (video, records) = match result {
            Ok(v) => v,
            Err(e) => {
                let _ = fs::remove_dir_all(&staged);
                return Err(e);
            }
        };

        let abort = |stage: WriteStage, reason: String| CatalogError::Aborted { stage, reason };
        for stage in [WriteStage::Staged, WriteStage::Publish] {
            if let Err(reason) = hook(stage) {
                let _ = fs::remove_dir_all(&staged);
                return Err(abort(stage, reason));
            }
        }
        let target = self.root.join(&rel_dir);
        if let Err(e) = fs::rename(&staged, &target) {
            let _ = fs::remove_dir_all(&staged);
            return Err(io_err(&target)(e));
        }

        let mut buckets = next.buckets.clone();
        for (r, _) in &records {
            buckets.insert(r.i_id.0, r.range)?;
        }
        next.next_video = v_id.0 + 1;
        next.next_frame = first_frame + records.len() as u64;
        let committed = hook(WriteStage::Counters)
            .map_err(|reason| abort(WriteStage::Counters, reason))
            .and_then(|()| self.write_counters(next.next_video, next.next_frame));
        if let Err(e) = committed {
            let _ = fs::remove_dir_all(&target);
            return Err(e);
        }

        next.buckets = buckets;
        for (record, features) in records {
            next.frames.insert(
                record.i_id,
                StoredFrame {
                    record,
                    features: Arc::new(features),
                },
            );
        }
        next.videos.insert(v_id, video);
        self.publish(next);
        Ok(v_id)
    }

    fn write_counters(&self, next_video: u64, next_frame: u64) -> Result<(), CatalogError> {
        let tmp = self.root.join(STAGING).join(COUNTERS);
        write_file(
            &tmp,
            format!("next_video_id {next_video}\nnext_frame_id {next_frame}\n").as_bytes(),
        )?;
        let dst = self.root.join(COUNTERS);
        fs::rename(&tmp, &dst).map_err(io_err(&dst))
    }

    /// Removes the video, its key frames and their index entries.
    pub fn delete_video(&self, id: VideoId) -> Result<VideoRecord, CatalogError> {
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = (*self.snapshot()).clone();
        let video = next.videos.remove(&id).ok_or(CatalogError::UnknownVideo(id))?;
        let dir = self.root.join(VIDEOS).join(id.to_string());
        let trash = self.root.join(STAGING).join(format!("deleted-{id}"));
        fs::rename(&dir, &trash).map_err(io_err(&dir))?;
        let _ = fs::remove_dir_all(&trash);
        for f in &video.key_frames {
            next.frames.remove(f);
            next.buckets.remove(f.0);
        }
        self.publish(next);
        Ok(video)
    }
}

fn load(root: &Path) -> Result<CatalogSnapshot, CatalogError> {
    let mut snap = CatalogSnapshot::default();
    let counters = root.join(COUNTERS);
    if counters.exists() {
        let text = fs::read_to_string(&counters).map_err(io_err(&counters))?;
        let mut f = Fields {
            path: &counters,
            map: parse_kv(&counters, &text)?,
        };
        snap.next_video = f.num("next_video_id")?;
        snap.next_frame = f.num("next_frame_id")?;
    }
    let videos = root.join(VIDEOS);
    let mut dirs: Vec<PathBuf> = fs::read_dir(&videos)
        .map_err(io_err(&videos))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    for dir in dirs {
        let video = load_video(root, &dir, &mut snap)?;
        snap.next_video = snap.next_video.max(video.v_id.0 + 1);
        snap.videos.insert(video.v_id, video);
    }
    Ok(snap)
}

fn load_video(
    root: &Path,
    dir: &Path,
    snap: &mut CatalogSnapshot,
) -> Result<VideoRecord, CatalogError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut f = Fields {
        path: &path,
        map: parse_kv(&path, &text)?,
    };
    let key_frames = f
        .text("key_frames")?
        .split_ascii_whitespace()
        .map(|t| t.parse().map(FrameId))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CatalogError::Corrupt {
            path: path.clone(),
            reason: "bad key frame list".into(),
        })?;
    let video = VideoRecord {
        v_id: VideoId(f.num("v_id")?),
        v_name: f.text("v_name")?,
        ingested_at: f.num("ingested_at")?,
        frame_dir: PathBuf::from(f.text("frame_dir")?),
        key_frames,
    };
    for &i_id in &video.key_frames {
        let path = root
            .join(&video.frame_dir)
            .join(format!("{i_id}.{SIDECAR_EXT}"));
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let mut f = Fields {
            path: &path,
            map: parse_kv(&path, &text)?,
        };
        let (min, max): (u16, u16) = (f.num("min")?, f.num("max")?);
        let record = KeyFrameRecord {
            i_id: FrameId(f.num("i_id")?),
            i_name: f.text("i_name")?,
            image_path: PathBuf::from(f.text("image")?),
            range: RangeKey::new(min, max)?,
            sch: f.text("sch")?,
            glcm: f.text("glcm")?,
            gabor: f.text("gabor")?,
            tamura: f.text("tamura")?,
            acc: f.text("acc")?,
            naive: f.text("naive")?,
            major_regions: f.num("major_regions")?,
            v_id: VideoId(f.num("v_id")?),
        };
        if record.i_id != i_id || record.v_id != video.v_id {
            return Err(CatalogError::Corrupt {
                path,
                reason: "record ids disagree with the manifest".into(),
            });
        }
        let features = record.features(&path)?;
        snap.buckets.insert(i_id.0, record.range)?;
        snap.next_frame = snap.next_frame.max(i_id.0 + 1);
        snap.frames.insert(
            i_id,
            StoredFrame {
                record,
                features: Arc::new(features),
            },
        );
    }
    Ok(video)
}

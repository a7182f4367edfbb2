//! Plain-text output for the command-line tool.

use std::fmt::Write;

use vidseek_core::catalog::CatalogSnapshot;
use vidseek_core::{FeatureKind, IngestReport, SearchHit};

pub fn ingest_summary(r: &IngestReport) -> String {
    let total: f64 = r.per_frame_timings_ms.iter().sum();
    format!(
        "ingested video {}: {} frames in, {} key frames kept ({total:.0} ms)",
        r.v_id, r.frames_in, r.key_frames_kept
    )
}

/// Rank table with the combined score and every per-feature distance.
pub fn hits_table(hits: &[SearchHit]) -> String {
    let mut out = format!("{:>4}  {:>8}  {:>6}  {:>10}", "rank", "frame", "video", "combined");
    for k in FeatureKind::ALL {
        let _ = write!(out, "  {:>12}", k.name());
    }
    out.push_str("  name\n");
    for (i, h) in hits.iter().enumerate() {
        let _ = write!(
            out,
            "{:>4}  {:>8}  {:>6}  {:>10.6}",
            i + 1,
            h.frame_id,
            h.v_id,
            h.result.combined
        );
        for k in FeatureKind::ALL {
            let _ = write!(out, "  {:>12.6}", h.result.distance(k));
        }
        let _ = writeln!(out, "  {} / {}", h.v_name, h.i_name);
    }
    out
}

pub fn video_list(snap: &CatalogSnapshot) -> String {
    let mut out = format!("{:>6}  {:>6}  {:>12}  name\n", "id", "frames", "ingested_at");
    for v in snap.list_videos() {
        let _ = writeln!(
            out,
            "{:>6}  {:>6}  {:>12}  {}",
            v.v_id,
            v.key_frames.len(),
            v.ingested_at,
            v.v_name
        );
    }
    out
}

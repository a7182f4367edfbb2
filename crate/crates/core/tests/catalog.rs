mod common;

use std::fs;

use vidseek_core::catalog::{NewKeyFrame, WriteStage};
use vidseek_core::{Catalog, CatalogError, FeatureExtractor, FeatureSet, FrameId, VideoId};

fn features(seed: u64) -> FeatureSet {
    let r = common::random_scene(&mut common::rng(seed), 40, 40);
    FeatureExtractor::default().extract(&r).unwrap()
}

fn key_frames(seeds: &[u64]) -> Vec<NewKeyFrame> {
    seeds
        .iter()
        .map(|&s| NewKeyFrame {
            name: format!("frame-{s}.ppm"),
            image: format!("image {s}").into_bytes(),
            extension: "ppm".into(),
            features: features(s),
        })
        .collect()
}

#[test]
fn put_get_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cat = Catalog::open(dir.path()).unwrap();
    let id = cat.put_video("Harbour at dusk", key_frames(&[1, 2])).unwrap();
    let snap = cat.snapshot();
    let v = snap.get_video(id).unwrap();
    assert_eq!(v.v_name, "Harbour at dusk");
    assert_eq!(v.key_frames.len(), 2);
    let frames = snap.keyframes_of(id).unwrap();
    assert_eq!(*frames[0].features, features(1));
    assert_eq!(frames[1].record.i_name, "frame-2.ppm");
    assert_eq!(frames[1].record.v_id, id);
    assert_eq!(fs::read(cat.image_path(&frames[0].record)).unwrap(), b"image 1");

    let reopened = Catalog::open(dir.path()).unwrap();
    assert_eq!(*reopened.snapshot(), *snap);
}

#[test]
fn delete_removes_frames_and_index_entries() {
    let dir = tempfile::tempdir().unwrap();
    let cat = Catalog::open(dir.path()).unwrap();
    let keep = cat.put_video("keep", key_frames(&[1])).unwrap();
    let gone = cat.put_video("gone", key_frames(&[2, 3])).unwrap();
    let gone_frames = cat.snapshot().get_video(gone).unwrap().key_frames.clone();

    cat.delete_video(gone).unwrap();
    let snap = cat.snapshot();
    assert!(matches!(snap.get_video(gone), Err(CatalogError::UnknownVideo(_))));
    for f in &gone_frames {
        assert!(matches!(snap.frame(*f), Err(CatalogError::UnknownFrame(_))));
        assert_eq!(snap.buckets().key_of(f.0), None);
    }
    assert_eq!(snap.frame_count(), 1);
    assert!(snap.all_keyframes().all(|f| f.record.v_id == keep));
    assert!(!dir.path().join("videos").join(gone.to_string()).exists());
    assert!(matches!(cat.delete_video(gone), Err(CatalogError::UnknownVideo(_))));
    assert_eq!(*Catalog::open(dir.path()).unwrap().snapshot(), *snap);
}

#[test]
fn ids_are_never_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cat = Catalog::open(dir.path()).unwrap();
    let a = cat.put_video("a", key_frames(&[1])).unwrap();
    cat.delete_video(a).unwrap();
    drop(cat);
    let cat = Catalog::open(dir.path()).unwrap();
    let b = cat.put_video("b", key_frames(&[2])).unwrap();
    assert!(b > a);
    let frame = cat.snapshot().get_video(b).unwrap().key_frames[0];
    assert!(frame > FrameId(0));
}

#[test]
fn find_by_name_is_case_insensitive_substring() {
    let dir = tempfile::tempdir().unwrap();
    let cat = Catalog::open(dir.path()).unwrap();
    cat.put_video("Morning traffic", key_frames(&[1])).unwrap();
    let second = cat.put_video("Coastal Birds", key_frames(&[2])).unwrap();
    cat.put_video("Evening traffic", key_frames(&[3])).unwrap();
    let snap = cat.snapshot();
    let hits = snap.find_by_name("stal bi");
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].v_id, second);
    assert_eq!(snap.find_by_name("TRAFFIC").len(), 2);
    assert!(snap.find_by_name("zebra").is_empty());
}

#[test]
fn invalid_puts_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cat = Catalog::open(dir.path()).unwrap();
    assert!(matches!(cat.put_video("  ", key_frames(&[1])), Err(CatalogError::NameRequired)));
    assert!(matches!(cat.put_video("a\nb", key_frames(&[1])), Err(CatalogError::InvalidName)));
    assert!(matches!(cat.put_video("x", vec![]), Err(CatalogError::EmptyVideo)));
    assert!(matches!(cat.snapshot().get_video(VideoId(0)), Err(CatalogError::UnknownVideo(_))));
}

#[test]
fn aborted_put_leaves_no_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cat = Catalog::open(dir.path()).unwrap();
    cat.put_video("base", key_frames(&[1])).unwrap();
    let before = common::tree_bytes(dir.path());
    for stage in [WriteStage::Staged, WriteStage::Publish, WriteStage::Counters] {
        let err = cat
            .put_video_with("x", key_frames(&[2]), &mut |s| if s == stage { Err("boom".into()) } else { Ok(()) })
            .unwrap_err();
        assert!(matches!(err, CatalogError::Aborted { .. }), "{err}");
        assert_eq!(common::tree_bytes(dir.path()), before, "{stage:?}");
    }
}

#[test]
fn corrupt_sidecar_is_reported_on_open() {
    let dir = tempfile::tempdir().unwrap();
    let cat = Catalog::open(dir.path()).unwrap();
    let id = cat.put_video("v", key_frames(&[1])).unwrap();
    let frame = cat.snapshot().get_video(id).unwrap().key_frames[0];
    drop(cat);
    let sidecar = dir.path().join(format!("videos/{id}/frames/{frame}.features"));
    let text = fs::read_to_string(&sidecar).unwrap().replace("gabor 60", "gabor 59");
    fs::write(&sidecar, text).unwrap();
    let err = Catalog::open(dir.path()).unwrap_err();
    assert!(matches!(err, CatalogError::Corrupt { .. }), "{err}");
}

#[test]
fn sidecar_lists_every_record_field() {
    let dir = tempfile::tempdir().unwrap();
    let cat = Catalog::open(dir.path()).unwrap();
    let id = cat.put_video("v", key_frames(&[4])).unwrap();
    let frame = cat.snapshot().get_video(id).unwrap().key_frames[0];
    let text = fs::read_to_string(dir.path().join(format!("videos/{id}/frames/{frame}.features"))).unwrap();
    let keys: Vec<&str> = text.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(
        keys,
        ["i_id", "i_name", "image", "v_id", "min", "max", "major_regions", "sch", "glcm", "gabor", "tamura", "acc", "naive"]
    );
    assert!(text.contains("\nsch RGB 256 "));
    assert!(text.contains("\ngabor gabor 60 "));
    assert!(text.contains("\ntamura Tamura 18 "));
    assert!(text.contains("\nacc ACC 4 "));
    assert!(text.contains("\nnaive NaiveVector "));
}

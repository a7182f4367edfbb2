//! Generators and helpers shared by the integration test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vidseek_core::imaging::luma;
use vidseek_core::{BinaryRaster, GrayRaster, Histogram256, Raster};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_raster(rng: &mut impl Rng, w: usize, h: usize) -> Raster {
    Raster::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

/// Few distinct colours so that equal-colour pairs are common.
pub fn random_low_palette_raster(rng: &mut impl Rng, w: usize, h: usize) -> Raster {
    let palette: Vec<[u8; 3]> = (0..rng.gen_range(1..=4)).map(|_| rng.gen()).collect();
    Raster::from_fn(w, h, |_, _| palette[rng.gen_range(0..palette.len())]).unwrap()
}

pub fn random_gray(rng: &mut impl Rng, w: usize, h: usize) -> GrayRaster {
    GrayRaster::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

/// Gray image drawn from a handful of levels.
pub fn random_few_level_gray(rng: &mut impl Rng, w: usize, h: usize) -> GrayRaster {
    let levels: Vec<u8> = (0..rng.gen_range(1..=5)).map(|_| rng.gen()).collect();
    GrayRaster::from_fn(w, h, |_, _| levels[rng.gen_range(0..levels.len())]).unwrap()
}

pub fn random_binary(rng: &mut impl Rng, w: usize, h: usize, p_one: f64) -> BinaryRaster {
    BinaryRaster::from_fn(w, h, |_, _| rng.gen_bool(p_one)).unwrap()
}

/// A smooth random frame: a few coloured blobs over a gradient, so that
/// frames differ clearly in colour and texture.
pub fn random_scene(rng: &mut impl Rng, w: usize, h: usize) -> Raster {
    let base: [f64; 3] = [rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0), rng.gen_range(0.0..255.0)];
    let slope: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let blobs: Vec<(f64, f64, f64, [u8; 3])> = (0..rng.gen_range(2..6))
        .map(|_| {
            (
                rng.gen_range(0.0..w as f64),
                rng.gen_range(0.0..h as f64),
                rng.gen_range(4.0..(w.min(h) as f64 / 2.0)),
                rng.gen(),
            )
        })
        .collect();
    let period = rng.gen_range(3..9);
    Raster::from_fn(w, h, |x, y| {
        for &(cx, cy, r, c) in &blobs {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy < r * r {
                return c;
            }
        }
        let stripe = if (x / period + y / period) % 2 == 0 { 25.0 } else { -25.0 };
        let ch = |i: usize| (base[i] + slope[i] * (x + y) as f64 + stripe).clamp(0.0, 255.0) as u8;
        [ch(0), ch(1), ch(2)]
    })
    .unwrap()
}

/// Colour histogram of the sample query frame used to illustrate range
/// assignment; it expects the range (0, 127).
pub const SAMPLE_QUERY_HISTOGRAM: [u64; 256] = [
    19401, 2570, 1848, 1098, 774, 552, 425, 312, 231, 214, 169, 176, 186, 152, 174, 157,
    149, 128, 128, 125, 126, 136, 118, 131, 130, 110, 141, 125, 134, 133, 150, 138,
    148, 139, 134, 142, 154, 163, 135, 177, 168, 180, 188, 213, 231, 223, 231, 215,
    215, 221, 227, 233, 214, 231, 220, 222, 239, 223, 236, 236, 239, 264, 255, 226,
    267, 344, 350, 381, 457, 443, 446, 434, 526, 512, 546, 544, 530, 563, 568, 575,
    633, 532, 552, 545, 578, 547, 511, 502, 521, 499, 465, 520, 572, 588, 596, 513,
    597, 582, 537, 490, 548, 516, 520, 523, 552, 562, 610, 567, 592, 624, 631, 601,
    699, 695, 804, 828, 929, 819, 841, 729, 631, 623, 490, 462, 454, 431, 423, 377,
    393, 335, 369, 393, 347, 334, 409, 413, 543, 521, 623, 588, 550, 356, 335, 274,
    202, 184, 166, 158, 129, 146, 136, 126, 123, 117, 117, 110, 87, 92, 101, 107,
    115, 112, 133, 154, 158, 137, 160, 170, 154, 135, 141, 154, 179, 159, 157, 150,
    155, 127, 132, 163, 149, 168, 194, 204, 233, 255, 212, 225, 210, 208, 195, 163,
    186, 124, 153, 126, 123, 138, 120, 139, 92, 110, 96, 95, 95, 64, 86, 97,
    81, 96, 109, 104, 98, 88, 89, 79, 72, 46, 46, 36, 40, 36, 31, 26,
    26, 30, 15, 16, 16, 14, 13, 12, 13, 6, 18, 9, 15, 16, 7, 11,
    10, 10, 8, 6, 6, 7, 5, 4, 0, 3, 2, 0, 1, 5, 0, 0,];

pub fn sample_query_histogram() -> Histogram256 {
    Histogram256::from_bins(SAMPLE_QUERY_HISTOGRAM)
}

/// Stripe colours for the two palettes of the class corpus. Entries at the
/// same position have equal luma, so the two palettes produce the same gray
/// image and differ only in colour.
pub const PALETTES: [[[u8; 3]; 2]; 2] = [
    [[200, 40, 40], [240, 220, 120]],
    [[40, 117, 62], [168, 232, 250]],
];

pub const CLASS_SIDE: usize = 150;

/// One frame of class `(palette, vertical)`: two-colour stripes with random
/// period, phase and per-channel noise.
pub fn class_frame(rng: &mut impl Rng, palette: usize, vertical: bool) -> Raster {
    let period = rng.gen_range(10..=14);
    let phase = rng.gen_range(0..period);
    let colors = PALETTES[palette];
    Raster::from_fn(CLASS_SIDE, CLASS_SIDE, |x, y| {
        let t = if vertical { x } else { y };
        let c = colors[usize::from((t + phase) % period >= period / 2)];
        c.map(|v| (i32::from(v) + rng.gen_range(-6..=6)).clamp(0, 255) as u8)
    })
    .unwrap()
}

pub fn palettes_share_luma() -> bool {
    (0..2).all(|i| luma(PALETTES[0][i]) == luma(PALETTES[1][i]))
}

/// Every file under `root` with its bytes, plus every directory (as `None`).
pub fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Option<Vec<u8>>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Option<Vec<u8>>>) {
        let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            let rel = p.strip_prefix(root).unwrap().to_owned();
            if p.is_dir() {
                out.insert(rel, None);
                walk(root, &p, out);
            } else {
                out.insert(rel, Some(fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

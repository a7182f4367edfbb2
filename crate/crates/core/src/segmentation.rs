//! Binarization, morphological clean-up and region growing.

use crate::imaging::{gray_histogram, BinaryRaster, GrayRaster, Histogram256};

pub const DEFAULT_MAJOR_FRACTION: f64 = 0.05;

/// Minimum-fuzziness threshold (Huang & Wang) over a 256-bin histogram.
///
/// Candidate thresholds `t` split intensities into `<= t` and `> t`. Each
/// pixel's membership in its class is `1 / (1 + |v - mean| / C)` with `C` the
/// occupied intensity span, and the threshold minimizing total Shannon
/// fuzziness wins; ties go to the lowest `t`. A histogram with a single
/// occupied level returns that level.
pub fn fuzziness_threshold(h: &Histogram256) -> u8 {
    let bins = h.bins();
    let Some(first) = bins.iter().position(|&c| c > 0) else {
        return 0;
    };
    let last = bins.iter().rposition(|&c| c > 0).unwrap_or(first);
    if first == last {
        return first as u8;
    }
    let span = (last - first) as f64;

    let mut count = [0u64; 256];
    let mut moment = [0.0f64; 256];
    let (mut c, mut m) = (0u64, 0.0f64);
    for i in 0..256 {
        c += bins[i];
        m += i as f64 * bins[i] as f64;
        count[i] = c;
        moment[i] = m;
    }

    let mut best = (f64::INFINITY, first);
    for t in first..last {
        let low_mean = moment[t] / count[t] as f64;
        let high_mean = (moment[last] - moment[t]) / (count[last] - count[t]) as f64;
        let mut fuzz = 0.0;
        for (i, &n) in bins.iter().enumerate().take(last + 1).skip(first) {
            if n == 0 {
                continue;
            }
            let mean = if i <= t { low_mean } else { high_mean };
            fuzz += shannon(membership(i as f64, mean, span)) * n as f64;
        }
        if fuzz < best.0 {
            best = (fuzz, t);
        }
    }
    best.1 as u8
}

#[inline]
pub(crate) fn membership(v: f64, mean: f64, span: f64) -> f64 {
    1.0 / (1.0 + (v - mean).abs() / span)
}

#[inline]
pub(crate) fn shannon(mu: f64) -> f64 {
    if mu <= 0.0 || mu >= 1.0 {
        0.0
    } else {
        -mu * mu.ln() - (1.0 - mu) * (1.0 - mu).ln()
    }
}

/// Pixels above the minimum-fuzziness threshold become 1.
pub fn binarize(g: &GrayRaster) -> BinaryRaster {
    let t = fuzziness_threshold(&gray_histogram(g));
    BinaryRaster::from_fn(g.width(), g.height(), |x, y| g.get(x, y) > t)
        .expect("dimensions come from a valid raster")
}

/// Offsets of the active cells of the 5x5 structuring element (its centre
/// 3x3 block).
pub const MORPH_KERNEL: [[u8; 5]; 5] = [
    [0, 0, 0, 0, 0],
    [0, 1, 1, 1, 0],
    [0, 1, 1, 1, 0],
    [0, 1, 1, 1, 0],
    [0, 0, 0, 0, 0],
];

fn kernel_offsets() -> impl Iterator<Item = (isize, isize)> {
    (0..5).flat_map(|r| {
        (0..5)
            .filter(move |&c| MORPH_KERNEL[r][c] == 1)
            .map(move |c| (c as isize - 2, r as isize - 2))
    })
}

/// The element is clipped to the image: only in-bounds neighbours take part.
fn morph(b: &BinaryRaster, dilate: bool) -> BinaryRaster {
    let (w, h) = (b.width() as isize, b.height() as isize);
    BinaryRaster::from_fn(b.width(), b.height(), |x, y| {
        let mut neighbours = kernel_offsets().filter_map(|(dx, dy)| {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            ((0..w).contains(&nx) && (0..h).contains(&ny)).then(|| b.get(nx as usize, ny as usize))
        });
        if dilate {
            neighbours.any(|v| v == 1)
        } else {
            neighbours.all(|v| v == 1)
        }
    })
    .expect("dimensions come from a valid raster")
}

pub fn dilate(b: &BinaryRaster) -> BinaryRaster {
    morph(b, true)
}

pub fn erode(b: &BinaryRaster) -> BinaryRaster {
    morph(b, false)
}

/// Closing followed by opening: dilate, erode, erode, dilate.
pub fn morph_close_open(b: &BinaryRaster) -> BinaryRaster {
    dilate(&erode(&erode(&dilate(b))))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionLabeling {
    width: usize,
    height: usize,
    /// Row-major region ids, 1-based.
    labels: Vec<u32>,
    /// `region_sizes[id - 1]` is the pixel count of region `id`.
    region_sizes: Vec<usize>,
    num_holes: usize,
}

impl RegionLabeling {
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn number_of_regions(&self) -> usize {
        self.region_sizes.len()
    }

    pub fn num_holes(&self) -> usize {
        self.num_holes
    }

    pub fn region_sizes(&self) -> &[usize] {
        &self.region_sizes
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

/// Stack-based region growing over 8-connected equal-valued pixels, seeded in
/// row-major order. Regions of value 0 count as holes.
pub fn grow_regions(b: &BinaryRaster) -> RegionLabeling {
    let (w, h) = (b.width(), b.height());
    let mut labels = vec![0u32; w * h];
    let mut region_sizes = Vec::new();
    let mut num_holes = 0;
    let mut stack = Vec::new();
    for seed in 0..w * h {
        if labels[seed] != 0 {
            continue;
        }
        let value = b.pixels()[seed];
        if value == 0 {
            num_holes += 1;
        }
        region_sizes.push(1usize);
        let id = region_sizes.len() as u32;
        labels[seed] = id;
        stack.push(seed);
        while let Some(p) = stack.pop() {
            let (px, py) = (p % w, p / w);
            for ny in py.saturating_sub(1)..=(py + 1).min(h - 1) {
                for nx in px.saturating_sub(1)..=(px + 1).min(w - 1) {
                    let q = ny * w + nx;
                    if labels[q] == 0 && b.pixels()[q] == value {
                        labels[q] = id;
                        region_sizes[id as usize - 1] += 1;
                        stack.push(q);
                    }
                }
            }
        }
    }
    RegionLabeling {
        width: w,
        height: h,
        labels,
        region_sizes,
        num_holes,
    }
}

/// Regions covering at least `min_fraction` of the image.
pub fn major_regions(l: &RegionLabeling, min_fraction: f64) -> usize {
    let cutoff = min_fraction * l.pixel_count() as f64;
    l.region_sizes.iter().filter(|&&s| s as f64 >= cutoff).count()
}

/// grayscale -> binarize -> close/open -> grow -> count major regions.
pub fn major_region_count(g: &GrayRaster, min_fraction: f64) -> usize {
    let b = morph_close_open(&binarize(g));
    major_regions(&grow_regions(&b), min_fraction)
}

//! Intensity range tree used to bucket key frames.
//!
//! Level 1 is `[0, 255]`, split into halves, quarters and eighths below it. A
//! histogram descends into a child while that child holds enough of the
//! total mass; the frame is bucketed at the deepest range reached.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::imaging::Histogram256;

pub const LEVEL1_THRESHOLD: f64 = 55.0;
pub const DEEPER_THRESHOLD: f64 = 60.0;
/// Narrowest range width in the tree.
pub const LEAF_WIDTH: u16 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("histogram holds no pixels")]
    EmptyHistogram,
    #[error("frame {0} is already bucketed")]
    DuplicateFrame(u64),
    #[error("({min}, {max}) is not a node of the range tree")]
    InvalidRange { min: u16, max: u16 },
}

/// An inclusive intensity range that is a node of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RangeKey {
    min: u8,
    max: u8,
}

impl RangeKey {
    pub const ROOT: RangeKey = RangeKey { min: 0, max: 255 };

    /// Accepts only tree nodes: width 256, 128, 64 or 32, aligned to width.
    pub fn new(min: u16, max: u16) -> Result<Self, IndexError> {
        let invalid = IndexError::InvalidRange { min, max };
        if max > 255 || min > max {
            return Err(invalid);
        }
        let width = max - min + 1;
        if ![256, 128, 64, LEAF_WIDTH].contains(&width) || min % width != 0 {
            return Err(invalid);
        }
        Ok(Self {
            min: min as u8,
            max: max as u8,
        })
    }

    pub fn min(self) -> u8 {
        self.min
    }

    pub fn max(self) -> u8 {
        self.max
    }

    pub fn width(self) -> u16 {
        u16::from(self.max) - u16::from(self.min) + 1
    }

    pub fn contains(self, other: RangeKey) -> bool {
        self.min <= other.min && other.max <= self.max
    }

    pub fn parent(self) -> Option<RangeKey> {
        let width = self.width();
        if width == 256 {
            return None;
        }
        let pw = width * 2;
        let min = u16::from(self.min) / pw * pw;
        Some(RangeKey {
            min: min as u8,
            max: (min + pw - 1) as u8,
        })
    }

    pub fn children(self) -> Option<(RangeKey, RangeKey)> {
        let width = self.width();
        if width == LEAF_WIDTH {
            return None;
        }
        let half = width / 2;
        let mid = u16::from(self.min) + half;
        Some((
            RangeKey {
                min: self.min,
                max: (mid - 1) as u8,
            },
            RangeKey {
                min: mid as u8,
                max: self.max,
            },
        ))
    }

    /// All 15 tree nodes, breadth first.
    pub fn all() -> Vec<RangeKey> {
        let mut out = vec![RangeKey::ROOT];
        let mut i = 0;
        while i < out.len() {
            if let Some((l, r)) = out[i].children() {
                out.push(l);
                out.push(r);
            }
            i += 1;
        }
        out
    }
}

impl fmt::Display for RangeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.min, self.max)
    }
}

/// Percentage of the histogram mass inside `key`.
pub fn mass_percent(h: &Histogram256, key: RangeKey) -> f64 {
    let sum: u64 = h.bins()[key.min as usize..=key.max as usize].iter().sum();
    100.0 * sum as f64 / h.total() as f64
}

pub fn assign_range(
    h: &Histogram256,
    level1_threshold: f64,
    deeper_threshold: f64,
) -> Result<RangeKey, IndexError> {
    if h.total() == 0 {
        return Err(IndexError::EmptyHistogram);
    }
    let (low, high) = RangeKey::ROOT.children().expect("root has children");
    let mut key = if mass_percent(h, low) > level1_threshold {
        low
    } else {
        high
    };
    while let Some((low, high)) = key.children() {
        if mass_percent(h, low) > deeper_threshold {
            key = low;
        } else if mass_percent(h, high) > deeper_threshold {
            key = high;
        } else {
            break;
        }
    }
    Ok(key)
}

pub fn assign_range_default(h: &Histogram256) -> Result<RangeKey, IndexError> {
    assign_range(h, LEVEL1_THRESHOLD, DEEPER_THRESHOLD)
}

/// Frame ids grouped by range key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RangeBuckets {
    buckets: BTreeMap<RangeKey, BTreeSet<u64>>,
    owner: BTreeMap<u64, RangeKey>,
}

impl RangeBuckets {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, frame: u64, key: RangeKey) -> Result<(), IndexError> {
        if self.owner.contains_key(&frame) {
            return Err(IndexError::DuplicateFrame(frame));
        }
        self.owner.insert(frame, key);
        self.buckets.entry(key).or_default().insert(frame);
        Ok(())
    }

    pub fn remove(&mut self, frame: u64) -> Option<RangeKey> {
        let key = self.owner.remove(&frame)?;
        if let Some(set) = self.buckets.get_mut(&key) {
            set.remove(&frame);
            if set.is_empty() {
                self.buckets.remove(&key);
            }
        }
        Some(key)
    }

    pub fn key_of(&self, frame: u64) -> Option<RangeKey> {
        self.owner.get(&frame).copied()
    }

    pub fn bucket(&self, key: RangeKey) -> impl Iterator<Item = u64> + '_ {
        self.buckets.get(&key).into_iter().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    /// Non-empty buckets in key order.
    pub fn iter(&self) -> impl Iterator<Item = (RangeKey, &BTreeSet<u64>)> {
        self.buckets.iter().map(|(k, v)| (*k, v))
    }

    /// Starts from the query's own bucket and, while fewer than
    /// `min_candidates` ids are found, widens to the parent range and takes
    /// every bucket inside it.
    pub fn candidates(&self, query: RangeKey, min_candidates: usize) -> BTreeSet<u64> {
        let mut result: BTreeSet<u64> = self.bucket(query).collect();
        let mut key = query;
        let mut widened = false;
        while result.len() < min_candidates {
            match key.parent() {
                Some(parent) => key = parent,
                None if !widened => {}
                None => break,
            }
            widened = true;
            result = self
                .buckets
                .iter()
                .filter(|(k, _)| key.contains(**k))
                .flat_map(|(_, ids)| ids.iter().copied())
                .collect();
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(pairs: &[(usize, u64)]) -> Histogram256 {
        let mut bins = [0u64; 256];
        for &(i, c) in pairs {
            bins[i] += c;
        }
        Histogram256::from_bins(bins)
    }

    #[test]
    fn all_mass_in_bin_zero() {
        assert_eq!(
            assign_range_default(&hist(&[(0, 10)])).unwrap(),
            RangeKey::new(0, 31).unwrap()
        );
    }

    #[test]
    fn even_split_stays_in_upper_half() {
        let k = assign_range_default(&hist(&[(10, 50), (200, 50)])).unwrap();
        assert_eq!(k, RangeKey::new(128, 255).unwrap());
    }

    #[test]
    fn empty_histogram() {
        assert_eq!(
            assign_range_default(&hist(&[])),
            Err(IndexError::EmptyHistogram)
        );
    }

    #[test]
    fn tree_shape() {
        let all = RangeKey::all();
        assert_eq!(all.len(), 15);
        for &k in &all {
            assert!([256, 128, 64, 32].contains(&k.width()));
            assert_eq!(u16::from(k.min()) % k.width(), 0);
            if let Some(p) = k.parent() {
                assert!(p.contains(k));
                let (l, r) = p.children().unwrap();
                assert!(l == k || r == k);
            }
        }
        assert!(RangeKey::new(0, 100).is_err());
        assert!(RangeKey::new(32, 95).is_err());
        assert!(RangeKey::new(0, 256).is_err());
    }

    #[test]
    fn bucket_insert_and_duplicates() {
        let mut b = RangeBuckets::new();
        let k = RangeKey::new(0, 127).unwrap();
        b.insert(7, k).unwrap();
        assert_eq!(b.bucket(k).collect::<Vec<_>>(), vec![7]);
        assert_eq!(b.insert(7, RangeKey::ROOT), Err(IndexError::DuplicateFrame(7)));
        for i in 100..199 {
            b.insert(i, RangeKey::all()[(i % 15) as usize]).unwrap();
        }
        assert_eq!(b.iter().map(|(_, s)| s.len()).sum::<usize>(), 100);
        assert_eq!(b.remove(7), Some(k));
        assert_eq!(b.len(), 99);
    }

    #[test]
    fn candidates_widen_to_parent() {
        let mut b = RangeBuckets::new();
        let q = RangeKey::new(0, 31).unwrap();
        let sibling = RangeKey::new(32, 63).unwrap();
        let far = RangeKey::new(224, 255).unwrap();
        b.insert(1, sibling).unwrap();
        b.insert(2, far).unwrap();
        assert!(b.candidates(q, 0).is_empty());
        assert_eq!(b.candidates(q, 1), BTreeSet::from([1]));
        assert_eq!(b.candidates(q, 2), BTreeSet::from([1, 2]));
        assert_eq!(b.candidates(q, 50), BTreeSet::from([1, 2]));
        b.insert(3, q).unwrap();
        assert_eq!(b.candidates(q, 1), BTreeSet::from([3]));
    }
}

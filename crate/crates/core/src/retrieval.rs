//! Per-feature distances, weighted combined ranking and precision@k.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::features::{FeatureKind, FeatureSet};

pub const DEFAULT_EVAL_KS: [usize; 4] = [20, 30, 50, 100];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrievalError {
    #[error("{kind} descriptors differ in dimension ({left} vs {right})")]
    DimensionMismatch {
        kind: FeatureKind,
        left: usize,
        right: usize,
    },
    #[error("no candidates to rank")]
    NoCandidates,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("no labelled queries")]
    NoQueries,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

/// Seven non-negative weights in [`FeatureKind::ALL`] order, summing to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightProfile([f64; 7]);

impl Default for WeightProfile {
    fn default() -> Self {
        Self::equal()
    }
}

impl WeightProfile {
    pub fn equal() -> Self {
        Self([1.0 / 7.0; 7])
    }

    /// All weight on one feature.
    pub fn only(kind: FeatureKind) -> Self {
        let mut w = [0.0; 7];
        w[kind.index()] = 1.0;
        Self(w)
    }

    /// Normalizes `raw` to unit sum.
    pub fn new(raw: [f64; 7]) -> Result<Self, RetrievalError> {
        if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(RetrievalError::InvalidWeights(
                "weights must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(RetrievalError::InvalidWeights(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(Self(raw.map(|w| w / sum)))
    }

    pub fn from_slice(raw: &[f64]) -> Result<Self, RetrievalError> {
        let arr: [f64; 7] = raw.try_into().map_err(|_| {
            RetrievalError::InvalidWeights(format!("expected 7 weights, got {}", raw.len()))
        })?;
        Self::new(arr)
    }

    pub fn weight(&self, kind: FeatureKind) -> f64 {
        self.0[kind.index()]
    }

    pub fn as_array(&self) -> [f64; 7] {
        self.0
    }
}

fn check_len(kind: FeatureKind, left: usize, right: usize) -> Result<(), RetrievalError> {
    if left == right {
        Ok(())
    } else {
        Err(RetrievalError::DimensionMismatch { kind, left, right })
    }
}

fn l1(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Histogram and correlogram: L1 (histogram bins normalized to unit mass).
/// GLCM, Gabor, Tamura: L2. Naive signature: summed per-point RGB Euclidean
/// distance. Regions: absolute difference of major-region counts.
pub fn feature_distance(
    kind: FeatureKind,
    a: &FeatureSet,
    b: &FeatureSet,
) -> Result<f64, RetrievalError> {
    Ok(match kind {
        FeatureKind::Histogram => {
            let (ta, tb) = (a.histogram.total().max(1) as f64, b.histogram.total().max(1) as f64);
            l1(
                a.histogram.bins.iter().map(|&c| c as f64 / ta),
                b.histogram.bins.iter().map(|&c| c as f64 / tb),
            )
        }
        FeatureKind::Correlogram => {
            check_len(kind, a.correlogram.values.len(), b.correlogram.values.len())?;
            l1(
                a.correlogram.values.iter().map(|&v| f64::from(v)),
                b.correlogram.values.iter().map(|&v| f64::from(v)),
            )
        }
        FeatureKind::Glcm => l2(&a.glcm.statistics(), &b.glcm.statistics()),
        FeatureKind::Gabor => {
            check_len(kind, a.gabor.values.len(), b.gabor.values.len())?;
            l2(&a.gabor.values, &b.gabor.values)
        }
        FeatureKind::Tamura => l2(&a.tamura.values, &b.tamura.values),
        FeatureKind::Naive => a
            .naive
            .points
            .iter()
            .zip(&b.naive.points)
            .map(|(p, q)| l2(p, q))
            .sum(),
        FeatureKind::Regions => (f64::from(a.major_regions) - f64::from(b.major_regions)).abs(),
    })
}

/// Raw distances to every feature, indexed by [`FeatureKind::index`].
pub fn all_distances(a: &FeatureSet, b: &FeatureSet) -> Result<[f64; 7], RetrievalError> {
    let mut out = [0.0; 7];
    for kind in FeatureKind::ALL {
        out[kind.index()] = feature_distance(kind, a, b)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedResult {
    pub frame_id: u64,
    /// Raw distances, indexed by [`FeatureKind::index`].
    pub per_feature: [f64; 7],
    pub combined: f64,
}

impl RankedResult {
    pub fn distance(&self, kind: FeatureKind) -> f64 {
        self.per_feature[kind.index()]
    }
}

/// Ranks rows of precomputed raw distances. Each feature column is min-max
/// normalized over the rows (a constant column becomes 0), the weighted sum
/// is the combined score, and the `k` lowest scores are returned with ties
/// broken by frame id.
pub fn rank_distances(
    rows: Vec<(u64, [f64; 7])>,
    weights: &WeightProfile,
    k: usize,
) -> Result<Vec<RankedResult>, RetrievalError> {
    if k == 0 {
        return Err(RetrievalError::ZeroK);
    }
    if rows.is_empty() {
        return Err(RetrievalError::NoCandidates);
    }
    let mut lo = [f64::INFINITY; 7];
    let mut hi = [f64::NEG_INFINITY; 7];
    for (_, d) in &rows {
        for i in 0..7 {
            lo[i] = lo[i].min(d[i]);
            hi[i] = hi[i].max(d[i]);
        }
    }
    let w = weights.as_array();
    let mut ranked: Vec<RankedResult> = rows
        .into_iter()
        .map(|(frame_id, d)| {
            let combined = (0..7)
                .filter(|&i| w[i] > 0.0 && hi[i] > lo[i])
                .map(|i| w[i] * (d[i] - lo[i]) / (hi[i] - lo[i]))
                .sum();
            RankedResult {
                frame_id,
                per_feature: d,
                combined,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.combined
            .total_cmp(&b.combined)
            .then(a.frame_id.cmp(&b.frame_id))
    });
    ranked.truncate(k);
    Ok(ranked)
}

pub fn combined_rank<'a>(
    query: &FeatureSet,
    candidates: impl IntoIterator<Item = (u64, &'a FeatureSet)>,
    weights: &WeightProfile,
    k: usize,
) -> Result<Vec<RankedResult>, RetrievalError> {
    let rows = candidates
        .into_iter()
        .map(|(id, fs)| all_distances(query, fs).map(|d| (id, d)))
        .collect::<Result<Vec<_>, _>>()?;
    rank_distances(rows, weights, k)
}

/// Fraction of the first `k` ranked ids that are relevant.
pub fn precision_at_k(ranked: &[u64], relevant: &BTreeSet<u64>, k: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    let hits = ranked.iter().take(k).filter(|id| relevant.contains(id)).count();
    hits as f64 / k as f64
}

/// Evaluation columns, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Glcm,
    Gabor,
    Tamura,
    Histogram,
    Autocorrelation,
    RegionGrowing,
    Combined,
}

impl EvalMethod {
    pub const ALL: [EvalMethod; 7] = [
        EvalMethod::Glcm,
        EvalMethod::Gabor,
        EvalMethod::Tamura,
        EvalMethod::Histogram,
        EvalMethod::Autocorrelation,
        EvalMethod::RegionGrowing,
        EvalMethod::Combined,
    ];

    pub fn title(self) -> &'static str {
        match self {
            EvalMethod::Glcm => "GLCM",
            EvalMethod::Gabor => "Gabor",
            EvalMethod::Tamura => "Tamura",
            EvalMethod::Histogram => "Histogram",
            EvalMethod::Autocorrelation => "Autocorrelation",
            EvalMethod::RegionGrowing => "Simple Region Growing",
            EvalMethod::Combined => "Combined",
        }
    }

    pub fn weights(self, combined: &WeightProfile) -> WeightProfile {
        match self {
            EvalMethod::Glcm => WeightProfile::only(FeatureKind::Glcm),
            EvalMethod::Gabor => WeightProfile::only(FeatureKind::Gabor),
            EvalMethod::Tamura => WeightProfile::only(FeatureKind::Tamura),
            EvalMethod::Histogram => WeightProfile::only(FeatureKind::Histogram),
            EvalMethod::Autocorrelation => WeightProfile::only(FeatureKind::Correlogram),
            EvalMethod::RegionGrowing => WeightProfile::only(FeatureKind::Regions),
            EvalMethod::Combined => *combined,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledQuery {
    pub features: FeatureSet,
    pub relevant: BTreeSet<u64>,
    /// Corpus entry left out of this query's ranking (leave-one-out).
    pub exclude: Option<u64>,
}

/// Mean precision per (k, method).
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub ks: Vec<usize>,
    /// `cells[i][j]`: mean precision at `ks[i]` for `EvalMethod::ALL[j]`.
    pub cells: Vec<[f64; 7]>,
}

impl PrecisionReport {
    pub fn get(&self, k: usize, method: EvalMethod) -> Option<f64> {
        let row = self.ks.iter().position(|&x| x == k)?;
        let col = EvalMethod::ALL.iter().position(|&m| m == method)?;
        Some(self.cells[row][col])
    }

    fn row_label(k: usize) -> String {
        format!("Avg. prec.at {k} frames")
    }

    /// Aligned plain-text table, three decimals.
    pub fn to_text(&self) -> String {
        let label_w = self
            .ks
            .iter()
            .map(|&k| Self::row_label(k).len())
            .max()
            .unwrap_or(0);
        let widths: Vec<usize> = EvalMethod::ALL.iter().map(|m| m.title().len().max(5)).collect();
        let mut out = format!("{:label_w$}", "");
        for (m, w) in EvalMethod::ALL.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", m.title());
        }
        out.push('\n');
        for (k, row) in self.ks.iter().zip(&self.cells) {
            let _ = write!(out, "{:label_w$}", Self::row_label(*k));
            for (v, w) in row.iter().zip(&widths) {
                let _ = write!(out, "  {:>w$.3}", v);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k");
        for m in EvalMethod::ALL {
            out.push(',');
            out.push_str(m.title());
        }
        out.push('\n');
        for (k, row) in self.ks.iter().zip(&self.cells) {
            out.push_str(&k.to_string());
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Ranks the whole corpus for every query under each method and averages
/// precision at each cut-off.
pub fn precision_report(
    corpus: &[(u64, FeatureSet)],
    queries: &[LabeledQuery],
    ks: &[usize],
    combined: &WeightProfile,
) -> Result<PrecisionReport, RetrievalError> {
    if queries.is_empty() {
        return Err(RetrievalError::NoQueries);
    }
    if ks.contains(&0) {
        return Err(RetrievalError::ZeroK);
    }
    let depth = ks.iter().copied().max().unwrap_or(1);
    let mut sums = vec![[0.0; 7]; ks.len()];
    for q in queries {
        let rows = corpus
            .iter()
            .filter(|(id, _)| Some(*id) != q.exclude)
            .map(|(id, fs)| all_distances(&q.features, fs).map(|d| (*id, d)))
            .collect::<Result<Vec<_>, _>>()?;
        if rows.is_empty() {
            return Err(RetrievalError::NoCandidates);
        }
        for (j, method) in EvalMethod::ALL.iter().enumerate() {
            let ranked: Vec<u64> = rank_distances(rows.clone(), &method.weights(combined), depth)?
                .into_iter()
                .map(|r| r.frame_id)
                .collect();
            for (i, &k) in ks.iter().enumerate() {
                sums[i][j] += precision_at_k(&ranked, &q.relevant, k);
            }
        }
    }
    let n = queries.len() as f64;
    Ok(PrecisionReport {
        ks: ks.to_vec(),
        cells: sums.into_iter().map(|row| row.map(|s| s / n)).collect(),
    })
}

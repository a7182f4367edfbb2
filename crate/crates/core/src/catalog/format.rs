//! Line formats for persisted descriptors.
//!
//! ```text
//! RGB 256 b0 .. b255
//! pixelCounter asm contrast correlation idm entropy
//! gabor <n> v1 .. vn
//! Tamura 18 v1 .. v18
//! ACC <maxDistance> v1 .. v(256*maxDistance)     colour-major
//! NaiveVector r1 g1 b1 .. r25 g25 b25
//! ```
//!
//! Decimals use the shortest representation that parses back to the same
//! value, so `parse(serialize(v)) == v` and re-serializing is byte-stable.

use std::fmt::{Display, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::color::{AutoCorrelogram, ColorHistogram, NaiveSignature, COLOR_BINS, SIGNATURE_POINTS};
use crate::texture::tamura::TAMURA_LEN;
use crate::texture::{GaborVector, GlcmFeatures, TamuraVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed {kind} feature string: {reason}")]
pub struct MalformedFeatureString {
    pub kind: &'static str,
    pub reason: String,
}

/// A descriptor with a one-line text form.
pub trait FeatureString: Sized {
    const KIND: &'static str;

    fn to_feature_string(&self) -> String;

    fn parse_feature_string(s: &str) -> Result<Self, MalformedFeatureString>;
}

fn join<T: Display>(head: &str, values: impl IntoIterator<Item = T>) -> String {
    let mut out = String::from(head);
    for v in values {
        if !out.is_empty() {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out
}

struct Tokens<'a> {
    kind: &'static str,
    iter: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn new(kind: &'static str, s: &'a str) -> Self {
        Self {
            kind,
            iter: s.split_ascii_whitespace(),
        }
    }

    fn err(&self, reason: impl Into<String>) -> MalformedFeatureString {
        MalformedFeatureString {
            kind: self.kind,
            reason: reason.into(),
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<(), MalformedFeatureString> {
        match self.iter.next() {
            Some(w) if w == word => Ok(()),
            Some(w) => Err(self.err(format!("expected `{word}`, found `{w}`"))),
            None => Err(self.err(format!("expected `{word}`"))),
        }
    }

    fn next<T: FromStr>(&mut self) -> Result<T, MalformedFeatureString> {
        let tok = self.iter.next().ok_or_else(|| self.err("too few values"))?;
        tok.parse()
            .map_err(|_| self.err(format!("`{tok}` is not a valid number")))
    }

    fn values<T: FromStr>(&mut self, n: usize) -> Result<Vec<T>, MalformedFeatureString> {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let tok = self
                .iter
                .next()
                .ok_or_else(|| self.err(format!("expected {n} values, found {i}")))?;
            out.push(
                tok.parse()
                    .map_err(|_| self.err(format!("`{tok}` is not a valid number")))?,
            );
        }
        Ok(out)
    }

    fn finish(mut self) -> Result<(), MalformedFeatureString> {
        match self.iter.next() {
            None => Ok(()),
            Some(_) => Err(self.err("trailing values")),
        }
    }
}

impl FeatureString for ColorHistogram {
    const KIND: &'static str = "histogram";

    fn to_feature_string(&self) -> String {
        join(&format!("RGB {COLOR_BINS}"), self.bins.iter())
    }

    fn parse_feature_string(s: &str) -> Result<Self, MalformedFeatureString> {
        let mut t = Tokens::new(Self::KIND, s);
        t.expect_word("RGB")?;
        t.expect_word("256")?;
        let v: Vec<u64> = t.values(COLOR_BINS)?;
        t.finish()?;
        let mut bins = [0u64; COLOR_BINS];
        bins.copy_from_slice(&v);
        Ok(ColorHistogram { bins })
    }
}

impl FeatureString for GlcmFeatures {
    const KIND: &'static str = "glcm";

    fn to_feature_string(&self) -> String {
        join(&self.pixel_counter.to_string(), self.statistics())
    }

    fn parse_feature_string(s: &str) -> Result<Self, MalformedFeatureString> {
        let mut t = Tokens::new(Self::KIND, s);
        let pixel_counter = t.next()?;
        let v: Vec<f64> = t.values(5)?;
        t.finish()?;
        Ok(GlcmFeatures {
            pixel_counter,
            asm: v[0],
            contrast: v[1],
            correlation: v[2],
            idm: v[3],
            entropy: v[4],
        })
    }
}

impl FeatureString for GaborVector {
    const KIND: &'static str = "gabor";

    fn to_feature_string(&self) -> String {
        join(&format!("gabor {}", self.values.len()), self.values.iter())
    }

    fn parse_feature_string(s: &str) -> Result<Self, MalformedFeatureString> {
        let mut t = Tokens::new(Self::KIND, s);
        t.expect_word("gabor")?;
        let n: usize = t.next()?;
        if n % 2 != 0 {
            return Err(t.err("value count must be even"));
        }
        let values = t.values(n)?;
        t.finish()?;
        Ok(GaborVector { values })
    }
}

impl FeatureString for TamuraVector {
    const KIND: &'static str = "tamura";

    fn to_feature_string(&self) -> String {
        join(&format!("Tamura {TAMURA_LEN}"), self.values.iter())
    }

    fn parse_feature_string(s: &str) -> Result<Self, MalformedFeatureString> {
        let mut t = Tokens::new(Self::KIND, s);
        t.expect_word("Tamura")?;
        t.expect_word("18")?;
        let v: Vec<f64> = t.values(TAMURA_LEN)?;
        t.finish()?;
        let mut values = [0.0; TAMURA_LEN];
        values.copy_from_slice(&v);
        Ok(TamuraVector { values })
    }
}

impl FeatureString for AutoCorrelogram {
    const KIND: &'static str = "correlogram";

    fn to_feature_string(&self) -> String {
        join(&format!("ACC {}", self.max_distance), self.values.iter())
    }

    fn parse_feature_string(s: &str) -> Result<Self, MalformedFeatureString> {
        let mut t = Tokens::new(Self::KIND, s);
        t.expect_word("ACC")?;
        let max_distance: usize = t.next()?;
        if max_distance == 0 {
            return Err(t.err("max distance must be at least 1"));
        }
        let values = t.values(COLOR_BINS * max_distance)?;
        t.finish()?;
        Ok(AutoCorrelogram {
            max_distance,
            values,
        })
    }
}

impl FeatureString for NaiveSignature {
    const KIND: &'static str = "naive";

    fn to_feature_string(&self) -> String {
        join("NaiveVector", self.points.iter().flatten())
    }

    fn parse_feature_string(s: &str) -> Result<Self, MalformedFeatureString> {
        let mut t = Tokens::new(Self::KIND, s);
        t.expect_word("NaiveVector")?;
        let v: Vec<f64> = t.values(SIGNATURE_POINTS * 3)?;
        t.finish()?;
        let mut points = [[0.0; 3]; SIGNATURE_POINTS];
        for (p, c) in points.iter_mut().zip(v.chunks_exact(3)) {
            p.copy_from_slice(c);
        }
        Ok(NaiveSignature { points })
    }
}

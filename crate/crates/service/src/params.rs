//! Text forms of request parameters, shared by the CLI and the HTTP API.

use vidseek_core::retrieval::DEFAULT_EVAL_KS;
use vidseek_core::{FeatureKind, WeightProfile};

/// Seven comma-separated non-negative weights in the order
/// histogram, glcm, gabor, tamura, correlogram, naive, regions.
pub fn parse_weights(s: &str) -> Result<WeightProfile, String> {
    let raw = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("invalid weight `{}`", t.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    if raw.len() != FeatureKind::ALL.len() {
        return Err(format!("expected 7 weights ({}), got {}", weight_order(), raw.len()));
    }
    WeightProfile::from_slice(&raw).map_err(|e| e.to_string())
}

pub fn weight_order() -> String {
    FeatureKind::ALL.map(FeatureKind::name).join(",")
}

pub fn parse_ks(s: &str) -> Result<Vec<usize>, String> {
    let ks = s
        .split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(format!("invalid cut-off `{}`", t.trim())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ks.is_empty() {
        Ok(DEFAULT_EVAL_KS.to_vec())
    } else {
        Ok(ks)
    }
}

pub fn parse_k(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => Err(format!("k must be a positive integer, got `{}`", s.trim())),
    }
}

pub fn parse_flag(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" | "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(format!("invalid flag value `{other}`")),
    }
}

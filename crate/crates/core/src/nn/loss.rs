//! Cross-entropy and ordinal cross-entropy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, LevelA, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::util::argmax;

/// Probabilities are clipped to `[CLIP_EPS, 1]` before taking logs.
pub const CLIP_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Categorical cross-entropy.
    Ce,
    /// Cross-entropy scaled by `1 + |argmax(y) - argmax(p)|`.
    Oce,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Ce => "ce",
            LossKind::Oce => "oce",
        })
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ce" => Ok(LossKind::Ce),
            "oce" => Ok(LossKind::Oce),
            other => Err(format!("unknown loss {other:?} (expected ce or oce)")),
        }
    }
}

impl LossKind {
    /// Loss of one prediction.
    pub fn eval(self, p: &[f64], y: &[f64]) -> f64 {
        match self {
            LossKind::Ce => ce_loss(p, y),
            LossKind::Oce => oce_loss(p, y),
        }
    }

    /// Multiplier applied on top of cross-entropy for this prediction.
    pub fn scale(self, p: &[f64], y: &[f64]) -> f64 {
        match self {
            LossKind::Ce => 1.0,
            LossKind::Oce => 1.0 + ordinal_distance(p, y) as f64,
        }
    }
}

/// `-Σ y_i log(clip(p_i))`.
pub fn ce_loss(p: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), y.len());
    -p.iter()
        .zip(y)
        .filter(|(_, &yi)| yi != 0.0)
        .map(|(&pi, &yi)| yi * pi.clamp(CLIP_EPS, 1.0).ln())
        .sum::<f64>()
}

/// `|argmax(y) - argmax(p)|`, ties resolved to the lowest index.
pub fn ordinal_distance(p: &[f64], y: &[f64]) -> usize {
    argmax(y).abs_diff(argmax(p))
}

/// `(1 + w) · ce_loss(p, y)` with `w` = [`ordinal_distance`].
pub fn oce_loss(p: &[f64], y: &[f64]) -> f64 {
    (1.0 + ordinal_distance(p, y) as f64) * ce_loss(p, y)
}

/// Per-class loss weights `N / (C · n_c)`, counting samples by dominant label.
pub fn class_balance_weights(train: &Dataset) -> Result<[f64; NUM_CLASSES]> {
    let counts = train.class_counts();
    let n = train.len() as f64;
    let mut weights = [0.0; NUM_CLASSES];
    for class in LevelA::ALL {
        let c = counts[class.index()];
        if c == 0 {
            return Err(Error::EmptyClass(class));
        }
        weights[class.index()] = n / (NUM_CLASSES as f64 * c as f64);
    }
    Ok(weights)
}

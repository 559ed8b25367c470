//! Support-weighted classification metrics and confusion matrices.

use serde::{Deserialize, Serialize};

use crate::corpus::{LevelA, NUM_CLASSES};
use crate::error::{Error, Result};

/// Raw counts; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_predictions(predictions: &[LevelA], truths: &[LevelA]) -> Result<Self> {
        check_lengths(predictions, truths)?;
        let mut m = ConfusionMatrix::default();
        for (p, t) in predictions.iter().zip(truths) {
            m.counts[t.index()][p.index()] += 1;
        }
        Ok(m)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of samples whose true class this is.
    pub support: u64,
    /// False when the class was never predicted (precision reported as 0).
    pub precision_defined: bool,
    /// False when the class has no support (recall reported as 0).
    pub recall_defined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
}

/// Per-class precision, recall and F1 averaged with weights proportional to
/// each class's support among the truths. Zero denominators yield 0.
pub fn weighted_metrics(predictions: &[LevelA], truths: &[LevelA]) -> Result<WeightedMetrics> {
    if truths.is_empty() {
        return Err(Error::InvalidDataset("metrics need at least one prediction".into()));
    }
    let cm = ConfusionMatrix::from_predictions(predictions, truths)?;
    let n = truths.len() as f64;
    let mut per_class = Vec::with_capacity(NUM_CLASSES);
    let (mut precision, mut recall, mut f1) = (0.0, 0.0, 0.0);
    let mut correct = 0;
    for c in 0..NUM_CLASSES {
        let tp = cm.counts[c][c];
        let support: u64 = cm.counts[c].iter().sum();
        let predicted: u64 = cm.counts.iter().map(|row| row[c]).sum();
        correct += tp;
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let p = ratio(tp, predicted);
        let r = ratio(tp, support);
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        let w = support as f64;
        precision += w * p;
        recall += w * r;
        f1 += w * f;
        per_class.push(ClassMetrics {
            precision: p,
            recall: r,
            f1: f,
            support,
            precision_defined: predicted > 0,
            recall_defined: support > 0,
        });
    }
    Ok(WeightedMetrics {
        precision: precision / n,
        recall: recall / n,
        f1: f1 / n,
        accuracy: correct as f64 / n,
        per_class,
    })
}

/// Row-normalized confusion percentages accumulated over folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateConfusion {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
    /// Each supported row sums to 100.
    pub percent: [[f64; NUM_CLASSES]; NUM_CLASSES],
    /// False for rows without any test sample; those rows are all zero.
    pub supported: [bool; NUM_CLASSES],
}

impl AggregateConfusion {
    /// Sum of the diagonal percentages.
    pub fn diagonal_mass(&self) -> f64 {
        (0..NUM_CLASSES).map(|i| self.percent[i][i]).sum()
    }
}

/// Sums raw counts across folds, then scales each row to percentages.
pub fn aggregate_confusion(per_fold: &[ConfusionMatrix]) -> AggregateConfusion {
    let mut total = ConfusionMatrix::default();
    for m in per_fold {
        total.add(m);
    }
    let mut percent = [[0.0; NUM_CLASSES]; NUM_CLASSES];
    let mut supported = [false; NUM_CLASSES];
    for (i, row) in total.counts.iter().enumerate() {
        let sum: u64 = row.iter().sum();
        if sum > 0 {
            supported[i] = true;
            for (j, &c) in row.iter().enumerate() {
                percent[i][j] = 100.0 * c as f64 / sum as f64;
            }
        }
    }
    AggregateConfusion {
        counts: total.counts,
        percent,
        supported,
    }
}

fn check_lengths(predictions: &[LevelA], truths: &[LevelA]) -> Result<()> {
    if predictions.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: truths.len(),
            found: predictions.len(),
        });
    }
    Ok(())
}

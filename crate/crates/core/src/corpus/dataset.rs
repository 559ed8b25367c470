use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::features::{b2_histogram, b2_histogram_pooled, c_histogram};
use super::scheme::{LevelA, OrdinalLabelScheme, B2_SCHEME, C_SCHEME, NUM_CLASSES};
use super::timeline::TaskRecording;
use crate::error::{Error, Result};
use crate::util::argmax;

/// Tolerance on the unit-sum invariant of features and labels.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Stable identifier of an observed sample within its dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SampleId(pub usize);

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "origin", rename_all = "snake_case")]
pub enum Provenance {
    Observed {
        id: SampleId,
        group_id: String,
        task_id: String,
        coder_id: Option<String>,
    },
    /// Synthetic sample produced by Mixup. `sources` lists every observed
    /// sample that contributed, sorted; `primary_class` is the class of the
    /// sample weighted by `lambda`.
    Mixup {
        sources: Vec<SampleId>,
        lambda: f64,
        primary_class: LevelA,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSample {
    pub features: Vec<f64>,
    /// Probability vector over the five Level A classes.
    pub label: Vec<f64>,
    pub provenance: Provenance,
}

impl FeatureSample {
    /// Dominant class of the label, lowest index on ties.
    pub fn class(&self) -> LevelA {
        LevelA::from_index(argmax(&self.label)).expect("label has five entries")
    }

    pub fn group_id(&self) -> Option<&str> {
        match &self.provenance {
            Provenance::Observed { group_id, .. } => Some(group_id),
            Provenance::Mixup { .. } => None,
        }
    }

    pub fn id(&self) -> Option<SampleId> {
        match &self.provenance {
            Provenance::Observed { id, .. } => Some(*id),
            Provenance::Mixup { .. } => None,
        }
    }

    /// Observed samples this one was derived from (itself, if observed).
    pub fn source_ids(&self) -> Vec<SampleId> {
        match &self.provenance {
            Provenance::Observed { id, .. } => vec![*id],
            Provenance::Mixup { sources, .. } => sources.clone(),
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self.provenance, Provenance::Mixup { .. })
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.features.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.features.len(),
            });
        }
        if self.label.len() != NUM_CLASSES {
            return Err(Error::DimensionMismatch {
                expected: NUM_CLASSES,
                found: self.label.len(),
            });
        }
        for (what, v) in [("feature", &self.features), ("label", &self.label)] {
            if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidDataset(format!(
                    "{what} vector has a negative or non-finite entry"
                )));
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::InvalidDataset(format!(
                    "{what} vector sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Which histograms make up the feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    B2,
    C,
    B2PlusC,
}

impl FeatureKind {
    pub fn dim(self) -> usize {
        match self {
            FeatureKind::B2 => B2_SCHEME.len(),
            FeatureKind::C => C_SCHEME.len(),
            FeatureKind::B2PlusC => B2_SCHEME.len() + C_SCHEME.len(),
        }
    }

    pub fn from_dim(dim: usize) -> Option<FeatureKind> {
        [FeatureKind::B2, FeatureKind::C, FeatureKind::B2PlusC]
            .into_iter()
            .find(|k| k.dim() == dim)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::B2 => "b2",
            FeatureKind::C => "c",
            FeatureKind::B2PlusC => "b2_plus_c",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['+', '-'], "_").as_str() {
            "b2" => Ok(FeatureKind::B2),
            "c" => Ok(FeatureKind::C),
            "b2_plus_c" | "b2_c" | "b2plusc" => Ok(FeatureKind::B2PlusC),
            other => Err(format!("unknown feature kind {other:?} (expected b2, c or b2_plus_c)")),
        }
    }
}

/// Which Level A labels the samples carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mapping {
    /// One sample per task and coder, labelled with that coder's judgement.
    B2ToA,
    /// One sample per task, labelled with the adjudicated label.
    CToA,
}

impl Mapping {
    pub fn as_str(self) -> &'static str {
        match self {
            Mapping::B2ToA => "b2_to_a",
            Mapping::CToA => "c_to_a",
        }
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mapping {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "b2toa" => Ok(Mapping::B2ToA),
            "ctoa" => Ok(Mapping::CToA),
            other => Err(format!("unknown mapping {other:?} (expected b2_to_a or c_to_a)")),
        }
    }
}

/// Samples sharing one feature layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<FeatureSample>,
    pub feature_kind: FeatureKind,
    pub scheme: OrdinalLabelScheme,
}

impl Dataset {
    /// Validates every sample against the layout of `feature_kind`.
    pub fn new(samples: Vec<FeatureSample>, feature_kind: FeatureKind) -> Result<Dataset> {
        let dim = feature_kind.dim();
        for s in &samples {
            s.check(dim)?;
        }
        Ok(Dataset {
            samples,
            feature_kind,
            scheme: OrdinalLabelScheme,
        })
    }

    pub fn dim(&self) -> usize {
        self.feature_kind.dim()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of samples whose dominant label is each class.
    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for s in &self.samples {
            counts[s.class().index()] += 1;
        }
        counts
    }

    /// Samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            feature_kind: self.feature_kind,
            scheme: self.scheme,
        }
    }

    /// Writes the dataset as CSV:
    /// `origin,id,group_id,task_id,coder_id,lambda,sources,primary_class,x0..,y0..y4`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = [
            "origin",
            "id",
            "group_id",
            "task_id",
            "coder_id",
            "lambda",
            "sources",
            "primary_class",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((0..self.dim()).map(|i| format!("x{i}")));
        header.extend((0..NUM_CLASSES).map(|i| format!("y{i}")));
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = match &s.provenance {
                Provenance::Observed {
                    id,
                    group_id,
                    task_id,
                    coder_id,
                } => vec![
                    "observed".into(),
                    id.to_string(),
                    group_id.clone(),
                    task_id.clone(),
                    coder_id.clone().unwrap_or_default(),
                    String::new(),
                    String::new(),
                    String::new(),
                ],
                Provenance::Mixup {
                    sources,
                    lambda,
                    primary_class,
                } => vec![
                    "mixup".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    lambda.to_string(),
                    sources.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";"),
                    primary_class.index().to_string(),
                ],
            };
            row.extend(s.features.iter().map(|v| v.to_string()));
            row.extend(s.label.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("writing dataset", e))?;
        Ok(())
    }

    /// Reads a dataset written by [`Dataset::write_csv`].
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        let fixed = 8;
        let dim = headers
            .len()
            .checked_sub(fixed + NUM_CLASSES)
            .ok_or_else(|| Error::InvalidDataset("dataset header too short".into()))?;
        let kind = FeatureKind::from_dim(dim)
            .ok_or_else(|| Error::InvalidDataset(format!("feature dimension {dim} is not 7, 23 or 30")))?;
        let mut samples = Vec::new();
        for record in r.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            };
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("invalid number {s:?}")));
            let provenance = match &record[0] {
                "observed" => Provenance::Observed {
                    id: SampleId(record[1].parse().map_err(|_| err("invalid sample id".into()))?),
                    group_id: record[2].to_string(),
                    task_id: record[3].to_string(),
                    coder_id: (!record[4].is_empty()).then(|| record[4].to_string()),
                },
                "mixup" => Provenance::Mixup {
                    lambda: num(&record[5])?,
                    sources: record[6]
                        .split(';')
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            s.parse()
                                .map(SampleId)
                                .map_err(|_| err(format!("invalid source id {s:?}")))
                        })
                        .collect::<Result<_>>()?,
                    primary_class: record[7].parse().map_err(err)?,
                },
                other => return Err(err(format!("unknown origin {other:?}"))),
            };
            let features = (fixed..fixed + dim).map(|i| num(&record[i])).collect::<Result<_>>()?;
            let label = (fixed + dim..fixed + dim + NUM_CLASSES)
                .map(|i| num(&record[i]))
                .collect::<Result<_>>()?;
            samples.push(FeatureSample {
                features,
                label,
                provenance,
            });
        }
        Dataset::new(samples, kind)
    }
}

/// Builds the feature dataset for one modality.
///
/// `B2ToA` emits one sample per task and coder with that coder's B2
/// histogram and Level A judgement; `CToA` emits one sample per task with the
/// adjudicated label and the B2 segments of all coders pooled. `B2PlusC`
/// concatenates the two normalized histograms and halves the result so it
/// stays on the simplex.
pub fn build_dataset(tasks: &[TaskRecording], feature_kind: FeatureKind, mapping: Mapping) -> Result<Dataset> {
    if let Some(first) = tasks.first() {
        if let Some(other) = tasks.iter().find(|t| t.modality != first.modality) {
            return Err(Error::InvalidDataset(format!(
                "tasks mix modalities {} and {}",
                first.modality, other.modality
            )));
        }
    }

    let mut samples = Vec::new();
    for task in tasks {
        let tag = |e: Error| match e {
            Error::EmptyTimeline(m) => Error::EmptyTimeline(format!("{m} (required for {feature_kind} features)")),
            e => e,
        };
        match mapping {
            Mapping::B2ToA => {
                for (coder, label) in &task.level_a_codes {
                    let b2 = || b2_histogram(task, coder).map_err(tag);
                    let features = match feature_kind {
                        FeatureKind::B2 => b2()?,
                        FeatureKind::C => c_histogram(task).map_err(tag)?,
                        FeatureKind::B2PlusC => concat_halves(b2()?, c_histogram(task).map_err(tag)?),
                    };
                    samples.push(FeatureSample {
                        features,
                        label: label.one_hot(),
                        provenance: Provenance::Observed {
                            id: SampleId(samples.len()),
                            group_id: task.group_id.clone(),
                            task_id: task.task_id.clone(),
                            coder_id: Some(coder.clone()),
                        },
                    });
                }
            }
            Mapping::CToA => {
                let label = task.adjudicated_label()?;
                let features = match feature_kind {
                    FeatureKind::B2 => b2_histogram_pooled(task).map_err(tag)?,
                    FeatureKind::C => c_histogram(task).map_err(tag)?,
                    FeatureKind::B2PlusC => {
                        concat_halves(b2_histogram_pooled(task).map_err(tag)?, c_histogram(task).map_err(tag)?)
                    }
                };
                samples.push(FeatureSample {
                    features,
                    label: label.one_hot(),
                    provenance: Provenance::Observed {
                        id: SampleId(samples.len()),
                        group_id: task.group_id.clone(),
                        task_id: task.task_id.clone(),
                        coder_id: None,
                    },
                });
            }
        }
    }
    Dataset::new(samples, feature_kind)
}

fn concat_halves(b2: Vec<f64>, c: Vec<f64>) -> Vec<f64> {
    b2.into_iter().chain(c).map(|v| 0.5 * v).collect()
}

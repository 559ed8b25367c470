use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{logo_splits, FoldSpec};
use super::metrics::{aggregate_confusion, weighted_metrics, AggregateConfusion, ClassMetrics, ConfusionMatrix};
use crate::augment::{controlled_mixup, MixupConfig};
use crate::corpus::{
    build_dataset, parse_corpus, Dataset, FeatureKind, LevelA, Mapping, Modality, SampleId, NUM_CLASSES,
};
use crate::error::{Error, Result};
use crate::nn::{to_matrices, train, Architecture, Mlp, TrainConfig, TrainedModel, HIDDEN_WIDTH};
use crate::util::{argmax, rng_stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Mlp,
    /// Always predicts the most frequent class of the training fold.
    MajorityBaseline,
}

/// Everything that determines one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub modality: Modality,
    pub mapping: Mapping,
    pub feature_kind: FeatureKind,
    pub model: ModelKind,
    pub hidden_widths: [usize; 3],
    /// `null` disables augmentation.
    pub mixup: Option<MixupConfig>,
    pub train: TrainConfig,
    /// Groups kept in every training set and never held out.
    pub pinned_groups: Vec<String>,
    pub seed: u64,
    /// Where the CLI writes the report. Not echoed into reports.
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: None,
            modality: Modality::AudioVideo,
            mapping: Mapping::B2ToA,
            feature_kind: FeatureKind::B2,
            model: ModelKind::Mlp,
            hidden_widths: [HIDDEN_WIDTH; 3],
            mixup: None,
            train: TrainConfig::default(),
            pinned_groups: Vec::new(),
            seed: 0,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_widths.contains(&0) {
            return Err(Error::InvalidConfig("hidden widths must be positive".into()));
        }
        if let Some(m) = &self.mixup {
            m.validate()?;
        }
        self.train.validate()
    }

    pub fn pinned(&self) -> BTreeSet<String> {
        self.pinned_groups.iter().cloned().collect()
    }

    /// The config as it appears in reports: output location stripped,
    /// pinned groups sorted.
    pub fn echo(&self) -> ExperimentConfig {
        let mut c = self.clone();
        c.output_dir = None;
        c.pinned_groups = self.pinned().into_iter().collect();
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> MeanStd {
        if values.is_empty() {
            return MeanStd { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub held_out_group: String,
    pub n_train: usize,
    /// Training-set size after augmentation.
    pub n_train_augmented: usize,
    pub n_test: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub best_epoch: Option<usize>,
    pub best_test_loss: Option<f64>,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub accuracy: MeanStd,
}

impl Summary {
    pub fn from_folds(folds: &[FoldResult]) -> Summary {
        let col = |f: fn(&FoldResult) -> f64| MeanStd::of(&folds.iter().map(f).collect::<Vec<_>>());
        Summary {
            precision: col(|r| r.precision),
            recall: col(|r| r.recall),
            f1: col(|r| r.f1),
            accuracy: col(|r| r.accuracy),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub n_samples: usize,
    pub class_counts: [usize; NUM_CLASSES],
    pub folds: Vec<FoldResult>,
    pub summary: Summary,
    pub confusion: AggregateConfusion,
}

/// One fold's outcome plus the selected model (absent for the baseline).
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub result: FoldResult,
    pub model: Option<TrainedModel<f32>>,
}

/// Parses a corpus directory and builds the dataset the config asks for.
pub fn load_dataset(corpus: impl AsRef<Path>, cfg: &ExperimentConfig) -> Result<Dataset> {
    let tasks: Vec<_> = parse_corpus(corpus.as_ref())?
        .into_iter()
        .filter(|t| t.modality == cfg.modality)
        .collect();
    if tasks.is_empty() {
        return Err(Error::InvalidDataset(format!(
            "{} has no {} recordings",
            corpus.as_ref().display(),
            cfg.modality
        )));
    }
    build_dataset(&tasks, cfg.feature_kind, cfg.mapping)
}

/// Runs every leave-one-group-out fold and assembles the report.
///
/// Folds run in parallel; each draws from its own RNG stream
/// `(seed, fold index)` so results do not depend on scheduling.
pub fn run_experiment(corpus: impl AsRef<Path>, cfg: &ExperimentConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let dataset = load_dataset(corpus, cfg)?;
    run_on_dataset(&dataset, cfg)
}

/// [`run_experiment`] on an already built dataset.
pub fn run_on_dataset(dataset: &Dataset, cfg: &ExperimentConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let folds = logo_splits(dataset, &cfg.pinned())?;
    let results = folds
        .par_iter()
        .enumerate()
        .map(|(i, fold)| {
            run_fold(dataset, fold, i, cfg)
                .map(|o| o.result)
                .map_err(|e| Error::Fold {
                    group: fold.held_out_group.clone(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let confusion = aggregate_confusion(&results.iter().map(|r| r.confusion).collect::<Vec<_>>());
    Ok(EvalReport {
        version: crate::version_string(),
        seed: cfg.seed,
        config: cfg.echo(),
        n_samples: dataset.len(),
        class_counts: dataset.class_counts(),
        summary: Summary::from_folds(&results),
        folds: results,
        confusion,
    })
}

/// Trains on the fold's training split (augmented if configured) and scores
/// the held-out group.
pub fn run_fold(dataset: &Dataset, fold: &FoldSpec, fold_index: usize, cfg: &ExperimentConfig) -> Result<FoldOutcome> {
    let train_set = dataset.subset(&fold.train_sample_ids);
    let test_set = dataset.subset(&fold.test_sample_ids);
    let mut rng = rng_stream(cfg.seed, fold_index as u64);

    let (truths, predictions, augmented_len, trained) = match cfg.model {
        ModelKind::MajorityBaseline => {
            let majority = LevelA::from_index(argmax(&train_set.class_counts())).expect("class index");
            let truths: Vec<LevelA> = test_set.samples.iter().map(|s| s.class()).collect();
            let predictions = vec![majority; truths.len()];
            (truths, predictions, train_set.len(), None)
        }
        ModelKind::Mlp => {
            let augmented = match &cfg.mixup {
                Some(m) => controlled_mixup(&train_set, m, &mut rng)?,
                None => train_set.clone(),
            };
            check_leakage(&augmented, &test_set)?;
            let arch = Architecture::with_hidden(dataset.dim(), &cfg.hidden_widths);
            let model: Mlp<f32> = Mlp::new(&arch, &mut rng)?;
            let trained = train(model, &augmented, &test_set, &cfg.train, &mut rng)?;
            let (x_test, _) = to_matrices::<f32>(&test_set);
            let predictions = trained
                .model
                .predict(x_test.view())
                .into_iter()
                .map(|i| LevelA::from_index(i).expect("five outputs"))
                .collect();
            let truths = test_set.samples.iter().map(|s| s.class()).collect();
            (truths, predictions, augmented.len(), Some(trained))
        }
    };

    let metrics = weighted_metrics(&predictions, &truths)?;
    let confusion = ConfusionMatrix::from_predictions(&predictions, &truths)?;
    Ok(FoldOutcome {
        result: FoldResult {
            fold: fold_index,
            held_out_group: fold.held_out_group.clone(),
            n_train: train_set.len(),
            n_train_augmented: augmented_len,
            n_test: test_set.len(),
            precision: metrics.precision,
            recall: metrics.recall,
            f1: metrics.f1,
            accuracy: metrics.accuracy,
            best_epoch: trained.as_ref().map(|t| t.best_epoch),
            best_test_loss: trained.as_ref().map(|t| t.best_test_loss),
            per_class: metrics.per_class,
            confusion,
        },
        model: trained,
    })
}

/// Fails if any training sample was derived from a test sample.
pub fn check_leakage(train: &Dataset, test: &Dataset) -> Result<()> {
    let test_ids: BTreeSet<SampleId> = test.samples.iter().filter_map(|s| s.id()).collect();
    for s in &train.samples {
        if let Some(id) = s.source_ids().into_iter().find(|id| test_ids.contains(id)) {
            return Err(Error::InvalidDataset(format!(
                "test sample {id} leaked into the training set"
            )));
        }
    }
    Ok(())
}

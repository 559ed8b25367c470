use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::loss::{class_balance_weights, LossKind};
use super::mlp::{Mlp, Real};
use super::plateau::{PlateauConfig, PlateauScheduler};
use crate::corpus::{Dataset, NUM_CLASSES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Mini-batch size as a fraction of the training-set size (rounded up).
    pub batch_fraction: f64,
    pub loss: LossKind,
    /// Weight each sample's loss by the inverse frequency of its class.
    pub class_balancing: bool,
    pub adam: AdamConfig,
    pub plateau: PlateauConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            batch_fraction: 0.1,
            loss: LossKind::Ce,
            class_balancing: false,
            adam: AdamConfig::default(),
            plateau: PlateauConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.batch_fraction > 0.0 && self.batch_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "batch_fraction must lie in (0, 1], got {}",
                self.batch_fraction
            )));
        }
        if !(self.adam.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be > 0".into()));
        }
        self.plateau.validate()
    }

    /// `ceil(n · batch_fraction)`, at least 1.
    pub fn batch_size(&self, n: usize) -> usize {
        // shave off representation error so 0.1 · 330 is 33, not 34
        let raw = n as f64 * self.batch_fraction;
        ((raw - 1e-9 * raw.max(1.0)).ceil() as usize).clamp(1, n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedModel<T = f32> {
    /// Weights at the epoch with the lowest test loss.
    pub model: Mlp<T>,
    pub best_epoch: usize,
    pub best_test_loss: f64,
    pub history: Vec<EpochRecord>,
}

/// Feature and label matrices of a dataset.
pub fn to_matrices<T: Real>(data: &Dataset) -> (Array2<T>, Array2<T>) {
    let n = data.len();
    let x = Array2::from_shape_fn((n, data.dim()), |(i, j)| T::of(data.samples[i].features[j]));
    let y = Array2::from_shape_fn((n, NUM_CLASSES), |(i, j)| T::of(data.samples[i].label[j]));
    (x, y)
}

/// Mean unweighted loss over a dataset without dropout.
pub fn evaluate_loss<T: Real>(model: &Mlp<T>, x: &Array2<T>, y: &Array2<T>, loss: LossKind) -> f64 {
    let probs = model.predict_proba(x.view());
    let mut total = 0.0;
    let mut p = [0.0; NUM_CLASSES];
    let mut t = [0.0; NUM_CLASSES];
    for (pr, yr) in probs.rows().into_iter().zip(y.rows()) {
        for j in 0..NUM_CLASSES {
            p[j] = pr[j].to_f64().unwrap_or(f64::NAN);
            t[j] = yr[j].to_f64().unwrap_or(f64::NAN);
        }
        total += loss.eval(&p, &t);
    }
    total / x.nrows() as f64
}

/// Mini-batch Adam training with plateau-halving and best-by-test-loss
/// model selection.
///
/// Each epoch shuffles the training set, steps through batches of
/// `ceil(n · batch_fraction)` samples, then measures the mean test loss in
/// inference mode. The returned model is the snapshot with the lowest test
/// loss.
pub fn train<T: Real, R: Rng>(
    model: Mlp<T>,
    train: &Dataset,
    test: &Dataset,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<TrainedModel<T>> {
    cfg.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidDataset("training and test sets must be non-empty".into()));
    }
    for d in [train, test] {
        if d.dim() != model.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.input_dim(),
                found: d.dim(),
            });
        }
    }

    let weights: Vec<f64> = if cfg.class_balancing {
        let per_class = class_balance_weights(train)?;
        train.samples.iter().map(|s| per_class[s.class().index()]).collect()
    } else {
        vec![1.0; train.len()]
    };
    let (x_train, y_train) = to_matrices::<T>(train);
    let (x_test, y_test) = to_matrices::<T>(test);
    let n = train.len();
    let batch = cfg.batch_size(n);

    let mut model = model;
    let mut adam = Adam::new(&model, cfg.adam);
    let mut schedule = PlateauScheduler::new(cfg.adam.learning_rate, cfg.plateau);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(Mlp<T>, usize, f64)> = None;
    let mut batch_weights = Vec::with_capacity(batch);

    for epoch in 1..=cfg.epochs {
        let lr = schedule.learning_rate();
        order.shuffle(rng);
        let mut train_total = 0.0;
        for (b, idx) in order.chunks(batch).enumerate() {
            let xb = x_train.select(Axis(0), idx);
            let yb = y_train.select(Axis(0), idx);
            batch_weights.clear();
            batch_weights.extend(idx.iter().map(|&i| weights[i]));
            let pass = model.loss_and_gradients(
                xb.view(),
                yb.view(),
                cfg.loss,
                &batch_weights,
                Some(&mut *rng as &mut dyn rand::RngCore),
            );
            if !pass.loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    stage: format!("batch {}", b + 1),
                });
            }
            train_total += pass.loss * idx.len() as f64;
            adam.step(&mut model, &pass.gradients, lr);
        }

        let test_loss = evaluate_loss(&model, &x_test, &y_test, cfg.loss);
        if !test_loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                stage: "test evaluation".into(),
            });
        }
        history.push(EpochRecord {
            epoch,
            train_loss: train_total / n as f64,
            test_loss,
            learning_rate: lr,
        });
        if best.as_ref().is_none_or(|(_, _, l)| test_loss < *l) {
            best = Some((model.clone(), epoch, test_loss));
        }
        schedule.observe(test_loss);
    }

    let (model, best_epoch, best_test_loss) = best.expect("at least one epoch");
    Ok(TrainedModel {
        model,
        best_epoch,
        best_test_loss,
        history,
    })
}

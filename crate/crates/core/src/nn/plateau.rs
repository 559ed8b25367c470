use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Halve-on-plateau learning-rate rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlateauConfig {
    /// Epochs without improvement before the rate is reduced.
    pub patience: usize,
    pub factor: f64,
    pub min_lr: f64,
    /// Improvements of at most this much do not count.
    pub min_delta: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        PlateauConfig {
            patience: 20,
            factor: 0.5,
            min_lr: 1e-5,
            min_delta: 1e-4,
        }
    }
}

impl PlateauConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patience == 0 {
            return Err(Error::InvalidConfig("plateau patience must be at least 1".into()));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "plateau factor must lie in (0, 1), got {}",
                self.factor
            )));
        }
        if !(self.min_lr > 0.0) {
            return Err(Error::InvalidConfig(format!("min_lr must be > 0, got {}", self.min_lr)));
        }
        if !(self.min_delta >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "min_delta must be >= 0, got {}",
                self.min_delta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlateauScheduler {
    cfg: PlateauConfig,
    lr: f64,
    best: f64,
    wait: usize,
}

impl PlateauScheduler {
    pub fn new(initial_lr: f64, cfg: PlateauConfig) -> Self {
        PlateauScheduler {
            cfg,
            lr: initial_lr,
            best: f64::INFINITY,
            wait: 0,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    /// Records the monitored loss of an epoch; returns true if the rate was
    /// reduced for the next epoch.
    pub fn observe(&mut self, loss: f64) -> bool {
        if loss < self.best - self.cfg.min_delta {
            self.best = loss;
            self.wait = 0;
            return false;
        }
        self.wait += 1;
        if self.wait >= self.cfg.patience {
            self.wait = 0;
            let reduced = (self.lr * self.cfg.factor).max(self.cfg.min_lr);
            if reduced < self.lr {
                self.lr = reduced;
                return true;
            }
        }
        false
    }
}

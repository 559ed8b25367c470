//! Config files and flag overrides.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{ArgAction, Args, ValueEnum};
use ordcollab_core::augment::{MixupConfig, MixupMode};
use ordcollab_core::corpus::{FeatureKind, Mapping, Modality};
use ordcollab_core::eval::{ExperimentConfig, ModelKind};
use ordcollab_core::nn::LossKind;
use serde::de::DeserializeOwned;

pub const SEED_ENV: &str = "ORDCOLLAB_SEED";

/// Bad user input: exits with status 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

/// Reads a JSON config; reports whether it set `seed` explicitly.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<(T, bool)> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
    let has_seed = value.get("seed").is_some();
    let parsed = serde_json::from_value(value).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
    Ok((parsed, has_seed))
}

/// Flag beats config file, config file beats `ORDCOLLAB_SEED`, which beats 0.
pub fn resolve_seed(flag: Option<u64>, config_seed: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(config_seed) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| invalid(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MixupFlag {
    Off,
    Full,
    Limited,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Experiment config (JSON); flags below override its values.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Corpus directory with segments.csv and adjudication.csv.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub modality: Option<Modality>,
    #[arg(long)]
    pub mapping: Option<Mapping>,
    #[arg(long)]
    pub features: Option<FeatureKind>,
    #[arg(long)]
    pub loss: Option<LossKind>,
    /// Inverse-frequency class weights.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub balancing: Option<bool>,
    #[arg(long, value_enum)]
    pub mixup: Option<MixupFlag>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Mixup samples per class.
    #[arg(long = "n")]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub min_lr: Option<f64>,
    /// Hidden layer widths, e.g. 500,500,500.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Predict the majority training class instead of training a network.
    #[arg(long)]
    pub baseline: bool,
    /// Keep this group in every training set (repeatable).
    #[arg(long = "pin")]
    pub pin: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let (mut cfg, config_seed) = match &self.config {
            Some(p) => {
                let (cfg, has_seed): (ExperimentConfig, bool) = load_json(p)?;
                let seed = has_seed.then_some(cfg.seed);
                (cfg, seed)
            }
            None => (ExperimentConfig::default(), None),
        };
        if let Some(c) = &self.corpus {
            cfg.corpus = Some(c.clone());
        }
        if let Some(m) = self.modality {
            cfg.modality = m;
        }
        if let Some(m) = self.mapping {
            cfg.mapping = m;
        }
        if let Some(f) = self.features {
            cfg.feature_kind = f;
        }
        if let Some(l) = self.loss {
            cfg.train.loss = l;
        }
        if let Some(b) = self.balancing {
            cfg.train.class_balancing = b;
        }
        match self.mixup {
            Some(MixupFlag::Off) => cfg.mixup = None,
            Some(MixupFlag::Full) => cfg.mixup.get_or_insert_with(MixupConfig::default).mode = MixupMode::Full,
            Some(MixupFlag::Limited) => cfg.mixup.get_or_insert_with(MixupConfig::default).mode = MixupMode::Limited,
            None => {}
        }
        if self.tau.is_some() || self.n_per_class.is_some() || self.alpha.is_some() {
            let m = cfg.mixup.as_mut().ok_or_else(|| {
                invalid(
                    "--tau, --n and --alpha need Mixup enabled (--mixup full|limited or a mixup section in the config)",
                )
            })?;
            if let Some(t) = self.tau {
                m.tau = t;
            }
            if let Some(n) = self.n_per_class {
                m.n_per_class = n;
            }
            if let Some(a) = self.alpha {
                m.alpha = a;
            }
        }
        if let Some(e) = self.epochs {
            cfg.train.epochs = e;
        }
        if let Some(p) = self.patience {
            cfg.train.plateau.patience = p;
        }
        if let Some(m) = self.min_lr {
            cfg.train.plateau.min_lr = m;
        }
        if let Some(h) = &self.hidden {
            cfg.hidden_widths = h[..]
                .try_into()
                .map_err(|_| invalid(format!("--hidden takes three widths, got {}", h.len())))?;
        }
        if self.baseline {
            cfg.model = ModelKind::MajorityBaseline;
        }
        cfg.pinned_groups.extend(self.pin.iter().cloned());
        cfg.pinned_groups.sort();
        cfg.pinned_groups.dedup();
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        cfg.seed = resolve_seed(self.seed, config_seed)?;
        cfg.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(cfg)
    }
}

pub fn corpus_path(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.corpus
        .clone()
        .ok_or_else(|| invalid("no corpus given (use --corpus or set \"corpus\" in the config)"))
}

pub fn output_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.output_dir
        .clone()
        .ok_or_else(|| invalid("no output directory given (use --out or set \"output_dir\" in the config)"))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

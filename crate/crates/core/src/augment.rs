//! Controlled Mixup oversampling.
//!
//! New samples for a primary class are convex combinations
//! `λ·x_primary + (1-λ)·x_neighbour` (labels likewise) where the partner comes
//! from one of the two neighbouring classes of the ordinal scale and `λ` is
//! drawn from `Beta(α, α)` restricted to `[τ, 1]`. With `τ > 0.5` every
//! synthetic label stays dominated by its primary class.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, FeatureSample, LevelA, OrdinalLabelScheme, Provenance, NUM_CLASSES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixupMode {
    /// Train on `n` synthetic samples per class only.
    Full,
    /// Keep the originals and top each class up to `n` samples.
    Limited,
}

impl fmt::Display for MixupMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MixupMode::Full => "full",
            MixupMode::Limited => "limited",
        })
    }
}

impl FromStr for MixupMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(MixupMode::Full),
            "limited" => Ok(MixupMode::Limited),
            other => Err(format!("unknown mixup mode {other:?} (expected full or limited)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixupConfig {
    /// Shape of the symmetric Beta distribution.
    pub alpha: f64,
    /// Lower bound on λ.
    pub tau: f64,
    /// Target number of samples per class.
    pub n_per_class: usize,
    pub mode: MixupMode,
}

impl Default for MixupConfig {
    fn default() -> Self {
        MixupConfig {
            alpha: 0.4,
            tau: 0.75,
            n_per_class: 200,
            mode: MixupMode::Full,
        }
    }
}

impl MixupConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mixup alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::InvalidConfig(format!(
                "mixup tau must lie in [0, 1), got {}",
                self.tau
            )));
        }
        if self.n_per_class < 1 {
            return Err(Error::InvalidConfig("mixup n_per_class must be at least 1".into()));
        }
        Ok(())
    }
}

/// Draws λ from `Beta(alpha, alpha)` conditioned on `λ >= tau`.
#[derive(Debug, Clone, Copy)]
pub struct LambdaSampler {
    beta: Beta<f64>,
    tau: f64,
}

impl LambdaSampler {
    pub fn new(alpha: f64, tau: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::InvalidConfig(format!("tau must lie in [0, 1), got {tau}")));
        }
        let beta =
            Beta::new(alpha, alpha).map_err(|e| Error::InvalidConfig(format!("invalid Beta shape {alpha}: {e}")))?;
        Ok(LambdaSampler { beta, tau })
    }
}

impl Distribution<f64> for LambdaSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let lambda = self.beta.sample(rng);
            if lambda >= self.tau {
                return lambda;
            }
        }
    }
}

/// One draw of λ; see [`LambdaSampler`].
pub fn sample_lambda<R: Rng + ?Sized>(alpha: f64, tau: f64, rng: &mut R) -> Result<f64> {
    Ok(LambdaSampler::new(alpha, tau)?.sample(rng))
}

/// Convex combination of two samples, `λ` weighting the first.
pub fn mix_samples(first: &FeatureSample, second: &FeatureSample, lambda: f64) -> Result<FeatureSample> {
    if first.features.len() != second.features.len() {
        return Err(Error::DimensionMismatch {
            expected: first.features.len(),
            found: second.features.len(),
        });
    }
    if first.label.len() != second.label.len() {
        return Err(Error::DimensionMismatch {
            expected: first.label.len(),
            found: second.label.len(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let mix =
        |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect() };
    let mut sources = first.source_ids();
    sources.extend(second.source_ids());
    sources.sort_unstable();
    sources.dedup();
    Ok(FeatureSample {
        features: mix(&first.features, &second.features),
        label: mix(&first.label, &second.label),
        provenance: Provenance::Mixup {
            sources,
            lambda,
            primary_class: first.class(),
        },
    })
}

/// Neighbour classes a primary class is paired with.
pub fn adjacent_classes(class: LevelA, scheme: &OrdinalLabelScheme) -> [LevelA; 2] {
    scheme.adjacency(class)
}

/// Generates class-balanced training data with controlled Mixup.
///
/// For each class, `n_per_class` samples (Full) or `n_per_class - m_c`
/// samples (Limited, `m_c` the class's original count) are synthesised. Each
/// draw picks a primary sample uniformly from the class, one of the two
/// neighbour classes uniformly, a partner uniformly from that class, and
/// `λ ∈ [τ, 1]`. Classes are taken from the dominant label entry.
pub fn controlled_mixup<R: Rng + ?Sized>(train: &Dataset, cfg: &MixupConfig, rng: &mut R) -> Result<Dataset> {
    cfg.validate()?;
    let sampler = LambdaSampler::new(cfg.alpha, cfg.tau)?;

    let mut pools: [Vec<usize>; NUM_CLASSES] = Default::default();
    for (i, s) in train.samples.iter().enumerate() {
        pools[s.class().index()].push(i);
    }
    for class in LevelA::ALL {
        if pools[class.index()].is_empty() {
            return Err(Error::EmptyClass(class));
        }
    }

    let mut out = match cfg.mode {
        MixupMode::Full => Vec::with_capacity(cfg.n_per_class * NUM_CLASSES),
        MixupMode::Limited => train.samples.clone(),
    };
    for class in LevelA::ALL {
        let pool = &pools[class.index()];
        let wanted = match cfg.mode {
            MixupMode::Full => cfg.n_per_class,
            MixupMode::Limited => cfg.n_per_class.saturating_sub(pool.len()),
        };
        let neighbours = adjacent_classes(class, &train.scheme);
        for _ in 0..wanted {
            let primary = &train.samples[pool[rng.random_range(0..pool.len())]];
            let partner_pool = &pools[neighbours[rng.random_range(0..2)].index()];
            let partner = &train.samples[partner_pool[rng.random_range(0..partner_pool.len())]];
            let lambda = sampler.sample(rng);
            out.push(mix_samples(primary, partner, lambda)?);
        }
    }
    Dataset::new(out, train.feature_kind)
}

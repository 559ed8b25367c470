//! Shared fixtures for the benchmarks in `benches/`.

use ordcollab_core::corpus::{build_dataset, Dataset, FeatureKind, Mapping, TaskRecording};
use ordcollab_core::synth::{generate_corpus, SynthConfig};

/// Default synthetic corpus for `seed`.
pub fn corpus(seed: u64) -> Vec<TaskRecording> {
    generate_corpus(&SynthConfig {
        seed,
        ..SynthConfig::default()
    })
    .expect("default synth config is valid")
    .tasks
}

/// One B2 sample per coder and task (351 samples for the default corpus).
pub fn b2_dataset(seed: u64) -> Dataset {
    build_dataset(&corpus(seed), FeatureKind::B2, Mapping::B2ToA).expect("synthetic corpus featurizes")
}

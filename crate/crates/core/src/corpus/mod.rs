//! Coded annotation timelines and their histogram features.

mod dataset;
mod features;
mod io;
mod scheme;
mod timeline;

pub use dataset::{build_dataset, Dataset, FeatureKind, FeatureSample, Mapping, Provenance, SampleId, SIMPLEX_TOL};
pub use features::{
    b2_counts, b2_histogram, b2_histogram_pooled, c_counts, c_histogram, grid_points, normalize, C_GRID_STEP,
};
pub use io::{parse_corpus, parse_corpus_files, write_corpus, ADJUDICATION_FILE, SEGMENTS_FILE};
pub use scheme::{Code, CodeScheme, Level, LevelA, OrdinalLabelScheme, B2_SCHEME, C_SCHEME, NUM_CLASSES};
pub use timeline::{majority_label, Modality, Segment, TaskRecording, B2_SEGMENT_SECONDS};

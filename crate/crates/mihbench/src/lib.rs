//! Building blocks for a multi-image object hallucination benchmark.
//!
//! Three yes/no tasks are supported:
//!
//! * **existence**: is an object present in every one of several images;
//! * **count**: do two images hold the same number of an object;
//! * **identity**: do several views all show the same object instance.
//!
//! Datasets are assembled from structured annotations (per-image object
//! confidences and counts, multi-view groups with precomputed visual
//! similarity), model answers are parsed into yes/no, and predictions are
//! scored with accuracy, precision, recall, F1 and yes-ratio.

mod annotation;
mod answer;
mod correlation;
mod count;
mod error;
mod existence;
mod identity;
mod instance;
pub mod io;
mod metrics;
pub mod seed;
mod similarity;
mod sweep;
pub mod synthetic;

pub use annotation::{
    AnnotationPool, AnnotationRecord, ObjectAnnotation, MAX_COUNTABLE, PRESENCE_THRESHOLD,
};
pub use answer::{parse_answer, ParsedAnswer, PredictionRecord};
pub use correlation::{
    correlation_analysis, hallucination_flags, pearson_binary, CorrelationReport,
    HallucinationFlags, JointTable, Y_DEFINITION,
};
pub use count::{build_count_set, build_count_with, CountComposition};
pub use error::{KitError, Result};
pub use existence::{build_existence, build_existence_set, ExistenceOptions, NegativePlacement};
pub use identity::{
    build_identity, build_identity_set, IdentityInputs, IdentityOptions, ViewGroup,
};
pub use instance::{
    article, label_count, label_existence, rederive_gold, Answer, ExistenceSubtype, InstanceMeta,
    QAInstance, TaskKind, SCHEMA_VERSION,
};
pub use metrics::{compute_metrics, macro_average, score_by_id, EvalReport, ReportRow};
pub use similarity::SimilarityMatrix;
pub use sweep::{
    negative_ratio, sweep_image_count, sweep_negative_position, sweep_negative_ratio,
    DEFAULT_SWEEP_LENGTHS,
};

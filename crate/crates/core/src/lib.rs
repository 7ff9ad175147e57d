//! Core library for the GRACE decision pipeline.
//!
//! A scene is first routed by an uncertainty classifier trained on weak labels
//! derived from annotator disagreement. Scenes where annotators are expected to
//! agree use probability-weighted LLM appropriateness scores directly. Uncertain
//! scenes go through a conditional autoencoder that either corrects the LLM
//! scores using a human explanation, or generates an explanation for scores a
//! human has given.
//!
//! Module map:
//!
//! * [`data`]: typed dataset model, CSV ingestion, grouped splitting, synthetic data.
//! * [`uncertainty`]: variance features, K-means++ weak labels, certainty classifiers.
//! * [`llm`]: prompt rendering, provider abstraction, cached scoring, explanation labeling.
//! * [`net`]: the conditional autoencoder, its baselines, and the training loop.
//! * [`eval`]: regression metrics, nested cross-validation, pipeline routing, reports.

pub mod data;
pub mod eval;
pub mod llm;
pub mod net;
pub mod seed;
pub mod uncertainty;

pub use data::{
    AnnotationRecord, Dataset, DatasetSchema, ExplanationCategory, ExplanationVector, RobotType,
    SceneRecord, ScoreVector,
};

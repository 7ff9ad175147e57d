//! Regression metrics, aleatoric uncertainty, nested cross-validation of the
//! certainty classifiers, pipeline routing and report tables.

mod aleatoric;
mod cv;
mod pipeline;
mod regression;
mod report;

use thiserror::Error;

pub use aleatoric::{aleatoric_uncertainty, scene_log_variance, VARIANCE_FLOOR};
pub use cv::{fit_selected, nested_cv, FoldReport, LeakageAudit, NestedCvConfig, NestedCvReport};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineInput, RoutedOutput};
pub use regression::{
    ccc, cluster_reports, pcc, regression_report, rmse, CorrelationMode, RegressionReport,
};
pub use report::{emit_report, render_table, write_report_csv, ReportRow, REPORT_COLUMNS};

use crate::data::DataError;
use crate::net::NetError;
use crate::uncertainty::UncertaintyError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty input")]
    EmptyInput,
    #[error("{what}: expected {expected}, found {found}")]
    ArityMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("series is constant; correlation undefined")]
    ConstantSeries,
    #[error("scene `{scene_id}` has {count} annotation(s); at least 2 are needed")]
    InsufficientAnnotations { scene_id: String, count: usize },
    #[error("pipeline needs a {0} model")]
    ModelMissing(&'static str),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;

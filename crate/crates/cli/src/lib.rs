//! Batch evaluation: task and prediction ingest, the module pipelines and
//! report output.

pub mod app;
pub mod data;
pub mod report;
pub mod suite;

pub use data::{load_predictions, load_tasks, Module, PredictionRecord, Task, TaskRecord};
pub use report::{Aggregates, Report, Row};
pub use suite::{eval_suite, ground_truth_predictions, pipeline, sensitivity_suite, Options};

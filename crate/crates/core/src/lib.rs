//! Core library for the anomaly detection service: time-series ingestion,
//! the detector suite, chi-square p-value scoring, benchmark evaluation,
//! request validation, the detection pipeline, and the LLM-assisted
//! failure-mode modeler.

pub mod detectors;
pub mod evaluation;
pub mod modeler;
pub mod pipeline;
pub mod request;
pub mod scoring;
pub mod tsdata;

pub use pipeline::RunControl;

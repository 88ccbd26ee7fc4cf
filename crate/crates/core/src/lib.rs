//! Local quasi-stationarity analysis of non-stationary MIMO channels.
//!
//! The crate covers the whole chain from a measured (or synthetic) channel
//! transfer function tensor to LQS distances: preprocessing, multitaper
//! GLSF estimation, pairwise non-stationarity measures and scenario
//! averaging.

pub mod channel;
pub mod error;
pub mod linalg;
pub mod lqs;
pub mod measures;
pub mod pipeline;
pub mod spectral;
pub mod synth;

pub use channel::{ChannelTensor, PhaseOffsets, Polarization, SamplingGrid, SubArraySelection};
pub use error::{Error, Result};
pub use lqs::{average_measure, du_check, extract_lqs, measure_correlation, DuInputs, DuReport, LqsResult, MeasureCurve};
pub use measures::{EstimatorConfig, MeasureKind, MeasurePair};
pub use spectral::{DpssBank, GlsfEstimate, GlsfParams};
pub use synth::{generate, ground_truth_psd, GridSpec, Scene, ScattererCluster, SpeedSpec, SteeringModel};
pub use pipeline::{analyze_setup, AnalysisConfig, SetupAnalysis};

//! Quality screening for organ-like 3-D shapes.
//!
//! The pipeline: load or synthesise a triangle mesh ([`mesh_io`], [`corpus`]),
//! sample a point cloud from its surface ([`sampler`]), reduce the cloud to 14
//! geometric features ([`features`]), train classical classifiers on labelled
//! rows ([`classifiers`]), score agreement with a reference rater
//! ([`metrics`]) and attribute predictions to features with exact Shapley
//! values ([`explain`]). [`cli`] wires the stages to files.

pub mod classifiers;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod explain;
pub mod features;
pub mod mesh_io;
pub mod metrics;
pub mod rng;
pub mod sampler;

pub use classifiers::{fit, load_model, predict, predict_batch, save_model, ModelKind, Prediction, TrainedModel};
pub use corpus::QualityLabel;
pub use error::{Error, Result};
pub use features::{extract_features, FeatureVector, FEATURE_NAMES, N_FEATURES};
pub use mesh_io::{PointCloud, TriangleMesh};

//! Local linear explanations of black-box models, with indices measuring how
//! stable those explanations are across repeated runs.

pub mod blackbox;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod explainer;
pub mod locality;
pub mod model;
pub mod report;
pub mod sampling;
pub mod selection;
pub mod stability;
pub mod sweep;
pub mod synth;
pub mod wridge;

pub use blackbox::{parse_predictor, predict, Builtin, ExternalOptions, ExternalPredictor, Predictor};
pub use config::ExplainerConfig;
pub use data::{load_dataset, Dataset, FeatureStats};
pub use error::{Error, ErrorClass, Result};
pub use explainer::{explain_once, stability_run, Explainer, Explanation, SeedMode};
pub use model::{LocalModel, StabilityReport};
pub use sampling::infer_feature_stats;
pub use stability::{csi, vsi, ModelEnsemble};

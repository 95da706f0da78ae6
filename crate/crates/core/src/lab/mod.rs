//! Experiment orchestration: config ingestion, run dispatch, CSV artifacts,
//! refinement studies.

pub mod config;
pub mod csv;
pub mod perturbation;
pub mod refinement;
pub mod runner;

pub use config::{load_config, load_config_str, ExperimentConfig, ExperimentKind};
pub use perturbation::{Perturbation, PerturbationKind};
pub use refinement::{refinement_study, ConvergenceTable};
pub use runner::{run_experiment, RunOutcome};

//! Simulation of energy-capped routing on a multiple-access channel under
//! leaky-bucket adversaries.

pub mod adversary;
pub mod algorithms;
pub mod bits;
pub mod config;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod model;
pub mod rational;
pub mod runner;
pub mod scenario;

pub use config::{AdversaryId, AlgorithmId, AlgorithmParams, EngineConfig, ScriptedInjection};
pub use error::{ConfigError, EngineError, SimError};
pub use runner::{probe_horizons, run_simulation};

//! Discrete-event simulator for hierarchical network data analytics.
//!
//! A root NWDAF trains models and ships them to leaf NWDAFs collocated with
//! network functions; leaves cache models in a capacity-limited store and
//! serve inference locally. Two flat baselines (one monolithic NWDAF, or one
//! NWDAF per group of NFs) are simulated on the same engine for comparison.

pub mod engine;
pub mod error;
pub mod framework;
pub mod nodes;
pub mod predictor;
pub mod protocol;
pub mod scenario;
pub mod store;
pub mod topology;
pub mod usecase;

pub use engine::{transfer_delay, Engine, LinkModel, Links, SimRng};
pub use error::{ConfigError, DecodeError, MetricsError, PredictorError, ScenarioError, SimError};
pub use framework::{registry, Framework, FrameworkRegistry};
pub use protocol::{decode_message, encode_message, Message, ModelDescriptor, ModelKind, ModelTypeId, NodeId};
pub use scenario::{run_experiment, run_experiment_logged, sweep, Axis, MetricsReport, ScenarioConfig};
pub use store::{InsertOutcome, ModelStore};

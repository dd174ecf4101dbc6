//! Cooperative tiling of the input space by Context agents, each owning an
//! axis-aligned hypercube and an online linear classifier. Together the agents
//! draw non-linear decision boundaries out of purely linear local models.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which the benchmark harness uses.

pub mod agents;
pub mod datasets;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod online_linear;
pub mod scalar;

pub use agents::{ContextAgent, EngineConfig, Normalization, PerceptState};
pub use datasets::{gen_circles, gen_linear, gen_moons, Dataset, DatasetKind, GeneratorSpec, Scaler};
pub use engine::{CycleReport, Engine, NcsEvent, NcsKind, Resolution, CLASS_UNIVERSE};
pub use error::{Error, Result};
pub use geometry::{Hypercube, PushOutcome, DEFAULT_EPSILON_SCALE};
pub use online_linear::{LinearModel, LinearParams, ModelKind, Penalty};
pub use scalar::Scalar;

pub type Hypercube64 = Hypercube<f64>;
pub type Hypercube32 = Hypercube<f32>;
pub type LinearModel64 = LinearModel<f64>;
pub type LinearModel32 = LinearModel<f32>;
pub type LinearParams64 = LinearParams<f64>;
pub type EngineConfig64 = EngineConfig<f64>;
pub type EngineConfig32 = EngineConfig<f32>;
pub type Engine64 = Engine<f64>;
pub type Engine32 = Engine<f32>;
pub type Dataset64 = Dataset<f64>;

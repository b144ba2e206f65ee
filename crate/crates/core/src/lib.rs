//! Multi-pursuer single-evader simulation with frontier-based exploration,
//! A* guidance and a rule-based pursuit baseline.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The
//! unsuffixed aliases at the crate root fix `f64`, the `F32` ones fix `f32`.

pub mod allocation;
pub mod belief;
pub mod config;
pub mod controllers;
pub mod error;
pub mod fsm;
pub mod geometry;
pub mod grid;
pub mod physics;
pub mod planner;
pub mod reward;
pub mod rng;
pub mod runner;
pub mod scalar;
pub mod sensing;
pub mod session;
pub mod world;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec2 = geometry::Vec2<f64>;
pub type ScenarioConfig = config::ScenarioConfig<f64>;
pub type WorldState = world::WorldState<f64>;
pub type AgentState = world::AgentState<f64>;
pub type BeliefMap = belief::BeliefMap<f64>;
pub type KinematicAction = physics::KinematicAction<f64>;
pub type AllocationRound = allocation::AllocationRound<f64>;
pub type Episode = runner::Episode<f64>;
pub type EnvSession = session::EnvSession<f64>;

pub type Vec2F32 = geometry::Vec2<f32>;
pub type ScenarioConfigF32 = config::ScenarioConfig<f32>;
pub type WorldStateF32 = world::WorldState<f32>;
pub type AgentStateF32 = world::AgentState<f32>;
pub type BeliefMapF32 = belief::BeliefMap<f32>;
pub type KinematicActionF32 = physics::KinematicAction<f32>;
pub type AllocationRoundF32 = allocation::AllocationRound<f32>;
pub type EpisodeF32 = runner::Episode<f32>;
pub type EnvSessionF32 = session::EnvSession<f32>;

//! Flat-array reset/step interface for external trainers.
//!
//! Only numbers and schema strings cross this boundary: observations are one
//! row-major `n_pursuers × obs_dim` buffer, actions are `n_pursuers × 2`
//! values `(dθ, dv)`. Out-of-box actions are clamped exactly as the native
//! runner clamps them. The evader and the allocator stay inside.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::physics::{KinematicAction, DTHETA_LIMIT, DV_LIMIT};
use crate::reward::{observation_dim, OBSERVATION_SCHEMA};
use crate::runner::{Episode, RunOptions};
use crate::scalar::Real;

pub const ENV_SCHEMA: &str = "env-v1";
pub const ACTION_DIM: usize = 2;
/// Order of the per-agent reward terms in [`StepInfo::breakdown`].
pub const REWARD_TERMS: [&str; 4] = ["mission", "safety", "guide", "explore"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvMetadata {
    pub schema: String,
    pub obs_schema: String,
    pub n_pursuers: usize,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub action_low: [f64; ACTION_DIM],
    pub action_high: [f64; ACTION_DIM],
    pub reward_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub step: u32,
    /// `n_pursuers × REWARD_TERMS.len()`, row-major.
    pub breakdown: Vec<f64>,
    pub modes: Vec<String>,
    pub captured: bool,
    pub clean: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvStep {
    pub observations: Vec<f64>,
    /// Total reward per pursuer.
    pub rewards: Vec<f64>,
    pub done: bool,
    pub info: StepInfo,
}

/// One handle drives one episode at a time.
pub struct EnvSession<R: Real> {
    config: ScenarioConfig<R>,
    options: RunOptions,
    episode: Option<Episode<R>>,
}

impl<R: Real> EnvSession<R> {
    pub fn new(config: ScenarioConfig<R>, options: RunOptions) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, options, episode: None })
    }

    pub fn metadata(&self) -> EnvMetadata {
        let n = self.config.agents.n_pursuers;
        EnvMetadata {
            schema: ENV_SCHEMA.into(),
            obs_schema: OBSERVATION_SCHEMA.into(),
            n_pursuers: n,
            obs_dim: observation_dim(n),
            action_dim: ACTION_DIM,
            action_low: [-DTHETA_LIMIT, -DV_LIMIT],
            action_high: [DTHETA_LIMIT, DV_LIMIT],
            reward_terms: REWARD_TERMS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn config(&self) -> &ScenarioConfig<R> {
        &self.config
    }

    /// Starts a fresh episode, dropping any active one.
    pub fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let ep = Episode::reset(self.config.clone(), seed, self.options.clone())?;
        let obs = flat_observations(&ep);
        self.episode = Some(ep);
        Ok(obs)
    }

    pub fn step(&mut self, actions: &[f64]) -> Result<EnvStep> {
        let ep = self.episode.as_mut().ok_or(Error::NotStarted)?;
        let n = ep.n_pursuers();
        if actions.len() != n * ACTION_DIM {
            return Err(Error::ActionCount { expected: n * ACTION_DIM, got: actions.len() });
        }
        if let Some(i) = actions.iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFiniteAction { index: i });
        }
        let kin: Vec<KinematicAction<R>> =
            actions.chunks(ACTION_DIM).map(|a| KinematicAction::new(R::lit(a[0]), R::lit(a[1]))).collect();
        let modes = ep.view().modes.iter().map(|m| m.label().to_string()).collect();
        let report = ep.advance(&kin)?;
        let breakdown = report
            .rewards
            .iter()
            .flat_map(|r| [r.mission, r.safety, r.guide, r.explore].map(|v| v.as_f64()))
            .collect();
        Ok(EnvStep {
            observations: flat_observations(ep),
            rewards: report.rewards.iter().map(|r| r.total.as_f64()).collect(),
            done: report.done,
            info: StepInfo { step: ep.world().step, breakdown, modes, captured: report.captured, clean: report.clean },
        })
    }

    /// Active episode, e.g. to read its trajectory log.
    pub fn episode(&self) -> Option<&Episode<R>> {
        self.episode.as_ref()
    }

    pub fn close(&mut self) {
        self.episode = None;
    }
}

/// Terminal states are not observed; they read as zeros.
fn flat_observations<R: Real>(ep: &Episode<R>) -> Vec<f64> {
    if ep.is_done() {
        return vec![0.0; ep.n_pursuers() * observation_dim(ep.n_pursuers())];
    }
    ep.view().observations.iter().flat_map(|o| o.values.iter().map(|v| v.as_f64())).collect()
}

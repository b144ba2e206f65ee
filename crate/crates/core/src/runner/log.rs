//! Line-delimited JSON trajectory log. Every line is one self-describing
//! record; wall-clock timing is deliberately absent so that logs of the same
//! (config, seed) are byte-identical.

use serde::{Deserialize, Serialize};

use crate::allocation::AllocationRound;
use crate::error::{Error, Result};
use crate::fsm::FsmEvent;
use crate::geometry::Vec2;
use crate::physics::{CollisionFlags, KinematicAction};
use crate::reward::RewardBreakdown;
use crate::scalar::Real;

pub const LOG_SCHEMA: &str = "trajectory-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[serde(bound(deserialize = "R: Real"))]
pub enum LogRecord<R> {
    Header(HeaderRecord),
    Event(EventRecord<R>),
    Alloc(AllocRecord<R>),
    Agent(AgentRecord<R>),
    World(WorldRecord<R>),
    Summary(SummaryRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderRecord {
    pub schema: String,
    pub obs_schema: String,
    pub scalar: String,
    pub seed: u64,
    pub n_pursuers: usize,
    pub obs_dim: usize,
    pub alloc: String,
    pub explore_only: bool,
    pub stop_at_coverage: Option<f64>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: Real"))]
pub struct EventRecord<R> {
    pub step: u32,
    pub agent: usize,
    pub event: FsmEvent<R>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: Real"))]
pub struct AllocRecord<R> {
    pub step: u32,
    pub requesters: Vec<usize>,
    pub candidates: Vec<Vec2<R>>,
    pub relaxed: Vec<bool>,
    pub suppressed: Vec<(Vec2<R>, f64)>,
    /// `None` marks an unreachable pair.
    pub cost_matrix: Vec<Vec<Option<R>>>,
    pub assignment: Vec<Option<Vec2<R>>>,
}

impl<R: Real> AllocRecord<R> {
    pub fn from_round(step: u32, round: &AllocationRound<R>) -> Self {
        Self {
            step,
            requesters: round.requesters.clone(),
            candidates: round.candidates.clone(),
            relaxed: round.relaxed.clone(),
            suppressed: round.suppressed.clone(),
            cost_matrix: round
                .cost_matrix
                .iter()
                .map(|row| row.iter().map(|c| c.is_finite().then_some(*c)).collect())
                .collect(),
            assignment: round.assignment.clone(),
        }
    }
}

/// One pursuer's transition from step `step` to `step + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: Real"))]
pub struct AgentRecord<R> {
    pub step: u32,
    pub agent: usize,
    /// Pose before the action.
    pub position: Vec2<R>,
    pub heading: R,
    pub speed: R,
    pub mode: String,
    pub goal: Option<Vec2<R>>,
    pub v_guide: Vec2<R>,
    /// Action as applied, after clamping.
    pub action: [R; 2],
    pub reward: RewardBreakdown<R>,
    /// Geodesic cost to `goal` before and after the step (Φ = −cost).
    pub cost_prev: Option<R>,
    pub cost_next: Option<R>,
    pub goal_changed: bool,
    /// Potential-shaping part of `reward.guide`.
    pub r_pot: R,
    pub flags: CollisionFlags,
    pub new_cells: usize,
}

impl<R: Real> AgentRecord<R> {
    pub fn kinematic_action(&self) -> KinematicAction<R> {
        KinematicAction::new(self.action[0], self.action[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: Real"))]
pub struct WorldRecord<R> {
    /// State index after the step.
    pub step: u32,
    pub evader_position: Vec2<R>,
    pub evader_heading: R,
    pub evader_speed: R,
    pub visible: bool,
    pub lkp: Option<Vec2<R>>,
    pub coverage: f64,
    pub captured: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub success: bool,
    pub capture_step: Option<u32>,
    pub clean: bool,
    pub steps: u32,
    pub final_coverage: f64,
    pub collision_steps: u32,
}

pub fn to_line<R: Real>(record: &LogRecord<R>) -> String {
    serde_json::to_string(record).expect("log records always serialize")
}

pub fn parse_log<R: Real>(text: &str) -> Result<Vec<LogRecord<R>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Log(format!("line {}: {e}", i + 1))))
        .collect()
}

/// Per-step pursuer actions recorded in a log, ordered by step then agent.
pub fn actions_from_log<R: Real>(records: &[LogRecord<R>]) -> Result<Vec<Vec<KinematicAction<R>>>> {
    let mut steps: Vec<Vec<KinematicAction<R>>> = Vec::new();
    for r in records {
        if let LogRecord::Agent(a) = r {
            let s = a.step as usize;
            if s > steps.len() {
                return Err(Error::Log(format!("agent record for step {s} arrives before step {}", steps.len())));
            }
            if s == steps.len() {
                steps.push(Vec::new());
            }
            if a.agent != steps[s].len() {
                return Err(Error::Log(format!("step {s}: agent {} out of order", a.agent)));
            }
            steps[s].push(a.kinematic_action());
        }
    }
    Ok(steps)
}

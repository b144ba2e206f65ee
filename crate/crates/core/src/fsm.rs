//! Per-agent mode machine: Pursuit versus Exploration, and the exploration
//! sub-states (await assignment, approach a locked goal, sweep around it,
//! patrol when nothing is left to explore).

use serde::{Deserialize, Serialize};

use crate::belief::{BeliefMap, CellState};
use crate::config::CoordinationConfig;
use crate::geometry::Vec2;
use crate::grid::Cell;
use crate::scalar::Real;
use crate::sensing::{LkpRecord, TargetDetection};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum ExploreState<R> {
    AwaitingAssignment,
    Approach { goal: Vec2<R> },
    /// Clears Unknown cells around `anchor` (the locked goal).
    Sweep { anchor: Vec2<R>, steps: u32 },
    /// No frontier was available; wanders to a stale cell without a lock.
    Patrol { goal: Vec2<R> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AgentMode<R> {
    Pursuit,
    Exploration(ExploreState<R>),
}

impl<R: Real> AgentMode<R> {
    pub fn initial() -> Self {
        Self::Exploration(ExploreState::AwaitingAssignment)
    }

    pub fn is_pursuit(&self) -> bool {
        matches!(self, Self::Pursuit)
    }

    /// Goal held under a lock, if any.
    pub fn locked_goal(&self) -> Option<Vec2<R>> {
        match self {
            Self::Exploration(ExploreState::Approach { goal }) => Some(*goal),
            Self::Exploration(ExploreState::Sweep { anchor, .. }) => Some(*anchor),
            _ => None,
        }
    }

    pub fn awaiting_goal(&self) -> bool {
        matches!(self, Self::Exploration(ExploreState::AwaitingAssignment | ExploreState::Patrol { .. }))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Pursuit => "pursuit",
            Self::Exploration(ExploreState::AwaitingAssignment) => "awaiting",
            Self::Exploration(ExploreState::Approach { .. }) => "approach",
            Self::Exploration(ExploreState::Sweep { .. }) => "sweep",
            Self::Exploration(ExploreState::Patrol { .. }) => "patrol",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnlockReason {
    SweepComplete,
    SweepTimeout,
    Pursuit,
    Unreachable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum FsmEvent<R> {
    EnterPursuit,
    EnterExploration,
    RequestGoal,
    GoalLocked { goal: Vec2<R> },
    GoalUnlocked { goal: Vec2<R>, reason: UnlockReason },
    SweepStarted { anchor: Vec2<R> },
    PatrolStarted { goal: Vec2<R> },
}

/// One step of the machine. `target_known` is "visible or LKP valid";
/// `sweepable` filters which Unknown cells a sweep may still target.
pub fn transition<R: Real>(
    mode: AgentMode<R>,
    target_known: bool,
    position: Vec2<R>,
    belief: &BeliefMap<R>,
    params: &CoordinationConfig<R>,
    sweepable: impl Fn(Cell) -> bool,
) -> (AgentMode<R>, Vec<FsmEvent<R>>) {
    let mut events = Vec::new();
    if target_known {
        if !mode.is_pursuit() {
            events.push(FsmEvent::EnterPursuit);
            if let Some(goal) = mode.locked_goal() {
                events.push(FsmEvent::GoalUnlocked { goal, reason: UnlockReason::Pursuit });
            }
        }
        return (AgentMode::Pursuit, events);
    }
    let sub = match mode {
        AgentMode::Pursuit => {
            events.push(FsmEvent::EnterExploration);
            ExploreState::AwaitingAssignment
        }
        AgentMode::Exploration(s) => s,
    };
    let next = match sub {
        ExploreState::Approach { goal } if position.distance(goal) < params.d_approach_m => {
            events.push(FsmEvent::SweepStarted { anchor: goal });
            ExploreState::Sweep { anchor: goal, steps: 0 }
        }
        ExploreState::Sweep { anchor, steps } => {
            let done = sweep_goal(anchor, params.sweep_radius_m, belief, position, &sweepable).is_none();
            if done || steps >= params.sweep_max_steps {
                let reason = if done { UnlockReason::SweepComplete } else { UnlockReason::SweepTimeout };
                events.push(FsmEvent::GoalUnlocked { goal: anchor, reason });
                ExploreState::AwaitingAssignment
            } else {
                ExploreState::Sweep { anchor, steps: steps + 1 }
            }
        }
        other => other,
    };
    if matches!(next, ExploreState::AwaitingAssignment | ExploreState::Patrol { .. }) {
        events.push(FsmEvent::RequestGoal);
    }
    (AgentMode::Exploration(next), events)
}

/// Applies an allocator answer to an agent that requested a goal.
pub fn assign_goal<R: Real>(mode: AgentMode<R>, goal: Vec2<R>) -> (AgentMode<R>, FsmEvent<R>) {
    debug_assert!(mode.awaiting_goal());
    (AgentMode::Exploration(ExploreState::Approach { goal }), FsmEvent::GoalLocked { goal })
}

/// Falls back to patrolling when the allocator had nothing to give.
pub fn start_patrol<R: Real>(goal: Vec2<R>) -> (AgentMode<R>, FsmEvent<R>) {
    (AgentMode::Exploration(ExploreState::Patrol { goal }), FsmEvent::PatrolStarted { goal })
}

/// Drops a locked goal the planner cannot reach.
pub fn abandon_goal<R: Real>(mode: AgentMode<R>) -> (AgentMode<R>, Vec<FsmEvent<R>>) {
    match mode.locked_goal() {
        Some(goal) => (
            AgentMode::Exploration(ExploreState::AwaitingAssignment),
            vec![FsmEvent::GoalUnlocked { goal, reason: UnlockReason::Unreachable }, FsmEvent::RequestGoal],
        ),
        None => (mode, Vec::new()),
    }
}

/// Direct sight wins over the remembered position.
pub fn pursuit_goal<R: Real>(detection: &TargetDetection<R>, lkp: &LkpRecord<R>) -> Option<Vec2<R>> {
    match detection.position {
        Some(p) if detection.visible => Some(p),
        _ => lkp.valid.then_some(lkp.position),
    }
}

/// Centre of the Unknown cell nearest to `position` among those within
/// `radius` of `anchor` that pass `accept`; ties go to the lower row-major
/// index. `None` means the neighbourhood is fully mapped.
pub fn sweep_goal<R: Real>(
    anchor: Vec2<R>,
    radius: R,
    belief: &BeliefMap<R>,
    position: Vec2<R>,
    accept: impl Fn(Cell) -> bool,
) -> Option<Vec2<R>> {
    let spec = &belief.spec;
    let lo = spec.clamped_cell_of(anchor - Vec2::new(radius, radius));
    let hi = spec.clamped_cell_of(anchor + Vec2::new(radius, radius));
    let mut best: Option<(R, Vec2<R>)> = None;
    for row in lo.1..=hi.1 {
        for col in lo.0..=hi.0 {
            let c = spec.center((col, row));
            if c.distance(anchor) > radius || belief.state((col, row)) != CellState::Unknown || !accept((col, row)) {
                continue;
            }
            let d = c.distance(position);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, c));
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Known free cell that has gone longest without being in view, skipping
/// cells within `separation` of any point in `avoid`. Ties go to the cell
/// nearest `position`, then the lower row-major index.
pub fn patrol_goal<R: Real>(belief: &BeliefMap<R>, position: Vec2<R>, avoid: &[Vec2<R>], separation: R) -> Option<Vec2<R>> {
    let spec = &belief.spec;
    let mut best: Option<(u32, R, Vec2<R>)> = None;
    for i in 0..spec.len() {
        if belief.state_at(i) != CellState::Free {
            continue;
        }
        let cell = spec.cell(i);
        let c = spec.center(cell);
        if avoid.iter().any(|a| a.distance(c) < separation) {
            continue;
        }
        let key = (belief.last_seen(cell), c.distance(position));
        if best.is_none_or(|(s, d, _)| key.0 < s || (key.0 == s && key.1 < d)) {
            best = Some((key.0, key.1, c));
        }
    }
    best.map(|(_, _, c)| c)
}

//! Episode orchestration. An [`Episode`] is a reset/step session: `prepare`
//! senses nothing but decides everything for the current state (modes,
//! allocation, plans, guidance, observations), `advance` applies one set of
//! pursuer actions and accounts for its consequences.

pub mod batch;
pub mod log;

use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::{allocate, extract_frontiers, AllocationMode, AllocationRequest};
use crate::belief::BeliefMap;
use crate::config::ScenarioConfig;
use crate::controllers::{evader_action, pid_action};
use crate::error::{Error, Result};
use crate::fsm::{
    abandon_goal, assign_goal, patrol_goal, pursuit_goal, start_patrol, sweep_goal, transition, AgentMode, ExploreState,
    FsmEvent, UnlockReason,
};
use crate::geometry::Vec2;
use crate::grid::{occupancy_raster, GridSpec};
use crate::physics::{check_capture, step_world, CollisionFlags, KinematicAction};
use crate::planner::{geodesic_cost, guidance_from_cache, guidance_vector, refresh_if_due, GuidanceResult, PlanCache, PlanningGrid};
use crate::reward::{
    alignment_reward, build_observation, exploration_reward, mission_reward, observation_dim, potential_reward,
    safety_penalty, ObservationInput, ObservationVector, RewardBreakdown, OBSERVATION_SCHEMA,
};
use crate::rng::{stream, STREAM_ALLOC};
use crate::scalar::Real;
use crate::sensing::{cast_rays, detect_target, update_lkp, LidarScan, LkpRecord, TargetDetection};
use crate::world::{generate_preset_map, build_training_map, spawn_agents, WorldState};

use self::log::{AgentRecord, AllocRecord, EventRecord, HeaderRecord, LogRecord, SummaryRecord, WorldRecord, LOG_SCHEMA};

/// Goals closer than this are considered the same point.
const SAME_POINT_M: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapChoice {
    Train10,
    Rand15,
    Rand20,
}

impl MapChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Train10 => "train10",
            Self::Rand15 => "rand15",
            Self::Rand20 => "rand20",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Train10, Self::Rand15, Self::Rand20].into_iter().find(|m| m.name() == s)
    }

    /// Scenario for `seed`; random maps draw their layout from the seed.
    pub fn build<R: Real>(self, seed: u64) -> Result<ScenarioConfig<R>> {
        let mut cfg = match self {
            Self::Train10 => build_training_map(),
            Self::Rand15 => generate_preset_map(15, seed)?,
            Self::Rand20 => generate_preset_map(20, seed)?,
        };
        cfg.sim.rng_seed = seed;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub alloc: AllocationMode,
    /// Mapping only: the evader stands still, is never detected and cannot be captured.
    pub explore_only: bool,
    /// End the episode once team coverage reaches this fraction.
    pub stop_at_coverage: Option<f64>,
    pub record_log: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { alloc: AllocationMode::Directional, explore_only: false, stop_at_coverage: None, record_log: true }
    }
}

/// What the pursuers see and are told at the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepView<R> {
    pub observations: Vec<ObservationVector<R>>,
    pub guidance: Vec<GuidanceResult<R>>,
    pub goals: Vec<Option<Vec2<R>>>,
    pub modes: Vec<AgentMode<R>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<R> {
    pub rewards: Vec<RewardBreakdown<R>>,
    pub flags: Vec<CollisionFlags>,
    pub done: bool,
    pub captured: bool,
    pub clean: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub seed: u64,
    pub success: bool,
    /// Valid iff `success`.
    pub capture_steps: Option<u32>,
    pub clean: bool,
    pub steps: u32,
    /// Coverage after 0, 1, … steps.
    pub coverage_curve: Vec<f64>,
    /// Wall-clock time of each full loop iteration, microseconds.
    #[serde(skip)]
    pub step_micros: Vec<u64>,
}

impl EpisodeResult {
    /// First step at which coverage reached `fraction`.
    pub fn steps_to_coverage(&self, fraction: f64) -> Option<u32> {
        self.coverage_curve.iter().position(|c| *c >= fraction).map(|i| i as u32)
    }
}

pub struct Episode<R: Real> {
    config: ScenarioConfig<R>,
    options: RunOptions,
    seed: u64,
    truth_free: Vec<bool>,
    truth_free_count: usize,
    world: WorldState<R>,
    belief: BeliefMap<R>,
    grid: PlanningGrid<R>,
    lkp: LkpRecord<R>,
    detection: TargetDetection<R>,
    scans: Vec<LidarScan<R>>,
    new_cells: Vec<usize>,
    velocities: Vec<Vec2<R>>,
    modes: Vec<AgentMode<R>>,
    caches: Vec<Option<PlanCache<R>>>,
    /// Goal the cost in `potential` refers to, with that cost at the current state.
    potential: Vec<Option<(Vec2<R>, Option<R>)>>,
    goal_changed: Vec<bool>,
    view: StepView<R>,
    blacklist: Vec<Vec2<R>>,
    alloc_rng: ChaCha8Rng,
    prior_collision: bool,
    collision_steps: u32,
    coverage_curve: Vec<f64>,
    done: bool,
    log: Vec<String>,
}

fn same_point<R: Real>(a: Vec2<R>, b: Vec2<R>) -> bool {
    a.distance(b) <= R::lit(SAME_POINT_M)
}

impl<R: Real> Episode<R> {
    /// Validates the config, spawns agents from `seed` and prepares step 0.
    pub fn reset(config: ScenarioConfig<R>, seed: u64, options: RunOptions) -> Result<Self> {
        config.validate()?;
        let world = spawn_agents(&config, seed)?;
        let spec = GridSpec::for_scenario(&config);
        let truth_free: Vec<bool> = occupancy_raster(&spec, &config.map.obstacles).iter().map(|o| !o).collect();
        let truth_free_count = truth_free.iter().filter(|f| **f).count();
        let n = world.n_pursuers();
        let mut ep = Self {
            grid: PlanningGrid::from_occupied(spec, vec![false; spec.len()]),
            belief: BeliefMap::new(spec),
            truth_free,
            truth_free_count,
            lkp: LkpRecord::empty(),
            detection: TargetDetection::none(),
            scans: Vec::new(),
            new_cells: vec![0; n],
            velocities: vec![Vec2::zero(); n],
            modes: vec![AgentMode::initial(); n],
            caches: vec![None; n],
            potential: vec![None; n],
            goal_changed: vec![true; n],
            view: StepView { observations: Vec::new(), guidance: Vec::new(), goals: vec![None; n], modes: Vec::new() },
            blacklist: Vec::new(),
            alloc_rng: stream(seed, STREAM_ALLOC),
            prior_collision: false,
            collision_steps: 0,
            coverage_curve: Vec::new(),
            done: false,
            log: Vec::new(),
            world,
            config,
            options,
            seed,
        };
        if ep.options.record_log {
            let header = HeaderRecord {
                schema: LOG_SCHEMA.into(),
                obs_schema: OBSERVATION_SCHEMA.into(),
                scalar: std::any::type_name::<R>().into(),
                seed,
                n_pursuers: n,
                obs_dim: observation_dim(n),
                alloc: ep.options.alloc.name().into(),
                explore_only: ep.options.explore_only,
                stop_at_coverage: ep.options.stop_at_coverage,
                config: serde_json::to_value(&ep.config)?,
            };
            ep.push_log(LogRecord::Header(header));
        }
        ep.sense();
        if !ep.options.explore_only && check_capture(&ep.world, ep.config.sim.d_cap_m) {
            ep.world.captured = true;
            ep.world.capture_step = Some(0);
            ep.finish();
        } else {
            ep.check_coverage_stop();
            if !ep.done {
                ep.prepare();
            }
        }
        Ok(ep)
    }

    pub fn config(&self) -> &ScenarioConfig<R> {
        &self.config
    }

    pub fn world(&self) -> &WorldState<R> {
        &self.world
    }

    pub fn belief(&self) -> &BeliefMap<R> {
        &self.belief
    }

    pub fn view(&self) -> &StepView<R> {
        &self.view
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn n_pursuers(&self) -> usize {
        self.world.n_pursuers()
    }

    pub fn log_lines(&self) -> &[String] {
        &self.log
    }

    pub fn take_log(&mut self) -> Vec<String> {
        std::mem::take(&mut self.log)
    }

    /// Known truth-free cells over all truth-free cells.
    pub fn coverage(&self) -> f64 {
        let known = self
            .truth_free
            .iter()
            .zip(self.belief.cells())
            .filter(|(free, s)| **free && **s != crate::belief::CellState::Unknown)
            .count();
        known as f64 / self.truth_free_count.max(1) as f64
    }

    pub fn result(&self) -> EpisodeResult {
        let success = self.world.captured;
        EpisodeResult {
            seed: self.seed,
            success,
            capture_steps: self.world.capture_step.filter(|_| success),
            clean: success && !self.prior_collision,
            steps: self.world.step,
            coverage_curve: self.coverage_curve.clone(),
            step_micros: Vec::new(),
        }
    }

    /// PID actions for the current view.
    pub fn pid_actions(&self) -> Vec<KinematicAction<R>> {
        let v_max = self.config.agents.v_max_pursuer_mps;
        self.world
            .pursuers()
            .iter()
            .zip(&self.view.guidance)
            .map(|(a, g)| pid_action(a, g.v_guide, v_max, &self.config.controller))
            .collect()
    }

    fn push_log(&mut self, record: LogRecord<R>) {
        if self.options.record_log {
            self.log.push(log::to_line(&record));
        }
    }

    fn fov_radius(&self) -> R {
        self.config.fov_radius()
    }

    /// Sensing at the current state: lidar and visual mapping into the team
    /// belief, target detection, LKP bookkeeping, coverage.
    fn sense(&mut self) {
        let cfg = &self.config;
        self.belief.tick();
        let n = self.world.n_pursuers();
        let fov = self.fov_radius();
        let evader = self.world.evader().position;
        let mut visible = false;
        self.scans.clear();
        for i in 0..n {
            let scan = cast_rays(&self.world, i, cfg);
            let agent = self.world.agents[i];
            let mut fresh = self.belief.update_from_scan(&agent, &scan, cfg.sensing.lidar_max_range_m);
            if cfg.sensing.visual_mapping {
                fresh += self.belief.reveal_visible_disc(agent.position, fov, &cfg.map.obstacles);
            } else {
                self.belief.mark_seen_disc(agent.position, fov, &cfg.map.obstacles);
            }
            self.new_cells[i] = fresh;
            self.scans.push(scan);
            if !self.options.explore_only {
                let d = detect_target(agent.position, agent.heading, evader, &cfg.map.obstacles, fov, cfg.sensing.fov_aperture_deg);
                visible |= d.visible;
            }
        }
        self.detection = if visible { TargetDetection::seen(evader) } else { TargetDetection::none() };
        self.lkp = update_lkp(self.lkp, &self.detection, cfg.sensing.lkp_ttl_steps);
        if !visible && self.lkp.valid {
            let r = cfg.sensing.lkp_arrival_radius_m;
            if self.world.pursuers().iter().any(|a| a.position.distance(self.lkp.position) < r) {
                self.lkp = self.lkp.invalidated();
            }
        }
        self.grid = PlanningGrid::from_belief(&self.belief, cfg.planning.inflate_cells);
        self.coverage_curve.push(self.coverage());
    }

    fn log_events(&mut self, agent: usize, events: Vec<FsmEvent<R>>) {
        let step = self.world.step;
        for event in events {
            self.push_log(LogRecord::Event(EventRecord { step, agent, event }));
        }
    }

    fn reach_mask(&self, i: usize) -> Vec<bool> {
        let cell = self.grid.spec.clamped_cell_of(self.world.agents[i].position);
        self.grid.reachable_from(cell)
    }

    fn blacklisted(&self, p: Vec2<R>) -> bool {
        let tol = self.grid.spec.resolution * R::lit(0.5);
        self.blacklist.iter().any(|b| b.distance(p) < tol)
    }

    /// Decides modes, goals, plans, guidance and observations for the current state.
    fn prepare(&mut self) {
        let n = self.world.n_pursuers();
        let target_known = self.detection.visible || self.lkp.valid;
        let coord = self.config.coordination.clone();
        let mut masks: Vec<Option<Vec<bool>>> = vec![None; n];

        // Mode transitions.
        for i in 0..n {
            let p = self.world.agents[i].position;
            let needs_mask = matches!(
                self.modes[i],
                AgentMode::Exploration(ExploreState::Sweep { .. } | ExploreState::Approach { .. })
            );
            if needs_mask && !target_known {
                masks[i] = Some(self.reach_mask(i));
            }
            let spec = self.grid.spec;
            let mask = masks[i].as_deref();
            let accept = |c| mask.is_none_or(|m| m[spec.index(c)]);
            let (mut mode, mut events) = transition(self.modes[i], target_known, p, &self.belief, &coord, accept);
            // A goal whose surroundings got mapped by someone else is not worth the trip.
            if let AgentMode::Exploration(ExploreState::Approach { goal }) = mode {
                if sweep_goal(goal, coord.sweep_radius_m, &self.belief, p, accept).is_none() {
                    events.push(FsmEvent::GoalUnlocked { goal, reason: UnlockReason::SweepComplete });
                    events.push(FsmEvent::RequestGoal);
                    mode = AgentMode::Exploration(ExploreState::AwaitingAssignment);
                }
            }
            self.modes[i] = mode;
            self.log_events(i, events);
        }

        // Allocation, goals and plans; a second round re-serves agents whose
        // fresh goal turned out unreachable.
        for round in 0..2 {
            self.allocation_round(&mut masks);
            let abandoned = self.plan_all();
            if abandoned.is_empty() || round == 1 {
                break;
            }
        }

        // Potential bookkeeping for the shaping term.
        for i in 0..n {
            let goal = self.view.goals[i];
            self.goal_changed[i] = match (goal, self.potential[i]) {
                (Some(g), Some((pg, _))) => !same_point(g, pg),
                _ => true,
            };
        }

        self.view.modes = self.modes.clone();
        self.view.observations = (0..n)
            .map(|i| {
                let input = ObservationInput {
                    agent: &self.world.agents[i],
                    velocity: self.velocities[i],
                    scan: &self.scans[i],
                    v_guide: self.view.guidance[i].v_guide,
                    lkp: &self.lkp,
                    belief: &self.belief,
                    agent_id: i,
                };
                build_observation(input, &self.config)
            })
            .collect();
    }

    fn allocation_round(&mut self, masks: &mut [Option<Vec<bool>>]) {
        let n = self.world.n_pursuers();
        let requesters: Vec<usize> = (0..n).filter(|&i| self.modes[i].awaiting_goal()).collect();
        if requesters.is_empty() {
            return;
        }
        let cfg = &self.config.allocation;
        let frontiers: Vec<_> = extract_frontiers(&self.belief, cfg.min_cluster_size, cfg.max_cluster_cells)
            .into_iter()
            .filter(|f| !self.blacklisted(f.position))
            .collect();
        let mut assignment = vec![None; requesters.len()];
        if !frontiers.is_empty() {
            for &r in &requesters {
                if masks[r].is_none() {
                    masks[r] = Some(self.reach_mask(r));
                }
            }
            let reachable: Vec<Vec<bool>> = requesters
                .iter()
                .map(|&r| {
                    let m = masks[r].as_ref().unwrap();
                    frontiers.iter().map(|f| m[self.grid.spec.index(f.cell)]).collect()
                })
                .collect();
            let locked: Vec<Vec2<R>> = (0..n).filter_map(|i| self.modes[i].locked_goal()).collect();
            let req = AllocationRequest {
                requesters: &requesters,
                pursuers: self.world.pursuers(),
                locked: &locked,
                frontiers: &frontiers,
                reachable: &reachable,
                v_max: self.config.agents.v_max_pursuer_mps,
            };
            let round = allocate(&req, cfg, self.options.alloc, &mut self.alloc_rng);
            assignment = round.assignment.clone();
            let record = AllocRecord::from_round(self.world.step, &round);
            self.push_log(LogRecord::Alloc(record));
        }

        for (slot, &i) in requesters.iter().enumerate() {
            let p = self.world.agents[i].position;
            if let Some(goal) = assignment[slot] {
                let (mode, ev) = assign_goal(self.modes[i], goal);
                self.modes[i] = mode;
                self.log_events(i, vec![ev]);
                continue;
            }
            let keep_patrol = match self.modes[i] {
                AgentMode::Exploration(ExploreState::Patrol { goal }) => {
                    p.distance(goal) >= self.config.sensing.lkp_arrival_radius_m && !self.blacklisted(goal)
                }
                _ => false,
            };
            if keep_patrol {
                continue;
            }
            let avoid: Vec<Vec2<R>> = (0..n)
                .filter(|&j| j != i)
                .filter_map(|j| match self.modes[j] {
                    AgentMode::Exploration(ExploreState::Patrol { goal }) => Some(goal),
                    m => m.locked_goal(),
                })
                .chain(std::iter::once(p))
                .chain(self.blacklist.iter().copied())
                .collect();
            if let Some(goal) = patrol_goal(&self.belief, p, &avoid, self.config.coordination.d_approach_m) {
                let (mode, ev) = start_patrol(goal);
                self.modes[i] = mode;
                self.log_events(i, vec![ev]);
            }
        }
    }

    /// Refreshes goals, plans and guidance. Returns agents that dropped an
    /// unreachable exploration goal.
    fn plan_all(&mut self) -> Vec<usize> {
        let n = self.world.n_pursuers();
        let step = self.world.step;
        let k = self.config.planning.refresh_interval_steps;
        let lookahead = self.config.planning.lookahead_m;
        let mut abandoned = Vec::new();
        self.view.guidance = Vec::with_capacity(n);
        for i in 0..n {
            let agent = self.world.agents[i];
            let goal = match self.modes[i] {
                AgentMode::Pursuit => pursuit_goal(&self.detection, &self.lkp),
                AgentMode::Exploration(ExploreState::Approach { goal }) => Some(goal),
                AgentMode::Exploration(ExploreState::Patrol { goal }) => Some(goal),
                AgentMode::Exploration(ExploreState::Sweep { anchor, .. }) => {
                    let mask = self.reach_mask(i);
                    let spec = self.grid.spec;
                    sweep_goal(anchor, self.config.coordination.sweep_radius_m, &self.belief, agent.position, |c| {
                        mask[spec.index(c)]
                    })
                    .or(Some(anchor))
                }
                AgentMode::Exploration(ExploreState::AwaitingAssignment) => None,
            };
            self.view.goals[i] = goal;
            let Some(goal) = goal else {
                self.caches[i] = None;
                self.view.guidance.push(GuidanceResult::unreachable(agent.position));
                continue;
            };
            let cache = refresh_if_due(self.caches[i].take(), step, agent.position, goal, &self.grid, k);
            let mut guidance = guidance_from_cache(&cache, agent.position, agent.heading, lookahead);
            if !cache.reachable() {
                match self.modes[i] {
                    AgentMode::Pursuit => {
                        // Target hugging an obstacle: head straight for it.
                        if let Ok(v) = guidance_vector(agent.position, agent.heading, goal) {
                            guidance.v_guide = v;
                        }
                    }
                    AgentMode::Exploration(ExploreState::Approach { .. } | ExploreState::Patrol { .. }) => {
                        self.blacklist.push(goal);
                        let (mode, events) = match self.modes[i] {
                            AgentMode::Exploration(ExploreState::Patrol { .. }) => {
                                (AgentMode::Exploration(ExploreState::AwaitingAssignment), vec![FsmEvent::RequestGoal])
                            }
                            m => abandon_goal(m),
                        };
                        self.modes[i] = mode;
                        self.log_events(i, events);
                        abandoned.push(i);
                    }
                    _ => {}
                }
            }
            self.caches[i] = Some(cache);
            self.view.guidance.push(guidance);
        }
        abandoned
    }

    fn check_coverage_stop(&mut self) {
        if let Some(target) = self.options.stop_at_coverage {
            if self.coverage_curve.last().is_some_and(|c| *c >= target) {
                self.finish();
            }
        }
    }

    fn finish(&mut self) {
        if self.done {
            return;
        }
        self.done = true;
        let r = self.result();
        let summary = SummaryRecord {
            success: r.success,
            capture_step: r.capture_steps,
            clean: r.clean,
            steps: r.steps,
            final_coverage: self.coverage_curve.last().copied().unwrap_or(0.0),
            collision_steps: self.collision_steps,
        };
        self.push_log(LogRecord::Summary(summary));
    }

    /// Applies one action per pursuer (clamped into the legal box), advances
    /// the world, computes rewards and prepares the next state.
    pub fn advance(&mut self, actions: &[KinematicAction<R>]) -> Result<StepReport<R>> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        let n = self.world.n_pursuers();
        if actions.len() != n {
            return Err(Error::ActionCount { expected: n, got: actions.len() });
        }
        let cfg = self.config.clone();
        let mut all: Vec<KinematicAction<R>> = actions.iter().map(|a| KinematicAction::new(a.dtheta, a.dv)).collect();
        all.push(if self.options.explore_only { KinematicAction::idle() } else { evader_action(&self.world, &cfg) });

        let before = self.world.clone();
        let (mut next, mut outcome) = step_world(&before, &all, &cfg, self.prior_collision);
        if self.options.explore_only {
            next.captured = false;
            next.capture_step = None;
            outcome.captured = false;
            outcome.clean_capture = false;
        }
        let any_collision = outcome.flags[..n].iter().any(CollisionFlags::any);
        self.prior_collision |= any_collision;
        self.collision_steps += u32::from(any_collision);
        for i in 0..n {
            self.velocities[i] = outcome.displacement[i] * (R::one() / cfg.sim.dt_s);
        }
        self.world = next;
        self.sense();

        let stage = cfg.stage();
        let gamma = cfg.reward.gamma;
        let mut rewards = Vec::with_capacity(n);
        let step = before.step;
        for i in 0..n {
            let prev = before.agents[i];
            let now = self.world.agents[i];
            let goal = self.view.goals[i];
            let cost_next = goal.and_then(|g| geodesic_cost(&self.grid, now.position, g));
            let cost_prev = if self.goal_changed[i] { None } else { self.potential[i].and_then(|(_, c)| c) };
            let guide_pot = if self.goal_changed[i] {
                R::zero()
            } else {
                potential_reward(cost_prev, cost_next, gamma, stage.lambda_pot)
            };
            let v_body = self.velocities[i].rotated(-prev.heading);
            let guide = guide_pot + alignment_reward(v_body, self.view.guidance[i].v_guide, stage.lambda_align);
            let mode = self.view.modes[i];
            let exploring = !mode.is_pursuit();
            let progress = match (mode, cost_prev, cost_next) {
                (AgentMode::Exploration(ExploreState::Approach { .. }), Some(a), Some(b)) => a - b,
                _ => R::zero(),
            };
            let breakdown = RewardBreakdown::new(
                mission_reward(outcome.captured, outcome.clean_capture, stage),
                safety_penalty(outcome.flags[i], now.speed, cfg.reward.static_speed_threshold_mps, stage),
                guide,
                exploration_reward(self.new_cells[i], progress, exploring, stage),
            );
            self.potential[i] = goal.map(|g| (g, cost_next));
            rewards.push(breakdown);
            if self.options.record_log {
                let record = AgentRecord {
                    step,
                    agent: i,
                    position: prev.position,
                    heading: prev.heading,
                    speed: prev.speed,
                    mode: mode.label().into(),
                    goal,
                    v_guide: self.view.guidance[i].v_guide,
                    action: [all[i].dtheta, all[i].dv],
                    reward: breakdown,
                    cost_prev,
                    cost_next,
                    goal_changed: self.goal_changed[i],
                    r_pot: guide_pot,
                    flags: outcome.flags[i],
                    new_cells: self.new_cells[i],
                };
                self.push_log(LogRecord::Agent(record));
            }
        }
        if self.options.record_log {
            let e = *self.world.evader();
            let record = WorldRecord {
                step: self.world.step,
                evader_position: e.position,
                evader_heading: e.heading,
                evader_speed: e.speed,
                visible: self.detection.visible,
                lkp: self.lkp.valid.then_some(self.lkp.position),
                coverage: *self.coverage_curve.last().unwrap(),
                captured: self.world.captured,
            };
            self.push_log(LogRecord::World(record));
        }

        if self.world.captured || self.world.step >= cfg.sim.t_max_steps {
            self.finish();
        } else {
            self.check_coverage_stop();
        }
        if !self.done {
            self.prepare();
        }
        Ok(StepReport {
            rewards,
            flags: outcome.flags[..n].to_vec(),
            done: self.done,
            captured: self.world.captured,
            clean: outcome.clean_capture,
        })
    }
}

/// Pursuer action source for [`run_episode`].
#[derive(Debug, Clone, PartialEq)]
pub enum Policy<R> {
    Pid,
    /// Pre-recorded actions per step; steps beyond the script idle.
    Scripted(Vec<Vec<KinematicAction<R>>>),
}

impl<R: Real> Policy<R> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Pid => "pid",
            Self::Scripted(_) => "scripted",
        }
    }
}

/// Runs one episode to termination. Returns the result and the log lines
/// (empty unless `options.record_log`).
pub fn run_episode<R: Real>(
    config: &ScenarioConfig<R>,
    seed: u64,
    policy: &Policy<R>,
    options: &RunOptions,
) -> Result<(EpisodeResult, Vec<String>)> {
    let mut micros = Vec::new();
    let mut ep = Episode::reset(config.clone(), seed, options.clone())?;
    while !ep.is_done() {
        let t0 = Instant::now();
        let actions = match policy {
            Policy::Pid => ep.pid_actions(),
            Policy::Scripted(script) => script
                .get(ep.world().step as usize)
                .cloned()
                .unwrap_or_else(|| vec![KinematicAction::idle(); ep.n_pursuers()]),
        };
        ep.advance(&actions)?;
        micros.push(t0.elapsed().as_micros() as u64);
    }
    let mut result = ep.result();
    result.step_micros = micros;
    Ok((result, ep.take_log()))
}

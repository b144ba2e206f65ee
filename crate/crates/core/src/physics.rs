//! One simulation tick: kinematic integration, wall/obstacle collision response
//! with sliding and damping, pursuer–pursuer repulsion, and capture detection.
//!
//! Processing order per tick: integrate every agent, resolve collisions,
//! apply repulsion (with a position-only collision re-check), check capture.

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::geometry::{wrap_angle, Vec2};
use crate::scalar::Real;
use crate::world::{AgentState, Role, WorldState};

pub const DTHETA_LIMIT: f64 = 0.6;
pub const DV_LIMIT: f64 = 0.4;

const MAX_PROJECTION_PASSES: usize = 6;

/// Heading and speed increments. Out-of-box values are clamped on construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KinematicAction<R> {
    pub dtheta: R,
    pub dv: R,
}

impl<R: Real> KinematicAction<R> {
    pub fn new(dtheta: R, dv: R) -> Self {
        let clamp = |v: R, lim: f64| {
            let lim = R::lit(lim);
            if v.is_nan() {
                R::zero()
            } else {
                v.max(-lim).min(lim)
            }
        };
        Self { dtheta: clamp(dtheta, DTHETA_LIMIT), dv: clamp(dv, DV_LIMIT) }
    }

    pub fn idle() -> Self {
        Self { dtheta: R::zero(), dv: R::zero() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CollisionFlags {
    pub obstacle: bool,
    pub wall: bool,
    pub teammate: bool,
}

impl CollisionFlags {
    #[inline]
    pub fn any(&self) -> bool {
        self.obstacle || self.wall || self.teammate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<R> {
    /// Indexed like `WorldState::agents`.
    pub flags: Vec<CollisionFlags>,
    pub displacement: Vec<Vec2<R>>,
    pub captured: bool,
    /// Capture with no pursuer collision at any point of the episode.
    pub clean_capture: bool,
}

/// Advances one agent: heading first, then speed, then position using the
/// new heading and new speed.
pub fn integrate<R: Real>(state: &AgentState<R>, action: KinematicAction<R>, dt: R, v_max: R) -> AgentState<R> {
    let speed = (state.speed + action.dv).max(R::zero()).min(v_max);
    let heading = wrap_angle(state.heading + action.dtheta);
    let position = state.position + Vec2::from_angle(heading) * (speed * dt);
    AgentState { position, heading, speed, role: state.role }
}

struct Impact<R> {
    /// Unit normal pointing from the agent into the surface.
    inward: Vec2<R>,
    wall: bool,
}

/// Projects `p` out of every wall and obstacle. Returns the corrected point,
/// the contacts made along the way, and whether the result is penetration-free.
fn project_to_free<R: Real>(config: &ScenarioConfig<R>, mut p: Vec2<R>, motion: Vec2<R>) -> (Vec2<R>, Vec<Impact<R>>, bool) {
    let r = config.agents.agent_radius_m;
    let (w, h) = (config.map.width_m, config.map.height_m);
    let mut impacts = Vec::new();
    for _ in 0..MAX_PROJECTION_PASSES {
        let mut changed = false;
        if p.x < r {
            p.x = r;
            impacts.push(Impact { inward: Vec2::new(-R::one(), R::zero()), wall: true });
            changed = true;
        }
        if p.x > w - r {
            p.x = w - r;
            impacts.push(Impact { inward: Vec2::new(R::one(), R::zero()), wall: true });
            changed = true;
        }
        if p.y < r {
            p.y = r;
            impacts.push(Impact { inward: Vec2::new(R::zero(), -R::one()), wall: true });
            changed = true;
        }
        if p.y > h - r {
            p.y = h - r;
            impacts.push(Impact { inward: Vec2::new(R::zero(), R::one()), wall: true });
            changed = true;
        }
        for o in &config.map.obstacles {
            let reach = o.radius + r;
            let offset = p - o.center;
            if offset.norm() < reach {
                let outward = offset
                    .normalized()
                    .or_else(|| (-motion).normalized())
                    .unwrap_or(Vec2::new(R::one(), R::zero()));
                p = o.center + outward * reach;
                impacts.push(Impact { inward: -outward, wall: false });
                changed = true;
            }
        }
        if !changed {
            return (p, impacts, true);
        }
    }
    let ok = penetration_depth(config, p) <= R::zero();
    (p, impacts, ok)
}

/// Largest penetration of an agent centred at `p` into walls or obstacles (≤ 0 when clear).
pub fn penetration_depth<R: Real>(config: &ScenarioConfig<R>, p: Vec2<R>) -> R {
    let r = config.agents.agent_radius_m;
    let (w, h) = (config.map.width_m, config.map.height_m);
    let mut depth = (r - p.x).max(p.x - (w - r)).max(r - p.y).max(p.y - (h - r));
    for o in &config.map.obstacles {
        depth = depth.max(o.radius + r - p.distance(o.center));
    }
    depth
}

/// Collision response for every agent of `proposed` relative to `previous`.
///
/// Blocked motion loses its normal component (sliding). Speed is scaled by
/// the head-on factor when the heading is within the impact-angle threshold of
/// the inward surface normal and by the grazing factor otherwise.
pub fn resolve_collisions<R: Real>(
    proposed: &WorldState<R>,
    previous: &WorldState<R>,
    config: &ScenarioConfig<R>,
) -> (WorldState<R>, StepOutcome<R>) {
    let phys = &config.physics;
    let threshold = phys.impact_angle_threshold_deg.to_radians();
    let mut next = proposed.clone();
    let mut flags = vec![CollisionFlags::default(); proposed.agents.len()];

    for (i, agent) in next.agents.iter_mut().enumerate() {
        let prev = &previous.agents[i];
        let motion = agent.position - prev.position;
        let (p, impacts, ok) = project_to_free(config, agent.position, motion);
        agent.position = if ok { p } else { prev.position };
        let heading_dir = Vec2::from_angle(agent.heading);
        let mut damping = R::one();
        for imp in &impacts {
            if imp.wall {
                flags[i].wall = true;
            } else {
                flags[i].obstacle = true;
            }
            let cos = heading_dir.dot(imp.inward);
            if cos > R::zero() {
                let angle = cos.min(R::one()).acos();
                let factor = if angle < threshold { phys.head_on_damping } else { phys.grazing_damping };
                damping = damping.min(factor);
            }
        }
        if !ok {
            damping = damping.min(phys.head_on_damping);
        }
        agent.speed = agent.speed * damping;
    }

    let contact = config.agents.agent_radius_m * R::lit(2.0);
    let n = next.n_pursuers();
    for i in 0..n {
        for j in i + 1..n {
            if next.agents[i].position.distance(next.agents[j].position) < contact {
                flags[i].teammate = true;
                flags[j].teammate = true;
            }
        }
    }

    let displacement = next
        .agents
        .iter()
        .zip(&previous.agents)
        .map(|(a, b)| a.position - b.position)
        .collect();
    let outcome = StepOutcome { flags, displacement, captured: false, clean_capture: false };
    (next, outcome)
}

/// Symmetric separation of pursuer pairs closer than the repulsion distance,
/// followed by a position-only clamp against walls and obstacles.
pub fn apply_repulsion<R: Real>(state: &WorldState<R>, config: &ScenarioConfig<R>) -> WorldState<R> {
    let trigger = config.physics.repulsion_distance_m;
    let gain = config.physics.repulsion_gain;
    let mut next = state.clone();
    let n = next.n_pursuers();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (next.agents[i].position, next.agents[j].position);
            let d = a.distance(b);
            if d >= trigger {
                continue;
            }
            let axis = (b - a).normalized().unwrap_or(Vec2::new(R::one(), R::zero()));
            let push = axis * (gain * (trigger - d) / R::lit(2.0));
            next.agents[i].position -= push;
            next.agents[j].position += push;
        }
    }
    for (agent, before) in next.agents.iter_mut().zip(&state.agents) {
        if agent.position == before.position {
            continue;
        }
        let (p, _, ok) = project_to_free(config, agent.position, agent.position - before.position);
        agent.position = if ok { p } else { before.position };
    }
    next
}

/// True iff some pursuer is strictly closer than `d_cap` to the evader.
pub fn check_capture<R: Real>(state: &WorldState<R>, d_cap: R) -> bool {
    let e = state.evader().position;
    state.pursuers().iter().any(|p| p.position.distance(e) < d_cap)
}

/// Full tick. `actions` is indexed like `world.agents` (evader last);
/// `prior_collision` tells whether any pursuer collided earlier this episode.
pub fn step_world<R: Real>(
    world: &WorldState<R>,
    actions: &[KinematicAction<R>],
    config: &ScenarioConfig<R>,
    prior_collision: bool,
) -> (WorldState<R>, StepOutcome<R>) {
    assert_eq!(actions.len(), world.agents.len(), "one action per agent");
    let dt = config.sim.dt_s;
    let mut proposed = world.clone();
    for (agent, action) in proposed.agents.iter_mut().zip(actions) {
        let v_max = match agent.role {
            Role::Pursuer(_) => config.agents.v_max_pursuer_mps,
            Role::Evader => config.stage().evader_v_max_mps,
        };
        *agent = integrate(agent, *action, dt, v_max);
    }
    let (resolved, mut outcome) = resolve_collisions(&proposed, world, config);
    let mut next = apply_repulsion(&resolved, config);
    for (d, (a, b)) in outcome.displacement.iter_mut().zip(next.agents.iter().zip(&world.agents)) {
        *d = a.position - b.position;
    }
    next.step = world.step + 1;
    let captured = check_capture(&next, config.sim.d_cap_m);
    let collided = prior_collision || outcome.flags[..next.n_pursuers()].iter().any(CollisionFlags::any);
    outcome.captured = captured;
    outcome.clean_capture = captured && !collided;
    if captured && !next.captured {
        next.captured = true;
        next.capture_step = Some(next.step);
    }
    (next, outcome)
}

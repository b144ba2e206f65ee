//! Rule-based pursuer controller and the scripted fleeing evader.

use crate::config::{ControllerConfig, EvaderConfig, ScenarioConfig};
use crate::geometry::{wrap_angle, Vec2};
use crate::physics::{KinematicAction, DTHETA_LIMIT, DV_LIMIT};
use crate::scalar::Real;
use crate::world::{AgentState, WorldState};

/// Keeps repulsion finite when the evader touches a surface.
const MIN_SURFACE_DISTANCE: f64 = 1e-3;

fn clamp<R: Real>(x: R, limit: f64) -> R {
    x.max(R::lit(-limit)).min(R::lit(limit))
}

/// Proportional heading and speed control toward the body-frame guidance
/// direction. A zero guidance vector (goal unreachable) brakes in place.
pub fn pid_action<R: Real>(agent: &AgentState<R>, v_guide: Vec2<R>, v_max: R, gains: &ControllerConfig<R>) -> KinematicAction<R> {
    if v_guide.norm_sq() == R::zero() {
        return KinematicAction::new(R::zero(), clamp(-gains.k_p_speed * agent.speed, DV_LIMIT));
    }
    let error = v_guide.angle();
    let target = if error.abs() > R::FRAC_PI_2() { v_max * gains.slow_turn_speed_fraction } else { v_max };
    KinematicAction::new(
        clamp(gains.k_p_heading * error, DTHETA_LIMIT),
        clamp(gains.k_p_speed * (target - agent.speed), DV_LIMIT),
    )
}

/// Sum of inverse-square pushes: from every pursuer within the repulsion
/// range, and from walls and obstacle surfaces within the margin.
pub fn evader_force<R: Real>(world: &WorldState<R>, config: &ScenarioConfig<R>) -> Vec2<R> {
    let params: &EvaderConfig<R> = &config.evader;
    let p = world.evader().position;
    let floor = R::lit(MIN_SURFACE_DISTANCE);
    let push = |dir: Vec2<R>, d: R| dir * (R::one() / (d.max(floor) * d.max(floor)));
    let mut f = Vec2::zero();
    for q in world.pursuers() {
        let off = p - q.position;
        let d = off.norm();
        if d < params.repulsion_range_m {
            if let Some(u) = off.normalized() {
                f += push(u, d);
            }
        }
    }
    let margin = params.wall_margin_m;
    let (w, h) = (config.map.width_m, config.map.height_m);
    for (d, n) in [
        (p.x, Vec2::new(R::one(), R::zero())),
        (w - p.x, Vec2::new(-R::one(), R::zero())),
        (p.y, Vec2::new(R::zero(), R::one())),
        (h - p.y, Vec2::new(R::zero(), -R::one())),
    ] {
        if d < margin {
            f += push(n, d);
        }
    }
    for o in &config.map.obstacles {
        let off = p - o.center;
        let d = off.norm() - o.radius;
        if d < margin {
            if let Some(u) = off.normalized() {
                f += push(u, d);
            }
        }
    }
    f
}

/// Steers along the repulsion sum and accelerates to the stage top speed;
/// with no net push it keeps its heading.
pub fn evader_action<R: Real>(world: &WorldState<R>, config: &ScenarioConfig<R>) -> KinematicAction<R> {
    let e = world.evader();
    let v_max = config.stage().evader_v_max_mps;
    let dv = clamp(v_max - e.speed, DV_LIMIT);
    if !config.evader.enabled {
        return KinematicAction::idle();
    }
    let f = evader_force(world, config);
    let dtheta = if f.norm() < R::lit(1e-12) {
        R::zero()
    } else {
        clamp(config.evader.heading_gain * wrap_angle(f.angle() - e.heading), DTHETA_LIMIT)
    };
    KinematicAction::new(dtheta, dv)
}

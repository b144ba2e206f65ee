//! Curriculum stages, per-agent observation vectors and the composite reward.

use serde::{Deserialize, Serialize};

use crate::belief::{BeliefMap, CellState};
use crate::config::ScenarioConfig;
use crate::geometry::Vec2;
use crate::physics::CollisionFlags;
use crate::scalar::Real;
use crate::sensing::{LidarScan, LkpRecord, N_RAYS};
use crate::world::AgentState;

/// Version tag for the flat observation layout below.
pub const OBSERVATION_SCHEMA: &str = "obs-v1";

/// Observation length for `n` pursuers:
///
/// | slice          | len | range    |
/// |----------------|-----|----------|
/// | x/W, y/H       | 2   | [0, 1]   |
/// | ego vx, vy     | 2   | [−1, 1]  |
/// | cos θ, sin θ   | 2   | [−1, 1]  |
/// | wall lidar     | 8   | [0, 1]   |
/// | teammate lidar | 8   | [0, 1]   |
/// | guidance       | 2   | [−1, 1]  |
/// | LKP dx, dy, ok | 3   | [−1, 1]  |
/// | 3×3 patch      | 9   | [0, 1]   |
/// | one-hot id     | n   | {0, 1}   |
pub const fn observation_dim(n_pursuers: usize) -> usize {
    36 + n_pursuers
}

/// Inclusive bounds for each component, in layout order.
pub fn observation_bounds(n_pursuers: usize) -> Vec<(f64, f64)> {
    let mut b = vec![(0.0, 1.0); 2];
    b.extend([(-1.0, 1.0); 4]);
    b.extend([(0.0, 1.0); 2 * N_RAYS]);
    b.extend([(-1.0, 1.0); 5]);
    b.extend(std::iter::repeat_n((0.0, 1.0), 9 + n_pursuers));
    b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumStage<R> {
    pub stage_id: u8,
    pub fov_radius_m: R,
    pub evader_v_max_mps: R,
    /// Signed per-step term (negative).
    pub time_reward: R,
    /// Magnitude; the safety term subtracts it.
    pub collision_penalty: R,
    /// Magnitude; the safety term subtracts it.
    pub static_penalty: R,
    pub lambda_pot: R,
    pub lambda_align: R,
    pub cell_visit_bonus: R,
    pub frontier_progress_weight: R,
    pub capture_bonus: R,
    pub clean_capture_bonus: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector<R> {
    pub values: Vec<R>,
}

impl<R: Real> ObservationVector<R> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[R] {
        &self.values
    }
}

/// Everything one agent contributes to its observation at a given step.
#[derive(Debug, Clone, Copy)]
pub struct ObservationInput<'a, R> {
    pub agent: &'a AgentState<R>,
    /// Realized world-frame velocity over the last step (m/s).
    pub velocity: Vec2<R>,
    pub scan: &'a LidarScan<R>,
    /// Body-frame unit guidance, zero when unreachable.
    pub v_guide: Vec2<R>,
    pub lkp: &'a LkpRecord<R>,
    pub belief: &'a BeliefMap<R>,
    pub agent_id: usize,
}

fn patch_code(s: CellState) -> f64 {
    match s {
        CellState::Unknown => 0.0,
        CellState::Free => 0.5,
        CellState::Occupied => 1.0,
    }
}

pub fn build_observation<R: Real>(input: ObservationInput<'_, R>, config: &ScenarioConfig<R>) -> ObservationVector<R> {
    let n = config.agents.n_pursuers;
    let (w, h) = (config.map.width_m, config.map.height_m);
    let v_max = config.agents.v_max_pursuer_mps;
    let range = config.sensing.lidar_max_range_m;
    let unit = |x: R| x.max(-R::one()).min(R::one());
    let frac = |x: R| x.max(R::zero()).min(R::one());

    let a = input.agent;
    let mut v = Vec::with_capacity(observation_dim(n));
    v.push(frac(a.position.x / w));
    v.push(frac(a.position.y / h));
    let ego = input.velocity.rotated(-a.heading) * (R::one() / v_max);
    v.push(unit(ego.x));
    v.push(unit(ego.y));
    v.push(a.heading.cos());
    v.push(a.heading.sin());
    v.extend(input.scan.wall_ranges.iter().map(|r| frac(*r / range)));
    v.extend(input.scan.teammate_ranges.iter().map(|r| frac(*r / range)));
    v.push(unit(input.v_guide.x));
    v.push(unit(input.v_guide.y));
    if input.lkp.valid {
        let d = input.lkp.position - a.position;
        v.push(unit(d.x / w));
        v.push(unit(d.y / h));
        v.push(R::one());
    } else {
        v.extend([R::zero(); 3]);
    }
    let spec = &input.belief.spec;
    let (col, row) = spec.clamped_cell_of(a.position);
    for dr in -1isize..=1 {
        for dc in -1isize..=1 {
            let (c, r) = (col as isize + dc, row as isize + dr);
            let code = if spec.contains(c, r) {
                patch_code(input.belief.state((c as usize, r as usize)))
            } else {
                1.0
            };
            v.push(R::lit(code));
        }
    }
    v.extend((0..n).map(|i| if i == input.agent_id { R::one() } else { R::zero() }));
    debug_assert_eq!(v.len(), observation_dim(n));
    ObservationVector { values: v }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown<R> {
    pub mission: R,
    pub safety: R,
    pub guide: R,
    pub explore: R,
    pub total: R,
}

impl<R: Real> RewardBreakdown<R> {
    pub fn new(mission: R, safety: R, guide: R, explore: R) -> Self {
        Self { mission, safety, guide, explore, total: mission + safety + guide + explore }
    }

    pub fn zero() -> Self {
        Self::new(R::zero(), R::zero(), R::zero(), R::zero())
    }
}

/// Potential-based shaping with Φ = −(geodesic cost). Zero unless the goal
/// was reachable at both ends of the step.
pub fn potential_reward<R: Real>(cost_prev: Option<R>, cost_next: Option<R>, gamma: R, lambda_pot: R) -> R {
    match (cost_prev, cost_next) {
        (Some(c0), Some(c1)) if c0.is_finite() && c1.is_finite() => lambda_pot * (gamma * -c1 + c0),
        _ => R::zero(),
    }
}

/// `velocity` and `v_guide` must share a frame.
pub fn alignment_reward<R: Real>(velocity: Vec2<R>, v_guide: Vec2<R>, lambda_align: R) -> R {
    let dot = velocity.dot(v_guide).max(R::zero()).min(R::one());
    lambda_align * dot * velocity.norm()
}

pub fn safety_penalty<R: Real>(flags: CollisionFlags, speed: R, static_threshold: R, stage: &CurriculumStage<R>) -> R {
    let mut r = R::zero();
    if flags.any() {
        r -= stage.collision_penalty;
    }
    if speed < static_threshold {
        r -= stage.static_penalty;
    }
    r
}

pub fn mission_reward<R: Real>(captured: bool, clean: bool, stage: &CurriculumStage<R>) -> R {
    let mut r = stage.time_reward;
    if captured {
        r += if clean { stage.clean_capture_bonus } else { stage.capture_bonus };
    }
    r
}

/// `progress_m` is the decrease in geodesic distance to the locked goal.
pub fn exploration_reward<R: Real>(new_cells: usize, progress_m: R, exploring: bool, stage: &CurriculumStage<R>) -> R {
    if !exploring {
        return R::zero();
    }
    stage.cell_visit_bonus * R::from_usize(new_cells).unwrap() + stage.frontier_progress_weight * progress_m.max(R::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::world::{build_training_map, Role};
    use approx::assert_abs_diff_eq;

    fn stage5() -> CurriculumStage<f64> {
        build_training_map::<f64>().stages[4].clone()
    }

    #[test]
    fn potential_examples() {
        assert_abs_diff_eq!(potential_reward(Some(5.0), Some(4.0), 0.99, 1.0), 1.04, epsilon = 1e-12);
        let c = 3.0;
        let r = potential_reward(Some(c), Some(c), 0.99, 1.0);
        assert_abs_diff_eq!(r, c * (1.0 - 0.99), epsilon = 1e-12);
        assert_eq!(potential_reward(None, Some(4.0), 0.99, 1.0), 0.0);
        assert_eq!(potential_reward(Some(4.0), None, 0.99, 1.0), 0.0);
    }

    #[test]
    fn alignment_examples() {
        assert_abs_diff_eq!(alignment_reward(Vec2::new(1.2, 0.0), Vec2::new(1.0, 0.0), 1.0), 1.2);
        assert_eq!(alignment_reward(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), 1.0), 0.0);
        assert_eq!(alignment_reward(Vec2::zero(), Vec2::new(1.0, 0.0), 1.0), 0.0);
        assert_abs_diff_eq!(alignment_reward(Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), 0.5), 0.125);
    }

    #[test]
    fn safety_mission_explore_examples() {
        let s = stage5();
        let hit = CollisionFlags { obstacle: true, ..Default::default() };
        assert_eq!(safety_penalty(hit, 1.0, 0.05, &s), -20.0);
        assert_eq!(safety_penalty(CollisionFlags::default(), 1.0, 0.05, &s), 0.0);
        assert_eq!(safety_penalty(CollisionFlags::default(), 0.01, 0.05, &s), -0.5);
        assert_eq!(mission_reward(false, false, &s), -2.0);
        assert_eq!(mission_reward(true, true, &s), 5998.0);
        assert_eq!(mission_reward(true, false, &s), 3998.0);
        assert_eq!(exploration_reward(4, 0.0, false, &s), 0.0);
        assert_abs_diff_eq!(exploration_reward(4, 0.0, true, &s), 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(exploration_reward(4, 0.3, true, &s), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(exploration_reward(0, -0.3, true, &s), 0.0);
    }

    #[test]
    fn breakdown_total_is_sum() {
        let b = RewardBreakdown::new(-2.0, -20.0, 1.04, 0.4);
        assert_eq!(b.total, -2.0 + -20.0 + 1.04 + 0.4);
    }

    #[test]
    fn stage_table_monotone() {
        let cfg = build_training_map::<f64>();
        for w in cfg.stages.windows(2) {
            assert!(w[1].fov_radius_m <= w[0].fov_radius_m);
            assert!(w[1].time_reward.abs() >= w[0].time_reward.abs());
            assert!(w[1].collision_penalty >= w[0].collision_penalty);
        }
        assert_eq!(cfg.stages[2].fov_radius_m, 1.5);
        let s5 = &cfg.stages[4];
        assert_eq!((s5.evader_v_max_mps, s5.time_reward, s5.collision_penalty), (1.3, -2.0, 20.0));
        assert_eq!(s5.clean_capture_bonus, 6000.0);
    }

    #[test]
    fn center_pose_observation() {
        let mut cfg = build_training_map::<f64>();
        cfg.map.obstacles.clear();
        let agent = AgentState::new(Vec2::new(5.0, 5.0), 0.0, 0.0, Role::Pursuer(1));
        let scan = LidarScan { wall_ranges: [5.0; N_RAYS], teammate_ranges: [10.0; N_RAYS] };
        let belief = BeliefMap::new(GridSpec::for_scenario(&cfg));
        let lkp = LkpRecord::empty();
        let input = ObservationInput {
            agent: &agent,
            velocity: Vec2::zero(),
            scan: &scan,
            v_guide: Vec2::zero(),
            lkp: &lkp,
            belief: &belief,
            agent_id: 1,
        };
        let obs = build_observation(input, &cfg);
        assert_eq!(obs.len(), 39);
        assert_eq!(&obs.values[..6], &[0.5, 0.5, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(&obs.values[6..8], &[0.5, 0.5]);
        assert_eq!(&obs.values[14..16], &[1.0, 1.0]);
        assert_eq!(&obs.values[24..27], &[0.0, 0.0, 0.0]);
        assert!(obs.values[27..36].iter().all(|x| *x == 0.0));
        assert_eq!(&obs.values[36..], &[0.0, 1.0, 0.0]);
        assert_eq!(obs, build_observation(input, &cfg));
    }

    #[test]
    fn patch_marks_out_of_bounds_as_occupied() {
        let cfg = build_training_map::<f64>();
        let agent = AgentState::new(Vec2::new(0.1, 0.1), 0.0, 0.0, Role::Pursuer(0));
        let scan = LidarScan { wall_ranges: [1.0; N_RAYS], teammate_ranges: [1.0; N_RAYS] };
        let mut belief = BeliefMap::new(GridSpec::for_scenario(&cfg));
        belief.observe((0, 0), CellState::Free);
        let lkp = LkpRecord { position: Vec2::new(5.1, 0.1), age: 0, valid: true };
        let input = ObservationInput {
            agent: &agent,
            velocity: Vec2::new(0.6, 0.0),
            scan: &scan,
            v_guide: Vec2::new(1.0, 0.0),
            lkp: &lkp,
            belief: &belief,
            agent_id: 0,
        };
        let obs = build_observation(input, &cfg);
        assert_abs_diff_eq!(obs.values[2], 0.5);
        assert_abs_diff_eq!(obs.values[24], 0.5);
        assert_eq!(obs.values[26], 1.0);
        // row -1 out of bounds, then (−1,0) OOB, (0,0) Free, (1,0) Unknown
        assert_eq!(&obs.values[27..33], &[1.0, 1.0, 1.0, 1.0, 0.5, 0.0]);
    }
}

//! Ground-truth world: agents, scenario construction, random maps and spawning.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{CircularObstacle, ScenarioConfig, TRAINING_MAP_TOML};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2};
use crate::grid::{free_space_connected, occupancy_raster, GridSpec};
use crate::rng::{stream, STREAM_MAP, STREAM_SPAWN};
use crate::scalar::Real;

/// Random-map sizes (metres per side) and their default obstacle counts.
pub const RANDOM_MAP_PRESETS: [(u32, usize); 2] = [(15, 8), (20, 14)];

const OBSTACLE_RADIUS_RANGE_M: (f64, f64) = (0.4, 1.0);
const MAP_ATTEMPTS: usize = 50;
const OBSTACLE_ATTEMPTS: usize = 400;
const SPAWN_ATTEMPTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Pursuer(usize),
    Evader,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState<R> {
    pub position: Vec2<R>,
    /// Radians in (−π, π].
    pub heading: R,
    /// m/s, never negative.
    pub speed: R,
    pub role: Role,
}

impl<R: Real> AgentState<R> {
    pub fn new(position: Vec2<R>, heading: R, speed: R, role: Role) -> Self {
        Self { position, heading: wrap_angle(heading), speed, role }
    }

    #[inline]
    pub fn is_evader(&self) -> bool {
        self.role == Role::Evader
    }

    /// World-frame velocity implied by heading and speed.
    #[inline]
    pub fn velocity(&self) -> Vec2<R> {
        Vec2::from_angle(self.heading) * self.speed
    }
}

/// Full hidden state. Pursuers occupy indices `0..n`, the evader is last.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState<R> {
    pub agents: Vec<AgentState<R>>,
    pub step: u32,
    pub captured: bool,
    pub capture_step: Option<u32>,
}

impl<R: Real> WorldState<R> {
    pub fn new(agents: Vec<AgentState<R>>) -> Self {
        Self { agents, step: 0, captured: false, capture_step: None }
    }

    pub fn n_pursuers(&self) -> usize {
        self.agents.len() - 1
    }

    pub fn pursuers(&self) -> &[AgentState<R>] {
        &self.agents[..self.agents.len() - 1]
    }

    pub fn evader(&self) -> &AgentState<R> {
        self.agents.last().expect("world always holds an evader")
    }

    pub fn evader_mut(&mut self) -> &mut AgentState<R> {
        self.agents.last_mut().expect("world always holds an evader")
    }

    /// Smallest pursuer–evader distance.
    pub fn min_capture_distance(&self) -> R {
        let e = self.evader().position;
        self.pursuers().iter().map(|p| p.position.distance(e)).fold(R::infinity(), R::min)
    }
}

/// The fixed 10 x 10 m training scenario shipped with the crate.
pub fn build_training_map<R>() -> ScenarioConfig<R>
where
    R: Real + Serialize + for<'de> Deserialize<'de>,
{
    ScenarioConfig::from_toml_str(TRAINING_MAP_TOML).expect("shipped training config is valid")
}

/// Square random map of `size` metres with `n_obstacles` non-overlapping discs.
///
/// Obstacles keep a gap of at least one agent diameter plus two cells to each
/// other and to the walls, and the free-space raster is checked for a single
/// connected component before the map is accepted.
pub fn generate_random_map<R>(size: u32, n_obstacles: usize, seed: u64) -> Result<ScenarioConfig<R>>
where
    R: Real + Serialize + for<'de> Deserialize<'de>,
{
    if !RANDOM_MAP_PRESETS.iter().any(|(s, _)| *s == size) {
        return Err(Error::Config(format!("unsupported random map size {size}; expected 15 or 20")));
    }
    let mut config = build_training_map::<R>();
    let side = R::from_u32(size).unwrap();
    config.map.width_m = side;
    config.map.height_m = side;
    config.map.obstacles.clear();
    config.sim.rng_seed = seed;

    let spec = GridSpec::for_scenario(&config);
    let gap = config.agents.agent_radius_m * R::lit(2.0) + config.map.grid_resolution_m * R::lit(2.0);
    let mut rng = stream(seed, STREAM_MAP);

    for _ in 0..MAP_ATTEMPTS {
        let Some(obstacles) = place_obstacles(&mut rng, side, n_obstacles, gap) else {
            continue;
        };
        let raster = occupancy_raster(&spec, &obstacles);
        if !free_space_connected(&spec, &raster) {
            continue;
        }
        config.map.obstacles = obstacles;
        if spawn_regions_exist(&config) {
            config.validate()?;
            return Ok(config);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAP_ATTEMPTS,
        reason: format!("could not place {n_obstacles} obstacles on a {size} m map"),
    })
}

/// Random map with the preset obstacle count for `size`.
pub fn generate_preset_map<R>(size: u32, seed: u64) -> Result<ScenarioConfig<R>>
where
    R: Real + Serialize + for<'de> Deserialize<'de>,
{
    let n = RANDOM_MAP_PRESETS
        .iter()
        .find(|(s, _)| *s == size)
        .map(|(_, n)| *n)
        .ok_or_else(|| Error::Config(format!("unsupported random map size {size}")))?;
    generate_random_map(size, n, seed)
}

fn place_obstacles<R: Real, G: Rng>(
    rng: &mut G,
    side: R,
    n: usize,
    gap: R,
) -> Option<Vec<CircularObstacle<R>>> {
    let mut placed: Vec<CircularObstacle<R>> = Vec::with_capacity(n);
    let side_f = side.as_f64();
    let gap_f = gap.as_f64();
    for _ in 0..n {
        let mut ok = None;
        for _ in 0..OBSTACLE_ATTEMPTS {
            let radius = rng.gen_range(OBSTACLE_RADIUS_RANGE_M.0..OBSTACLE_RADIUS_RANGE_M.1);
            let lo = radius + gap_f;
            let hi = side_f - radius - gap_f;
            if hi <= lo {
                continue;
            }
            let x = rng.gen_range(lo..hi);
            let y = rng.gen_range(lo..hi);
            let cand = CircularObstacle::new(Vec2::new(R::lit(x), R::lit(y)), R::lit(radius));
            let clear = placed
                .iter()
                .all(|o| o.center.distance(cand.center) >= o.radius + cand.radius + gap);
            if clear {
                ok = Some(cand);
                break;
            }
        }
        placed.push(ok?);
    }
    Some(placed)
}

/// Free-space test for an agent centre: inside walls and off every obstacle.
pub fn position_is_free<R: Real>(config: &ScenarioConfig<R>, p: Vec2<R>) -> bool {
    let r = config.agents.agent_radius_m;
    p.x >= r
        && p.y >= r
        && p.x <= config.map.width_m - r
        && p.y <= config.map.height_m - r
        && config.map.obstacles.iter().all(|o| p.distance(o.center) >= o.radius + r)
}

// Deterministic scan for N+1 clear centres with pairwise clearance 2r.
fn spawn_regions_exist<R: Real>(config: &ScenarioConfig<R>) -> bool {
    let spec = GridSpec::for_scenario(config);
    let need = config.agents.n_pursuers + 1;
    let min_sep = config.agents.agent_radius_m * R::lit(2.0);
    let mut chosen: Vec<Vec2<R>> = Vec::new();
    for i in 0..spec.len() {
        let p = spec.center(spec.cell(i));
        if position_is_free(config, p) && chosen.iter().all(|q| q.distance(p) >= min_sep) {
            chosen.push(p);
            if chosen.len() == need {
                return true;
            }
        }
    }
    false
}

/// Places N pursuers and one evader uniformly over free space.
pub fn spawn_agents<R: Real>(config: &ScenarioConfig<R>, seed: u64) -> Result<WorldState<R>> {
    config.validate()?;
    let mut rng = stream(seed, STREAM_SPAWN);
    let r = config.agents.agent_radius_m;
    let min_sep = r * R::lit(2.0);
    let d_spawn = config.agents.spawn_min_distance_m;
    let (w, h) = (config.map.width_m.as_f64(), config.map.height_m.as_f64());
    let rf = r.as_f64();
    if w <= 2.0 * rf || h <= 2.0 * rf {
        return Err(Error::GenerationFailed { attempts: 0, reason: "map smaller than an agent".into() });
    }
    let n = config.agents.n_pursuers;
    let mut agents: Vec<AgentState<R>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let role = if k < n { Role::Pursuer(k) } else { Role::Evader };
        let mut placed = None;
        for _ in 0..SPAWN_ATTEMPTS {
            let p = Vec2::new(R::lit(rng.gen_range(rf..w - rf)), R::lit(rng.gen_range(rf..h - rf)));
            let heading = R::lit(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
            if !position_is_free(config, p) {
                continue;
            }
            if agents.iter().any(|a| a.position.distance(p) < min_sep) {
                continue;
            }
            if role == Role::Evader && agents.iter().any(|a| a.position.distance(p) < d_spawn) {
                continue;
            }
            placed = Some(AgentState::new(p, heading, R::zero(), role));
            break;
        }
        match placed {
            Some(a) => agents.push(a),
            None => {
                return Err(Error::GenerationFailed {
                    attempts: SPAWN_ATTEMPTS,
                    reason: format!("no valid spawn pose for agent {k}"),
                })
            }
        }
    }
    Ok(WorldState::new(agents))
}

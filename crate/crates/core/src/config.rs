//! Scenario configuration: one TOML document with explicit units in field names.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::reward::CurriculumStage;
use crate::scalar::Real;

/// Source of the fixed training scenario.
pub const TRAINING_MAP_TOML: &str = include_str!("../configs/train10.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularObstacle<R> {
    #[serde(rename = "center_m")]
    pub center: Vec2<R>,
    #[serde(rename = "radius_m")]
    pub radius: R,
}

impl<R: Real> CircularObstacle<R> {
    pub fn new(center: Vec2<R>, radius: R) -> Self {
        Self { center, radius }
    }

    #[inline]
    pub fn contains(&self, p: Vec2<R>) -> bool {
        p.distance(self.center) < self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: Deserialize<'de>"))]
pub struct MapConfig<R> {
    pub width_m: R,
    pub height_m: R,
    pub grid_resolution_m: R,
    #[serde(default)]
    pub obstacles: Vec<CircularObstacle<R>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig<R> {
    pub n_pursuers: usize,
    pub agent_radius_m: R,
    pub v_max_pursuer_mps: R,
    /// Minimum initial pursuer–evader distance.
    pub spawn_min_distance_m: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<R> {
    pub dt_s: R,
    pub t_max_steps: u32,
    pub d_cap_m: R,
    pub rng_seed: u64,
    pub stage: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig<R> {
    pub head_on_damping: R,
    pub grazing_damping: R,
    pub impact_angle_threshold_deg: R,
    pub repulsion_distance_m: R,
    pub repulsion_gain: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "R: Deserialize<'de>"))]
pub struct SensingConfig<R> {
    pub lidar_max_range_m: R,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov_radius_m: Option<R>,
    pub fov_aperture_deg: R,
    /// Also map cells seen inside the FOV disc, not just along lidar rays.
    #[serde(default)]
    pub visual_mapping: bool,
    pub lkp_ttl_steps: u32,
    pub lkp_arrival_radius_m: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningConfig<R> {
    pub refresh_interval_steps: u32,
    pub lookahead_m: R,
    pub inflate_cells: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationConfig<R> {
    pub phi_suppress_deg: R,
    pub w_angle: R,
    pub min_cluster_size: usize,
    pub max_cluster_cells: usize,
    pub k_min: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinationConfig<R> {
    pub d_approach_m: R,
    pub sweep_radius_m: R,
    pub sweep_max_steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig<R> {
    pub k_p_heading: R,
    pub k_p_speed: R,
    pub slow_turn_speed_fraction: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaderConfig<R> {
    pub enabled: bool,
    pub repulsion_range_m: R,
    pub wall_margin_m: R,
    pub heading_gain: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig<R> {
    pub gamma: R,
    pub static_speed_threshold_mps: R,
}

/// Complete scenario description. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig<R> {
    pub map: MapConfig<R>,
    pub agents: AgentConfig<R>,
    pub sim: SimConfig<R>,
    pub physics: PhysicsConfig<R>,
    pub sensing: SensingConfig<R>,
    pub planning: PlanningConfig<R>,
    pub allocation: AllocationConfig<R>,
    pub coordination: CoordinationConfig<R>,
    pub controller: ControllerConfig<R>,
    pub evader: EvaderConfig<R>,
    pub reward: RewardConfig<R>,
    pub stages: Vec<CurriculumStage<R>>,
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

impl<R: Real> ScenarioConfig<R>
where
    R: Serialize + for<'de> Deserialize<'de>,
{
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

impl<R: Real> ScenarioConfig<R> {
    pub fn validate(&self) -> Result<()> {
        let m = &self.map;
        check(m.width_m > R::zero() && m.height_m > R::zero(), || {
            format!("map dimensions must be positive, got {}x{}", m.width_m, m.height_m)
        })?;
        check(m.grid_resolution_m > R::zero(), || "grid resolution must be positive".into())?;
        check(self.sim.dt_s > R::zero(), || "dt must be positive".into())?;
        check(self.sim.t_max_steps > 0, || "t_max must be positive".into())?;
        check(self.sim.d_cap_m > R::zero(), || "capture distance must be positive".into())?;
        check(self.agents.n_pursuers >= 1, || "need at least one pursuer".into())?;
        check(self.agents.agent_radius_m > R::zero(), || "agent radius must be positive".into())?;
        check(self.agents.v_max_pursuer_mps > R::zero(), || "pursuer v_max must be positive".into())?;
        for (i, o) in m.obstacles.iter().enumerate() {
            check(o.radius > R::zero(), || format!("obstacle {i} has non-positive radius"))?;
            let inside = o.center.x - o.radius >= R::zero()
                && o.center.y - o.radius >= R::zero()
                && o.center.x + o.radius <= m.width_m
                && o.center.y + o.radius <= m.height_m;
            check(inside, || format!("obstacle {i} is not fully inside the map"))?;
        }
        check(!self.stages.is_empty(), || "stage table is empty".into())?;
        for (i, s) in self.stages.iter().enumerate() {
            check(usize::from(s.stage_id) == i + 1, || {
                format!("stages must be listed in order 1..n, found id {} at position {i}", s.stage_id)
            })?;
            check(s.fov_radius_m > R::zero(), || format!("stage {} has non-positive FOV", s.stage_id))?;
            check(s.evader_v_max_mps > R::zero(), || {
                format!("stage {} has non-positive evader speed", s.stage_id)
            })?;
        }
        check(
            usize::from(self.sim.stage) >= 1 && usize::from(self.sim.stage) <= self.stages.len(),
            || format!("stage {} not in stage table", self.sim.stage),
        )?;
        let phi = self.allocation.phi_suppress_deg;
        check(phi >= R::zero() && phi <= R::lit(180.0), || "phi_suppress must lie in [0, 180] deg".into())?;
        check(self.planning.refresh_interval_steps >= 1, || "refresh interval must be >= 1".into())?;
        check(self.reward.gamma > R::zero() && self.reward.gamma <= R::one(), || "gamma must lie in (0, 1]".into())?;
        Ok(())
    }

    /// The active curriculum stage.
    pub fn stage(&self) -> &CurriculumStage<R> {
        &self.stages[usize::from(self.sim.stage) - 1]
    }

    /// Target-detection radius: explicit override, else the stage's radius.
    pub fn fov_radius(&self) -> R {
        self.sensing.fov_radius_m.unwrap_or(self.stage().fov_radius_m)
    }

    pub fn grid_width(&self) -> usize {
        cells_along(self.map.width_m, self.map.grid_resolution_m)
    }

    pub fn grid_height(&self) -> usize {
        cells_along(self.map.height_m, self.map.grid_resolution_m)
    }

    /// Same scenario with a different curriculum stage.
    pub fn with_stage(mut self, stage: u8) -> Result<Self> {
        self.sim.stage = stage;
        self.validate()?;
        Ok(self)
    }
}

fn cells_along<R: Real>(len: R, res: R) -> usize {
    // Round first so that e.g. 10 / 0.25 does not land on 39.999…
    let n = (len / res).round();
    let exact = (n * res - len).abs() <= res * R::lit(1e-6);
    let n = if exact { n } else { (len / res).ceil() };
    n.to_usize().unwrap_or(0).max(1)
}

//! Lidar, occlusion-aware target detection and last-known-position tracking.

use serde::{Deserialize, Serialize};

use crate::config::{CircularObstacle, ScenarioConfig};
use crate::geometry::{angle_between, ray_box_exit, ray_circle, segment_hits_circle, wrap_angle, Vec2};
use crate::scalar::Real;
use crate::world::WorldState;

pub const N_RAYS: usize = 8;

/// Two independent 8-ray channels; ray `k` points at `heading + k·45°`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarScan<R> {
    pub wall_ranges: [R; N_RAYS],
    pub teammate_ranges: [R; N_RAYS],
}

#[inline]
pub fn ray_bearing<R: Real>(heading: R, k: usize) -> R {
    wrap_angle(heading + R::FRAC_PI_4() * R::from_usize(k).unwrap())
}

/// Scans from pursuer `index`. The wall channel sees walls and obstacles, the
/// teammate channel sees other pursuers only (never the evader).
pub fn cast_rays<R: Real>(world: &WorldState<R>, index: usize, config: &ScenarioConfig<R>) -> LidarScan<R> {
    let agent = &world.agents[index];
    let max_range = config.sensing.lidar_max_range_m;
    let radius = config.agents.agent_radius_m;
    let mut scan = LidarScan { wall_ranges: [max_range; N_RAYS], teammate_ranges: [max_range; N_RAYS] };
    for k in 0..N_RAYS {
        let dir = Vec2::from_angle(ray_bearing(agent.heading, k));
        let mut wall = ray_box_exit(agent.position, dir, config.map.width_m, config.map.height_m);
        for o in &config.map.obstacles {
            if let Some(t) = ray_circle(agent.position, dir, o.center, o.radius) {
                wall = wall.min(t);
            }
        }
        scan.wall_ranges[k] = wall.min(max_range);

        let mut mate = max_range;
        for (j, other) in world.pursuers().iter().enumerate() {
            if j == index {
                continue;
            }
            if let Some(t) = ray_circle(agent.position, dir, other.position, radius) {
                mate = mate.min(t);
            }
        }
        scan.teammate_ranges[k] = mate;
    }
    scan
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetDetection<R> {
    pub visible: bool,
    pub position: Option<Vec2<R>>,
}

impl<R: Real> TargetDetection<R> {
    pub fn none() -> Self {
        Self { visible: false, position: None }
    }

    pub fn seen(p: Vec2<R>) -> Self {
        Self { visible: true, position: Some(p) }
    }
}

/// True when no obstacle cuts the segment `a`–`b`.
pub fn line_of_sight<R: Real>(a: Vec2<R>, b: Vec2<R>, obstacles: &[CircularObstacle<R>]) -> bool {
    obstacles.iter().all(|o| !segment_hits_circle(a, b, o.center, o.radius))
}

/// Visible iff within `fov_radius`, inside the aperture around the heading,
/// and the sight segment is unobstructed. An aperture of 360° is a full disc.
pub fn detect_target<R: Real>(
    observer_position: Vec2<R>,
    observer_heading: R,
    target: Vec2<R>,
    obstacles: &[CircularObstacle<R>],
    fov_radius: R,
    aperture_deg: R,
) -> TargetDetection<R> {
    let offset = target - observer_position;
    if offset.norm() > fov_radius {
        return TargetDetection::none();
    }
    if aperture_deg < R::lit(360.0) && offset.norm() > R::zero() {
        let half = aperture_deg.to_radians() / R::lit(2.0);
        if angle_between(offset.angle(), observer_heading) > half {
            return TargetDetection::none();
        }
    }
    if !line_of_sight(observer_position, target, obstacles) {
        return TargetDetection::none();
    }
    TargetDetection::seen(target)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LkpRecord<R> {
    pub position: Vec2<R>,
    pub age: u32,
    pub valid: bool,
}

impl<R: Real> LkpRecord<R> {
    pub fn empty() -> Self {
        Self { position: Vec2::zero(), age: 0, valid: false }
    }

    pub fn invalidated(mut self) -> Self {
        self.valid = false;
        self
    }
}

pub fn update_lkp<R: Real>(lkp: LkpRecord<R>, detection: &TargetDetection<R>, ttl: u32) -> LkpRecord<R> {
    match (detection.visible, detection.position) {
        (true, Some(p)) => LkpRecord { position: p, age: 0, valid: true },
        _ => {
            let age = lkp.age.saturating_add(1);
            LkpRecord { position: lkp.position, age, valid: lkp.valid && age <= ttl }
        }
    }
}

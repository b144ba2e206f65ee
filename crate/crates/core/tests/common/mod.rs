//! Independent reference implementations used by the oracle and acceptance tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use pursuit_core::grid::{Cell, GridSpec};

/// Minimum total over all injective row → column maps (rows ≤ cols).
pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == cost.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(cost[row][j] + go(cost, row + 1, used));
                used[j] = false;
            }
        }
        best
    }
    let cols = cost.first().map_or(0, Vec::len);
    go(cost, 0, &mut vec![false; cols])
}

#[derive(PartialEq)]
struct Node(f64, usize);

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap().then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest distances (grid units) on an 8-connected grid with
/// no corner cutting. Unreachable cells are infinite.
pub fn dijkstra(spec: &GridSpec<f64>, blocked: &[bool], source: Cell) -> Vec<f64> {
    let (w, h) = (spec.width as i64, spec.height as i64);
    let free = |c: i64, r: i64| c >= 0 && r >= 0 && c < w && r < h && !blocked[(r * w + c) as usize];
    let mut dist = vec![f64::INFINITY; spec.len()];
    let s = spec.index(source);
    dist[s] = 0.0;
    let mut heap = BinaryHeap::from([Node(0.0, s)]);
    while let Some(Node(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let (c, r) = ((i as i64) % w, (i as i64) / w);
        for dr in -1..=1 {
            for dc in -1..=1 {
                if (dc, dr) == (0, 0) || !free(c + dc, r + dr) {
                    continue;
                }
                let diagonal = dc != 0 && dr != 0;
                if diagonal && (!free(c + dc, r) || !free(c, r + dr)) {
                    continue;
                }
                let nd = d + if diagonal { std::f64::consts::SQRT_2 } else { 1.0 };
                let j = ((r + dr) * w + c + dc) as usize;
                if nd < dist[j] {
                    dist[j] = nd;
                    heap.push(Node(nd, j));
                }
            }
        }
    }
    dist
}

/// Plain farthest-point sampling: first pick maximizes the minimum distance
/// to `anchors`, later picks to the picks so far. First index wins ties.
pub fn naive_fps(points: &[(f64, f64)], anchors: &[(f64, f64)], k: usize) -> Vec<usize> {
    let d = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < k.min(points.len()) {
        let refs: Vec<(f64, f64)> =
            if picked.is_empty() { anchors.to_vec() } else { picked.iter().map(|&i| points[i]).collect() };
        let mut best = None;
        let mut best_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            if picked.contains(&i) {
                continue;
            }
            let m = refs.iter().map(|q| d(*p, *q)).fold(f64::INFINITY, f64::min);
            let m = if refs.is_empty() { 0.0 } else { m };
            if m > best_d {
                best_d = m;
                best = Some(i);
            }
        }
        picked.push(best.unwrap());
    }
    picked
}

/// Worst cases seen while stepping random actions through the physics.
#[derive(Debug, Default, Clone, Copy)]
pub struct PhysicsStats {
    pub steps: usize,
    pub collisions: usize,
    pub max_penetration: f64,
    /// Largest amount a speed left [0, v_max].
    pub max_speed_violation: f64,
    /// Largest post-collision speed minus pre-collision (integrated) speed.
    pub max_collision_speedup: f64,
}

impl PhysicsStats {
    pub fn merge(&mut self, o: PhysicsStats) {
        self.steps += o.steps;
        self.collisions += o.collisions;
        self.max_penetration = self.max_penetration.max(o.max_penetration);
        self.max_speed_violation = self.max_speed_violation.max(o.max_speed_violation);
        self.max_collision_speedup = self.max_collision_speedup.max(o.max_collision_speedup);
    }
}

/// Steps `steps` random, mostly forward actions from a seeded spawn.
pub fn physics_trial(
    config: &pursuit_core::config::ScenarioConfig<f64>,
    seed: u64,
    steps: usize,
) -> PhysicsStats {
    use pursuit_core::physics::{integrate, penetration_depth, step_world, KinematicAction};
    use pursuit_core::world::{spawn_agents, Role};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut world = spawn_agents(config, seed).unwrap();
    let mut stats = PhysicsStats::default();
    let mut prior = false;
    for _ in 0..steps {
        let actions: Vec<KinematicAction<f64>> = world
            .agents
            .iter()
            .map(|_| KinematicAction::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.6)))
            .collect();
        let (next, outcome) = step_world(&world, &actions, config, prior);
        for (i, a) in next.agents.iter().enumerate() {
            let v_max = match a.role {
                Role::Pursuer(_) => config.agents.v_max_pursuer_mps,
                Role::Evader => config.stage().evader_v_max_mps,
            };
            stats.max_penetration = stats.max_penetration.max(penetration_depth(config, a.position));
            stats.max_speed_violation = stats.max_speed_violation.max(-a.speed).max(a.speed - v_max);
            if outcome.flags[i].any() {
                stats.collisions += 1;
                let pre = integrate(&world.agents[i], actions[i], config.sim.dt_s, v_max).speed;
                stats.max_collision_speedup = stats.max_collision_speedup.max(a.speed - pre);
            }
        }
        prior |= outcome.flags[..next.n_pursuers()].iter().any(|f| f.any());
        stats.steps += 1;
        world = next;
    }
    stats
}

//! Frontier extraction, directional farthest-point sampling with sector
//! suppression, and kinematic-cost assignment of exploration goals.

pub mod hungarian;

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{BeliefMap, CellState};
use crate::config::AllocationConfig;
use crate::geometry::{angle_between, Vec2};
use crate::grid::Cell;
use crate::scalar::Real;
use crate::world::AgentState;

pub use hungarian::{hungarian, Assignment};

/// Below this distance from the team centroid a bearing is undefined.
const ZERO_RANGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierCell<R> {
    pub cell: Cell,
    pub position: Vec2<R>,
}

/// Free cell with at least one Unknown 4-neighbour.
pub fn is_frontier<R: Real>(belief: &BeliefMap<R>, cell: Cell) -> bool {
    belief.state(cell) == CellState::Free
        && belief.spec.neighbors4(cell).any(|n| belief.state(n) == CellState::Unknown)
}

/// All frontier cells grouped into 8-connected clusters, each in BFS order.
/// Clusters are discovered in row-major order of their first cell.
pub fn frontier_clusters<R: Real>(belief: &BeliefMap<R>) -> Vec<Vec<Cell>> {
    let spec = &belief.spec;
    let mask: Vec<bool> = (0..spec.len()).map(|i| is_frontier(belief, spec.cell(i))).collect();
    let mut seen = vec![false; spec.len()];
    let mut clusters = Vec::new();
    for start in 0..spec.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([spec.cell(start)]);
        let mut members = Vec::new();
        while let Some(c) = queue.pop_front() {
            members.push(c);
            for n in spec.neighbors8(c) {
                let i = spec.index(n);
                if mask[i] && !seen[i] {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
        clusters.push(members);
    }
    clusters
}

/// Member cell nearest to the cluster centroid (ties to the lower row-major index).
fn snapped_centroid<R: Real>(belief: &BeliefMap<R>, members: &[Cell]) -> Cell {
    let spec = &belief.spec;
    let sum = members.iter().fold(Vec2::zero(), |acc, c| acc + spec.center(*c));
    let centroid = sum * (R::one() / R::from_usize(members.len()).unwrap());
    *members
        .iter()
        .min_by(|a, b| {
            let (da, db) = (spec.center(**a).distance(centroid), spec.center(**b).distance(centroid));
            da.partial_cmp(&db).unwrap().then(spec.index(**a).cmp(&spec.index(**b)))
        })
        .unwrap()
}

/// One representative per frontier cluster of at least `min_cluster_size`
/// cells. Clusters longer than `max_cluster_cells` are cut into consecutive
/// BFS-order chunks so a long boundary yields several goals; a trailing chunk
/// smaller than the minimum joins the previous one.
pub fn extract_frontiers<R: Real>(belief: &BeliefMap<R>, min_cluster_size: usize, max_cluster_cells: usize) -> Vec<FrontierCell<R>> {
    let mut out = Vec::new();
    let chunk = max_cluster_cells.max(min_cluster_size).max(1);
    for members in frontier_clusters(belief) {
        if members.len() < min_cluster_size {
            continue;
        }
        let mut parts: Vec<&[Cell]> = members.chunks(chunk).collect();
        if parts.len() > 1 && parts.last().unwrap().len() < min_cluster_size {
            let tail = parts.pop().unwrap().len();
            let start = members.len() - tail - parts.last().unwrap().len();
            *parts.last_mut().unwrap() = &members[start..];
        }
        for part in parts {
            let cell = snapped_centroid(belief, part);
            out.push(FrontierCell { cell, position: belief.spec.center(cell) });
        }
    }
    out
}

pub fn kinematic_cost<R: Real>(agent: &AgentState<R>, goal: Vec2<R>, v_max: R, w_angle: R) -> R {
    let offset = goal - agent.position;
    let dist = offset.norm();
    let dtheta = if dist < R::lit(ZERO_RANGE) { R::zero() } else { angle_between(agent.heading, offset.angle()) };
    dist / v_max + w_angle * dtheta
}

pub fn centroid<R: Real>(points: &[Vec2<R>]) -> Vec2<R> {
    let sum = points.iter().fold(Vec2::zero(), |acc, p| acc + *p);
    sum * (R::one() / R::from_usize(points.len().max(1)).unwrap())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpsResult {
    /// Indices into the frontier list, in selection order.
    pub selected: Vec<usize>,
    /// Whether each selected index was re-admitted after suppression.
    pub relaxed: Vec<bool>,
    /// Suppressed frontier index paired with the bearing (radians) it was too close to.
    pub suppressed: Vec<(usize, f64)>,
}

pub struct FpsParams<R> {
    pub k: usize,
    /// `None` disables suppression.
    pub phi_suppress: Option<R>,
    /// Minimum number of selections; suppressed candidates are re-admitted to reach it.
    pub min_selected: usize,
}

fn min_distance<R: Real>(p: Vec2<R>, set: &[Vec2<R>]) -> R {
    set.iter().map(|q| p.distance(*q)).fold(R::infinity(), R::min)
}

/// Farthest-point sampling. `locked` goals act as pre-selected picks: they
/// count as distance references and take part in suppression. The seed
/// maximizes its minimum distance to `anchors` (agent positions) and locked
/// goals; later picks maximize it to locked goals plus earlier picks.
/// Bearings are measured from `center`.
pub fn directional_fps<R: Real>(
    frontiers: &[Vec2<R>],
    anchors: &[Vec2<R>],
    locked: &[Vec2<R>],
    center: Vec2<R>,
    params: &FpsParams<R>,
) -> FpsResult {
    let bearing = |p: Vec2<R>| {
        let d = p - center;
        (d.norm() >= R::lit(ZERO_RANGE)).then(|| d.angle())
    };
    let mut refs: Vec<Vec2<R>> = anchors.iter().chain(locked).copied().collect();
    let mut taken_bearings: Vec<R> = locked.iter().filter_map(|p| bearing(*p)).collect();
    let mut remaining: Vec<usize> = (0..frontiers.len()).collect();
    let mut out = FpsResult { selected: Vec::new(), relaxed: Vec::new(), suppressed: Vec::new() };

    let argmax = |remaining: &[usize], refs: &[Vec2<R>]| -> usize {
        let mut best = 0;
        let mut best_d = -R::one();
        for (slot, &i) in remaining.iter().enumerate() {
            let d = if refs.is_empty() { R::zero() } else { min_distance(frontiers[i], refs) };
            if d > best_d {
                best_d = d;
                best = slot;
            }
        }
        best
    };

    while out.selected.len() < params.k && !remaining.is_empty() {
        let slot = argmax(&remaining, &refs);
        let i = remaining.remove(slot);
        let b = bearing(frontiers[i]);
        let conflict = match (params.phi_suppress, b) {
            (Some(phi), Some(b)) => taken_bearings.iter().copied().find(|t| angle_between(*t, b) < phi),
            _ => None,
        };
        if let Some(t) = conflict {
            out.suppressed.push((i, t.as_f64()));
            continue;
        }
        if out.selected.is_empty() {
            refs = locked.to_vec();
        }
        out.selected.push(i);
        out.relaxed.push(false);
        refs.push(frontiers[i]);
        if let Some(b) = b {
            taken_bearings.push(b);
        }
    }

    // Re-admit suppressed candidates, farthest first, when too few survived.
    let target = params.min_selected.min(params.k);
    let mut pool: Vec<usize> = out.suppressed.iter().map(|(i, _)| *i).collect();
    while out.selected.len() < target && !pool.is_empty() {
        let slot = argmax(&pool, &refs);
        let i = pool.remove(slot);
        out.selected.push(i);
        out.relaxed.push(true);
        refs.push(frontiers[i]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationMode {
    /// Directional FPS with sector suppression, then Hungarian assignment.
    Directional,
    /// Each requester takes its nearest free frontier.
    Greedy,
    /// Each requester takes a uniformly random free frontier.
    Random,
    /// FPS and Hungarian assignment without sector suppression.
    NoSuppress,
}

impl AllocationMode {
    pub const ALL: [AllocationMode; 4] = [Self::Directional, Self::Greedy, Self::Random, Self::NoSuppress];

    pub fn name(self) -> &'static str {
        match self {
            Self::Directional => "directional",
            Self::Greedy => "greedy",
            Self::Random => "random",
            Self::NoSuppress => "no-suppress",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Inputs for one batched allocation round.
pub struct AllocationRequest<'a, R> {
    /// Pursuer indices asking for a goal, ascending.
    pub requesters: &'a [usize],
    /// Current state of every pursuer.
    pub pursuers: &'a [AgentState<R>],
    /// Goals currently locked by other agents.
    pub locked: &'a [Vec2<R>],
    pub frontiers: &'a [FrontierCell<R>],
    /// `reachable[r][f]`: frontier `f` is reachable by requester `r`.
    pub reachable: &'a [Vec<bool>],
    pub v_max: R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationRound<R> {
    pub requesters: Vec<usize>,
    pub candidates: Vec<Vec2<R>>,
    /// Whether each candidate was re-admitted after suppression.
    pub relaxed: Vec<bool>,
    /// Suppressed positions and the bearing they conflicted with.
    pub suppressed: Vec<(Vec2<R>, f64)>,
    /// Requester × candidate, seconds-equivalent; infinite when unreachable.
    pub cost_matrix: Vec<Vec<R>>,
    /// Goal per requester, `None` when nothing could be assigned.
    pub assignment: Vec<Option<Vec2<R>>>,
}

/// Runs one round. `rng` is only consulted in random mode.
pub fn allocate<R: Real>(
    req: &AllocationRequest<'_, R>,
    params: &AllocationConfig<R>,
    mode: AllocationMode,
    rng: &mut impl Rng,
) -> AllocationRound<R> {
    let n = req.requesters.len();
    let mut round = AllocationRound {
        requesters: req.requesters.to_vec(),
        candidates: Vec::new(),
        relaxed: Vec::new(),
        suppressed: Vec::new(),
        cost_matrix: Vec::new(),
        assignment: vec![None; n],
    };
    // Frontiers someone can reach and nobody already holds.
    let half_cell = R::lit(1e-6);
    let usable: Vec<usize> = (0..req.frontiers.len())
        .filter(|&f| req.reachable.iter().any(|r| r[f]))
        .filter(|&f| req.locked.iter().all(|g| g.distance(req.frontiers[f].position) > half_cell))
        .collect();
    if n == 0 || usable.is_empty() {
        return round;
    }
    let positions: Vec<Vec2<R>> = usable.iter().map(|&f| req.frontiers[f].position).collect();

    match mode {
        AllocationMode::Greedy | AllocationMode::Random => {
            let mut taken = vec![false; usable.len()];
            for (r, &agent) in req.requesters.iter().enumerate() {
                let open: Vec<usize> = (0..usable.len()).filter(|&c| !taken[c] && req.reachable[r][usable[c]]).collect();
                if open.is_empty() {
                    continue;
                }
                let pick = if mode == AllocationMode::Greedy {
                    let p = req.pursuers[agent].position;
                    *open
                        .iter()
                        .min_by(|a, b| positions[**a].distance(p).partial_cmp(&positions[**b].distance(p)).unwrap())
                        .unwrap()
                } else {
                    open[rng.gen_range(0..open.len())]
                };
                taken[pick] = true;
                round.assignment[r] = Some(positions[pick]);
            }
            round.candidates = round.assignment.iter().flatten().copied().collect();
            round.relaxed = vec![false; round.candidates.len()];
        }
        AllocationMode::Directional | AllocationMode::NoSuppress => {
            let k = (2 * n).max(params.k_min).min(usable.len());
            let all_positions: Vec<Vec2<R>> = req.pursuers.iter().map(|a| a.position).collect();
            let fps = directional_fps(
                &positions,
                &all_positions,
                req.locked,
                centroid(&all_positions),
                &FpsParams {
                    k,
                    phi_suppress: (mode == AllocationMode::Directional).then(|| params.phi_suppress_deg.to_radians()),
                    min_selected: n,
                },
            );
            round.candidates = fps.selected.iter().map(|&i| positions[i]).collect();
            round.relaxed = fps.relaxed.clone();
            round.suppressed = fps.suppressed.iter().map(|&(i, b)| (positions[i], b)).collect();
            round.cost_matrix = req
                .requesters
                .iter()
                .enumerate()
                .map(|(r, &agent)| {
                    fps.selected
                        .iter()
                        .map(|&i| {
                            if req.reachable[r][usable[i]] {
                                kinematic_cost(&req.pursuers[agent], positions[i], req.v_max, params.w_angle)
                            } else {
                                R::infinity()
                            }
                        })
                        .collect()
                })
                .collect();
            // Requesters that can reach none of the candidates sit this round out.
            let feasible: Vec<usize> =
                (0..n).filter(|&r| round.cost_matrix[r].iter().any(|c| c.is_finite())).collect();
            let sub: Vec<Vec<R>> = feasible.iter().map(|&r| round.cost_matrix[r].clone()).collect();
            if let Ok(a) = hungarian(&sub) {
                for (slot, col) in a.columns.iter().enumerate() {
                    round.assignment[feasible[slot]] = col.map(|c| round.candidates[c]);
                }
            }
        }
    }
    round
}

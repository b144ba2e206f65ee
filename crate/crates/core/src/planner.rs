//! A* on the belief grid, cached plans, local waypoint and body-frame guidance.
//!
//! The grid is 8-connected with octile edge costs scaled by the resolution.
//! Unknown cells are traversable. Occupied cells are blocked and, when
//! inflation is enabled, so is every cell within `inflate_cells` of one (map
//! borders count as occupied for inflation). Diagonal moves may not cut the
//! corner of a blocked cell.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::belief::{BeliefMap, CellState};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::{Cell, GridSpec};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct PlanningGrid<R> {
    pub spec: GridSpec<R>,
    occupied: Vec<bool>,
    blocked: Vec<bool>,
    inflate_cells: u32,
}

impl<R: Real> PlanningGrid<R> {
    /// Grid where exactly the given cells are occupied, without inflation.
    pub fn from_occupied(spec: GridSpec<R>, occupied: Vec<bool>) -> Self {
        assert_eq!(occupied.len(), spec.len());
        let blocked = occupied.clone();
        Self { spec, occupied, blocked, inflate_cells: 0 }
    }

    pub fn from_belief(belief: &BeliefMap<R>, inflate_cells: u32) -> Self {
        let spec = belief.spec;
        let occupied: Vec<bool> = belief.cells().iter().map(|c| *c == CellState::Occupied).collect();
        let mut blocked = occupied.clone();
        let k = inflate_cells as isize;
        if k > 0 {
            let (w, h) = (spec.width as isize, spec.height as isize);
            for row in 0..h {
                for col in 0..w {
                    let near_border = col < k || row < k || col >= w - k || row >= h - k;
                    if near_border {
                        blocked[(row * w + col) as usize] = true;
                    }
                }
            }
            for (i, occ) in occupied.iter().enumerate() {
                if !occ {
                    continue;
                }
                let (col, row) = spec.cell(i);
                for dr in -k..=k {
                    for dc in -k..=k {
                        let (c, r) = (col as isize + dc, row as isize + dr);
                        if spec.contains(c, r) {
                            blocked[(r * w + c) as usize] = true;
                        }
                    }
                }
            }
        }
        Self { spec, occupied, blocked, inflate_cells }
    }

    #[inline]
    pub fn is_occupied(&self, cell: Cell) -> bool {
        self.occupied[self.spec.index(cell)]
    }

    #[inline]
    pub fn is_blocked(&self, cell: Cell) -> bool {
        self.blocked[self.spec.index(cell)]
    }

    /// Blocked cells that become passable when planning from `start` to
    /// `goal`: every non-occupied cell within `inflate_cells + 1` of either
    /// endpoint, so an agent pressed against an obstacle (or standing in a
    /// cell that overlaps one) can still leave it.
    fn endpoint_overrides(&self, start: Cell, goal: Cell) -> Vec<usize> {
        let mut out = vec![self.spec.index(start)];
        let k = self.inflate_cells as isize + 1;
        for end in [start, goal] {
            if !self.is_blocked(end) {
                continue;
            }
            for dr in -k..=k {
                for dc in -k..=k {
                    let (c, r) = (end.0 as isize + dc, end.1 as isize + dr);
                    if self.spec.contains(c, r) {
                        let i = (r as usize) * self.spec.width + c as usize;
                        if self.blocked[i] && !self.occupied[i] {
                            out.push(i);
                        }
                    }
                }
            }
        }
        out
    }

    /// Cells reachable from `start` under the same passability rules as A*.
    pub fn reachable_from(&self, start: Cell) -> Vec<bool> {
        let overrides = self.endpoint_overrides(start, start);
        let passable = |i: usize| !self.blocked[i] || overrides.contains(&i);
        let mut seen = vec![false; self.spec.len()];
        let mut stack = vec![start];
        seen[self.spec.index(start)] = true;
        while let Some(c) = stack.pop() {
            for (n, _) in moves(&self.spec, c, &passable) {
                let i = self.spec.index(n);
                if !seen[i] {
                    seen[i] = true;
                    stack.push(n);
                }
            }
        }
        seen
    }
}

/// Legal moves from `c` with their unit costs (1 or √2).
fn moves<'a, R: Real>(
    spec: &'a GridSpec<R>,
    (col, row): Cell,
    passable: &'a impl Fn(usize) -> bool,
) -> impl Iterator<Item = (Cell, R)> + 'a {
    const OFFS: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
    OFFS.iter().filter_map(move |&(dc, dr)| {
        let (c, r) = (col as isize + dc, row as isize + dr);
        if !spec.contains(c, r) {
            return None;
        }
        let idx = |c: isize, r: isize| (r as usize) * spec.width + c as usize;
        if !passable(idx(c, r)) {
            return None;
        }
        if dc != 0 && dr != 0 {
            // no corner cutting
            if !passable(idx(col as isize + dc, row as isize)) || !passable(idx(col as isize, row as isize + dr)) {
                return None;
            }
            Some(((c as usize, r as usize), R::SQRT_2()))
        } else {
            Some(((c as usize, r as usize), R::one()))
        }
    })
}

/// Octile distance between cells in grid units.
pub fn octile<R: Real>(a: Cell, b: Cell) -> R {
    let dx = a.0.abs_diff(b.0);
    let dy = a.1.abs_diff(b.1);
    let (lo, hi) = (dx.min(dy), dx.max(dy));
    R::from_usize(hi - lo).unwrap() + R::SQRT_2() * R::from_usize(lo).unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPath<R> {
    pub cells: Vec<Cell>,
    /// Metres.
    pub cost: R,
}

impl<R: Real> GridPath<R> {
    pub fn points(&self, spec: &GridSpec<R>) -> Vec<Vec2<R>> {
        self.cells.iter().map(|c| spec.center(*c)).collect()
    }
}

struct Open<R> {
    f: R,
    h: R,
    index: usize,
    g: R,
}

impl<R: Real> PartialEq for Open<R> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<R: Real> Eq for Open<R> {}
impl<R: Real> PartialOrd for Open<R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<R: Real> Ord for Open<R> {
    // BinaryHeap is a max-heap: reverse so the smallest (f, h, index) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |o: &Self| (o.f, o.h);
        let (a, b) = (key(self), key(other));
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal))
            .then(other.index.cmp(&self.index))
    }
}

/// A* between cells. `on_expand(index, g, h)` sees every expanded node, with
/// `g` and `h` in grid units. Ties on f break toward lower h, then lower
/// row-major index.
pub fn astar_cells<R: Real>(
    grid: &PlanningGrid<R>,
    start: Cell,
    goal: Cell,
    mut on_expand: impl FnMut(usize, R, R),
) -> Option<GridPath<R>> {
    let spec = &grid.spec;
    if grid.is_occupied(goal) {
        return None;
    }
    let overrides = grid.endpoint_overrides(start, goal);
    let passable = |i: usize| !grid.blocked[i] || overrides.contains(&i);
    let goal_i = spec.index(goal);
    if !passable(goal_i) {
        return None;
    }
    let n = spec.len();
    let mut g_score = vec![R::infinity(); n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let s = spec.index(start);
    g_score[s] = R::zero();
    let h0 = octile(start, goal);
    open.push(Open { f: h0, h: h0, index: s, g: R::zero() });

    while let Some(Open { index, g, h, .. }) = open.pop() {
        if closed[index] || g > g_score[index] {
            continue;
        }
        closed[index] = true;
        on_expand(index, g, h);
        if index == goal_i {
            let mut cells = vec![spec.cell(index)];
            let mut cur = index;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push(spec.cell(cur));
            }
            cells.reverse();
            return Some(GridPath { cells, cost: g * spec.resolution });
        }
        let here = spec.cell(index);
        for (next, step) in moves(spec, here, &passable) {
            let ni = spec.index(next);
            if closed[ni] {
                continue;
            }
            let tentative = g + step;
            if tentative < g_score[ni] {
                g_score[ni] = tentative;
                parent[ni] = index;
                let h = octile(next, goal);
                open.push(Open { f: tentative + h, h, index: ni, g: tentative });
            }
        }
    }
    None
}

/// Minimum-cost grid path between the cells containing `start` and `goal`.
pub fn astar<R: Real>(grid: &PlanningGrid<R>, start: Vec2<R>, goal: Vec2<R>) -> Option<GridPath<R>> {
    let s = grid.spec.clamped_cell_of(start);
    let g = grid.spec.cell_of(goal)?;
    astar_cells(grid, s, g, |_, _, _| {})
}

/// Geodesic (A* path) cost in metres, `None` when unreachable.
pub fn geodesic_cost<R: Real>(grid: &PlanningGrid<R>, p: Vec2<R>, g: Vec2<R>) -> Option<R> {
    astar(grid, p, g).map(|path| path.cost)
}

/// Farthest path point within `lookahead` of `p`. Falls back to the first
/// point when the agent has drifted more than `lookahead` from the path.
pub fn extract_waypoint<R: Real>(path: &[Vec2<R>], p: Vec2<R>, lookahead: R) -> Vec2<R> {
    assert!(!path.is_empty(), "waypoint extraction needs a non-empty path");
    let mut best: Option<(R, Vec2<R>)> = None;
    for w in path {
        let d = w.distance(p);
        if d <= lookahead && best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, *w));
        }
    }
    best.map(|(_, w)| w).unwrap_or(path[0])
}

/// Direction to the waypoint expressed in the agent's body frame.
pub fn guidance_vector<R: Real>(p: Vec2<R>, heading: R, waypoint: Vec2<R>) -> Result<Vec2<R>> {
    let offset = waypoint - p;
    let n = offset.norm();
    if n < R::lit(1e-9) {
        return Err(Error::DegenerateWaypoint);
    }
    Ok((offset * (R::one() / n)).rotated(-heading))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanCache<R> {
    pub path: Vec<Cell>,
    pub points: Vec<Vec2<R>>,
    pub cost: Option<R>,
    pub goal: Vec2<R>,
    pub computed_at: u32,
    pub refresh_interval: u32,
}

impl<R: Real> PlanCache<R> {
    pub fn compute(grid: &PlanningGrid<R>, step: u32, p: Vec2<R>, goal: Vec2<R>, refresh_interval: u32) -> Self {
        let path = astar(grid, p, goal);
        let points = path.as_ref().map(|x| x.points(&grid.spec)).unwrap_or_default();
        Self {
            cost: path.as_ref().map(|x| x.cost),
            path: path.map(|x| x.cells).unwrap_or_default(),
            points,
            goal,
            computed_at: step,
            refresh_interval,
        }
    }

    pub fn reachable(&self) -> bool {
        !self.path.is_empty()
    }

    /// Whether the cached path must be recomputed at `step` for `goal`.
    pub fn is_stale(&self, step: u32, goal: Vec2<R>, grid: &PlanningGrid<R>) -> bool {
        step.saturating_sub(self.computed_at) >= self.refresh_interval
            || goal != self.goal
            || self.path.iter().any(|c| grid.is_occupied(*c))
    }
}

/// Recomputes iff the interval elapsed, the goal moved, or the path now
/// crosses an occupied cell; otherwise returns the cache untouched.
pub fn refresh_if_due<R: Real>(
    cache: Option<PlanCache<R>>,
    step: u32,
    p: Vec2<R>,
    goal: Vec2<R>,
    grid: &PlanningGrid<R>,
    refresh_interval: u32,
) -> PlanCache<R> {
    match cache {
        Some(c) if !c.is_stale(step, goal, grid) => c,
        _ => PlanCache::compute(grid, step, p, goal, refresh_interval),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceResult<R> {
    pub waypoint: Vec2<R>,
    /// Unit vector in the body frame, or zero when unreachable.
    pub v_guide: Vec2<R>,
    /// Cost of the cached plan in metres.
    pub geodesic_cost: Option<R>,
    pub reachable: bool,
}

impl<R: Real> GuidanceResult<R> {
    pub fn unreachable(p: Vec2<R>) -> Self {
        Self { waypoint: p, v_guide: Vec2::zero(), geodesic_cost: None, reachable: false }
    }
}

/// Guidance from a cached plan. When the waypoint coincides with the agent,
/// the direction to the goal is used, and failing that straight ahead.
pub fn guidance_from_cache<R: Real>(cache: &PlanCache<R>, p: Vec2<R>, heading: R, lookahead: R) -> GuidanceResult<R> {
    if !cache.reachable() {
        return GuidanceResult::unreachable(p);
    }
    let waypoint = extract_waypoint(&cache.points, p, lookahead);
    let v_guide = guidance_vector(p, heading, waypoint)
        .or_else(|_| guidance_vector(p, heading, cache.goal))
        .unwrap_or(Vec2::new(R::one(), R::zero()));
    GuidanceResult { waypoint, v_guide, geodesic_cost: cache.cost, reachable: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn open_grid(w: usize, h: usize, res: f64) -> PlanningGrid<f64> {
        let spec = GridSpec::new(w, h, res);
        PlanningGrid::from_occupied(spec, vec![false; spec.len()])
    }

    #[test]
    fn corner_to_corner_on_empty_grid() {
        let g = open_grid(5, 5, 0.25);
        let p = astar_cells(&g, (0, 0), (4, 4), |_, _, _| {}).unwrap();
        assert_abs_diff_eq!(p.cost, 4.0 * SQRT_2 * 0.25, epsilon = 1e-12);
        assert_eq!(p.cells.len(), 5);
    }

    #[test]
    fn start_equals_goal() {
        let g = open_grid(5, 5, 0.25);
        let p = astar_cells(&g, (2, 2), (2, 2), |_, _, _| {}).unwrap();
        assert_eq!(p.cells, vec![(2, 2)]);
        assert_eq!(p.cost, 0.0);
    }

    #[test]
    fn occupied_goal_is_unreachable() {
        let spec = GridSpec::new(5, 5, 1.0);
        let mut occ = vec![false; 25];
        occ[spec.index((4, 4))] = true;
        let g = PlanningGrid::from_occupied(spec, occ);
        assert!(astar_cells(&g, (0, 0), (4, 4), |_, _, _| {}).is_none());
    }

    #[test]
    fn no_corner_cutting() {
        let spec = GridSpec::new(3, 3, 1.0);
        let mut occ = vec![false; 9];
        occ[spec.index((1, 0))] = true;
        let g = PlanningGrid::from_occupied(spec, occ);
        let p = astar_cells(&g, (0, 0), (1, 1), |_, _, _| {}).unwrap();
        // diagonal would clip (1,0); must go up then right
        assert_eq!(p.cells, vec![(0, 0), (0, 1), (1, 1)]);
        assert_abs_diff_eq!(p.cost, 2.0);
    }

    #[test]
    fn inflation_blocks_neighbours_but_frees_endpoints() {
        let spec = GridSpec::new(10, 10, 1.0);
        let mut b: BeliefMap<f64> = BeliefMap::new(spec);
        b.observe((5, 5), CellState::Occupied);
        let g = PlanningGrid::from_belief(&b, 1);
        assert!(g.is_blocked((4, 4)) && g.is_blocked((6, 6)) && g.is_blocked((0, 3)));
        assert!(!g.is_blocked((3, 3)));
        // starting inside the inflated ring still plans out of it
        let p = astar_cells(&g, (4, 5), (2, 5), |_, _, _| {}).unwrap();
        assert_eq!(p.cells.first(), Some(&(4, 5)));
        assert_eq!(p.cells.last(), Some(&(2, 5)));
    }

    #[test]
    fn straight_clear_line() {
        let g = open_grid(40, 40, 0.25);
        let cost = geodesic_cost(&g, Vec2::new(1.125, 5.125), Vec2::new(4.125, 5.125)).unwrap();
        assert_abs_diff_eq!(cost, 3.0, epsilon = 1e-12);
        assert_eq!(geodesic_cost(&g, Vec2::new(1.1, 1.1), Vec2::new(1.2, 1.2)), Some(0.0));
    }

    #[test]
    fn waypoint_on_straight_path() {
        let path: Vec<Vec2<f64>> = (0..=16).map(|i| Vec2::new(i as f64 * 0.25, 0.0)).collect();
        assert_eq!(extract_waypoint(&path, Vec2::zero(), 1.5), Vec2::new(1.5, 0.0));
        let short = &path[..4];
        assert_eq!(extract_waypoint(short, Vec2::zero(), 1.5), Vec2::new(0.75, 0.0));
        let far = [Vec2::new(5.0, 5.0), Vec2::new(6.0, 5.0)];
        assert_eq!(extract_waypoint(&far, Vec2::zero(), 1.5), Vec2::new(5.0, 5.0));
    }

    #[test]
    fn guidance_vector_examples() {
        let p = Vec2::new(1.0, 1.0);
        let v = guidance_vector(p, 0.0, Vec2::new(3.0, 1.0)).unwrap();
        assert_abs_diff_eq!(v.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, 0.0, epsilon = 1e-12);
        let v = guidance_vector(p, FRAC_PI_2, Vec2::new(1.0, 4.0)).unwrap();
        assert_abs_diff_eq!(v.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, 0.0, epsilon = 1e-12);
        let v = guidance_vector(p, FRAC_PI_4, Vec2::new(2.0, 1.0)).unwrap();
        assert_abs_diff_eq!(v.x, SQRT_2 / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, -SQRT_2 / 2.0, epsilon = 1e-12);
        assert!(matches!(guidance_vector(p, 0.0, p), Err(Error::DegenerateWaypoint)));
    }

    #[test]
    fn cache_refresh_rules() {
        let spec = GridSpec::new(20, 20, 0.25);
        let mut b: BeliefMap<f64> = BeliefMap::new(spec);
        let grid = PlanningGrid::from_belief(&b, 0);
        let p = spec.center((2, 2));
        let goal = spec.center((15, 2));
        let cache = PlanCache::compute(&grid, 0, p, goal, 3);
        assert!(cache.reachable());

        let same = refresh_if_due(Some(cache.clone()), 2, p, goal, &grid, 3);
        assert_eq!(same, cache);

        let due = refresh_if_due(Some(cache.clone()), 3, p, goal, &grid, 3);
        assert_eq!(due.computed_at, 3);

        let moved = refresh_if_due(Some(cache.clone()), 1, p, spec.center((15, 10)), &grid, 3);
        assert_eq!(moved.computed_at, 1);
        assert_eq!(moved.goal, spec.center((15, 10)));

        b.observe(cache.path[5], CellState::Occupied);
        let grid2 = PlanningGrid::from_belief(&b, 0);
        let replanned = refresh_if_due(Some(cache.clone()), 1, p, goal, &grid2, 3);
        assert_eq!(replanned.computed_at, 1);
        assert!(!replanned.path.contains(&cache.path[5]));
    }
}

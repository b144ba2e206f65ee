//! Occupancy belief over {Unknown, Free, Occupied} with visit bookkeeping.
//!
//! Cell knowledge only ever grows: Unknown → Free → Occupied. A Free cell may
//! be upgraded to Occupied when a later observation proves it overlaps an
//! obstacle, but nothing is ever downgraded.

use std::fmt::Write as _;

use crate::config::CircularObstacle;
use crate::error::{Error, Result};
use crate::geometry::{segment_hits_circle, Vec2};
use crate::grid::{Cell, GridSpec};
use crate::scalar::Real;
use crate::sensing::{ray_bearing, LidarScan, N_RAYS};
use crate::world::AgentState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

impl CellState {
    pub fn code(self) -> char {
        match self {
            CellState::Unknown => '?',
            CellState::Free => '.',
            CellState::Occupied => '#',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        match c {
            '?' => Some(CellState::Unknown),
            '.' => Some(CellState::Free),
            '#' => Some(CellState::Occupied),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefMap<R> {
    pub spec: GridSpec<R>,
    cells: Vec<CellState>,
    visit_count: Vec<u32>,
    /// Clock value of the most recent visit, 0 = never.
    last_visit: Vec<u32>,
    /// Clock value of the last time the cell was inside a visual footprint, 0 = never.
    last_seen: Vec<u32>,
    clock: u32,
}

impl<R: Real> BeliefMap<R> {
    pub fn new(spec: GridSpec<R>) -> Self {
        let n = spec.len();
        Self {
            spec,
            cells: vec![CellState::Unknown; n],
            visit_count: vec![0; n],
            last_visit: vec![0; n],
            last_seen: vec![0; n],
            clock: 1,
        }
    }

    #[inline]
    pub fn state(&self, cell: Cell) -> CellState {
        self.cells[self.spec.index(cell)]
    }

    #[inline]
    pub fn state_at(&self, index: usize) -> CellState {
        self.cells[index]
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn visit_count(&self, cell: Cell) -> u32 {
        self.visit_count[self.spec.index(cell)]
    }

    /// Clock of the last visit to `cell` (0 when never visited).
    pub fn last_visit(&self, cell: Cell) -> u32 {
        self.last_visit[self.spec.index(cell)]
    }

    /// Clock of the last time `cell` was in clear view (0 when never).
    pub fn last_seen(&self, cell: Cell) -> u32 {
        self.last_seen[self.spec.index(cell)]
    }

    /// Advances the visit clock; call once per simulation step.
    pub fn tick(&mut self) {
        self.clock += 1;
    }

    /// Raises the knowledge of a cell. Returns true when it was Unknown before.
    pub fn observe(&mut self, cell: Cell, state: CellState) -> bool {
        let i = self.spec.index(cell);
        let before = self.cells[i];
        if state > before {
            self.cells[i] = state;
        }
        before == CellState::Unknown && state != CellState::Unknown
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().filter(|c| **c != CellState::Unknown).count()
    }

    /// Lidar update: cells along each wall ray up to the hit become Free, the
    /// cell just beyond a hit (< max range) becomes Occupied, and the agent's
    /// own cell is marked visited. Returns the number of newly known cells.
    pub fn update_from_scan(&mut self, agent: &AgentState<R>, scan: &LidarScan<R>, max_range: R) -> usize {
        let eps = self.spec.resolution * R::lit(1e-3);
        let mut fresh = 0;
        for k in 0..N_RAYS {
            let dir = Vec2::from_angle(ray_bearing(agent.heading, k));
            let hit = scan.wall_ranges[k];
            let spec = self.spec;
            let mut cells = Vec::new();
            traverse(&spec, agent.position, dir, (hit - eps).max(R::zero()), |c| cells.push(c));
            for c in cells {
                fresh += usize::from(self.observe(c, CellState::Free));
            }
            if hit < max_range {
                if let Some(c) = spec.cell_of(agent.position + dir * (hit + eps)) {
                    fresh += usize::from(self.observe(c, CellState::Occupied));
                }
            }
        }
        if let Some(c) = self.spec.cell_of(agent.position) {
            fresh += usize::from(self.observe(c, CellState::Free));
            let i = self.spec.index(c);
            self.visit_count[i] += 1;
            self.last_visit[i] = self.clock;
        }
        fresh
    }

    /// Visual update within `radius`: a cell whose centre is in clear line of
    /// sight becomes Free; a cell whose centre lies inside an obstacle that is
    /// itself unoccluded becomes Occupied. Returns newly known cells.
    pub fn reveal_visible_disc(&mut self, origin: Vec2<R>, radius: R, obstacles: &[CircularObstacle<R>]) -> usize {
        self.visit_disc(origin, radius, obstacles, true)
    }

    /// Stamps `last_seen` on the cells `reveal_visible_disc` would touch
    /// without changing any cell state.
    pub fn mark_seen_disc(&mut self, origin: Vec2<R>, radius: R, obstacles: &[CircularObstacle<R>]) {
        self.visit_disc(origin, radius, obstacles, false);
    }

    fn visit_disc(&mut self, origin: Vec2<R>, radius: R, obstacles: &[CircularObstacle<R>], write: bool) -> usize {
        let spec = self.spec;
        let lo = spec.clamped_cell_of(origin - Vec2::new(radius, radius));
        let hi = spec.clamped_cell_of(origin + Vec2::new(radius, radius));
        let nearby: Vec<&CircularObstacle<R>> = obstacles
            .iter()
            .filter(|o| o.center.distance(origin) <= radius + o.radius)
            .collect();
        let mut fresh = 0;
        for row in lo.1..=hi.1 {
            for col in lo.0..=hi.0 {
                let cell = (col, row);
                let center = spec.center(cell);
                if center.distance(origin) > radius {
                    continue;
                }
                let i = spec.index(cell);
                let host = nearby.iter().position(|o| o.contains(center));
                let occluded = nearby
                    .iter()
                    .enumerate()
                    .any(|(k, o)| Some(k) != host && segment_hits_circle(origin, center, o.center, o.radius));
                if occluded {
                    continue;
                }
                self.last_seen[i] = self.clock;
                if !write {
                    continue;
                }
                let state = if host.is_some() { CellState::Occupied } else { CellState::Free };
                fresh += usize::from(self.observe(cell, state));
            }
        }
        fresh
    }

    /// Cell-wise union with another map of the same shape.
    pub fn merge(&mut self, other: &BeliefMap<R>) {
        assert_eq!(self.spec, other.spec, "belief maps must share a grid");
        for i in 0..self.cells.len() {
            self.cells[i] = self.cells[i].max(other.cells[i]);
            self.visit_count[i] += other.visit_count[i];
            self.last_visit[i] = self.last_visit[i].max(other.last_visit[i]);
            self.last_seen[i] = self.last_seen[i].max(other.last_seen[i]);
        }
        self.clock = self.clock.max(other.clock);
    }

    /// Portable text dump: a short header then one line per row (row 0
    /// first) using `?` Unknown, `.` Free, `#` Occupied.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "belief-grid v1");
        let _ = writeln!(out, "width {}", self.spec.width);
        let _ = writeln!(out, "height {}", self.spec.height);
        let _ = writeln!(out, "resolution_m {}", self.spec.resolution);
        for row in 0..self.spec.height {
            let line: String = (0..self.spec.width).map(|col| self.state((col, row)).code()).collect();
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Config(format!("bad belief dump: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some("belief-grid v1") {
            return Err(bad("missing header"));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad("truncated header"))?;
            line.strip_prefix(name)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| bad(&format!("expected {name}")))
        };
        let width: usize = field("width")?.parse().map_err(|_| bad("width"))?;
        let height: usize = field("height")?.parse().map_err(|_| bad("height"))?;
        let res: f64 = field("resolution_m")?.parse().map_err(|_| bad("resolution"))?;
        let mut map = BeliefMap::new(GridSpec::new(width, height, R::lit(res)));
        for row in 0..height {
            let line = lines.next().ok_or_else(|| bad("missing rows"))?;
            if line.chars().count() != width {
                return Err(bad("row width mismatch"));
            }
            for (col, ch) in line.chars().enumerate() {
                let s = CellState::from_code(ch).ok_or_else(|| bad("unknown cell code"))?;
                map.cells[row * width + col] = s;
            }
        }
        Ok(map)
    }
}

/// Visits every cell pierced by the segment from `origin` along unit `dir`
/// for `length` metres, in order, stopping at the grid border.
pub fn traverse<R: Real>(spec: &GridSpec<R>, origin: Vec2<R>, dir: Vec2<R>, length: R, mut visit: impl FnMut(Cell)) {
    let Some((mut col, mut row)) = spec.cell_of(origin) else {
        return;
    };
    let res = spec.resolution;
    let axis = |p: R, d: R, idx: usize| -> (isize, R, R) {
        if d > R::zero() {
            let boundary = (R::from_usize(idx).unwrap() + R::one()) * res;
            (1, (boundary - p) / d, res / d)
        } else if d < R::zero() {
            let boundary = R::from_usize(idx).unwrap() * res;
            (-1, (boundary - p) / d, -res / d)
        } else {
            (0, R::infinity(), R::infinity())
        }
    };
    let (step_c, mut t_max_c, dt_c) = axis(origin.x, dir.x, col);
    let (step_r, mut t_max_r, dt_r) = axis(origin.y, dir.y, row);
    loop {
        visit((col, row));
        let t_next = t_max_c.min(t_max_r);
        if t_next > length {
            return;
        }
        let (nc, nr) = if t_max_c < t_max_r {
            t_max_c += dt_c;
            (col as isize + step_c, row as isize)
        } else {
            t_max_r += dt_r;
            (col as isize, row as isize + step_r)
        };
        if !spec.contains(nc, nr) {
            return;
        }
        col = nc as usize;
        row = nr as usize;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::cast_rays;
    use crate::world::{build_training_map, Role, WorldState};

    fn scan_setup(obstacles: Vec<CircularObstacle<f64>>) -> (AgentState<f64>, LidarScan<f64>, GridSpec<f64>) {
        let mut cfg = build_training_map::<f64>();
        cfg.map.obstacles = obstacles;
        let agent = AgentState::new(Vec2::new(2.1, 5.1), 0.0, 0.0, Role::Pursuer(0));
        let world = WorldState::new(vec![agent, AgentState::new(Vec2::new(9.0, 9.0), 0.0, 0.0, Role::Evader)]);
        let scan = cast_rays(&world, 0, &cfg);
        (agent, scan, GridSpec::for_scenario(&cfg))
    }

    #[test]
    fn ray_hit_marks_free_then_occupied() {
        let obstacle = CircularObstacle::new(Vec2::new(6.1, 5.1), 1.0);
        let (agent, scan, spec) = scan_setup(vec![obstacle]);
        assert!((scan.wall_ranges[0] - 3.0).abs() < 1e-9);
        let mut b = BeliefMap::new(spec);
        b.update_from_scan(&agent, &scan, 10.0);
        // x from 2.1 up to the surface at 5.1 spans columns 8..=20 of row 20
        for col in 8..=19 {
            assert_eq!(b.state((col, 20)), CellState::Free, "col {col}");
        }
        // the surface lies inside column 20, so that cell is upgraded to Occupied
        let hit_cell = spec.cell_of(Vec2::new(5.1 + 0.25e-3, 5.1)).unwrap();
        assert_eq!(hit_cell, (20, 20));
        assert_eq!(b.state(hit_cell), CellState::Occupied);
        assert_eq!(b.state((25, 20)), CellState::Unknown);
    }

    #[test]
    fn no_hit_writes_no_occupancy() {
        let (agent, mut scan, spec) = scan_setup(vec![]);
        scan.wall_ranges = [10.0; N_RAYS];
        let mut big = BeliefMap::new(GridSpec::new(80, 80, spec.resolution));
        big.update_from_scan(&agent, &scan, 10.0);
        assert!(big.cells().iter().all(|c| *c != CellState::Occupied));
        assert_eq!(big.state((40, 20)), CellState::Free);
    }

    #[test]
    fn repeated_scans_reach_fixed_point() {
        let (agent, scan, spec) = scan_setup(vec![CircularObstacle::new(Vec2::new(6.1, 5.1), 1.0)]);
        let mut b = BeliefMap::new(spec);
        let first = b.update_from_scan(&agent, &scan, 10.0);
        assert!(first > 0);
        let snapshot = b.cells().to_vec();
        assert_eq!(b.update_from_scan(&agent, &scan, 10.0), 0);
        assert_eq!(b.cells(), &snapshot[..]);
        assert_eq!(b.visit_count(spec.cell_of(agent.position).unwrap()), 2);
    }

    #[test]
    fn disc_reveal_respects_occlusion() {
        let spec = GridSpec::new(40, 40, 0.25);
        let wall = CircularObstacle::new(Vec2::new(5.0, 5.0), 0.5);
        let mut b = BeliefMap::new(spec);
        b.reveal_visible_disc(Vec2::new(3.0, 5.0), 3.0, &[wall]);
        // interior of the obstacle facing the observer is seen as occupied
        assert_eq!(b.state(spec.cell_of(Vec2::new(4.7, 5.0)).unwrap()), CellState::Occupied);
        // shadow behind the obstacle stays unknown
        assert_eq!(b.state(spec.cell_of(Vec2::new(5.8, 5.0)).unwrap()), CellState::Unknown);
        assert_eq!(b.state(spec.cell_of(Vec2::new(3.0, 6.5)).unwrap()), CellState::Free);
    }

    #[test]
    fn knowledge_never_downgrades() {
        let spec = GridSpec::new(4, 4, 1.0);
        let mut b: BeliefMap<f64> = BeliefMap::new(spec);
        assert!(b.observe((1, 1), CellState::Occupied));
        assert!(!b.observe((1, 1), CellState::Free));
        assert_eq!(b.state((1, 1)), CellState::Occupied);
        assert!(!b.observe((1, 1), CellState::Unknown));
    }

    #[test]
    fn merge_takes_union() {
        let spec = GridSpec::new(3, 3, 1.0);
        let mut a: BeliefMap<f64> = BeliefMap::new(spec);
        let mut b = BeliefMap::new(spec);
        a.observe((0, 0), CellState::Free);
        b.observe((0, 0), CellState::Occupied);
        b.observe((2, 2), CellState::Free);
        a.merge(&b);
        assert_eq!(a.state((0, 0)), CellState::Occupied);
        assert_eq!(a.state((2, 2)), CellState::Free);
        assert_eq!(a.known_count(), 2);
    }

    #[test]
    fn dump_roundtrip() {
        let spec = GridSpec::new(5, 3, 0.5);
        let mut a: BeliefMap<f64> = BeliefMap::new(spec);
        a.observe((1, 0), CellState::Free);
        a.observe((4, 2), CellState::Occupied);
        let text = a.to_dump();
        assert!(text.starts_with("belief-grid v1\nwidth 5\nheight 3\nresolution_m 0.5\n"));
        let b = BeliefMap::<f64>::from_dump(&text).unwrap();
        assert_eq!(b.cells(), a.cells());
    }

    #[test]
    fn traverse_diagonal() {
        let spec = GridSpec::new(10, 10, 1.0);
        let mut cells = Vec::new();
        traverse(&spec, Vec2::new(0.5, 0.5), Vec2::new(1.0, 0.0), 3.0, |c| cells.push(c));
        assert_eq!(cells, vec![(0, 0), (1, 0), (2, 0), (3, 0)]);
        cells.clear();
        traverse(&spec, Vec2::new(9.5, 0.5), Vec2::new(-1.0, 0.0), 100.0, |c| cells.push(c));
        assert_eq!(cells.len(), 10);
    }
}

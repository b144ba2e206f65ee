//! Cell indexing shared by ground-truth rasters, belief maps and the planner.
//!
//! Cells are addressed `(col, row)` with the origin at the map's lower-left
//! corner; flat indices are row-major.

use crate::config::{CircularObstacle, ScenarioConfig};
use crate::geometry::Vec2;
use crate::scalar::Real;

pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<R> {
    pub width: usize,
    pub height: usize,
    pub resolution: R,
}

impl<R: Real> GridSpec<R> {
    pub fn new(width: usize, height: usize, resolution: R) -> Self {
        Self { width, height, resolution }
    }

    pub fn for_scenario(config: &ScenarioConfig<R>) -> Self {
        Self::new(config.grid_width(), config.grid_height(), config.map.grid_resolution_m)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, (col, row): Cell) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn cell(&self, index: usize) -> Cell {
        (index % self.width, index / self.width)
    }

    #[inline]
    pub fn contains(&self, col: isize, row: isize) -> bool {
        col >= 0 && row >= 0 && (col as usize) < self.width && (row as usize) < self.height
    }

    /// Cell containing `p`, or `None` outside the grid.
    pub fn cell_of(&self, p: Vec2<R>) -> Option<Cell> {
        let c = (p.x / self.resolution).floor();
        let r = (p.y / self.resolution).floor();
        let (c, r) = (c.to_isize()?, r.to_isize()?);
        self.contains(c, r).then(|| (c as usize, r as usize))
    }

    /// Cell containing `p`, with out-of-range points snapped to the border.
    pub fn clamped_cell_of(&self, p: Vec2<R>) -> Cell {
        let clamp = |v: R, n: usize| -> usize {
            let i = (v / self.resolution).floor().to_isize().unwrap_or(0);
            i.clamp(0, n as isize - 1) as usize
        };
        (clamp(p.x, self.width), clamp(p.y, self.height))
    }

    #[inline]
    pub fn center(&self, (col, row): Cell) -> Vec2<R> {
        let half = R::lit(0.5);
        Vec2::new(
            (R::from_usize(col).unwrap() + half) * self.resolution,
            (R::from_usize(row).unwrap() + half) * self.resolution,
        )
    }

    /// 8-neighbours in a fixed order (row-major scan of the 3x3 block).
    pub fn neighbors8(&self, (col, row): Cell) -> impl Iterator<Item = Cell> + '_ {
        const OFFS: [(isize, isize); 8] =
            [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        OFFS.iter().filter_map(move |&(dc, dr)| {
            let (c, r) = (col as isize + dc, row as isize + dr);
            self.contains(c, r).then(|| (c as usize, r as usize))
        })
    }

    pub fn neighbors4(&self, (col, row): Cell) -> impl Iterator<Item = Cell> + '_ {
        const OFFS: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        OFFS.iter().filter_map(move |&(dc, dr)| {
            let (c, r) = (col as isize + dc, row as isize + dr);
            self.contains(c, r).then(|| (c as usize, r as usize))
        })
    }

    /// True when the cell square overlaps the open disc of the obstacle.
    pub fn cell_overlaps(&self, cell: Cell, obstacle: &CircularObstacle<R>) -> bool {
        let lo_x = R::from_usize(cell.0).unwrap() * self.resolution;
        let lo_y = R::from_usize(cell.1).unwrap() * self.resolution;
        let nx = obstacle.center.x.max(lo_x).min(lo_x + self.resolution);
        let ny = obstacle.center.y.max(lo_y).min(lo_y + self.resolution);
        Vec2::new(nx, ny).distance(obstacle.center) < obstacle.radius
    }
}

/// Ground-truth occupancy raster: a cell is occupied when it overlaps any obstacle.
pub fn occupancy_raster<R: Real>(spec: &GridSpec<R>, obstacles: &[CircularObstacle<R>]) -> Vec<bool> {
    let mut raster = vec![false; spec.len()];
    for o in obstacles {
        let lo = spec.clamped_cell_of(o.center - Vec2::new(o.radius, o.radius));
        let hi = spec.clamped_cell_of(o.center + Vec2::new(o.radius, o.radius));
        for row in lo.1..=hi.1 {
            for col in lo.0..=hi.0 {
                if spec.cell_overlaps((col, row), o) {
                    raster[spec.index((col, row))] = true;
                }
            }
        }
    }
    raster
}

/// Number of cells reached by a 4-connected flood fill over free cells from `start`.
pub fn flood_fill_count<R: Real>(spec: &GridSpec<R>, blocked: &[bool], start: Cell) -> usize {
    let mut seen = vec![false; spec.len()];
    let mut stack = vec![start];
    seen[spec.index(start)] = true;
    let mut count = 0;
    while let Some(c) = stack.pop() {
        count += 1;
        for n in spec.neighbors4(c) {
            let i = spec.index(n);
            if !seen[i] && !blocked[i] {
                seen[i] = true;
                stack.push(n);
            }
        }
    }
    count
}

/// True when every free cell of the raster lies in one 4-connected component.
pub fn free_space_connected<R: Real>(spec: &GridSpec<R>, blocked: &[bool]) -> bool {
    let free = blocked.iter().filter(|b| !**b).count();
    match blocked.iter().position(|b| !*b) {
        None => true,
        Some(first) => flood_fill_count(spec, blocked, spec.cell(first)) == free,
    }
}

//! Robot-centered occupancy grid built from sensor returns.

use crate::lidar::PointCloud;
use crate::state::RobotState;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellState {
    Occupied,
    Free,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostmapConfig {
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for CostmapConfig {
    fn default() -> Self {
        Self {
            resolution: 0.05,
            width: 200,
            height: 200,
        }
    }
}

/// Axis-aligned occupancy grid centered on the robot.
///
/// `origin` is the world position of the grid's lower-left corner; cell
/// (i, j) covers `[origin + (i, j) * resolution, origin + (i+1, j+1) * resolution)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Costmap2D {
    pub origin: (f64, f64),
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    cells: Vec<CellState>,
}

impl Costmap2D {
    pub fn unknown(origin: (f64, f64), config: &CostmapConfig) -> Self {
        Self {
            origin,
            resolution: config.resolution,
            width: config.width,
            height: config.height,
            cells: vec![CellState::Unknown; config.width * config.height],
        }
    }

    #[inline]
    pub fn cell_index(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let i = ((x - self.origin.0) / self.resolution).floor();
        let j = ((y - self.origin.1) / self.resolution).floor();
        if i >= 0.0 && j >= 0.0 && (i as usize) < self.width && (j as usize) < self.height {
            Some((i as usize, j as usize))
        } else {
            None
        }
    }

    /// World coordinates of the center of cell (i, j).
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + (i as f64 + 0.5) * self.resolution,
            self.origin.1 + (j as f64 + 0.5) * self.resolution,
        )
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> CellState {
        self.cells[j * self.width + i]
    }

    pub fn set(&mut self, i: usize, j: usize, state: CellState) {
        self.cells[j * self.width + i] = state;
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |j| {
            (0..self.width).filter_map(move |i| {
                if self.get(i, j) == CellState::Occupied {
                    Some((i, j))
                } else {
                    None
                }
            })
        })
    }

    /// ASCII PGM dump for debugging (occupied 0, free 254, unknown 205).
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for j in (0..self.height).rev() {
            let row: Vec<String> = (0..self.width)
                .map(|i| {
                    match self.get(i, j) {
                        CellState::Occupied => "0",
                        CellState::Free => "254",
                        CellState::Unknown => "205",
                    }
                    .to_string()
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Integer cells visited by a ray between two cells, endpoints included.
fn bresenham(from: (i64, i64), to: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x0, mut y0) = from;
    let (x1, y1) = to;
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut cells = Vec::with_capacity((dx - dy) as usize + 1);
    loop {
        cells.push((x0, y0));
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
    cells
}

/// Projects the cloud into a robot-centered grid.
///
/// Each return's endpoint cell becomes occupied; cells strictly between the
/// robot cell and the endpoint cell become free; everything else stays
/// unknown. Returns whose endpoints fall outside the grid extent are dropped.
pub fn build_costmap(cloud: &PointCloud, pose: &RobotState, config: &CostmapConfig) -> Costmap2D {
    let half_w = config.width as f64 * config.resolution / 2.0;
    let half_h = config.height as f64 * config.resolution / 2.0;
    let origin = (pose.x - half_w, pose.y - half_h);
    let mut map = Costmap2D::unknown(origin, config);

    let robot_cell = match map.cell_index(pose.x, pose.y) {
        Some(c) => c,
        None => return map,
    };
    let mut endpoints = Vec::with_capacity(cloud.points.len());
    for p in &cloud.points {
        let planar = p.range * p.elevation.cos();
        let angle = pose.theta + p.azimuth;
        let ex = pose.x + planar * angle.cos();
        let ey = pose.y + planar * angle.sin();
        let Some(end_cell) = map.cell_index(ex, ey) else {
            continue;
        };
        let line = bresenham(
            (robot_cell.0 as i64, robot_cell.1 as i64),
            (end_cell.0 as i64, end_cell.1 as i64),
        );
        for &(i, j) in line.iter().skip(1).take(line.len().saturating_sub(2)) {
            map.set(i as usize, j as usize, CellState::Free);
        }
        endpoints.push(end_cell);
    }
    // Occupied endpoints win over free traces from neighboring rays.
    for (i, j) in endpoints {
        map.set(i, j, CellState::Occupied);
    }
    map
}

/// True when any occupied cell center lies within `footprint_radius` of the
/// query position. Positions outside the grid see no cells and return false.
pub fn collision_state(state: &RobotState, costmap: &Costmap2D, footprint_radius: f64) -> bool {
    debug_assert!(footprint_radius > 0.0);
    let res = costmap.resolution;
    let i_lo = ((state.x - footprint_radius - costmap.origin.0) / res).floor().max(0.0) as i64;
    let j_lo = ((state.y - footprint_radius - costmap.origin.1) / res).floor().max(0.0) as i64;
    let i_hi = (((state.x + footprint_radius - costmap.origin.0) / res).floor() as i64)
        .min(costmap.width as i64 - 1);
    let j_hi = (((state.y + footprint_radius - costmap.origin.1) / res).floor() as i64)
        .min(costmap.height as i64 - 1);
    let r2 = footprint_radius * footprint_radius;
    for j in j_lo..=j_hi {
        for i in i_lo..=i_hi {
            if i < 0 || j < 0 {
                continue;
            }
            if costmap.get(i as usize, j as usize) == CellState::Occupied {
                let (cx, cy) = costmap.cell_center(i as usize, j as usize);
                if (cx - state.x).powi(2) + (cy - state.y).powi(2) <= r2 {
                    return true;
                }
            }
        }
    }
    false
}

/// Footprint-dilated occupancy bitmap for fast in-rollout collision checks.
///
/// Marks every cell whose center lies within `footprint_radius` of an
/// occupied cell center, so a rollout step costs one lookup instead of a
/// disc scan. Agrees with [`collision_state`] up to cell quantization of the
/// query point.
#[derive(Debug, Clone)]
pub struct CollisionGrid {
    origin: (f64, f64),
    resolution: f64,
    width: usize,
    height: usize,
    blocked: Vec<bool>,
}

impl CollisionGrid {
    pub fn new(costmap: &Costmap2D, footprint_radius: f64) -> Self {
        let mut blocked = vec![false; costmap.width * costmap.height];
        let reach = (footprint_radius / costmap.resolution).floor() as i64;
        let r2 = footprint_radius * footprint_radius;
        let mut offsets = Vec::new();
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let d2 = (di as f64 * costmap.resolution).powi(2)
                    + (dj as f64 * costmap.resolution).powi(2);
                if d2 <= r2 {
                    offsets.push((di, dj));
                }
            }
        }
        for (i, j) in costmap.occupied_cells() {
            for &(di, dj) in &offsets {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni >= 0 && nj >= 0 && (ni as usize) < costmap.width && (nj as usize) < costmap.height
                {
                    blocked[nj as usize * costmap.width + ni as usize] = true;
                }
            }
        }
        Self {
            origin: costmap.origin,
            resolution: costmap.resolution,
            width: costmap.width,
            height: costmap.height,
            blocked,
        }
    }

    #[inline]
    pub fn is_blocked(&self, x: f64, y: f64) -> bool {
        let i = ((x - self.origin.0) / self.resolution).floor();
        let j = ((y - self.origin.1) / self.resolution).floor();
        if i < 0.0 || j < 0.0 {
            return false;
        }
        let (i, j) = (i as usize, j as usize);
        if i >= self.width || j >= self.height {
            return false;
        }
        self.blocked[j * self.width + i]
    }
}

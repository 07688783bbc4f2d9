//! GP frontiers: connected high-variance regions of the surface and the
//! cost that ranks them.

use crate::surface::VarianceSurface;
use serde::{Deserialize, Serialize};
use sim_world::{wrap_angle, RobotState};

/// Centroid of one high-variance region, in surface coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFrontier {
    /// Bearing relative to the sensor heading, radians in (-pi, pi].
    pub azimuth: f64,
    pub elevation: f64,
    /// Total excess variance of the region (sum of sigma - V_th).
    pub weight: f64,
    pub cells: usize,
}

/// A frontier placed in the world frame and scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub azimuth: f64,
    pub elevation: f64,
    pub x: f64,
    pub y: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontierSet {
    pub frontiers: Vec<Frontier>,
    pub optimal: Option<usize>,
}

/// Components narrower than this count of cells are noise and discarded.
pub const MIN_FRONTIER_CELLS: usize = 3;
/// Components spanning more than this azimuth arc lose directional meaning
/// under a single circular mean and are split into bands.
const SPLIT_SPAN: f64 = 60.0;
/// Band width used when splitting wide components, degrees.
const BAND_WIDTH: f64 = 24.0;

/// Connected-component labeling (4-connectivity, azimuth wraps) of cells
/// with variance above threshold; each component yields a variance-weighted
/// centroid. A component spanning a wide azimuth arc (an open half-plane, or
/// the whole circle when nothing was observed) would average to an arbitrary
/// direction, so such components are first split into azimuth bands anchored
/// at the arc's edge; compact components stay whole.
pub fn extract_frontiers(surface: &VarianceSurface) -> Vec<SurfaceFrontier> {
    let n_az = surface.config.grid_azimuth;
    let n_el = surface.config.grid_elevation;
    let above = |az: usize, el: usize| surface.variance[surface.idx(az, el)] > surface.v_th;

    let mut label = vec![usize::MAX; n_az * n_el];
    let mut components: Vec<Vec<(usize, usize)>> = Vec::new();
    for el0 in 0..n_el {
        for az0 in 0..n_az {
            if !above(az0, el0) || label[surface.idx(az0, el0)] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut stack = vec![(az0, el0)];
            let mut cells = Vec::new();
            label[surface.idx(az0, el0)] = id;
            while let Some((az, el)) = stack.pop() {
                cells.push((az, el));
                let neighbors = [
                    ((az + 1) % n_az, el),
                    ((az + n_az - 1) % n_az, el),
                    (az, el.wrapping_add(1)),
                    (az, el.wrapping_sub(1)),
                ];
                for (naz, nel) in neighbors {
                    if nel >= n_el {
                        continue;
                    }
                    let idx = surface.idx(naz, nel);
                    if label[idx] == usize::MAX && above(naz, nel) {
                        label[idx] = id;
                        stack.push((naz, nel));
                    }
                }
            }
            components.push(cells);
        }
    }

    let deg_per_cell = 360.0 / n_az as f64;
    let mut frontiers = Vec::new();
    for cells in components {
        if cells.len() < MIN_FRONTIER_CELLS {
            continue;
        }
        let mut columns = vec![false; n_az];
        for &(az, _) in &cells {
            columns[az] = true;
        }
        // Longest circular run of empty columns; the component occupies the
        // complementary arc starting right after it.
        let (arc_start, arc_cols) = occupied_arc(&columns);
        let span_deg = arc_cols as f64 * deg_per_cell;
        if span_deg <= SPLIT_SPAN {
            frontiers.push(centroid_of(surface, &cells));
        } else {
            let band_cols = (BAND_WIDTH / deg_per_cell).ceil().max(1.0) as usize;
            let n_bands = arc_cols.div_ceil(band_cols);
            let mut bands: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_bands];
            for &(az, el) in &cells {
                let offset = (az + n_az - arc_start) % n_az;
                bands[(offset / band_cols).min(n_bands - 1)].push((az, el));
            }
            for cells in bands {
                if cells.len() >= MIN_FRONTIER_CELLS {
                    frontiers.push(centroid_of(surface, &cells));
                }
            }
        }
    }
    frontiers
}

/// Start column and length of the circular arc covering all occupied
/// columns (n_az when every column is occupied).
fn occupied_arc(columns: &[bool]) -> (usize, usize) {
    let n = columns.len();
    let mut best_gap = 0usize;
    let mut best_end = 0usize;
    let mut run = 0usize;
    // Scan two laps so circular runs are seen whole.
    for i in 0..2 * n {
        if !columns[i % n] {
            run = (run + 1).min(n);
            if run > best_gap {
                best_gap = run;
                best_end = i % n;
            }
        } else {
            run = 0;
        }
    }
    if best_gap == 0 {
        (0, n)
    } else {
        ((best_end + 1) % n, n - best_gap)
    }
}

fn centroid_of(surface: &VarianceSurface, cells: &[(usize, usize)]) -> SurfaceFrontier {
    let n_el = surface.config.grid_elevation;
    let el_of = |el: usize| {
        if n_el <= 1 {
            surface.config.elevation_min
        } else {
            surface.config.elevation_min
                + (surface.config.elevation_max - surface.config.elevation_min) * el as f64
                    / (n_el - 1) as f64
        }
    };
    let mut sum_sin = 0.0;
    let mut sum_cos = 0.0;
    let mut sum_el = 0.0;
    let mut total = 0.0;
    for &(az, el) in cells {
        let w = (surface.variance[surface.idx(az, el)] - surface.v_th).max(0.0);
        let a = surface.config.azimuth_of(az);
        sum_sin += w * a.sin();
        sum_cos += w * a.cos();
        sum_el += w * el_of(el);
        total += w;
    }
    // Degenerate weights fall back to unweighted means.
    if total <= 0.0 {
        let inv = 1.0 / cells.len() as f64;
        for &(az, el) in cells {
            let a = surface.config.azimuth_of(az);
            sum_sin += a.sin() * inv;
            sum_cos += a.cos() * inv;
            sum_el += el_of(el) * inv;
        }
        total = 1.0;
    }
    SurfaceFrontier {
        azimuth: sum_sin.atan2(sum_cos),
        elevation: sum_el / total,
        weight: total,
        cells: cells.len(),
    }
}

/// J_gp = k_dst * distance(frontier, goal) + k_dir * bearing^2.
pub fn frontier_cost(
    frontier_x: f64,
    frontier_y: f64,
    bearing: f64,
    goal: &RobotState,
    k_dst: f64,
    k_dir: f64,
) -> f64 {
    let d_fs = ((frontier_x - goal.x).powi(2) + (frontier_y - goal.y).powi(2)).sqrt();
    k_dst * d_fs + k_dir * wrap_angle(bearing).powi(2)
}

/// Places surface frontiers in the world frame at the surface radius and
/// scores them; ties break toward the smaller |bearing|, then the smaller
/// azimuth.
pub fn score_frontiers(
    frontiers: &[SurfaceFrontier],
    robot: &RobotState,
    goal: &RobotState,
    r_oc: f64,
    k_dst: f64,
    k_dir: f64,
) -> FrontierSet {
    let placed: Vec<Frontier> = frontiers
        .iter()
        .map(|f| {
            let planar = r_oc * f.elevation.cos();
            let angle = robot.theta + f.azimuth;
            let x = robot.x + planar * angle.cos();
            let y = robot.y + planar * angle.sin();
            Frontier {
                azimuth: f.azimuth,
                elevation: f.elevation,
                x,
                y,
                cost: frontier_cost(x, y, f.azimuth, goal, k_dst, k_dir),
            }
        })
        .collect();
    let optimal = (0..placed.len()).min_by(|&a, &b| {
        let fa = &placed[a];
        let fb = &placed[b];
        (fa.cost, fa.azimuth.abs(), fa.azimuth)
            .partial_cmp(&(fb.cost, fb.azimuth.abs(), fb.azimuth))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    FrontierSet {
        frontiers: placed,
        optimal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::OccupancySurfaceConfig;
    use approx::assert_relative_eq;

    fn uniform_surface(n_az: usize, n_el: usize, value: f64, v_th: f64) -> VarianceSurface {
        VarianceSurface {
            config: OccupancySurfaceConfig {
                grid_azimuth: n_az,
                grid_elevation: n_el,
                ..OccupancySurfaceConfig::default()
            },
            mean: vec![0.0; n_az * n_el],
            variance: vec![value; n_az * n_el],
            v_th,
            k_m: 0.4,
        }
    }

    #[test]
    fn symmetric_block_centroid() {
        let mut s = uniform_surface(90, 1, 0.0, 0.5);
        for az in 10..=20 {
            s.variance[az] = 1.0;
        }
        let f = extract_frontiers(&s);
        assert_eq!(f.len(), 1);
        assert_relative_eq!(f[0].azimuth, s.config.azimuth_of(15), epsilon = 1e-9);
    }

    #[test]
    fn seam_spanning_block_has_zero_centroid() {
        // 350..360 and 0..10 degrees on a 1-degree grid: wraps the seam at
        // +/-180? No: azimuth_of(0) = -pi. Use cells around the seam column.
        let n = 360;
        let mut s = uniform_surface(n, 1, 0.0, 0.5);
        // Cells within +/-10 degrees of azimuth 180 (the seam).
        for d in 0..10 {
            s.variance[d] = 1.0; // azimuth -180 + d degrees
            s.variance[n - 1 - d] = 1.0; // azimuth 179-d degrees
        }
        let f = extract_frontiers(&s);
        assert_eq!(f.len(), 1, "seam block must join into one component");
        let centroid = f[0].azimuth.abs();
        // Circular mean sits at the seam, azimuth +/-pi.
        assert_relative_eq!(centroid, std::f64::consts::PI, epsilon = 1e-2);
    }

    #[test]
    fn all_below_threshold_empty() {
        let s = uniform_surface(90, 4, 0.1, 0.5);
        assert!(extract_frontiers(&s).is_empty());
    }

    #[test]
    fn tiny_components_discarded() {
        let mut s = uniform_surface(90, 1, 0.0, 0.5);
        s.variance[40] = 1.0;
        s.variance[41] = 1.0;
        assert!(extract_frontiers(&s).is_empty());
    }

    #[test]
    fn full_wrap_splits_into_bands() {
        let s = uniform_surface(90, 4, 1.0, 0.4);
        let f = extract_frontiers(&s);
        assert!(f.len() >= 12, "expected many band frontiers, got {}", f.len());
        // Bands must cover the circle roughly uniformly: max gap below 30 deg.
        let mut azs: Vec<f64> = f.iter().map(|x| x.azimuth).collect();
        azs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut max_gap: f64 = 0.0;
        for i in 0..azs.len() {
            let next = if i + 1 == azs.len() {
                azs[0] + 2.0 * std::f64::consts::PI
            } else {
                azs[i + 1]
            };
            max_gap = max_gap.max(next - azs[i]);
        }
        assert!(max_gap < 30f64.to_radians(), "max gap {max_gap}");
    }

    #[test]
    fn cost_examples() {
        let goal = RobotState::new(2.0, 0.0, 0.0);
        // d_fs = 2, bearing 0, k = (5, 4) -> 10.
        assert_relative_eq!(frontier_cost(0.0, 0.0, 0.0, &goal, 5.0, 4.0), 10.0);
        // d_fs = 0, bearing pi/2 -> 4 (pi/2)^2.
        let at_goal = frontier_cost(2.0, 0.0, std::f64::consts::FRAC_PI_2, &goal, 5.0, 4.0);
        assert_relative_eq!(
            at_goal,
            4.0 * std::f64::consts::FRAC_PI_2.powi(2),
            epsilon = 1e-12
        );
        assert_relative_eq!(frontier_cost(2.0, 0.0, 0.0, &goal, 5.0, 4.0), 0.0);
    }

    #[test]
    fn scoring_places_frontiers_at_surface_radius() {
        let robot = RobotState::new(1.0, -2.0, 0.7);
        let goal = RobotState::new(6.0, 3.0, 0.0);
        let frontiers = vec![
            SurfaceFrontier {
                azimuth: 0.3,
                elevation: 0.1,
                weight: 1.0,
                cells: 5,
            },
            SurfaceFrontier {
                azimuth: -1.0,
                elevation: 0.0,
                weight: 1.0,
                cells: 5,
            },
        ];
        let set = score_frontiers(&frontiers, &robot, &goal, 5.0, 5.0, 4.0);
        for (f, sf) in set.frontiers.iter().zip(&frontiers) {
            let d = ((f.x - robot.x).powi(2) + (f.y - robot.y).powi(2)).sqrt();
            assert_relative_eq!(d, 5.0 * sf.elevation.cos(), epsilon = 1e-9);
        }
        assert!(set.optimal.is_some());
    }
}

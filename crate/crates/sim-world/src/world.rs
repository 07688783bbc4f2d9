//! World models and deterministic scenario generators.
//!
//! Worlds are built from circles and axis-aligned rectangles. Each obstacle
//! carries a `recommender_visible` flag: obstacles with the flag cleared are
//! omitted from recommender-facing scans while remaining visible to the
//! costmap sensor, modelling obstacles that sit below the occupancy band of
//! the subgoal recommender.

use crate::error::SimError;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Circle {
        cx: f64,
        cy: f64,
        radius: f64,
    },
    /// Axis-aligned rectangle given by center and half extents.
    Rect {
        cx: f64,
        cy: f64,
        half_w: f64,
        half_h: f64,
    },
}

impl Shape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Circle { cx, cy, radius } => {
                (x - cx).powi(2) + (y - cy).powi(2) <= radius * radius
            }
            Shape::Rect {
                cx,
                cy,
                half_w,
                half_h,
            } => (x - cx).abs() <= half_w && (y - cy).abs() <= half_h,
        }
    }

    /// Signed distance from (x, y) to the obstacle boundary (negative inside).
    pub fn signed_distance(&self, x: f64, y: f64) -> f64 {
        match *self {
            Shape::Circle { cx, cy, radius } => {
                ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() - radius
            }
            Shape::Rect {
                cx,
                cy,
                half_w,
                half_h,
            } => {
                let qx = (x - cx).abs() - half_w;
                let qy = (y - cy).abs() - half_h;
                let outside = (qx.max(0.0).powi(2) + qy.max(0.0).powi(2)).sqrt();
                outside + qx.max(qy).min(0.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    #[serde(flatten)]
    pub shape: Shape,
    /// When false the obstacle is hidden from recommender-facing scans.
    pub recommender_visible: bool,
}

impl Obstacle {
    pub fn visible(shape: Shape) -> Self {
        Self {
            shape,
            recommender_visible: true,
        }
    }

    pub fn hidden(shape: Shape) -> Self {
        Self {
            shape,
            recommender_visible: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn centered(width: f64, height: f64) -> Self {
        Self {
            min_x: -width / 2.0,
            min_y: -height / 2.0,
            max_x: width / 2.0,
            max_y: height / 2.0,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub bounds: Bounds,
    pub obstacles: Vec<Obstacle>,
    pub seed: u64,
}

impl World {
    pub fn empty(width: f64, height: f64) -> Self {
        Self {
            bounds: Bounds::centered(width, height),
            obstacles: Vec::new(),
            seed: 0,
        }
    }

    /// True when a disc of `radius` centered at (x, y) overlaps any obstacle.
    pub fn collides_disc(&self, x: f64, y: f64, radius: f64) -> bool {
        self.obstacles
            .iter()
            .any(|o| o.shape.signed_distance(x, y) < radius)
    }

    pub fn point_in_obstacle(&self, x: f64, y: f64) -> bool {
        self.obstacles.iter().any(|o| o.shape.contains(x, y))
    }

    pub fn to_json(&self) -> Result<String, SimError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A disc that generators must keep free of obstacles (start/goal pads).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearZone {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub width: f64,
    pub height: f64,
    /// Obstacles per square meter.
    pub density: f64,
    pub tree_radius: f64,
    #[serde(default)]
    pub keep_clear: Vec<ClearZone>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            width: 20.0,
            height: 20.0,
            density: 0.2,
            tree_radius: 0.2,
            keep_clear: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeParams {
    pub width: f64,
    pub height: f64,
    /// Pocket interior is `u_inner_width` across and `u_depth` deep.
    pub u_center: (f64, f64),
    pub u_inner_width: f64,
    pub u_depth: f64,
    pub wall_thickness: f64,
    /// Direction the opening faces; the generator aims it at the start pad.
    pub start: (f64, f64),
    pub goal: (f64, f64),
    /// Count of small obstacles hidden from the recommender.
    pub hidden_obstacles: usize,
    pub hidden_radius: f64,
    #[serde(default)]
    pub boundary_walls: bool,
}

impl Default for MazeParams {
    fn default() -> Self {
        Self {
            width: 20.0,
            height: 20.0,
            u_center: (0.0, 0.0),
            u_inner_width: 5.0,
            u_depth: 4.0,
            wall_thickness: 0.2,
            start: (0.0, -7.0),
            goal: (0.0, 6.0),
            hidden_obstacles: 3,
            hidden_radius: 0.15,
            boundary_walls: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorridorParams {
    /// Outer footprint of the L-shaped corridor.
    pub width: f64,
    pub height: f64,
    pub corridor_width: f64,
    pub wall_thickness: f64,
    /// Count of box obstacles scattered along the legs.
    pub boxes: usize,
    pub box_half_extent: f64,
    #[serde(default)]
    pub keep_clear: Vec<ClearZone>,
}

impl Default for CorridorParams {
    fn default() -> Self {
        Self {
            width: 9.0,
            height: 14.0,
            corridor_width: 2.3,
            wall_thickness: 0.2,
            boxes: 4,
            box_half_extent: 0.25,
            keep_clear: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorldParams {
    Forest(ForestParams),
    Maze(MazeParams),
    Corridor(CorridorParams),
}

/// Builds a world deterministically from (params, seed).
pub fn make_world(params: &WorldParams, seed: u64) -> Result<World, SimError> {
    match params {
        WorldParams::Forest(p) => make_forest(p, seed),
        WorldParams::Maze(p) => make_maze(p, seed),
        WorldParams::Corridor(p) => make_corridor(p, seed),
    }
}

fn make_forest(p: &ForestParams, seed: u64) -> Result<World, SimError> {
    if p.density < 0.0 || p.tree_radius <= 0.0 {
        return Err(SimError::InvalidParameter(
            "forest density must be >= 0 and tree radius > 0".into(),
        ));
    }
    let bounds = Bounds::centered(p.width, p.height);
    let target = (p.density * p.width * p.height).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obstacles = Vec::with_capacity(target);
    let mut attempts = 0usize;
    let max_attempts = 200 * target.max(1);
    while obstacles.len() < target && attempts < max_attempts {
        attempts += 1;
        let cx = rng.random_range(bounds.min_x + p.tree_radius..bounds.max_x - p.tree_radius);
        let cy = rng.random_range(bounds.min_y + p.tree_radius..bounds.max_y - p.tree_radius);
        let blocked = p.keep_clear.iter().any(|z| {
            let d = ((cx - z.x).powi(2) + (cy - z.y).powi(2)).sqrt();
            d < z.radius + p.tree_radius
        });
        if blocked {
            continue;
        }
        obstacles.push(Obstacle::visible(Shape::Circle {
            cx,
            cy,
            radius: p.tree_radius,
        }));
    }
    // Density must land within 5% of the request over the arena area.
    if (obstacles.len() as f64) < 0.95 * target as f64 {
        return Err(SimError::DensityUnachievable {
            requested: p.density,
            placed: obstacles.len(),
            target,
        });
    }
    Ok(World {
        bounds,
        obstacles,
        seed,
    })
}

fn boundary_walls(bounds: &Bounds, t: f64) -> Vec<Obstacle> {
    let w = bounds.max_x - bounds.min_x;
    let h = bounds.max_y - bounds.min_y;
    let cx = (bounds.min_x + bounds.max_x) / 2.0;
    let cy = (bounds.min_y + bounds.max_y) / 2.0;
    vec![
        Obstacle::visible(Shape::Rect {
            cx,
            cy: bounds.max_y + t / 2.0,
            half_w: w / 2.0 + t,
            half_h: t / 2.0,
        }),
        Obstacle::visible(Shape::Rect {
            cx,
            cy: bounds.min_y - t / 2.0,
            half_w: w / 2.0 + t,
            half_h: t / 2.0,
        }),
        Obstacle::visible(Shape::Rect {
            cx: bounds.max_x + t / 2.0,
            cy,
            half_w: t / 2.0,
            half_h: h / 2.0 + t,
        }),
        Obstacle::visible(Shape::Rect {
            cx: bounds.min_x - t / 2.0,
            cy,
            half_w: t / 2.0,
            half_h: h / 2.0 + t,
        }),
    ]
}

/// Three walls of a U-shaped enclosure whose opening faces `open_toward`.
///
/// The opening direction is snapped to the nearest axis so all walls stay
/// axis-aligned.
fn u_walls(center: (f64, f64), inner_width: f64, depth: f64, t: f64, open_toward: (f64, f64)) -> Vec<Obstacle> {
    let (cx, cy) = center;
    let dx = open_toward.0 - cx;
    let dy = open_toward.1 - cy;
    let hw = inner_width / 2.0;
    let hd = depth / 2.0;
    // (back wall center offset, side wall axis) per snapped opening direction
    let mut walls = Vec::with_capacity(3);
    if dy.abs() >= dx.abs() {
        let s = if dy >= 0.0 { 1.0 } else { -1.0 };
        // opening along +/-y: back wall opposite the opening
        walls.push(Obstacle::visible(Shape::Rect {
            cx,
            cy: cy - s * (hd + t / 2.0),
            half_w: hw + t,
            half_h: t / 2.0,
        }));
        for side in [-1.0, 1.0] {
            walls.push(Obstacle::visible(Shape::Rect {
                cx: cx + side * (hw + t / 2.0),
                cy,
                half_w: t / 2.0,
                half_h: hd,
            }));
        }
    } else {
        let s = if dx >= 0.0 { 1.0 } else { -1.0 };
        walls.push(Obstacle::visible(Shape::Rect {
            cx: cx - s * (hd + t / 2.0),
            cy,
            half_w: t / 2.0,
            half_h: hw + t,
        }));
        for side in [-1.0, 1.0] {
            walls.push(Obstacle::visible(Shape::Rect {
                cx,
                cy: cy + side * (hw + t / 2.0),
                half_w: hd,
                half_h: t / 2.0,
            }));
        }
    }
    walls
}

fn make_maze(p: &MazeParams, seed: u64) -> Result<World, SimError> {
    let bounds = Bounds::centered(p.width, p.height);
    let mut obstacles = Vec::new();
    if p.boundary_walls {
        obstacles.extend(boundary_walls(&bounds, p.wall_thickness));
    }
    obstacles.extend(u_walls(
        p.u_center,
        p.u_inner_width,
        p.u_depth,
        p.wall_thickness,
        p.start,
    ));

    // Obstacles invisible to the recommender but present in the costmap.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed = 0usize;
    let mut attempts = 0usize;
    while placed < p.hidden_obstacles && attempts < 2000 {
        attempts += 1;
        let cx = rng.random_range(bounds.min_x + 1.0..bounds.max_x - 1.0);
        let cy = rng.random_range(bounds.min_y + 1.0..bounds.max_y - 1.0);
        let near_pad = [(p.start), (p.goal)]
            .iter()
            .any(|(px, py)| ((cx - px).powi(2) + (cy - py).powi(2)).sqrt() < 1.5);
        let candidate = Shape::Circle {
            cx,
            cy,
            radius: p.hidden_radius,
        };
        let too_close = obstacles
            .iter()
            .any(|o| o.shape.signed_distance(cx, cy) < p.hidden_radius + 0.8);
        if near_pad || too_close {
            continue;
        }
        obstacles.push(Obstacle::hidden(candidate));
        placed += 1;
    }

    let world = World {
        bounds,
        obstacles,
        seed,
    };
    for (px, py) in [p.start, p.goal] {
        if world.collides_disc(px, py, 0.3) {
            return Err(SimError::BlockedPlacement(px, py));
        }
    }
    Ok(world)
}

fn make_corridor(p: &CorridorParams, seed: u64) -> Result<World, SimError> {
    if p.corridor_width <= 2.0 * p.box_half_extent {
        return Err(SimError::InvalidParameter(
            "corridor too narrow for requested boxes".into(),
        ));
    }
    let bounds = Bounds::centered(p.width, p.height);
    let t = p.wall_thickness;
    let cw = p.corridor_width;
    let mut obstacles = boundary_walls(&bounds, t);
    // L-shape: vertical leg along the left edge, horizontal leg along the top.
    // The interior block fills everything right of the vertical leg and below
    // the horizontal leg.
    let block_min_x = bounds.min_x + cw;
    let block_max_y = bounds.max_y - cw;
    obstacles.push(Obstacle::visible(Shape::Rect {
        cx: (block_min_x + bounds.max_x) / 2.0,
        cy: (bounds.min_y + block_max_y) / 2.0,
        half_w: (bounds.max_x - block_min_x) / 2.0,
        half_h: (block_max_y - bounds.min_y) / 2.0,
    }));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed = 0usize;
    let mut attempts = 0usize;
    while placed < p.boxes && attempts < 2000 {
        attempts += 1;
        // Alternate legs so boxes spread over the whole corridor.
        let (cx, cy) = if placed % 2 == 0 {
            (
                rng.random_range(bounds.min_x + t..block_min_x - t),
                rng.random_range(bounds.min_y + 1.5..block_max_y),
            )
        } else {
            (
                rng.random_range(block_min_x..bounds.max_x - 1.5),
                rng.random_range(block_max_y + t..bounds.max_y - t),
            )
        };
        let clear = p.keep_clear.iter().all(|z| {
            ((cx - z.x).powi(2) + (cy - z.y).powi(2)).sqrt() > z.radius + p.box_half_extent
        });
        let too_close = obstacles
            .iter()
            .any(|o| o.shape.signed_distance(cx, cy) < p.box_half_extent + 0.9);
        if !clear || too_close {
            continue;
        }
        obstacles.push(Obstacle::visible(Shape::Rect {
            cx,
            cy,
            half_w: p.box_half_extent,
            half_h: p.box_half_extent,
        }));
        placed += 1;
    }
    Ok(World {
        bounds,
        obstacles,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forest_obstacle_count_matches_density() {
        let p = ForestParams {
            width: 20.0,
            height: 20.0,
            density: 0.2,
            tree_radius: 0.2,
            keep_clear: vec![ClearZone {
                x: -8.0,
                y: -8.0,
                radius: 1.0,
            }],
        };
        let w = make_world(&WorldParams::Forest(p), 7).unwrap();
        let target = 80.0;
        assert!((w.obstacles.len() as f64 - target).abs() <= 0.05 * target);
    }

    #[test]
    fn zero_density_forest_is_empty() {
        let p = ForestParams {
            density: 0.0,
            ..ForestParams::default()
        };
        let w = make_world(&WorldParams::Forest(p), 3).unwrap();
        assert!(w.obstacles.is_empty());
    }

    #[test]
    fn worlds_are_deterministic_per_seed() {
        let p = WorldParams::Maze(MazeParams::default());
        let a = make_world(&p, 1).unwrap();
        let b = make_world(&p, 1).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());

        let f = WorldParams::Forest(ForestParams::default());
        let a = make_world(&f, 9).unwrap();
        let b = make_world(&f, 9).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn maze_contains_hidden_obstacles_and_u_trap() {
        let p = MazeParams::default();
        let w = make_world(&WorldParams::Maze(p.clone()), 11).unwrap();
        let hidden = w
            .obstacles
            .iter()
            .filter(|o| !o.recommender_visible)
            .count();
        assert_eq!(hidden, p.hidden_obstacles);
        // Straight segment from start to goal must cross the U's back wall.
        let (sx, sy) = p.start;
        let (gx, gy) = p.goal;
        let crossed = (0..=100).any(|i| {
            let t = i as f64 / 100.0;
            let x = sx + t * (gx - sx);
            let y = sy + t * (gy - sy);
            w.point_in_obstacle(x, y)
        });
        assert!(crossed, "U trap must lie between start and goal");
        // Start and goal stay free.
        assert!(!w.collides_disc(sx, sy, 0.3));
        assert!(!w.collides_disc(gx, gy, 0.3));
    }

    #[test]
    fn u_opening_faces_start() {
        let p = MazeParams::default();
        let w = make_world(&WorldParams::Maze(p.clone()), 5).unwrap();
        // Walking from the pocket center toward the start must stay free of
        // the U walls (the opening), for at least the pocket depth.
        let (cx, cy) = p.u_center;
        let (sx, sy) = p.start;
        let len = ((sx - cx).powi(2) + (sy - cy).powi(2)).sqrt();
        let steps = 40;
        for i in 0..=steps {
            let t = (i as f64 / steps as f64) * (p.u_depth / 2.0 + p.wall_thickness * 2.0) / len;
            let x = cx + t * (sx - cx);
            let y = cy + t * (sy - cy);
            assert!(
                !w.point_in_obstacle(x, y),
                "opening blocked at ({x:.2}, {y:.2})"
            );
        }
    }

    #[test]
    fn world_json_round_trip() {
        let w = make_world(&WorldParams::Corridor(CorridorParams::default()), 2).unwrap();
        let text = w.to_json().unwrap();
        let back = World::from_json(&text).unwrap();
        assert_eq!(w, back);
    }
}

use gp_subgoal::*;
use sim_world::{simulate_lidar, Obstacle, RobotState, SensorConfig, Shape, World};

fn main() {
    let mut world = World::empty(40.0, 40.0);
    for i in -12..=12 {
        let y = i as f64 * 0.35;
        if (1.0..=2.4).contains(&y) {
            continue;
        }
        world.obstacles.push(Obstacle::visible(Shape::Circle {
            cx: 3.0,
            cy: y,
            radius: 0.18,
        }));
    }
    let robot = RobotState::new(0.0, 0.0, 0.0);
    let goal = RobotState::new(8.0, 0.0, 0.0);
    let sensor = SensorConfig {
        azimuth_rays: 120,
        elevation_rays: 3,
        recommender_only: true,
        ..SensorConfig::default()
    };
    let cloud = simulate_lidar(&world, &robot, &sensor).unwrap();
    println!("returns: {}", cloud.len());

    let config = RecommenderConfig {
        surface: OccupancySurfaceConfig {
            grid_azimuth: 90,
            grid_elevation: 3,
            ..OccupancySurfaceConfig::default()
        },
        fit: SurfaceFitConfig {
            inducing: 48,
            iterations: 25,
            ..SurfaceFitConfig::default()
        },
        ..RecommenderConfig::default()
    };
    let (subgoal, details) = recommend_detailed(&cloud, &robot, &goal, &config, 2).unwrap();
    let s = &details.surface;
    println!("v_th = {:.4}", s.v_th);
    for az in 0..s.config.grid_azimuth {
        let a = s.config.azimuth_of(az).to_degrees();
        if !(-80.0..=80.0).contains(&a) {
            continue;
        }
        let vmax = (0..s.config.grid_elevation)
            .map(|el| s.variance[s.idx(az, el)])
            .fold(f64::NEG_INFINITY, f64::max);
        let mark = if vmax > s.v_th { '*' } else { ' ' };
        println!("az {a:7.1} var_max {vmax:8.4} {mark}");
    }
    println!("frontiers:");
    for (i, f) in details.frontiers.frontiers.iter().enumerate() {
        println!(
            "  [{}] bearing {:7.1} deg cost {:8.3} pos ({:.2},{:.2})",
            i,
            f.azimuth.to_degrees(),
            f.cost,
            f.x,
            f.y
        );
    }
    println!("optimal: {:?} subgoal: {subgoal:?}", details.frontiers.optimal);
}

//! Rollout scoring: state-dependent running cost, quadratic control cost and
//! terminal cost accumulated over forward simulations of the dynamics.

use crate::params::MppiParams;
use crate::sequence::ControlSequence;
use sim_world::{collision_state, step_dynamics, wrap_angle, ControlInput, Costmap2D, RobotState};

/// Collision test a rollout runs at every propagated state.
pub trait CollisionCheck {
    fn blocked(&self, x: f64, y: f64) -> bool;
}

impl CollisionCheck for sim_world::CollisionGrid {
    #[inline]
    fn blocked(&self, x: f64, y: f64) -> bool {
        self.is_blocked(x, y)
    }
}

/// Exact disc check against a raw costmap.
pub struct CostmapChecker<'a> {
    pub costmap: &'a Costmap2D,
    pub footprint_radius: f64,
}

impl CollisionCheck for CostmapChecker<'_> {
    fn blocked(&self, x: f64, y: f64) -> bool {
        collision_state(
            &RobotState::new(x, y, 0.0),
            self.costmap,
            self.footprint_radius,
        )
    }
}

/// Never collides; used for open-space tests.
pub struct NoCollision;

impl CollisionCheck for NoCollision {
    fn blocked(&self, _x: f64, _y: f64) -> bool {
        false
    }
}

fn quad3(q: &[[f64; 3]; 3], d: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += d[i] * q[i][j] * d[j];
        }
    }
    acc
}

#[inline]
fn quad2(r: &[[f64; 2]; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * (r[0][0] * b[0] + r[0][1] * b[1]) + a[1] * (r[1][0] * b[0] + r[1][1] * b[1])
}

/// State-dependent running cost with collision indicator.
///
/// The heading difference is wrapped so equivalent headings cost nothing.
pub fn state_cost(
    state: &RobotState,
    goal: &RobotState,
    crashed: bool,
    q: &[[f64; 3]; 3],
    crash_penalty: f64,
) -> f64 {
    let d = [
        state.x - goal.x,
        state.y - goal.y,
        wrap_angle(state.theta - goal.theta),
    ];
    quad3(q, d) + if crashed { crash_penalty } else { 0.0 }
}

/// Cost-to-go of one rollout under a perturbed control sequence.
///
/// Controls are clamped to actuator limits before propagation while the cost
/// terms use the nominal control and raw perturbation. The collision
/// indicator is sticky: once a propagated state is blocked the rollout stays
/// crashed.
pub fn rollout_cost_with<C: CollisionCheck>(
    x0: &RobotState,
    seq: &ControlSequence,
    noise_row: &[[f64; 2]],
    checker: &C,
    goal: &RobotState,
    params: &MppiParams,
) -> f64 {
    debug_assert_eq!(noise_row.len(), seq.len());
    let gamma = params.gamma_u();
    let mut state = *x0;
    let mut crashed = checker.blocked(state.x, state.y);
    let mut crash_charged = false;
    let mut total = 0.0;

    for (u, du) in seq.controls.iter().zip(noise_row) {
        // Running cost at the pre-step state.
        let charge = crashed && (params.crash_per_step || !crash_charged);
        if charge {
            crash_charged = true;
        }
        total += state_cost(&state, goal, charge, &params.q, params.crash_penalty);
        let un = [u.v, u.omega];
        total += gamma * quad2(&params.r, *du, *du)
            + quad2(&params.r, un, *du)
            + 0.5 * quad2(&params.r, un, un);

        let applied = ControlInput::new(u.v + du[0], u.omega + du[1])
            .clamped(params.v_max, params.omega_max);
        state = step_dynamics(state, applied, params.dt);
        crashed = crashed || checker.blocked(state.x, state.y);
    }

    // Terminal cost, with the sticky indicator still in force.
    let charge = crashed && (params.crash_per_step || !crash_charged);
    total + state_cost(&state, goal, charge, &params.q, params.crash_penalty)
}

/// Spec-facing entry point scoring against a raw costmap.
pub fn rollout_cost(
    x0: &RobotState,
    seq: &ControlSequence,
    noise_row: &[[f64; 2]],
    costmap: &Costmap2D,
    goal: &RobotState,
    params: &MppiParams,
) -> f64 {
    let checker = CostmapChecker {
        costmap,
        footprint_radius: params.footprint_radius,
    };
    rollout_cost_with(x0, seq, noise_row, &checker, goal, params)
}

/// Cost-to-go of every rollout plus the running minimum used for the
/// numerically stable weight computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutCosts {
    costs: Vec<f64>,
    min_cost: f64,
}

impl RolloutCosts {
    pub fn new(costs: Vec<f64>) -> Self {
        let min_cost = costs.iter().copied().fold(f64::INFINITY, f64::min);
        Self { costs, min_cost }
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn min_cost(&self) -> f64 {
        self.min_cost
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.costs.is_empty() {
            0.0
        } else {
            self.costs.iter().sum::<f64>() / self.costs.len() as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use sim_world::{build_costmap, CostmapConfig, PointCloud, SphericalPoint};

    fn params() -> MppiParams {
        MppiParams::default()
    }

    #[test]
    fn state_cost_at_goal() {
        let goal = RobotState::new(1.0, 2.0, 0.5);
        let p = params();
        assert_relative_eq!(state_cost(&goal, &goal, false, &p.q, p.crash_penalty), 0.0);
        assert_relative_eq!(
            state_cost(&goal, &goal, true, &p.q, p.crash_penalty),
            1000.0
        );
    }

    #[test]
    fn state_cost_unit_offset() {
        let goal = RobotState::new(0.0, 0.0, 0.0);
        let state = RobotState::new(1.0, 0.0, 0.0);
        let p = params();
        assert_relative_eq!(
            state_cost(&state, &goal, false, &p.q, p.crash_penalty),
            2.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn state_cost_wraps_heading() {
        let goal = RobotState::new(0.0, 0.0, std::f64::consts::PI - 0.01);
        let state = RobotState::new(0.0, 0.0, -std::f64::consts::PI + 0.01);
        let p = params();
        // 0.02 rad apart across the wrap, not nearly 2*pi.
        let expected = 5.0 * 0.02f64.powi(2);
        assert_relative_eq!(
            state_cost(&state, &goal, false, &p.q, p.crash_penalty),
            expected,
            epsilon = 1e-9
        );
    }

    #[test]
    fn zero_everything_rolls_out_to_zero_cost() {
        let p = MppiParams {
            horizon: 8,
            ..params()
        };
        let goal = RobotState::new(0.0, 0.0, 0.0);
        let seq = ControlSequence::zeros(8, p.dt);
        let noise = vec![[0.0, 0.0]; 8];
        let cost = rollout_cost_with(&goal, &seq, &noise, &NoCollision, &goal, &p);
        assert_relative_eq!(cost, 0.0);
    }

    #[test]
    fn static_offset_single_step_cost() {
        let p = MppiParams {
            horizon: 1,
            ..params()
        };
        let x0 = RobotState::new(1.0, 0.0, 0.0);
        let goal = RobotState::new(0.0, 0.0, 0.0);
        let seq = ControlSequence::zeros(1, p.dt);
        let noise = vec![[0.0, 0.0]];
        let cost = rollout_cost_with(&x0, &seq, &noise, &NoCollision, &goal, &p);
        // Running 2.5 at the initial state plus terminal 2.5.
        assert_relative_eq!(cost, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn crashing_rollout_exceeds_penalty() {
        // Occupied disc one meter ahead of the robot.
        let cloud = PointCloud {
            points: (-5..=5)
                .map(|i| SphericalPoint {
                    azimuth: i as f64 * 0.05,
                    elevation: 0.0,
                    range: 1.0,
                })
                .collect(),
        };
        let pose = RobotState::new(0.0, 0.0, 0.0);
        let map = build_costmap(&cloud, &pose, &CostmapConfig::default());
        let p = MppiParams {
            horizon: 60,
            ..params()
        };
        let mut seq = ControlSequence::zeros(60, p.dt);
        for u in &mut seq.controls {
            u.v = 1.5;
        }
        let noise = vec![[0.0, 0.0]; 60];
        let goal = RobotState::new(5.0, 0.0, 0.0);
        let cost = rollout_cost(&pose, &seq, &noise, &map, &goal, &p);
        assert!(cost >= 1e3, "cost = {cost}");
    }

    #[test]
    fn rollouts_are_bit_deterministic() {
        let p = MppiParams {
            horizon: 40,
            ..params()
        };
        let x0 = RobotState::new(0.3, -0.7, 0.9);
        let goal = RobotState::new(4.0, 1.0, 0.0);
        let mut seq = ControlSequence::zeros(40, p.dt);
        for (k, u) in seq.controls.iter_mut().enumerate() {
            u.v = 0.8 + 0.01 * k as f64;
            u.omega = -0.2 + 0.005 * k as f64;
        }
        let noise: Vec<[f64; 2]> = (0..40)
            .map(|k| [0.01 * (k as f64).sin(), 0.02 * (k as f64).cos()])
            .collect();
        let a = rollout_cost_with(&x0, &seq, &noise, &NoCollision, &goal, &p);
        let b = rollout_cost_with(&x0, &seq, &noise, &NoCollision, &goal, &p);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn crash_once_charges_single_penalty() {
        // Start inside an occupied region; zero control keeps it there.
        struct Always;
        impl CollisionCheck for Always {
            fn blocked(&self, _: f64, _: f64) -> bool {
                true
            }
        }
        let goal = RobotState::new(0.0, 0.0, 0.0);
        let seq = ControlSequence::zeros(5, 1.0 / 30.0);
        let noise = vec![[0.0, 0.0]; 5];
        let per_step = MppiParams {
            horizon: 5,
            ..params()
        };
        let once = MppiParams {
            crash_per_step: false,
            ..per_step.clone()
        };
        let c_step = rollout_cost_with(&goal, &seq, &noise, &Always, &goal, &per_step);
        let c_once = rollout_cost_with(&goal, &seq, &noise, &Always, &goal, &once);
        assert_relative_eq!(c_step, 6.0 * 1e3, epsilon = 1e-9);
        assert_relative_eq!(c_once, 1e3, epsilon = 1e-9);
    }
}

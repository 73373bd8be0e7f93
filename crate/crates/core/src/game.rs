//! The three-player pointing game: misalignment measurement model, local
//! objectives and uncertainty-cone initial conditions.
//!
//! Every spacecraft `i` only observes its own objective
//! `h^i = w * (y_ij^2 + y_ik^2)`, where `y_ij` is the misalignment of the beam
//! sent by `j` on the detector of `i`. The joint optimum is the translation
//! manifold `u^i = δx_0^i + c`, on which all objectives vanish.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec4::{StateVec4, DIM};

/// One 4-vector per spacecraft, ordered S1, S2, S3.
pub type Joint = [StateVec4; 3];

/// Pairs in the fixed reporting order `(y12, y13, y23)`.
pub const PAIRS: [(Player, Player); 3] = [
    (Player::S1, Player::S2),
    (Player::S1, Player::S3),
    (Player::S2, Player::S3),
];

/// Default uncertainty-cone size in μrad.
pub const DEFAULT_UC_RADIUS: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    S1,
    S2,
    S3,
}

impl Player {
    pub const ALL: [Player; 3] = [Player::S1, Player::S2, Player::S3];

    pub fn index(self) -> usize {
        match self {
            Player::S1 => 0,
            Player::S2 => 1,
            Player::S3 => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// The two partners whose beams this spacecraft receives.
    pub fn others(self) -> [Player; 2] {
        match self {
            Player::S1 => [Player::S2, Player::S3],
            Player::S2 => [Player::S1, Player::S3],
            Player::S3 => [Player::S1, Player::S2],
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("{field} must be strictly positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
}

/// Hidden initial errors `δx_0^i`. Known to the simulator only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub delta_x0: Joint,
}

impl GroundTruth {
    pub fn new(delta_x0: Joint) -> Self {
        Self { delta_x0 }
    }

    pub fn of(&self, p: Player) -> StateVec4 {
        self.delta_x0[p.index()]
    }

    /// Largest pairwise distance `‖δx_0^i − δx_0^j‖`.
    pub fn max_pairwise_distance(&self) -> f64 {
        PAIRS
            .iter()
            .map(|&(i, j)| (self.of(i) - self.of(j)).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Objective weight in 1/μrad².
    pub w: f64,
    /// Final box half-width in μrad.
    pub b: f64,
    /// Uncertainty-cone size in μrad.
    pub uc_radius: f64,
}

impl GameConfig {
    /// Weight defaults to `1 / uc_radius²`, so a worst-case misalignment
    /// of one cone size contributes exactly 1.
    pub fn new(b: f64, uc_radius: f64, w: Option<f64>) -> Result<Self, GameError> {
        let cfg = Self {
            w: w.unwrap_or(1.0 / (uc_radius * uc_radius)),
            b,
            uc_radius,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        for (field, value) in [("w", self.w), ("b", self.b), ("uc_radius", self.uc_radius)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GameError::NonPositive { field, value });
            }
        }
        Ok(())
    }
}

impl Default for GameConfig {
    fn default() -> Self {
        Self::new(4.5, DEFAULT_UC_RADIUS, None).expect("default game config is valid")
    }
}

/// `‖(a − b) − (truth_i − truth_j)‖`, the misalignment seen by `i` for the
/// beam from `j` when the two states are `a` and `b`. Unsaturated.
pub fn measure_misalignment(
    a: StateVec4,
    b: StateVec4,
    truth_i: StateVec4,
    truth_j: StateVec4,
) -> f64 {
    ((a - b) - (truth_i - truth_j)).norm()
}

/// All three misalignments `(y12, y13, y23)` for the joint state `x`.
pub fn misalignments(x: &Joint, truth: &GroundTruth) -> [f64; 3] {
    PAIRS.map(|(i, j)| {
        measure_misalignment(x[i.index()], x[j.index()], truth.of(i), truth.of(j))
    })
}

/// Objective of `player` built from already-measured misalignments.
pub fn objective_from_misalignments(player: Player, y: &[f64; 3], w: f64) -> f64 {
    let [y12, y13, y23] = *y;
    let (ya, yb) = match player {
        Player::S1 => (y12, y13),
        Player::S2 => (y12, y23),
        Player::S3 => (y13, y23),
    };
    w * (ya * ya + yb * yb)
}

/// `h^i(u) = w * Σ_{j≠i} y_ij²`.
pub fn objective(player: Player, u: &Joint, truth: &GroundTruth, cfg: &GameConfig) -> f64 {
    let ui = u[player.index()];
    let ti = truth.of(player);
    player
        .others()
        .iter()
        .map(|&j| {
            let y = measure_misalignment(ui, u[j.index()], ti, truth.of(j));
            cfg.w * y * y
        })
        .sum()
}

/// All three objectives for the joint reference `u`.
pub fn objectives(u: &Joint, truth: &GroundTruth, cfg: &GameConfig) -> [f64; 3] {
    Player::ALL.map(|p| objective(p, u, truth, cfg))
}

/// True iff every pairwise misalignment at `u` is at most `tol`.
pub fn is_on_ne_manifold(u: &Joint, truth: &GroundTruth, tol: f64) -> bool {
    misalignments(u, truth).iter().all(|&y| y <= tol)
}

/// Uniform sample in the 4-ball of the given radius.
fn sample_ball<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> StateVec4 {
    loop {
        let g = StateVec4(std::array::from_fn(|_| StandardNormal.sample(rng)));
        let n = g.norm();
        if n > 0.0 {
            let u: f64 = rng.random();
            let r = radius * u.powf(1.0 / DIM as f64);
            return g * (r / n);
        }
    }
}

/// Draws hidden initial errors satisfying `‖δx_0^i − δx_0^j‖ ≤ uc_radius`.
///
/// Each error is uniform in the ball of radius `uc_radius / 2` centred at the
/// origin; candidates violating the pairwise bound are rejected.
pub fn sample_initial_conditions<R: Rng + ?Sized>(rng: &mut R, uc_radius: f64) -> GroundTruth {
    assert!(uc_radius > 0.0, "uc_radius must be positive");
    loop {
        let truth = GroundTruth::new(std::array::from_fn(|_| sample_ball(rng, uc_radius / 2.0)));
        if truth.max_pairwise_distance() <= uc_radius {
            return truth;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(a: [f64; 4]) -> StateVec4 {
        StateVec4(a)
    }

    fn arb_vec() -> impl Strategy<Value = StateVec4> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(StateVec4)
    }

    fn arb_joint() -> impl Strategy<Value = Joint> {
        (arb_vec(), arb_vec(), arb_vec()).prop_map(|(a, b, c)| [a, b, c])
    }

    #[test]
    fn misalignment_examples() {
        let z = StateVec4::ZERO;
        let t = v([1.0, -2.0, 0.5, 3.0]);
        assert_eq!(measure_misalignment(z, z, t, t), 0.0);
        let tj = v([0.3, 0.1, -0.7, 2.0]);
        assert_eq!(measure_misalignment(t, tj, t, tj), 0.0);
        assert_eq!(measure_misalignment(z, z, v([3.0, 0.0, 0.0, 0.0]), z), 3.0);
    }

    #[test]
    fn objective_zero_on_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let truth = sample_initial_conditions(&mut rng, 9.0);
        let cfg = GameConfig::new(4.5, 9.0, Some(0.37)).unwrap();
        for p in Player::ALL {
            assert_eq!(objective(p, &truth.delta_x0, &truth, &cfg), 0.0);
        }
    }

    #[test]
    fn worst_case_objective_is_two() {
        // y12 = y13 = 9 with w = 1/81.
        let truth = GroundTruth::new([
            StateVec4::ZERO,
            v([9.0, 0.0, 0.0, 0.0]),
            v([0.0, 9.0, 0.0, 0.0]),
        ]);
        let cfg = GameConfig::default();
        assert_eq!(cfg.w, 1.0 / 81.0);
        let h = objective(Player::S1, &[StateVec4::ZERO; 3], &truth, &cfg);
        assert!((h - 2.0).abs() < 1e-15, "h = {h}");
    }

    #[test]
    fn objective_matches_direct_formula_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = GameConfig::default();
        for _ in 0..100 {
            let truth = sample_initial_conditions(&mut rng, 9.0);
            for p in Player::ALL {
                let i = p.index();
                let mut direct = 0.0;
                for j in 0..3 {
                    if j == i {
                        continue;
                    }
                    let d = truth.delta_x0[j].0;
                    let e = truth.delta_x0[i].0;
                    let sq: f64 = (0..4).map(|c| (d[c] - e[c]).powi(2)).sum();
                    direct += cfg.w * sq;
                }
                let h = objective(p, &[StateVec4::ZERO; 3], &truth, &cfg);
                assert!((h - direct).abs() <= 1e-12 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn objective_from_misalignments_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth = sample_initial_conditions(&mut rng, 9.0);
        let cfg = GameConfig::default();
        let u = [v([0.1, 0.2, 0.3, 0.4]), v([-1.0, 0.0, 2.0, 0.5]), StateVec4::ZERO];
        let y = misalignments(&u, &truth);
        for p in Player::ALL {
            let a = objective(p, &u, &truth, &cfg);
            let b = objective_from_misalignments(p, &y, cfg.w);
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn sampler_respects_cone_and_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            assert!(sample_initial_conditions(&mut rng, 9.0).max_pairwise_distance() <= 9.0);
        }
        let a = sample_initial_conditions(&mut ChaCha8Rng::seed_from_u64(7), 9.0);
        let b = sample_initial_conditions(&mut ChaCha8Rng::seed_from_u64(7), 9.0);
        assert_eq!(a, b);
    }

    #[test]
    fn sampler_reaches_cone_boundary() {
        // Oracle: rejection sampling from the enclosing cube [-R, R]^12 with
        // the pairwise constraint, recording the largest accepted distance.
        let radius = 9.0;
        let mut oracle_rng = ChaCha8Rng::seed_from_u64(99);
        let mut oracle_max: f64 = 0.0;
        let mut accepted = 0;
        while accepted < 10_000 {
            let truth = GroundTruth::new(std::array::from_fn(|_| {
                StateVec4(std::array::from_fn(|_| oracle_rng.random_range(-radius..radius)))
            }));
            let d = truth.max_pairwise_distance();
            if d <= radius {
                oracle_max = oracle_max.max(d);
                accepted += 1;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let sampled_max = (0..10_000)
            .map(|_| sample_initial_conditions(&mut rng, radius).max_pairwise_distance())
            .fold(0.0, f64::max);
        assert!(sampled_max >= 0.95 * radius, "max {sampled_max}");
        assert!(oracle_max >= 0.95 * radius, "oracle max {oracle_max}");
        assert!(sampled_max >= 0.95 * oracle_max);
    }

    #[test]
    fn manifold_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let truth = sample_initial_conditions(&mut rng, 9.0);
        let c = v([0.7, -3.0, 1.1, 0.0]);
        let on = truth.delta_x0.map(|x| x + c);
        assert!(is_on_ne_manifold(&on, &truth, 1e-12));

        let dyadic = GroundTruth::new([v([0.5, -1.25, 2.0, 0.0]), v([1.0, 0.75, -0.5, 3.0]), StateVec4::ZERO]);
        let shifted = dyadic.delta_x0.map(|x| x + v([4.0, -0.5, 0.25, 1.0]));
        assert!(is_on_ne_manifold(&shifted, &dyadic, 0.0));

        let zero = [StateVec4::ZERO; 3];
        let min_y = misalignments(&zero, &truth).into_iter().fold(f64::INFINITY, f64::min);
        assert!(!is_on_ne_manifold(&zero, &truth, 0.5 * min_y));

        let tol = 0.1;
        let mut off = on;
        off[1] += StateVec4::basis(2) * (2.0 * tol);
        assert!(!is_on_ne_manifold(&off, &truth, tol));
    }

    #[test]
    fn config_rejects_nonpositive() {
        assert!(GameConfig::new(0.0, 9.0, None).is_err());
        assert!(GameConfig::new(4.5, -1.0, None).is_err());
        assert_eq!(
            GameConfig::new(4.5, 9.0, Some(0.0)),
            Err(GameError::NonPositive { field: "w", value: 0.0 })
        );
    }

    proptest! {
        #[test]
        fn measurement_symmetry(a in arb_vec(), b in arb_vec(), ti in arb_vec(), tj in arb_vec()) {
            prop_assert_eq!(measure_misalignment(a, b, ti, tj), measure_misalignment(b, a, tj, ti));
        }

        #[test]
        fn objective_translation_invariant(u in arb_joint(), t in arb_joint(), c in arb_vec()) {
            let truth = GroundTruth::new(t);
            let cfg = GameConfig::default();
            let shifted = u.map(|x| x + c);
            for p in Player::ALL {
                let h0 = objective(p, &u, &truth, &cfg);
                let h1 = objective(p, &shifted, &truth, &cfg);
                prop_assert!(h0 >= 0.0);
                prop_assert!((h0 - h1).abs() <= 1e-12 * h0.max(1.0));
            }
        }

        #[test]
        fn objective_convex_in_own_variable(u in arb_joint(), t in arb_joint(), a in arb_vec(), b in arb_vec()) {
            let truth = GroundTruth::new(t);
            let cfg = GameConfig::default();
            for p in Player::ALL {
                let mut ua = u;
                ua[p.index()] = a;
                let mut ub = u;
                ub[p.index()] = b;
                let mut um = u;
                um[p.index()] = (a + b) * 0.5;
                let mid = objective(p, &um, &truth, &cfg);
                let avg = 0.5 * objective(p, &ua, &truth, &cfg) + 0.5 * objective(p, &ub, &truth, &cfg);
                prop_assert!(mid <= avg + 1e-12 * avg.max(1.0));
            }
        }
    }
}

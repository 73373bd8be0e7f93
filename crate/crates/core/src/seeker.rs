//! Per-spacecraft bandit Nash-equilibrium seeker.
//!
//! Each seeker only sees the scalar value of its own objective. It mixes its
//! reference as `u_k = μ_k + r_k ζ_k` with `ζ_k` uniform on the unit 3-sphere,
//! estimates a gradient from consecutive objective values (residual feedback),
//! and moves `μ` by a projected heavy-ball step onto a box that grows from
//! `b0` toward `b_final`.
//!
//! The [`Variant::Baseline`] seeker drops both the momentum term and the
//! residual, using the one-point estimator `(d / r) h(u_k) ζ_k` instead.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec4::{StateVec4, DIM};

/// Scale factor of the sphere-sampling gradient estimators, equal to the
/// per-player decision dimension.
pub const ESTIMATOR_SCALE: f64 = DIM as f64;

#[derive(Debug, Error, PartialEq)]
pub enum SeekerError {
    #[error("schedules are defined for k >= 1, got k = 0")]
    ZeroIteration,
    #[error("exploration radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("{field} {requirement}, got {value}")]
    InvalidParam {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Residual feedback with momentum.
    #[default]
    Full,
    /// One-point estimator, no momentum.
    Baseline,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Variant::Full),
            "baseline" => Ok(Variant::Baseline),
            other => Err(format!("unknown variant `{other}` (expected full|baseline)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeekerParams {
    pub gamma_r: f64,
    pub a_r: f64,
    pub gamma_eta: f64,
    pub a_eta: f64,
    pub rho: f64,
    pub beta: f64,
    pub b_final: f64,
    pub b0: f64,
    pub epsilon: f64,
    pub variant: Variant,
}

impl Default for SeekerParams {
    fn default() -> Self {
        Self {
            gamma_r: 0.58,
            a_r: 0.2,
            gamma_eta: 4.5,
            a_eta: 0.5,
            rho: 0.93,
            beta: 0.01,
            b_final: 4.5,
            b0: 0.0,
            epsilon: 1e-6,
            variant: Variant::Full,
        }
    }
}

impl SeekerParams {
    pub fn validate(&self) -> Result<(), SeekerError> {
        let positive = [
            ("gamma_r", self.gamma_r),
            ("a_r", self.a_r),
            ("gamma_eta", self.gamma_eta),
            ("a_eta", self.a_eta),
            ("b", self.b_final),
            ("epsilon", self.epsilon),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SeekerError::InvalidParam {
                    field,
                    requirement: "must be strictly positive",
                    value,
                });
            }
        }
        for (field, value) in [("rho", self.rho), ("beta", self.beta)] {
            if !(0.0..1.0).contains(&value) {
                return Err(SeekerError::InvalidParam {
                    field,
                    requirement: "must lie in [0,1)",
                    value,
                });
            }
        }
        if !(self.b0 >= 0.0 && self.b0 <= self.b_final) {
            return Err(SeekerError::InvalidParam {
                field: "b0",
                requirement: "must lie in [0, b]",
                value: self.b0,
            });
        }
        Ok(())
    }

    pub fn with_b0(self, b0: f64) -> Self {
        Self { b0, ..self }
    }

    /// Momentum coefficient actually applied; zero for the baseline.
    pub fn effective_rho(&self) -> f64 {
        match self.variant {
            Variant::Full => self.rho,
            Variant::Baseline => 0.0,
        }
    }
}

/// `r_k = γ_r / k^{a_r}`.
pub fn exploration_radius(k: u64, p: &SeekerParams) -> Result<f64, SeekerError> {
    power_schedule(k, p.gamma_r, p.a_r)
}

/// `η_k = γ_η / k^{a_η}`.
pub fn step_size(k: u64, p: &SeekerParams) -> Result<f64, SeekerError> {
    power_schedule(k, p.gamma_eta, p.a_eta)
}

fn power_schedule(k: u64, gamma: f64, a: f64) -> Result<f64, SeekerError> {
    if k == 0 {
        return Err(SeekerError::ZeroIteration);
    }
    Ok(gamma / (k as f64).powf(a))
}

/// `b_k = β^k b0 + (1 − β^k) b_final`.
pub fn box_bound(k: u64, p: &SeekerParams) -> f64 {
    let decay = p.beta.powf(k as f64);
    decay * p.b0 + (1.0 - decay) * p.b_final
}

/// Uniform direction on the unit sphere in four dimensions, drawn as a
/// normalized standard-normal vector.
pub fn sample_unit_sphere<R: Rng + ?Sized>(rng: &mut R) -> StateVec4 {
    loop {
        let g = StateVec4(std::array::from_fn(|_| StandardNormal.sample(rng)));
        let n = g.norm();
        if n > 1e-300 {
            return g * (1.0 / n);
        }
    }
}

/// Residual-feedback estimate `(d / r) (h_now − h_prev) ζ`.
pub fn gradient_estimate_residual(
    h_now: f64,
    h_prev: f64,
    r: f64,
    zeta: StateVec4,
) -> Result<StateVec4, SeekerError> {
    if !(r > 0.0) {
        return Err(SeekerError::NonPositiveRadius(r));
    }
    Ok(zeta * (ESTIMATOR_SCALE / r * (h_now - h_prev)))
}

/// One-point estimate `(d / r) h_now ζ`.
pub fn gradient_estimate_onepoint(
    h_now: f64,
    r: f64,
    zeta: StateVec4,
) -> Result<StateVec4, SeekerError> {
    if !(r > 0.0) {
        return Err(SeekerError::NonPositiveRadius(r));
    }
    Ok(zeta * (ESTIMATOR_SCALE / r * h_now))
}

/// Euclidean projection onto `[-bound, bound]^4`.
pub fn project_box(v: StateVec4, bound: f64) -> StateVec4 {
    v.clamp_abs(bound)
}

/// Mutable per-spacecraft memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeekerState {
    /// `μ_k`
    pub mu: StateVec4,
    /// `μ_{k−1}`
    pub mu_prev: StateVec4,
    /// `ζ_k`, the perturbation inside the current reference.
    pub zeta_prev: StateVec4,
    /// Objective observed at the previous step; `None` before the first step.
    pub h_prev: Option<f64>,
    pub u_current: StateVec4,
    pub k: u64,
}

impl Default for SeekerState {
    fn default() -> Self {
        Self::new()
    }
}

/// `Π(μ_{k−1} − η g + ρ (μ_{k−1} − μ_{k−2}))` onto the box of iteration `k`.
///
/// `state` must still hold `μ_{k−1}` in `mu` and `μ_{k−2}` in `mu_prev`.
pub fn update_mean(
    state: &SeekerState,
    g: StateVec4,
    eta: f64,
    p: &SeekerParams,
    k: u64,
) -> StateVec4 {
    let momentum = (state.mu - state.mu_prev) * p.effective_rho();
    project_box(state.mu - g * eta + momentum, box_bound(k, p))
}

impl SeekerState {
    /// `μ_0 = μ_{−1} = 0` and `u_0 = 0`.
    pub fn new() -> Self {
        Self {
            mu: StateVec4::ZERO,
            mu_prev: StateVec4::ZERO,
            zeta_prev: StateVec4::ZERO,
            h_prev: None,
            u_current: StateVec4::ZERO,
            k: 0,
        }
    }

    /// Advances from `k` to `k + 1` given `h_now = h(u_k)` and returns the
    /// next reference `u_{k+1}`.
    ///
    /// On the very first call there is no earlier measurement, so the
    /// residual is taken as zero and the first move is pure exploration.
    pub fn step<R: Rng + ?Sized>(&mut self, h_now: f64, p: &SeekerParams, rng: &mut R) -> StateVec4 {
        let k = self.k + 1;
        let h_prev = self.h_prev.unwrap_or(h_now);

        let (g, eta) = if k == 1 {
            (StateVec4::ZERO, 0.0)
        } else {
            let r_prev = exploration_radius(k - 1, p).expect("k - 1 >= 1");
            let g = match p.variant {
                Variant::Full => gradient_estimate_residual(h_now, h_prev, r_prev, self.zeta_prev),
                Variant::Baseline => gradient_estimate_onepoint(h_now, r_prev, self.zeta_prev),
            }
            .expect("schedule radius is positive");
            (g, step_size(k - 1, p).expect("k - 1 >= 1"))
        };

        let mu_next = update_mean(self, g, eta, p, k);
        let zeta = sample_unit_sphere(rng);
        let r = exploration_radius(k, p).expect("k >= 1");
        let u = mu_next + zeta * r;

        self.mu_prev = self.mu;
        self.mu = mu_next;
        self.zeta_prev = zeta;
        self.h_prev = Some(h_now);
        self.u_current = u;
        self.k = k;
        u
    }
}

/// Loop guard of the seeker: true once `|h_now − h_prev| < epsilon`.
pub fn has_converged(h_now: f64, h_prev: f64, epsilon: f64) -> bool {
    (h_now - h_prev).abs() < epsilon
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> SeekerParams {
        SeekerParams::default().with_b0(0.3)
    }

    #[test]
    fn exploration_radius_examples() {
        let p = params();
        assert_eq!(exploration_radius(1, &p).unwrap(), 0.58);
        let q = SeekerParams { gamma_r: 1.0, a_r: 0.5, ..p };
        assert!((exploration_radius(1024, &q).unwrap() - 1.0 / 32.0).abs() < 1e-15);
        for k in 1..=5000 {
            assert!(exploration_radius(k + 1, &p).unwrap() < exploration_radius(k, &p).unwrap());
        }
        assert_eq!(exploration_radius(0, &p), Err(SeekerError::ZeroIteration));
    }

    #[test]
    fn step_size_examples() {
        let p = params();
        assert_eq!(step_size(1, &p).unwrap(), 4.5);
        assert!((step_size(100, &p).unwrap() - 0.45).abs() < 1e-15);
        let q = SeekerParams { gamma_eta: 1.0, ..p };
        assert_eq!(step_size(4, &q).unwrap(), 0.5);
        assert_eq!(step_size(0, &p), Err(SeekerError::ZeroIteration));
    }

    #[test]
    fn box_bound_examples() {
        let p = params();
        assert_eq!(box_bound(0, &p), 0.3);
        assert!((box_bound(1, &p) - 4.458).abs() < 1e-12);
        assert!((box_bound(200, &p) - 4.5).abs() < 1e-12);
        let slow = SeekerParams { beta: 0.9, ..p };
        let mut last = box_bound(0, &slow);
        for k in 1..200 {
            let b = box_bound(k, &slow);
            assert!(b >= last && b <= slow.b_final);
            last = b;
        }
    }

    #[test]
    fn sphere_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            assert!((sample_unit_sphere(&mut rng).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_first_and_second_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mut mean = [0.0; 4];
        let mut cov = [[0.0; 4]; 4];
        for _ in 0..n {
            let z = sample_unit_sphere(&mut rng);
            for a in 0..4 {
                mean[a] += z[a];
                for b in 0..4 {
                    cov[a][b] += z[a] * z[b];
                }
            }
        }
        for a in 0..4 {
            assert!((mean[a] / n as f64).abs() < 0.02);
            for b in 0..4 {
                let expected = if a == b { 0.25 } else { 0.0 };
                assert!((cov[a][b] / n as f64 - expected).abs() < 0.01);
            }
        }
    }

    #[test]
    fn estimator_examples() {
        let z = StateVec4::basis(0);
        assert_eq!(gradient_estimate_residual(0.7, 0.7, 0.3, z).unwrap(), StateVec4::ZERO);
        assert_eq!(
            gradient_estimate_residual(1.0, 0.5, 1.0, z).unwrap(),
            StateVec4::new(2.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(gradient_estimate_onepoint(0.0, 0.3, z).unwrap(), StateVec4::ZERO);
        assert_eq!(
            gradient_estimate_onepoint(1.0, 2.0, StateVec4::basis(1)).unwrap(),
            StateVec4::new(0.0, 2.0, 0.0, 0.0)
        );
        assert_eq!(
            gradient_estimate_residual(1.0, 0.0, 0.0, z),
            Err(SeekerError::NonPositiveRadius(0.0))
        );
        assert!(gradient_estimate_onepoint(1.0, -1.0, z).is_err());
    }

    #[test]
    fn projection_examples() {
        let v = StateVec4::new(5.0, 0.0, -6.0, 1.0);
        assert_eq!(project_box(v, 4.5), StateVec4::new(4.5, 0.0, -4.5, 1.0));
        let inside = StateVec4::new(1.0, -2.0, 0.5, 4.4);
        assert_eq!(project_box(inside, 4.5), inside);
    }

    #[test]
    fn update_mean_examples() {
        let p = SeekerParams { b0: 100.0, b_final: 100.0, ..params() };
        let fixed = SeekerState {
            mu: StateVec4::new(1.0, 2.0, 0.0, -1.0),
            mu_prev: StateVec4::new(1.0, 2.0, 0.0, -1.0),
            ..SeekerState::new()
        };
        assert_eq!(update_mean(&fixed, StateVec4::ZERO, 0.3, &p, 5), fixed.mu);

        let plain = SeekerParams { rho: 0.0, ..p };
        let origin = SeekerState::new();
        let out = update_mean(&origin, StateVec4::basis(0), 0.1, &plain, 5);
        assert_eq!(out, StateVec4::new(-0.1, 0.0, 0.0, 0.0));

        let moving = SeekerState { mu: StateVec4::basis(0), ..SeekerState::new() };
        let momentum = SeekerParams { rho: 0.5, ..p };
        assert_eq!(
            update_mean(&moving, StateVec4::ZERO, 0.1, &momentum, 5),
            StateVec4::new(1.5, 0.0, 0.0, 0.0)
        );
        let baseline = SeekerParams { variant: Variant::Baseline, ..momentum };
        assert_eq!(update_mean(&moving, StateVec4::ZERO, 0.1, &baseline, 5), moving.mu);
    }

    #[test]
    fn first_step_is_pure_exploration() {
        let p = params();
        let mut state = SeekerState::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = state.step(0.8, &p, &mut rng);
        assert_eq!(state.k, 1);
        assert_eq!(state.mu, StateVec4::ZERO);
        assert_eq!(state.h_prev, Some(0.8));
        let mut replay = ChaCha8Rng::seed_from_u64(9);
        let zeta = sample_unit_sphere(&mut replay);
        assert_eq!(u, zeta * 0.58);
    }

    #[test]
    fn converged_guard() {
        assert!(has_converged(0.4, 0.4, 1e-9));
        assert!(!has_converged(0.5, 0.25, 0.25));
        assert!(has_converged(0.5, 0.375, 0.25));
    }

    #[test]
    fn params_validation() {
        assert!(params().validate().is_ok());
        let bad = SeekerParams { rho: 1.2, ..params() };
        assert_eq!(bad.validate().unwrap_err().to_string(), "rho must lie in [0,1), got 1.2");
        assert!(SeekerParams { beta: 1.0, ..params() }.validate().is_err());
        assert!(SeekerParams { gamma_eta: 0.0, ..params() }.validate().is_err());
        assert!(SeekerParams { b0: 5.0, ..params() }.validate().is_err());
    }

    // Two-player game h^i = ‖u^i − u^j − c_ij‖² with c_21 = −c_12.
    fn quadratic_pair(u: &[StateVec4; 2], c: StateVec4) -> [f64; 2] {
        [(u[0] - u[1] - c).norm_squared(), (u[1] - u[0] + c).norm_squared()]
    }

    #[test]
    fn two_player_quadratic_reaches_manifold() {
        let c = StateVec4::new(0.6, -0.48, 0.0, 0.64);
        assert!((quadratic_pair(&[StateVec4::ZERO; 2], c)[0] - 1.0).abs() < 1e-12);

        // Oracle: exact simultaneous gradient play converges to u1 − u2 = c.
        let mut exact = [StateVec4::ZERO; 2];
        for _ in 0..2000 {
            let d = exact[0] - exact[1] - c;
            exact = [exact[0] - d * (2.0 * 0.1), exact[1] + d * (2.0 * 0.1)];
        }
        assert!(quadratic_pair(&exact, c)[0] < 1e-12);

        let p = SeekerParams {
            gamma_r: 0.3,
            a_r: 0.2,
            gamma_eta: 0.05,
            a_eta: 0.2,
            rho: 0.5,
            beta: 0.01,
            b_final: 4.5,
            b0: 0.3,
            ..SeekerParams::default()
        };
        let mut rngs = [ChaCha8Rng::seed_from_u64(1), ChaCha8Rng::seed_from_u64(2)];
        let mut seekers = [SeekerState::new(), SeekerState::new()];
        let mut u = [StateVec4::ZERO; 2];
        for _ in 0..2000 {
            let h = quadratic_pair(&u, c);
            for i in 0..2 {
                u[i] = seekers[i].step(h[i], &p, &mut rngs[i]);
            }
        }
        let mu = [seekers[0].mu, seekers[1].mu];
        let h = quadratic_pair(&mu, c);
        assert!(h[0] < 1e-2 && h[1] < 1e-2, "h = {h:?}");
    }

    proptest! {
        #[test]
        fn step_invariants(seed in any::<u64>(), hs in prop::collection::vec(0.0f64..2.0, 1..60)) {
            let p = params();
            let mut state = SeekerState::new();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for h in hs {
                let u = state.step(h, &p, &mut rng);
                let r = exploration_radius(state.k, &p).unwrap();
                let b = box_bound(state.k, &p);
                prop_assert!(((u - state.mu).norm() - r).abs() < 1e-12);
                prop_assert!((state.zeta_prev.norm() - 1.0).abs() < 1e-12);
                prop_assert!(state.mu.max_abs() <= b);
                prop_assert!(u.max_abs() <= b + r + 1e-12);
            }
        }

        #[test]
        fn step_is_deterministic(seed in any::<u64>(), hs in prop::collection::vec(0.0f64..2.0, 1..30)) {
            let p = params();
            let run = || {
                let mut state = SeekerState::new();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                hs.iter().map(|&h| state.step(h, &p, &mut rng)).collect::<Vec<_>>()
            };
            let a = run();
            let b = run();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.0.map(f64::to_bits), y.0.map(f64::to_bits));
            }
        }

        #[test]
        fn projection_idempotent(v in prop::array::uniform4(-20.0f64..20.0), b in 0.0f64..10.0) {
            let once = project_box(StateVec4(v), b);
            prop_assert_eq!(project_box(once, b), once);
        }
    }
}

//! First-order closed-loop plant tracking piecewise-constant references.
//!
//! Over one guidance period the relative state obeys
//! `δẋ = (u − δx) / τ_c`, so it is advanced with the exact solution
//! `δx⁺ = u + (δx − u) e^{−τ_g/τ_c}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::Joint;
use crate::vec4::StateVec4;

/// Minimum `τ_g / τ_c` for the reference to be considered tracked within one
/// period.
pub const MIN_PERIOD_RATIO: f64 = 10.0;

/// Wall-clock length of one guidance period in seconds.
pub const GUIDANCE_PERIOD_SECONDS: f64 = 17.0;

#[derive(Debug, Error, PartialEq)]
pub enum PlantError {
    #[error("{field} must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("tau_g / tau_c must be at least {MIN_PERIOD_RATIO}, got {0}")]
    SlowController(f64),
}

/// Time constants in iteration units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub tau_c: f64,
    pub tau_g: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            tau_c: 1.0 / 17.0,
            tau_g: 1.0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        for (field, value) in [("tau_c", self.tau_c), ("tau_g", self.tau_g)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PlantError::NonPositive { field, value });
            }
        }
        let ratio = self.tau_g / self.tau_c;
        if ratio < MIN_PERIOD_RATIO {
            return Err(PlantError::SlowController(ratio));
        }
        Ok(())
    }

    /// Fraction of the tracking error left after one period.
    pub fn decay(&self) -> f64 {
        (-self.tau_g / self.tau_c).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub delta_x: Joint,
    pub t: u64,
}

impl PlantState {
    /// All spacecraft start at their initial attitudes, `δx(0) = 0`.
    pub fn at_rest() -> Self {
        Self {
            delta_x: [StateVec4::ZERO; 3],
            t: 0,
        }
    }
}

/// Propagates the plant over one guidance period holding reference `u`.
pub fn plant_step(state: &PlantState, u: &Joint, p: &PlantParams) -> PlantState {
    let decay = p.decay();
    PlantState {
        delta_x: std::array::from_fn(|i| u[i] + (state.delta_x[i] - u[i]) * decay),
        t: state.t + 1,
    }
}

/// `‖δx(t_k) − u_{k−1}‖` over the stacked 12-vector.
pub fn tracking_residual(state: &PlantState, u_prev: &Joint) -> f64 {
    state
        .delta_x
        .iter()
        .zip(u_prev)
        .map(|(x, u)| (*x - *u).norm_squared())
        .sum::<f64>()
        .sqrt()
}

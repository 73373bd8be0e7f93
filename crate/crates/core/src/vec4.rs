//! Four-component angle vector in microradians.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Number of decision variables per spacecraft: three attitude angles plus
/// the steerable telescope angle.
pub const DIM: usize = 4;

/// Angles `(δα, δφ, δψ, δℓ)` in μrad. Used for relative states, references,
/// means, perturbations and the hidden initial errors alike.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVec4(pub [f64; DIM]);

impl StateVec4 {
    pub const ZERO: Self = Self([0.0; DIM]);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self([a, b, c, d])
    }

    /// Unit vector along `axis`.
    pub fn basis(axis: usize) -> Self {
        let mut v = [0.0; DIM];
        v[axis] = 1.0;
        Self(v)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Componentwise clamp to `[-bound, bound]`.
    pub fn clamp_abs(&self, bound: f64) -> Self {
        Self(self.0.map(|c| c.clamp(-bound, bound)))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn as_array(&self) -> &[f64; DIM] {
        &self.0
    }
}

impl From<[f64; DIM]> for StateVec4 {
    fn from(v: [f64; DIM]) -> Self {
        Self(v)
    }
}

impl Index<usize> for StateVec4 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for StateVec4 {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl AddAssign for StateVec4 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for StateVec4 {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl SubAssign for StateVec4 {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Mul<f64> for StateVec4 {
    type Output = Self;

    fn mul(self, rhs: f64) -> Self {
        Self(self.0.map(|c| c * rhs))
    }
}

impl Mul<StateVec4> for f64 {
    type Output = StateVec4;

    fn mul(self, rhs: StateVec4) -> StateVec4 {
        rhs * self
    }
}

impl Neg for StateVec4 {
    type Output = Self;

    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

//! Consumption-utility and generation-cost function families.
//!
//! These are the analytic backbone of every best response in the crate: each
//! family exposes its value, its first derivative, and the inverse of the
//! derivative, so market-clearing conditions of the form `u'(z) = price` can
//! be solved in closed form.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Error for evaluations outside a function's domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalError {
    /// Consumption must be strictly positive.
    NonPositiveConsumption(f64),
    /// A marginal value must be strictly positive to invert.
    NonPositiveMarginal(f64),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::NonPositiveConsumption(z) => {
                write!(f, "consumption must be > 0, got {z}")
            }
            EvalError::NonPositiveMarginal(m) => {
                write!(f, "marginal value must be > 0 to invert, got {m}")
            }
        }
    }
}

impl std::error::Error for EvalError {}

/// A prosumer's utility of consumption. Increasing, strictly concave, and
/// differentiable on positive consumption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum UtilitySpec {
    /// Constant relative risk aversion with parameter `eta > 0`:
    /// `(z^(1-eta) - 1) / (1 - eta)`, logarithmic at `eta = 1`.
    Isoelastic { eta: f64 },
}

impl UtilitySpec {
    pub fn isoelastic(eta: f64) -> Self {
        UtilitySpec::Isoelastic { eta }
    }

    /// Utility of consuming `z`. Unbounded below as `z -> 0` for `eta >= 1`.
    pub fn value(&self, z: f64) -> Result<f64, EvalError> {
        if z <= 0.0 {
            return Err(EvalError::NonPositiveConsumption(z));
        }
        let UtilitySpec::Isoelastic { eta } = *self;
        if eta == 1.0 {
            Ok(z.ln())
        } else {
            Ok((z.powf(1.0 - eta) - 1.0) / (1.0 - eta))
        }
    }

    /// Marginal utility `z^(-eta)`. Strictly decreasing in `z`.
    pub fn marginal(&self, z: f64) -> Result<f64, EvalError> {
        if z <= 0.0 {
            return Err(EvalError::NonPositiveConsumption(z));
        }
        let UtilitySpec::Isoelastic { eta } = *self;
        Ok(z.powf(-eta))
    }

    /// Consumption level at which the marginal utility equals `m`, i.e. the
    /// inverse of [`UtilitySpec::marginal`]: `m^(-1/eta)`.
    pub fn inverse_marginal(&self, m: f64) -> Result<f64, EvalError> {
        if m <= 0.0 {
            return Err(EvalError::NonPositiveMarginal(m));
        }
        let UtilitySpec::Isoelastic { eta } = *self;
        Ok(m.powf(-1.0 / eta))
    }
}

/// A generator's production cost over its dispatch range `[y_min, y_max]`.
/// Increasing and strictly convex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CostSpec {
    /// `alpha * y^2 + beta * y` with `alpha > 0`, `beta >= 0`.
    Quadratic {
        alpha: f64,
        beta: f64,
        y_min: f64,
        y_max: f64,
    },
}

impl CostSpec {
    pub fn quadratic(alpha: f64, beta: f64, y_min: f64, y_max: f64) -> Self {
        CostSpec::Quadratic {
            alpha,
            beta,
            y_min,
            y_max,
        }
    }

    /// Production cost of output `y`.
    pub fn value(&self, y: f64) -> f64 {
        let CostSpec::Quadratic { alpha, beta, .. } = *self;
        alpha * y * y + beta * y
    }

    /// Marginal cost `2 * alpha * y + beta`. Strictly increasing in `y`.
    pub fn marginal(&self, y: f64) -> f64 {
        let CostSpec::Quadratic { alpha, beta, .. } = *self;
        2.0 * alpha * y + beta
    }

    /// Output level at which the marginal cost equals `m`, unclipped; callers
    /// clip to the dispatch range.
    pub fn inverse_marginal(&self, m: f64) -> f64 {
        let CostSpec::Quadratic { alpha, beta, .. } = *self;
        (m - beta) / (2.0 * alpha)
    }

    /// Dispatch range `(y_min, y_max)`.
    pub fn bounds(&self) -> (f64, f64) {
        let CostSpec::Quadratic { y_min, y_max, .. } = *self;
        (y_min, y_max)
    }
}

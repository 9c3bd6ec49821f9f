//! One-part pricing counterfactual and welfare metrics.
//!
//! Under one-part pricing the aggregator may only set a per-unit price (no
//! participation fee), so she marks the price down below the wholesale level
//! to earn a margin, and the prosumer under-sells relative to the efficient
//! outcome. This module computes the aggregator-prosumer equilibrium, the
//! induced inverse supply curve the system operator then faces, the
//! resulting dispatch and its cost, a surplus decomposition shared by all
//! models, and the price-of-aggregation ratio quantifying the loss.

use std::fmt;

use serde::Serialize;

use crate::agents::{aggregator_optimal_price, AgentError};
use crate::dispatch::{
    solve_benchmark, solve_no_der, DispatchModel, DispatchSolution, SolveError, SolveOptions,
};
use crate::domain::{validate, Scenario, TwoPartPrice};
use crate::numeric::{adaptive_simpson, bisect};
use crate::utility::{CostSpec, UtilitySpec};

const BISECT_ITERS: u32 = 200;
const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum OnePartError {
    /// Inputs must be strictly positive.
    NonPositiveInput {
        name: &'static str,
        value: f64,
    },
    /// The requested quantity is outside the supply curve's domain.
    SupplyDomain {
        x: f64,
        capacity: f64,
    },
    /// The one-part model is defined for a single node with one prosumer,
    /// one generator, and positive fixed demand.
    Config(String),
    /// The efficient cost is nonpositive under the chosen normalization, so
    /// the ratio is meaningless.
    Degenerate(String),
    Solve(SolveError),
    Agent(AgentError),
}

impl fmt::Display for OnePartError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OnePartError::NonPositiveInput { name, value } => {
                write!(f, "{name} must be > 0, got {value}")
            }
            OnePartError::SupplyDomain { x, capacity } => {
                write!(f, "quantity {x} outside supply domain [0, {capacity})")
            }
            OnePartError::Config(msg) => write!(f, "one-part configuration: {msg}"),
            OnePartError::Degenerate(msg) => write!(f, "degenerate comparison: {msg}"),
            OnePartError::Solve(e) => write!(f, "{e}"),
            OnePartError::Agent(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for OnePartError {}

impl From<SolveError> for OnePartError {
    fn from(e: SolveError) -> Self {
        OnePartError::Solve(e)
    }
}

impl From<AgentError> for OnePartError {
    fn from(e: AgentError) -> Self {
        OnePartError::Agent(e)
    }
}

impl From<crate::utility::EvalError> for OnePartError {
    fn from(e: crate::utility::EvalError) -> Self {
        OnePartError::Agent(e.into())
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<(), OnePartError> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(OnePartError::NonPositiveInput { name, value })
    }
}

/// The aggregator-prosumer equilibrium under a pure per-unit price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnePartEquilibrium {
    /// The aggregator's profit-maximizing unit price; equals the wholesale
    /// price when no trade occurs.
    pub marginal_price: f64,
    /// Quantity the prosumer sells at that price.
    pub sell: f64,
    /// The aggregator's margin profit `(wholesale - price) * sell`.
    pub aggregator_profit: f64,
    pub wholesale_price: f64,
}

impl OnePartEquilibrium {
    pub fn trade_occurs(&self) -> bool {
        self.sell > 0.0
    }
}

/// Solves the one-part price fixed point numerically by bracketing bisection:
/// the stationarity condition of the aggregator's margin profit
/// `(wholesale - p) * (C - p^(-1/eta))` is
/// `(1 - eta) * p + eta * C * p^(1 + 1/eta) = wholesale`,
/// and its left side is strictly increasing on the trading range.
pub fn one_part_fixed_point_price(
    capacity: f64,
    eta: f64,
    wholesale: f64,
) -> Result<f64, OnePartError> {
    check_positive("capacity", capacity)?;
    check_positive("eta", eta)?;
    check_positive("wholesale", wholesale)?;
    let floor = capacity.powf(-eta);
    if wholesale <= floor {
        return Err(OnePartError::Config(format!(
            "no trade: wholesale price {wholesale} at or below the no-sale threshold {floor}"
        )));
    }
    let objective = |p: f64| (1.0 - eta) * p + eta * capacity * p.powf(1.0 + 1.0 / eta) - wholesale;
    let root = bisect(objective, floor, wholesale, BISECT_ITERS);
    debug_assert!(objective(root).abs() <= ROOT_TOL, "root residual too large");
    Ok(root)
}

/// The one-part Stackelberg equilibrium for a prosumer with isoelastic
/// utility. Uses the closed form `sqrt(wholesale / capacity)` for
/// logarithmic utility and the numeric fixed point otherwise. When the
/// capacity is at most the prosumer's own consumption target there is no
/// price at which she sells, and the outcome carries zero trade.
pub fn one_part_price(
    capacity: f64,
    eta: f64,
    wholesale: f64,
) -> Result<OnePartEquilibrium, OnePartError> {
    check_positive("capacity", capacity)?;
    check_positive("eta", eta)?;
    check_positive("wholesale", wholesale)?;
    let no_sale_target = wholesale.powf(-1.0 / eta);
    if capacity <= no_sale_target {
        return Ok(OnePartEquilibrium {
            marginal_price: wholesale,
            sell: 0.0,
            aggregator_profit: 0.0,
            wholesale_price: wholesale,
        });
    }
    let price = if eta == 1.0 {
        (wholesale / capacity).sqrt()
    } else {
        one_part_fixed_point_price(capacity, eta, wholesale)?
    };
    let sell = capacity - price.powf(-1.0 / eta);
    Ok(OnePartEquilibrium {
        marginal_price: price,
        sell,
        aggregator_profit: (wholesale - price) * sell,
        wholesale_price: wholesale,
    })
}

/// The inverse supply curve the wholesale market faces when DER supply comes
/// through a one-part-pricing aggregator: the wholesale price at which the
/// equilibrium sale equals `x`. Closed form `C / (C - x)^2` for logarithmic
/// utility; inverted numerically (the sale is strictly increasing in the
/// wholesale price) otherwise.
pub fn induced_inverse_supply(x: f64, capacity: f64, eta: f64) -> Result<f64, OnePartError> {
    check_positive("capacity", capacity)?;
    check_positive("eta", eta)?;
    if x < 0.0 || x >= capacity {
        return Err(OnePartError::SupplyDomain { x, capacity });
    }
    if eta == 1.0 {
        let rest = capacity - x;
        return Ok(capacity / (rest * rest));
    }
    let floor = capacity.powf(-eta);
    if x == 0.0 {
        return Ok(floor);
    }
    let sale_at = |wholesale: f64| -> f64 {
        match one_part_price(capacity, eta, wholesale) {
            Ok(eq) => eq.sell,
            Err(_) => 0.0,
        }
    };
    let mut hi = floor.max(1.0);
    let mut expansions = 0;
    while sale_at(hi) < x {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(OnePartError::SupplyDomain { x, capacity });
        }
    }
    Ok(bisect(|w| sale_at(w) - x, floor, hi, BISECT_ITERS))
}

/// Cumulative payment along the induced supply curve, `integral of
/// induced_inverse_supply from 0 to x`. Closed form `x / (C - x)` for
/// logarithmic utility, adaptive quadrature otherwise.
pub fn induced_supply_cost(x: f64, capacity: f64, eta: f64) -> Result<f64, OnePartError> {
    if x == 0.0 {
        return Ok(0.0);
    }
    check_positive("capacity", capacity)?;
    check_positive("eta", eta)?;
    if x < 0.0 || x >= capacity {
        return Err(OnePartError::SupplyDomain { x, capacity });
    }
    if eta == 1.0 {
        return Ok(x / (capacity - x));
    }
    let price = |t: f64| induced_inverse_supply(t, capacity, eta).unwrap_or(f64::INFINITY);
    Ok(adaptive_simpson(&price, 0.0, x, ROOT_TOL))
}

/// A one-part dispatch: the operator's cost-minimizing split of the fixed
/// demand between the generator and DER supply bought along the induced
/// curve, plus the true welfare of the resulting allocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnePartDispatch {
    /// The allocation. `welfare` is the true consumption utility minus
    /// generation cost at this allocation; when no trade occurs it is the
    /// no-DER market welfare (the prosumer still buys as a consumer).
    pub solution: DispatchSolution,
    /// The operator's objective: generation cost plus the payment along the
    /// induced supply curve.
    pub induced_cost: f64,
}

fn single_node_parts(
    scenario: &Scenario,
) -> Result<(f64, &UtilitySpec, &CostSpec, f64), OnePartError> {
    if scenario.node_count() != 1 || scenario.prosumers.len() != 1 || scenario.generators.len() != 1
    {
        return Err(OnePartError::Config(
            "requires exactly one node, one prosumer, and one generator".to_string(),
        ));
    }
    let demand = scenario.fixed_demand[0];
    if demand <= 0.0 {
        return Err(OnePartError::Config(
            "requires positive fixed demand".to_string(),
        ));
    }
    Ok((
        scenario.prosumers[0].capacity,
        &scenario.prosumers[0].utility,
        &scenario.generators[0].cost,
        demand,
    ))
}

/// Solves the one-part dispatch: minimize `cost(y) + induced_supply_cost(x)`
/// subject to `x + y = fixed demand` and the boxes. The derivative gap
/// `induced price minus marginal cost` is strictly increasing in `x`, so the
/// optimum is a clipped bisection.
pub fn solve_one_part(
    scenario: &Scenario,
    opts: &SolveOptions,
) -> Result<OnePartDispatch, OnePartError> {
    let violations = validate(scenario);
    if !violations.is_empty() {
        return Err(OnePartError::Solve(SolveError::InvalidScenario(violations)));
    }
    let (capacity, utility, cost, demand) = single_node_parts(scenario)?;
    let UtilitySpec::Isoelastic { eta } = *utility;
    let (y_min, y_max) = cost.bounds();

    let x_lo = (demand - y_max).max(0.0);
    let x_hi = (demand - y_min).min(capacity);
    if x_lo > x_hi {
        return Err(OnePartError::Solve(SolveError::Infeasible {
            detail: format!(
                "fixed demand {demand} cannot be met: sale range [{x_lo}, {x_hi}] is empty"
            ),
        }));
    }

    let x = if capacity == 0.0 || x_hi == 0.0 {
        0.0
    } else {
        let gap = |x: f64| -> f64 {
            let price = induced_inverse_supply(x, capacity, eta).unwrap_or(f64::INFINITY);
            price - cost.marginal(demand - x)
        };
        // Keep strictly inside the curve's domain; the induced price blows
        // up at full capacity anyway.
        let probe_hi = x_hi.min(capacity * (1.0 - 1e-12));
        if gap(x_lo) >= 0.0 {
            x_lo
        } else if gap(probe_hi) <= 0.0 {
            probe_hi
        } else {
            bisect(gap, x_lo, probe_hi, BISECT_ITERS)
        }
    };
    let y = demand - x;
    let induced_cost = cost.value(y) + induced_supply_cost(x, capacity, eta)?;

    let solution = if x > 0.0 {
        let price = if y > y_min + 1e-12 && y < y_max - 1e-12 {
            cost.marginal(y)
        } else {
            induced_inverse_supply(x, capacity, eta)?
        };
        let welfare = utility
            .value(capacity - x)
            .map(|u| u - cost.value(y))
            .unwrap_or(f64::NEG_INFINITY);
        DispatchSolution {
            sell: vec![x],
            buy: vec![0.0],
            generation: vec![y],
            net_injection: vec![0.0],
            nodal_price: vec![price],
            line_multiplier: Vec::new(),
            balance_residual: 0.0,
            welfare,
        }
    } else {
        // No DER is dispatched; the market outcome is the no-DER clearing,
        // where the prosumer may still buy for her own consumption.
        solve_no_der(scenario, opts)?
    };

    Ok(OnePartDispatch {
        solution,
        induced_cost,
    })
}

/// How the efficient dispatch cost is normalized when forming the
/// price-of-aggregation ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Generation cost plus the prosumer's opportunity cost of the energy
    /// sold, `u(C) - u(consumption)`. Keeps the ratio at least one.
    OpportunityCost,
    /// Minus the optimal welfare, taken verbatim.
    LiteralNegativeWelfare,
}

/// Price-of-aggregation: the ratio of the one-part dispatch cost to the
/// efficient dispatch cost. One means no efficiency loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoAgResult {
    pub cost_one_part: f64,
    pub cost_efficient: f64,
    pub poag: f64,
    pub normalization: Normalization,
}

/// Computes the price of aggregation on a single-node scenario. A prosumer
/// with zero capacity gives ratio one by convention: both models dispatch
/// only the generator.
pub fn poag(
    scenario: &Scenario,
    opts: &SolveOptions,
    normalization: Normalization,
) -> Result<PoAgResult, OnePartError> {
    let one_part = solve_one_part(scenario, opts)?;
    if scenario.prosumers[0].capacity == 0.0 {
        return Ok(PoAgResult {
            cost_one_part: one_part.induced_cost,
            cost_efficient: one_part.induced_cost,
            poag: 1.0,
            normalization,
        });
    }
    let efficient = solve_benchmark(scenario, opts)?;
    let cost_efficient = match normalization {
        Normalization::LiteralNegativeWelfare => -efficient.welfare,
        Normalization::OpportunityCost => {
            let p = &scenario.prosumers[0];
            let consumption = p.capacity + efficient.buy[0] - efficient.sell[0];
            let generation_cost: f64 = scenario
                .generators
                .iter()
                .zip(&efficient.generation)
                .map(|(g, y)| g.cost.value(*y))
                .sum();
            let foregone = p.utility.value(p.capacity)? - p.utility.value(consumption)?;
            generation_cost + foregone
        }
    };
    if cost_efficient <= 0.0 {
        return Err(OnePartError::Degenerate(format!(
            "efficient cost {cost_efficient} is not positive under {normalization:?}"
        )));
    }
    Ok(PoAgResult {
        cost_one_part: one_part.induced_cost,
        cost_efficient,
        poag: one_part.induced_cost / cost_efficient,
        normalization,
    })
}

/// Social welfare split into participant surpluses.
///
/// The surpluses follow the market's money flows at the solution's nodal
/// prices: prosumer surplus counts consumption utility, sale revenue, and
/// payments for elastic plus fixed demand at the nodal price; aggregator
/// surplus counts participation fees plus the wholesale margin; generator
/// surplus is revenue minus cost; merchandising surplus is the operator's
/// congestion revenue. The four parts sum to `total`, which is computed
/// independently as utility minus cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelfareDecomposition {
    pub prosumer_surplus: f64,
    pub aggregator_surplus: f64,
    pub generator_surplus: f64,
    pub merchandising_surplus: f64,
    pub total: f64,
}

/// Decomposes a dispatch solution's welfare into surpluses.
///
/// For the aggregation model, `prices` gives each prosumer's two-part offer;
/// when absent, the profit-maximizing offers at the solution's nodal prices
/// are used (the equilibrium ones, where the unit price passes the nodal
/// price through and fees carry all aggregator profit). Benchmark and no-DER
/// solutions have zero aggregator surplus.
pub fn welfare_decomposition(
    solution: &DispatchSolution,
    scenario: &Scenario,
    model: DispatchModel,
    prices: Option<&[TwoPartPrice]>,
) -> Result<WelfareDecomposition, OnePartError> {
    let nodal = &solution.nodal_price;

    let mut prosumer_surplus = 0.0;
    let mut aggregator_surplus = 0.0;
    let mut total_utility = 0.0;
    for (j, p) in scenario.prosumers.iter().enumerate() {
        let price = nodal[p.node];
        let x = solution.sell[j];
        let d = solution.buy[j];
        let consumption = p.capacity + d - x;
        let utility = p.utility.value(consumption)?;
        total_utility += utility;
        match model {
            DispatchModel::Benchmark | DispatchModel::NoDer => {
                prosumer_surplus += utility + price * x - price * d;
            }
            DispatchModel::Aggregation => {
                let offer = match prices {
                    Some(list) => list[j],
                    None => aggregator_optimal_price(p, price)?.price,
                };
                let fee = if x > 0.0 {
                    offer.participation_fee
                } else {
                    0.0
                };
                prosumer_surplus += utility + offer.marginal_price * x - fee - price * d;
                aggregator_surplus += fee + (price - offer.marginal_price) * x;
            }
        }
    }
    // Fixed demand pays the nodal price; its payment sits with the demand
    // side of the market.
    for (price, demand) in nodal.iter().zip(&scenario.fixed_demand) {
        prosumer_surplus -= price * demand;
    }

    let mut generator_surplus = 0.0;
    let mut total_cost = 0.0;
    for (g, y) in scenario.generators.iter().zip(&solution.generation) {
        let cost = g.cost.value(*y);
        total_cost += cost;
        generator_surplus += nodal[g.node] * y - cost;
    }

    let merchandising_surplus: f64 = nodal
        .iter()
        .zip(&solution.net_injection)
        .map(|(price, h)| price * h)
        .sum();

    Ok(WelfareDecomposition {
        prosumer_surplus,
        aggregator_surplus,
        generator_surplus,
        merchandising_surplus,
        total: total_utility - total_cost,
    })
}

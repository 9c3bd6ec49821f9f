//! Wholesale electricity market outcomes under three models of distributed
//! energy resource integration: direct participation, profit-maximizing
//! aggregation with two-part pricing, and one-part pricing.
//!
//! The crate provides the market data model ([`domain`]), the analytic
//! utility and cost families ([`utility`]), closed-form participant and
//! aggregator best responses ([`agents`]), economic-dispatch solvers with a
//! first-order optimality verifier ([`dispatch`]), and the one-part
//! counterfactual with welfare and efficiency-loss metrics ([`onepart`]).
//! Two-part pricing preserves the efficient dispatch exactly; one-part
//! pricing does not, and the gap is measured by the price of aggregation.

pub mod agents;
pub mod dispatch;
pub mod domain;
pub mod numeric;
pub mod onepart;
pub mod random;
pub mod utility;

pub use agents::{
    aggregator_optimal_price, aggregator_profit, consumption_thresholds, generator_response,
    prosumer_agg_response, prosumer_direct_response, prosumer_payoff, AgentError,
    AggregatorOutcome, ConsumptionThresholds,
};
pub use dispatch::{
    equilibrium_prices, map_benchmark_to_aggregation, solve, solve_aggregation, solve_benchmark,
    solve_no_der, verify_kkt, DispatchModel, DispatchSolution, KktReport, SolveError, SolveOptions,
};
pub use domain::{
    validate, Generator, Line, Network, Prosumer, ProsumerResponse, Scenario, TwoPartPrice,
};
pub use onepart::{
    induced_inverse_supply, induced_supply_cost, one_part_fixed_point_price, one_part_price, poag,
    solve_one_part, welfare_decomposition, Normalization, OnePartDispatch, OnePartEquilibrium,
    OnePartError, PoAgResult, WelfareDecomposition,
};
pub use random::random_scenario;
pub use utility::{CostSpec, EvalError, UtilitySpec};

//! First-order optimality verification for dispatch solutions.
//!
//! The verifier is deliberately independent of the solver: it evaluates the
//! stationarity, primal-feasibility, and complementary-slackness conditions
//! of the stated optimization program directly from the utility and cost
//! derivatives, so a buggy solver cannot certify itself.
//!
//! Stationarity at a box bound is checked with the corresponding bound
//! multiplier sign: a participant pinned at a bound is optimal as long as the
//! price gap points into the bound.

use serde::Serialize;

use crate::domain::Scenario;

use super::DispatchSolution;

/// Which dispatch program a solution claims to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DispatchModel {
    Benchmark,
    Aggregation,
    NoDer,
}

/// Max-norm residuals of the first-order optimality conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktReport {
    /// Worst violation of a marginal condition (or of nodal-price
    /// consistency with the line multipliers) across participants.
    pub stationarity_residual: f64,
    /// Worst primal-feasibility violation: nodal balance, zero total
    /// injection, line capacities, and participant boxes.
    pub primal_residual: f64,
    /// Worst line complementary-slackness violation, including multiplier
    /// negativity.
    pub complementarity_residual: f64,
    /// True when every residual is at most the tolerance the report was
    /// produced with.
    pub is_equilibrium: bool,
}

fn at_bound(value: f64, bound: f64) -> bool {
    (value - bound).abs() <= 1e-9 * (1.0 + bound.abs())
}

/// Verifies the KKT conditions of `solution` for the given program variant.
/// Residuals are max-norm; `is_equilibrium` holds iff all are at most `tol`.
pub fn verify_kkt(
    solution: &DispatchSolution,
    scenario: &Scenario,
    model: DispatchModel,
    tol: f64,
) -> KktReport {
    let n = scenario.node_count();
    let mut stationarity = 0.0f64;
    let mut primal = 0.0f64;
    let mut complementarity = 0.0f64;

    // Nodal balance: the stored injection must equal fixed demand plus net
    // prosumer demand minus generation.
    let mut implied = scenario.fixed_demand.clone();
    implied.resize(n, 0.0);
    for (p, (x, d)) in scenario
        .prosumers
        .iter()
        .zip(solution.sell.iter().zip(&solution.buy))
    {
        implied[p.node] += d - x;
    }
    for (g, y) in scenario.generators.iter().zip(&solution.generation) {
        implied[g.node] -= y;
    }
    for (h, want) in solution.net_injection.iter().zip(&implied) {
        primal = primal.max((h - want).abs());
    }
    primal = primal.max(solution.net_injection.iter().sum::<f64>().abs());

    // Line limits and complementary slackness.
    for (l, line) in scenario.network.lines.iter().enumerate() {
        let flow: f64 = line
            .incidence_row
            .iter()
            .zip(&solution.net_injection)
            .map(|(b, h)| b * h)
            .sum();
        primal = primal.max(flow - line.capacity);
        let mu = solution.line_multiplier[l];
        complementarity = complementarity
            .max((mu * (line.capacity - flow)).abs())
            .max(-mu);
    }

    // Nodal prices must be a single system price shifted by the line
    // multipliers: lambda - B' mu is constant across nodes.
    if n > 1 {
        let mut shifted = solution.nodal_price.clone();
        for (line, &mu) in scenario.network.lines.iter().zip(&solution.line_multiplier) {
            for (v, b) in shifted.iter_mut().zip(&line.incidence_row) {
                *v -= mu * b;
            }
        }
        let max = shifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = shifted.iter().cloned().fold(f64::INFINITY, f64::min);
        stationarity = stationarity.max(max - min);
    }

    // Prosumers: marginal utility of consumption against the nodal price,
    // with net trade bounded in [capacity - cap, capacity].
    for (p, (x, d)) in scenario
        .prosumers
        .iter()
        .zip(solution.sell.iter().zip(&solution.buy))
    {
        let price = solution.nodal_price[p.node];
        primal = primal.max(-x).max(-d);
        match model {
            DispatchModel::Benchmark => {
                let net = x - d;
                primal = primal
                    .max(net - p.capacity)
                    .max((p.capacity - p.consumption_cap) - net);
            }
            DispatchModel::Aggregation => {
                primal = primal
                    .max(x - p.capacity)
                    .max(d - (p.consumption_cap - p.capacity + x));
            }
            DispatchModel::NoDer => {
                primal = primal
                    .max(x.abs())
                    .max(d - (p.consumption_cap - p.capacity));
            }
        }
        let consumption = p.capacity + d - x;
        let marginal = match p.utility.marginal(consumption) {
            Ok(m) => m,
            Err(_) => {
                stationarity = f64::INFINITY;
                continue;
            }
        };
        let net = x - d;
        let residual = match model {
            DispatchModel::NoDer => {
                // Only the purchase is a decision; its box is [0, cap - C].
                if at_bound(*d, 0.0) {
                    (marginal - price).max(0.0)
                } else if at_bound(*d, p.consumption_cap - p.capacity) {
                    (price - marginal).max(0.0)
                } else {
                    (marginal - price).abs()
                }
            }
            _ => {
                if at_bound(net, p.capacity - p.consumption_cap) {
                    // Consuming at the cap: price may sit below the marginal.
                    (price - marginal).max(0.0)
                } else if at_bound(net, p.capacity) {
                    // Selling everything: price may sit above the marginal.
                    (marginal - price).max(0.0)
                } else {
                    (marginal - price).abs()
                }
            }
        };
        stationarity = stationarity.max(residual);
    }

    // Generators: marginal cost against the nodal price within dispatch
    // bounds.
    for (g, y) in scenario.generators.iter().zip(&solution.generation) {
        let price = solution.nodal_price[g.node];
        let (y_min, y_max) = g.cost.bounds();
        primal = primal.max(y_min - y).max(y - y_max);
        let marginal = g.cost.marginal(*y);
        let residual = if at_bound(*y, y_min) && at_bound(*y, y_max) {
            0.0
        } else if at_bound(*y, y_min) {
            (price - marginal).max(0.0)
        } else if at_bound(*y, y_max) {
            (marginal - price).max(0.0)
        } else {
            (marginal - price).abs()
        };
        stationarity = stationarity.max(residual);
    }

    let is_equilibrium = stationarity <= tol && primal <= tol && complementarity <= tol;
    KktReport {
        stationarity_residual: stationarity,
        primal_residual: primal,
        complementarity_residual: complementarity,
        is_equilibrium,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::{solve_benchmark, SolveOptions};
    use crate::domain::{Generator, Network, Prosumer, Scenario};
    use crate::utility::{CostSpec, UtilitySpec};

    fn reference_single_node() -> Scenario {
        Scenario {
            network: Network::single_node(),
            prosumers: vec![Prosumer {
                id: "p1".to_string(),
                node: 0,
                capacity: 50.0,
                consumption_cap: 1000.0,
                utility: UtilitySpec::isoelastic(1.0),
            }],
            generators: vec![Generator {
                id: "g1".to_string(),
                node: 0,
                cost: CostSpec::quadratic(0.01, 1.0, 0.0, 1000.0),
            }],
            fixed_demand: vec![100.0],
        }
    }

    #[test]
    fn solver_output_passes_verification() {
        let s = reference_single_node();
        let sol = solve_benchmark(&s, &SolveOptions::default()).unwrap();
        let report = verify_kkt(&sol, &s, DispatchModel::Benchmark, 1e-8);
        assert!(report.is_equilibrium, "{report:?}");
    }

    #[test]
    fn perturbed_price_breaks_stationarity() {
        let s = reference_single_node();
        let mut sol = solve_benchmark(&s, &SolveOptions::default()).unwrap();
        sol.nodal_price[0] += 0.1;
        let report = verify_kkt(&sol, &s, DispatchModel::Benchmark, 1e-8);
        assert!(
            report.stationarity_residual >= 0.09,
            "residual {}",
            report.stationarity_residual
        );
        assert!(!report.is_equilibrium);
    }

    #[test]
    fn broken_injection_sum_breaks_primal() {
        let s = reference_single_node();
        let mut sol = solve_benchmark(&s, &SolveOptions::default()).unwrap();
        sol.net_injection[0] += 1.0;
        let report = verify_kkt(&sol, &s, DispatchModel::Benchmark, 1e-8);
        assert!(
            report.primal_residual >= 1.0,
            "residual {}",
            report.primal_residual
        );
    }
}

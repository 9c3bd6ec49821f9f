//! Economic-dispatch solvers returning primal quantities and nodal prices.
//!
//! Three variants of the system operator's welfare-maximization problem are
//! supported: direct participation (the benchmark), aggregation with sell and
//! buy as separate variables, and a no-DER restriction where prosumers cannot
//! sell. All three share one clearing engine built on the closed-form agent
//! responses: nodal prices take the form `lambda_i = gamma + (B' mu)_i` where
//! `gamma` prices the system-wide energy balance and `mu >= 0` prices the
//! line constraints. `gamma` is found by bracketing bisection on the total
//! imbalance (monotone in `gamma`); congested lines are handled by an active
//! set whose multipliers are solved by nested bisection on the regularized
//! dual (exact up to two simultaneously active lines, cyclic pairwise block
//! descent beyond that).
//!
//! The correctness contract is the KKT report from [`verify_kkt`], not the
//! method: any solve that returns produces residuals at or below the
//! requested tolerance, and non-convergence is a first-class error carrying
//! the best residuals reached.

mod kkt;

pub use kkt::{verify_kkt, DispatchModel, KktReport};

use std::fmt;

use serde::Serialize;

use crate::domain::{validate, Prosumer, Scenario};
use crate::numeric::bisect;
use crate::utility::UtilitySpec;

const BISECT_ITERS: u32 = 140;
const LINE_BISECT_ITERS: u32 = 120;
const BRACKET_EXPANSIONS: u32 = 90;
const BLOCK_SWEEPS: u32 = 60;

/// Tiny Tikhonov term on the dual variables. Clamped responses and redundant
/// line rows leave the bare dual with flat directions along which minimizers
/// are set-valued; the regularizer makes every (nested) minimizer unique and
/// continuous, which the bisection levels rely on, and steers degenerate
/// multipliers to the minimum-norm choice. The induced residual bias is
/// `REG * |multiplier|`, far below the default tolerance at sane price
/// scales.
const DUAL_REG: f64 = 1e-11;

/// Solver configuration. `tol` bounds the primal and complementarity
/// residuals of a successful solve; `max_coordinate_solves` caps the total
/// number of one-dimensional price solves before giving up.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_coordinate_solves: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_coordinate_solves: 100_000,
        }
    }
}

/// Primal quantities, nodal prices, and line multipliers of a dispatch
/// optimum, together with its residuals and welfare.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchSolution {
    /// Energy sold per prosumer, in scenario order.
    pub sell: Vec<f64>,
    /// Energy bought per prosumer, in scenario order.
    pub buy: Vec<f64>,
    /// Output per generator, in scenario order.
    pub generation: Vec<f64>,
    /// Net injection by the operator per node.
    pub net_injection: Vec<f64>,
    /// Nodal price per node (multiplier of the nodal balance).
    pub nodal_price: Vec<f64>,
    /// Multiplier per line constraint, nonnegative.
    pub line_multiplier: Vec<f64>,
    /// Max nodal gap between `net_injection` and the balance identity.
    pub balance_residual: f64,
    /// Total consumption utility minus total generation cost.
    pub welfare: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// The scenario failed structural validation.
    InvalidScenario(Vec<String>),
    /// No price can balance the system (demand unmeetable or forced
    /// oversupply).
    Infeasible { detail: String },
    /// The iteration cap was reached before the residual contract was met.
    DidNotConverge {
        balance_residual: f64,
        line_residual: f64,
        complementarity_residual: f64,
    },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::InvalidScenario(v) => {
                write!(f, "scenario failed validation: {}", v.join("; "))
            }
            SolveError::Infeasible { detail } => write!(f, "dispatch infeasible: {detail}"),
            SolveError::DidNotConverge {
                balance_residual,
                line_residual,
                complementarity_residual,
            } => write!(
                f,
                "dispatch did not converge: balance {balance_residual:.3e}, \
                 lines {line_residual:.3e}, complementarity {complementarity_residual:.3e}"
            ),
        }
    }
}

impl std::error::Error for SolveError {}

/// Solves the direct-participation dispatch: prosumers trade a single net
/// quantity at their nodal price.
pub fn solve_benchmark(
    scenario: &Scenario,
    opts: &SolveOptions,
) -> Result<DispatchSolution, SolveError> {
    solve(scenario, DispatchModel::Benchmark, opts)
}

/// Solves the aggregation dispatch: sell and buy are separate nonnegative
/// variables. Its optimal welfare equals the benchmark's.
pub fn solve_aggregation(
    scenario: &Scenario,
    opts: &SolveOptions,
) -> Result<DispatchSolution, SolveError> {
    solve(scenario, DispatchModel::Aggregation, opts)
}

/// Solves the restricted dispatch in which prosumers cannot sell.
pub fn solve_no_der(
    scenario: &Scenario,
    opts: &SolveOptions,
) -> Result<DispatchSolution, SolveError> {
    solve(scenario, DispatchModel::NoDer, opts)
}

/// Solves the dispatch problem for any of the three model variants.
pub fn solve(
    scenario: &Scenario,
    model: DispatchModel,
    opts: &SolveOptions,
) -> Result<DispatchSolution, SolveError> {
    let violations = validate(scenario);
    if !violations.is_empty() {
        return Err(SolveError::InvalidScenario(violations));
    }
    Clearing {
        scenario,
        model,
        budget: opts.max_coordinate_solves,
        last_gamma: None,
    }
    .solve(opts.tol)
}

/// Rewrites a benchmark optimum as an optimum of the aggregation program by
/// splitting each prosumer's net trade into its positive and negative parts.
/// The objective depends on the net only, so the welfare is unchanged.
pub fn map_benchmark_to_aggregation(benchmark: &DispatchSolution) -> DispatchSolution {
    let mut mapped = benchmark.clone();
    for (sell, buy) in mapped.sell.iter_mut().zip(mapped.buy.iter_mut()) {
        let net = *sell - *buy;
        *sell = net.max(0.0);
        *buy = (-net).max(0.0);
    }
    mapped
}

/// Nodal prices of a dispatch solution.
pub fn equilibrium_prices(solution: &DispatchSolution) -> &[f64] {
    &solution.nodal_price
}

/// Consumption level at which marginal utility equals `price`; infinite for
/// nonpositive prices, where every prosumer demands her consumption cap.
fn consumption_target(utility: &UtilitySpec, price: f64) -> f64 {
    if price > 0.0 {
        utility
            .inverse_marginal(price)
            .expect("price checked positive")
    } else {
        f64::INFINITY
    }
}

fn prosumer_quantities(prosumer: &Prosumer, price: f64, model: DispatchModel) -> (f64, f64) {
    let target = consumption_target(&prosumer.utility, price);
    match model {
        DispatchModel::Benchmark => {
            let consumption = target.min(prosumer.consumption_cap);
            let net = prosumer.capacity - consumption;
            (net.max(0.0), (-net).max(0.0))
        }
        DispatchModel::Aggregation => {
            let sell = (prosumer.capacity - target).max(0.0);
            let buy = (target - prosumer.capacity)
                .max(0.0)
                .min(prosumer.consumption_cap - prosumer.capacity);
            (sell, buy)
        }
        DispatchModel::NoDer => {
            let buy = (target - prosumer.capacity)
                .max(0.0)
                .min(prosumer.consumption_cap - prosumer.capacity);
            (0.0, buy)
        }
    }
}

struct MarketState {
    sell: Vec<f64>,
    buy: Vec<f64>,
    generation: Vec<f64>,
    injection: Vec<f64>,
}

struct Clearing<'a> {
    scenario: &'a Scenario,
    model: DispatchModel,
    budget: u64,
    /// Last balancing price found; warm-starts the next bracket.
    last_gamma: Option<f64>,
}

impl<'a> Clearing<'a> {
    fn prices(&self, gamma: f64, mu: &[f64]) -> Vec<f64> {
        let n = self.scenario.node_count();
        let mut prices = vec![gamma; n];
        for (line, &m) in self.scenario.network.lines.iter().zip(mu) {
            if m != 0.0 {
                for (p, &b) in prices.iter_mut().zip(&line.incidence_row) {
                    *p += m * b;
                }
            }
        }
        prices
    }

    fn state(&self, prices: &[f64]) -> MarketState {
        let s = self.scenario;
        let mut injection = s.fixed_demand.clone();
        let mut sell = Vec::with_capacity(s.prosumers.len());
        let mut buy = Vec::with_capacity(s.prosumers.len());
        for p in &s.prosumers {
            let (x, d) = prosumer_quantities(p, prices[p.node], self.model);
            injection[p.node] += d - x;
            sell.push(x);
            buy.push(d);
        }
        let mut generation = Vec::with_capacity(s.generators.len());
        for g in &s.generators {
            let (y_min, y_max) = g.cost.bounds();
            let y = g.cost.inverse_marginal(prices[g.node]).clamp(y_min, y_max);
            injection[g.node] -= y;
            generation.push(y);
        }
        MarketState {
            sell,
            buy,
            generation,
            injection,
        }
    }

    fn total_imbalance(&self, gamma: f64, mu: &[f64]) -> f64 {
        self.state(&self.prices(gamma, mu)).injection.iter().sum()
    }

    fn line_flow(&self, line: usize, injection: &[f64]) -> f64 {
        self.scenario.network.lines[line]
            .incidence_row
            .iter()
            .zip(injection)
            .map(|(b, h)| b * h)
            .sum()
    }

    fn take_budget(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    /// Bisects the system-wide price component so the (regularized) total
    /// imbalance vanishes. Total imbalance is nonincreasing in `gamma`:
    /// raising every nodal price weakly raises supply and lowers demand.
    /// Infeasibility shows up as an imbalance that keeps its sign even with
    /// every response saturated.
    fn solve_gamma(&mut self, mu: &[f64]) -> Result<Option<f64>, SolveError> {
        if !self.take_budget() {
            return Ok(None);
        }
        let offset: f64 = self
            .scenario
            .network
            .lines
            .iter()
            .zip(mu)
            .map(|(line, m)| {
                m.abs()
                    * line
                        .incidence_row
                        .iter()
                        .fold(0.0f64, |a, b| a.max(b.abs()))
            })
            .sum();
        let span = 1e12 * (1.0 + offset);
        if self.total_imbalance(-span, mu) < 0.0 {
            return Err(SolveError::Infeasible {
                detail: "forced supply exceeds total possible consumption at any price".to_string(),
            });
        }
        if self.total_imbalance(span, mu) > 0.0 {
            return Err(SolveError::Infeasible {
                detail: "demand exceeds total possible supply at any price".to_string(),
            });
        }
        let regularized = |g: f64| self.total_imbalance(g, mu) - DUAL_REG * g;
        // Warm bracket around the previous root when one exists; the
        // saturation points above bound the root either way.
        let (mut lo, mut hi) = match self.last_gamma {
            Some(g0) => {
                let mut lo = g0 - 1.0;
                let mut hi = g0 + 1.0;
                let mut step = 1.0;
                while regularized(lo) < 0.0 {
                    lo -= step;
                    step *= 4.0;
                    if lo < -span {
                        lo = -span;
                        break;
                    }
                }
                step = 1.0;
                while regularized(hi) > 0.0 {
                    hi += step;
                    step *= 4.0;
                    if hi > span {
                        hi = span;
                        break;
                    }
                }
                (lo, hi)
            }
            None => (-span, span),
        };
        if lo >= hi {
            lo = -span;
            hi = span;
        }
        let root = bisect(regularized, lo, hi, BISECT_ITERS);
        self.last_gamma = Some(root);
        Ok(Some(root))
    }

    /// Minimizes the dual over `gamma` and three or more active multipliers
    /// by cyclic block descent: every pair of active lines is solved exactly
    /// (together with `gamma`) by nested bisection. The regularizer makes
    /// the dual strictly convex, so exact cyclic block minimization
    /// converges to its unique minimizer.
    fn block_descent(
        &mut self,
        gamma: &mut f64,
        mu: &mut Vec<f64>,
        active: &[usize],
        tol: f64,
    ) -> Result<(), SolveError> {
        let inner_tol = (tol * 1e-2).clamp(1e-14, 1e-10);
        let mut best_residual = f64::INFINITY;
        let mut stalled = 0;
        for _ in 0..BLOCK_SWEEPS {
            for i in 0..active.len() {
                for j in (i + 1)..active.len() {
                    if !self.nested_minimize(gamma, mu, &[active[i], active[j]])? {
                        return Ok(());
                    }
                }
            }
            let state = self.state(&self.prices(*gamma, mu));
            let balance: f64 = state.injection.iter().sum();
            let line_gap = active
                .iter()
                .map(|&l| {
                    (self.line_flow(l, &state.injection) - self.scenario.network.lines[l].capacity)
                        .abs()
                })
                .fold(0.0, f64::max);
            let residual = balance.abs().max(line_gap);
            if residual <= inner_tol {
                return Ok(());
            }
            // No progress twice in a row: hand back for active-set revision.
            if residual >= 0.999 * best_residual {
                stalled += 1;
                if stalled >= 2 {
                    return Ok(());
                }
            } else {
                stalled = 0;
                best_residual = residual;
            }
        }
        Ok(())
    }

    /// Exactly minimizes the dual over `gamma` and the multipliers in
    /// `lines` by nested bisection. The outermost line's reduced flow gap,
    /// evaluated with all inner levels solved to optimality, is nonincreasing
    /// in its own multiplier (the partially minimized dual stays convex and
    /// the gap is its negated subgradient), so every level is a monotone
    /// root find. Exponential in the number of active lines; the caller
    /// falls back to sweeps beyond two.
    ///
    /// Returns false when the budget is exhausted.
    fn nested_minimize(
        &mut self,
        gamma: &mut f64,
        mu: &mut Vec<f64>,
        lines: &[usize],
    ) -> Result<bool, SolveError> {
        let Some((&line, inner)) = lines.split_last() else {
            return match self.solve_gamma(mu)? {
                Some(g) => {
                    *gamma = g;
                    Ok(true)
                }
                None => Ok(false),
            };
        };

        let capacity = self.scenario.network.lines[line].capacity;
        // Regularized reduced flow gap at multiplier m, with the inner
        // levels re-solved. Strictly decreasing in m, so a root always
        // exists; a line that cannot reach its capacity ends up with a large
        // negative multiplier, which the caller's drop rule removes.
        macro_rules! gap_at {
            ($m:expr) => {{
                mu[line] = $m;
                if !self.nested_minimize(gamma, mu, inner)? {
                    return Ok(false);
                }
                let state = self.state(&self.prices(*gamma, mu));
                self.line_flow(line, &state.injection) - capacity - DUAL_REG * mu[line]
            }};
        }

        // Inconsistent active sets can hand over absurd multipliers; a
        // clamped start keeps the bracket (and its bisection precision)
        // sane. Genuine roots beyond the clamp are still reached by the
        // geometric expansions.
        let start = mu[line].clamp(-1e5, 1e5);
        let mut lo = start;
        let mut lo_gap = gap_at!(lo);
        let mut step = 1.0;
        let mut expansions = 0;
        while lo_gap < 0.0 {
            lo -= step;
            step *= 4.0;
            expansions += 1;
            if expansions > BRACKET_EXPANSIONS {
                break;
            }
            lo_gap = gap_at!(lo);
        }
        if lo_gap < 0.0 {
            let _ = gap_at!(lo);
            return Ok(true);
        }
        let mut hi = start.max(lo);
        let mut hi_gap = gap_at!(hi);
        step = 1.0;
        expansions = 0;
        while hi_gap > 0.0 {
            hi += step;
            step *= 4.0;
            expansions += 1;
            if expansions > BRACKET_EXPANSIONS {
                break;
            }
            hi_gap = gap_at!(hi);
        }
        if hi_gap > 0.0 {
            let _ = gap_at!(hi);
            return Ok(true);
        }

        for _ in 0..LINE_BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let mid_gap = gap_at!(mid);
            if mid_gap == 0.0 {
                return Ok(true);
            }
            if mid_gap > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let final_m = 0.5 * (lo + hi);
        let _ = gap_at!(final_m);
        Ok(true)
    }

    fn solve(mut self, tol: f64) -> Result<DispatchSolution, SolveError> {
        let line_count = self.scenario.network.lines.len();
        let mut mu = vec![0.0; line_count];
        let mut gamma = self.solve_gamma(&mu)?.unwrap_or(0.0);

        if line_count > 0 {
            let add_eps = (0.01 * tol).max(1e-12);
            let drop_eps = 1e-10;
            let slack_eps = (0.01 * tol).max(1e-9);
            let mut active: Vec<usize> = Vec::new();
            for _round in 0..(6 * line_count + 10) {
                let state = self.state(&self.prices(gamma, &mu));
                // One active-set change per round, or the revision can cycle
                // through whole-set drops without ever visiting the right
                // subset. A negative multiplier is the clearest exit signal;
                // an active line left strictly slack marks an inconsistent
                // equality system (some direction is null through agentless
                // or fully clamped nodes) and must also leave.
                let most_negative = active
                    .iter()
                    .copied()
                    .filter(|&l| mu[l] < -drop_eps)
                    .min_by(|&a, &b| mu[a].total_cmp(&mu[b]));
                let most_slack = active
                    .iter()
                    .copied()
                    .map(|l| {
                        (
                            l,
                            self.scenario.network.lines[l].capacity
                                - self.line_flow(l, &state.injection),
                        )
                    })
                    .filter(|(_, s)| *s > slack_eps)
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(l, _)| l);
                if let Some(l) = most_negative.or(most_slack) {
                    mu[l] = 0.0;
                    active.retain(|&k| k != l);
                } else {
                    let worst = (0..line_count)
                        .filter(|l| !active.contains(l))
                        .map(|l| {
                            let violation = self.line_flow(l, &state.injection)
                                - self.scenario.network.lines[l].capacity;
                            (l, violation)
                        })
                        .filter(|(_, v)| *v > add_eps)
                        .max_by(|a, b| a.1.total_cmp(&b.1));
                    match worst {
                        Some((l, _)) => active.push(l),
                        None => break,
                    }
                }
                if active.len() <= 2 {
                    self.nested_minimize(&mut gamma, &mut mu, &active)?;
                } else {
                    self.block_descent(&mut gamma, &mut mu, &active, tol)?;
                }
            }
            // Stray slightly-negative multipliers from the last drop round
            // are clamped; complementarity is checked below either way.
            for m in mu.iter_mut() {
                if *m < 0.0 && *m >= -drop_eps {
                    *m = 0.0;
                }
            }
        }

        self.assemble(gamma, &mu, tol)
    }

    fn assemble(&self, gamma: f64, mu: &[f64], tol: f64) -> Result<DispatchSolution, SolveError> {
        let s = self.scenario;
        let prices = self.prices(gamma, mu);
        let state = self.state(&prices);

        let balance: f64 = state.injection.iter().sum();
        let mut line_residual = 0.0f64;
        let mut complementarity = 0.0f64;
        for (l, line) in s.network.lines.iter().enumerate() {
            let flow = self.line_flow(l, &state.injection);
            line_residual = line_residual.max(flow - line.capacity);
            complementarity = complementarity
                .max((mu[l] * (line.capacity - flow)).abs())
                .max(-mu[l]);
        }
        let line_residual = line_residual.max(0.0);

        if balance.abs().max(line_residual).max(complementarity) > tol {
            // A multiplier this far out of scale means some line constraint
            // cannot be met by any response: the dual diverges along it.
            if mu.iter().any(|m| m.abs() > 1e10) {
                return Err(SolveError::Infeasible {
                    detail: "line constraints cannot be met: multipliers diverge".to_string(),
                });
            }
            return Err(SolveError::DidNotConverge {
                balance_residual: balance.abs(),
                line_residual,
                complementarity_residual: complementarity,
            });
        }

        let mut welfare = 0.0;
        for (p, (x, d)) in s.prosumers.iter().zip(state.sell.iter().zip(&state.buy)) {
            let consumption = p.capacity + d - x;
            welfare += p.utility.value(consumption).unwrap_or(f64::NEG_INFINITY);
        }
        for (g, y) in s.generators.iter().zip(&state.generation) {
            welfare -= g.cost.value(*y);
        }

        Ok(DispatchSolution {
            sell: state.sell,
            buy: state.buy,
            generation: state.generation,
            net_injection: state.injection,
            nodal_price: prices,
            line_multiplier: mu.to_vec(),
            balance_residual: 0.0,
            welfare,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Generator, Line, Network, Prosumer, Scenario};
    use crate::utility::{CostSpec, UtilitySpec};

    fn generator_only_scenario() -> Scenario {
        Scenario {
            network: Network::single_node(),
            prosumers: vec![],
            generators: vec![Generator {
                id: "g1".to_string(),
                node: 0,
                cost: CostSpec::quadratic(0.01, 1.0, 0.0, 1000.0),
            }],
            fixed_demand: vec![100.0],
        }
    }

    #[test]
    fn single_generator_meets_fixed_demand() {
        let sol = solve_benchmark(&generator_only_scenario(), &SolveOptions::default()).unwrap();
        assert!(
            (sol.generation[0] - 100.0).abs() < 1e-9,
            "{:?}",
            sol.generation
        );
        assert!(
            (sol.nodal_price[0] - 3.0).abs() < 1e-9,
            "{:?}",
            sol.nodal_price
        );
        // Welfare is minus the generation cost.
        assert!(
            (sol.welfare + 200.0).abs() < 1e-7,
            "welfare {}",
            sol.welfare
        );
    }

    #[test]
    fn infeasible_when_demand_exceeds_capacity() {
        let mut s = generator_only_scenario();
        s.fixed_demand = vec![5000.0];
        match solve_benchmark(&s, &SolveOptions::default()) {
            Err(SolveError::Infeasible { .. }) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn invalid_scenario_is_rejected_with_violations() {
        let mut s = generator_only_scenario();
        s.fixed_demand = vec![-1.0];
        match solve_benchmark(&s, &SolveOptions::default()) {
            Err(SolveError::InvalidScenario(v)) => assert!(!v.is_empty()),
            other => panic!("expected invalid scenario, got {other:?}"),
        }
    }

    #[test]
    fn map_to_aggregation_splits_net_trades() {
        let sol = DispatchSolution {
            sell: vec![0.0, 49.5025],
            buy: vec![1.0, 0.0],
            generation: vec![],
            net_injection: vec![0.0],
            nodal_price: vec![2.0],
            line_multiplier: vec![],
            balance_residual: 0.0,
            welfare: -1.0,
        };
        let mapped = map_benchmark_to_aggregation(&sol);
        assert_eq!(mapped.sell, vec![0.0, 49.5025]);
        assert_eq!(mapped.buy, vec![1.0, 0.0]);
        assert_eq!(mapped.welfare, sol.welfare);
    }

    #[test]
    fn budget_exhaustion_reports_residuals() {
        let opts = SolveOptions {
            tol: 1e-8,
            max_coordinate_solves: 0,
        };
        match solve_benchmark(&generator_only_scenario(), &opts) {
            Err(SolveError::DidNotConverge {
                balance_residual, ..
            }) => assert!(balance_residual > 0.0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_capacity_line_pair_decouples_nodes() {
        // Two copies of the single-node system joined by a line of zero
        // capacity in both directions: the solution must match two
        // independent solves.
        let coupled = Scenario {
            network: Network {
                node_count: 2,
                lines: vec![
                    Line {
                        incidence_row: vec![1.0, -1.0],
                        capacity: 0.0,
                    },
                    Line {
                        incidence_row: vec![-1.0, 1.0],
                        capacity: 0.0,
                    },
                ],
            },
            prosumers: vec![
                Prosumer {
                    id: "p1".to_string(),
                    node: 0,
                    capacity: 50.0,
                    consumption_cap: 1000.0,
                    utility: UtilitySpec::isoelastic(1.0),
                },
                Prosumer {
                    id: "p2".to_string(),
                    node: 1,
                    capacity: 5.0,
                    consumption_cap: 1000.0,
                    utility: UtilitySpec::isoelastic(2.0),
                },
            ],
            generators: vec![
                Generator {
                    id: "g1".to_string(),
                    node: 0,
                    cost: CostSpec::quadratic(0.01, 1.0, 0.0, 1000.0),
                },
                Generator {
                    id: "g2".to_string(),
                    node: 1,
                    cost: CostSpec::quadratic(0.02, 0.5, 0.0, 1000.0),
                },
            ],
            fixed_demand: vec![100.0, 40.0],
        };
        let opts = SolveOptions::default();
        let joint = solve_benchmark(&coupled, &opts).unwrap();

        for node in 0..2 {
            let isolated = Scenario {
                network: Network::single_node(),
                prosumers: coupled
                    .prosumers
                    .iter()
                    .filter(|p| p.node == node)
                    .map(|p| Prosumer {
                        node: 0,
                        ..p.clone()
                    })
                    .collect(),
                generators: coupled
                    .generators
                    .iter()
                    .filter(|g| g.node == node)
                    .map(|g| Generator {
                        node: 0,
                        ..g.clone()
                    })
                    .collect(),
                fixed_demand: vec![coupled.fixed_demand[node]],
            };
            let alone = solve_benchmark(&isolated, &opts).unwrap();
            assert!(
                (joint.nodal_price[node] - alone.nodal_price[0]).abs() < 1e-7,
                "node {node}: joint {} vs isolated {}",
                joint.nodal_price[node],
                alone.nodal_price[0]
            );
        }
        let welfare_sum: f64 = (0..2)
            .map(|node| {
                let isolated = Scenario {
                    network: Network::single_node(),
                    prosumers: coupled
                        .prosumers
                        .iter()
                        .filter(|p| p.node == node)
                        .map(|p| Prosumer {
                            node: 0,
                            ..p.clone()
                        })
                        .collect(),
                    generators: coupled
                        .generators
                        .iter()
                        .filter(|g| g.node == node)
                        .map(|g| Generator {
                            node: 0,
                            ..g.clone()
                        })
                        .collect(),
                    fixed_demand: vec![coupled.fixed_demand[node]],
                };
                solve_benchmark(&isolated, &opts).unwrap().welfare
            })
            .sum();
        assert!(
            (joint.welfare - welfare_sum).abs() < 1e-6,
            "joint {} vs sum {}",
            joint.welfare,
            welfare_sum
        );
    }
}

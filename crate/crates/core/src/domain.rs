//! Core market data model: networks, prosumers, generators, and scenarios.
//!
//! All values are immutable after construction and safe to share across
//! concurrent solves. Validation is data, not errors: [`validate`] returns a
//! deterministic list of violation descriptions, empty for a well-formed
//! scenario.

use serde::Serialize;

use crate::utility::{CostSpec, UtilitySpec};

/// A directed transmission constraint: the flow component `row . h` of the
/// nodal net injections `h` must not exceed `capacity`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    /// One incidence row per line; length equals the node count.
    pub incidence_row: Vec<f64>,
    /// Transfer capacity, finite and nonnegative.
    pub capacity: f64,
}

/// Transmission network: `node_count` nodes plus one-sided line constraints.
/// The stacked incidence rows form the line-to-node incidence matrix; a
/// network wanting symmetric limits lists each line twice with a negated row.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub node_count: usize,
    pub lines: Vec<Line>,
}

impl Network {
    /// Copper plate: a single node with no line constraints.
    pub fn single_node() -> Self {
        Network {
            node_count: 1,
            lines: Vec::new(),
        }
    }
}

/// An end consumer endowed with generation capacity `capacity` who may
/// consume, buy, or sell energy. Consumption is capped at `consumption_cap`,
/// which must strictly exceed the capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct Prosumer {
    pub id: String,
    pub node: usize,
    pub capacity: f64,
    pub consumption_cap: f64,
    pub utility: UtilitySpec,
}

/// A dispatchable conventional generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub node: usize,
    pub cost: CostSpec,
}

/// A full market instance: network, participants, and inelastic nodal demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: Network,
    pub prosumers: Vec<Prosumer>,
    pub generators: Vec<Generator>,
    /// Fixed (inelastic) demand per node; all zeros in a pure prosumer market.
    pub fixed_demand: Vec<f64>,
}

impl Scenario {
    pub fn node_count(&self) -> usize {
        self.network.node_count
    }

    pub fn total_fixed_demand(&self) -> f64 {
        self.fixed_demand.iter().sum()
    }
}

/// A prosumer's market action: `sell` and `buy` are both nonnegative and at
/// most one of them is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProsumerResponse {
    pub sell: f64,
    pub buy: f64,
}

impl ProsumerResponse {
    pub fn net_sale(&self) -> f64 {
        self.sell - self.buy
    }
}

/// A two-part offer to one prosumer: a fixed participation fee charged when
/// she sells a positive amount, plus a price per unit sold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPartPrice {
    pub participation_fee: f64,
    pub marginal_price: f64,
}

/// Checks every structural invariant of the scenario and returns one entry
/// per violation, in a deterministic order: network, lines by index,
/// prosumers by id, generators by id, then scenario-level checks.
pub fn validate(scenario: &Scenario) -> Vec<String> {
    let mut violations = Vec::new();
    let n = scenario.network.node_count;

    if n < 1 {
        violations.push("network: node_count must be >= 1".to_string());
    }
    for (idx, line) in scenario.network.lines.iter().enumerate() {
        if line.incidence_row.len() != n {
            violations.push(format!("line {idx}: incidence row must have {n} entries"));
        }
        if line.incidence_row.iter().any(|v| !v.is_finite()) {
            violations.push(format!("line {idx}: incidence row entries must be finite"));
        }
        if !line.capacity.is_finite() {
            violations.push(format!("line {idx}: capacity must be finite"));
        } else if line.capacity < 0.0 {
            violations.push(format!("line {idx}: capacity must be >= 0"));
        }
    }

    let mut prosumer_order: Vec<&Prosumer> = scenario.prosumers.iter().collect();
    prosumer_order.sort_by(|a, b| a.id.cmp(&b.id));
    for p in prosumer_order {
        let id = &p.id;
        if p.node >= n {
            violations.push(format!("prosumer {id}: node index {} out of range", p.node));
        }
        if !p.capacity.is_finite() || p.capacity < 0.0 {
            violations.push(format!("prosumer {id}: capacity must be >= 0 and finite"));
        }
        if !p.consumption_cap.is_finite() || p.consumption_cap <= p.capacity {
            violations.push(format!("prosumer {id}: Z must exceed C"));
        }
        let UtilitySpec::Isoelastic { eta } = p.utility;
        if !eta.is_finite() || eta <= 0.0 {
            violations.push(format!("prosumer {id}: eta must be > 0 (strict concavity)"));
        }
    }

    let mut generator_order: Vec<&Generator> = scenario.generators.iter().collect();
    generator_order.sort_by(|a, b| a.id.cmp(&b.id));
    for g in generator_order {
        let id = &g.id;
        if g.node >= n {
            violations.push(format!(
                "generator {id}: node index {} out of range",
                g.node
            ));
        }
        let CostSpec::Quadratic {
            alpha,
            beta,
            y_min,
            y_max,
        } = g.cost;
        if !alpha.is_finite() || alpha <= 0.0 {
            violations.push(format!(
                "generator {id}: alpha must be > 0 (strict convexity)"
            ));
        }
        if !beta.is_finite() || beta < 0.0 {
            violations.push(format!("generator {id}: beta must be >= 0"));
        }
        if !(y_min.is_finite() && y_max.is_finite() && 0.0 <= y_min && y_min <= y_max) {
            violations.push(format!(
                "generator {id}: bounds must satisfy 0 <= y_min <= y_max"
            ));
        }
    }

    if scenario.fixed_demand.len() != n {
        violations.push(format!("fixed_demand: must have {n} entries"));
    }
    for (i, d) in scenario.fixed_demand.iter().enumerate() {
        if !d.is_finite() || *d < 0.0 {
            violations.push(format!("fixed_demand: entry {i} must be >= 0 and finite"));
        }
    }
    if scenario.generators.is_empty() && scenario.total_fixed_demand() > 0.0 {
        violations.push("scenario: fixed demand requires at least one generator".to_string());
    }

    violations
}

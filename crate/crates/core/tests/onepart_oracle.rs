//! One-part pricing checks against grid-search and quadrature oracles, plus
//! frozen values from an independent high-precision solver.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dermkt_core::numeric::adaptive_simpson;
use dermkt_core::{
    induced_inverse_supply, induced_supply_cost, one_part_price, poag, solve_one_part, CostSpec,
    Generator, Network, Normalization, Prosumer, Scenario, SolveOptions, UtilitySpec,
};

fn reference_scenario(capacity: f64) -> Scenario {
    Scenario {
        network: Network::single_node(),
        prosumers: vec![Prosumer {
            id: "p1".to_string(),
            node: 0,
            capacity,
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

/// Margin profit of the aggregator at unit price `p`, written from scratch.
fn margin_profit(p: f64, capacity: f64, eta: f64, wholesale: f64) -> f64 {
    let sale = capacity - p.powf(-1.0 / eta);
    if sale <= 0.0 {
        0.0
    } else {
        (wholesale - p) * sale
    }
}

#[test]
fn equilibrium_price_maximizes_profit_over_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut cases = vec![(1.0, 1.0, 4.0), (4.0, 2.0, 1.0)];
    for _ in 0..10 {
        cases.push((
            rng.gen_range(2.5..=100.0),
            rng.gen_range(0.5..=3.0),
            rng.gen_range(0.5..=5.0),
        ));
    }
    for (capacity, eta, wholesale) in cases {
        let eq = one_part_price(capacity, eta, wholesale).unwrap();
        if !eq.trade_occurs() {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_p = 0.0;
        for k in 1..=10_000u32 {
            let p = wholesale * k as f64 / 10_000.0;
            let profit = margin_profit(p, capacity, eta, wholesale);
            if profit > best {
                best = profit;
                best_p = p;
            }
        }
        assert!(
            eq.aggregator_profit >= best - 1e-6,
            "(C={capacity}, eta={eta}, wholesale={wholesale}): grid profit {best} at {best_p} \
             beats equilibrium {} at {}",
            eq.aggregator_profit,
            eq.marginal_price
        );
    }
}

#[test]
fn closed_form_anchor_for_log_utility() {
    let eq = one_part_price(1.0, 1.0, 4.0).unwrap();
    assert!((eq.marginal_price - 2.0).abs() < 1e-12);
    assert!((eq.sell - 0.5).abs() < 1e-12);
}

#[test]
fn general_eta_supply_curve_inverts_the_equilibrium_sale() {
    for wholesale in [1.0, 2.0, 5.0] {
        let eq = one_part_price(4.0, 2.0, wholesale).unwrap();
        assert!(eq.trade_occurs(), "wholesale {wholesale}");
        let recovered = induced_inverse_supply(eq.sell, 4.0, 2.0).unwrap();
        assert!(
            (recovered - wholesale).abs() <= 1e-8,
            "wholesale {wholesale}: supply curve gives {recovered}"
        );
    }
}

#[test]
fn induced_cost_matches_quadrature_of_the_closed_form() {
    // At eta = 1 the curve is C/(C-x)^2 and the integral is x/(C-x).
    let capacity = 50.0;
    for x in [1.0, 10.0, 30.0, 45.0] {
        let closed = induced_supply_cost(x, capacity, 1.0).unwrap();
        let quad = adaptive_simpson(
            &|t: f64| capacity / ((capacity - t) * (capacity - t)),
            0.0,
            x,
            1e-11,
        );
        assert!(
            (closed - quad).abs() <= 1e-9,
            "x={x}: closed {closed} vs quadrature {quad}"
        );
    }
}

#[test]
fn general_eta_cost_derivative_matches_the_curve() {
    let (capacity, eta) = (8.0, 2.0);
    for x in [0.5, 2.0, 5.0] {
        let h = 1e-5;
        let fd = (induced_supply_cost(x + h, capacity, eta).unwrap()
            - induced_supply_cost(x - h, capacity, eta).unwrap())
            / (2.0 * h);
        let price = induced_inverse_supply(x, capacity, eta).unwrap();
        assert!(
            (fd - price).abs() <= 1e-5 * (1.0 + price),
            "x={x}: derivative {fd} vs curve {price}"
        );
    }
}

#[test]
fn one_part_dispatch_anchor_values() {
    // Root of 0.02(100-x) + 1 = 50/(50-x)^2 and the resulting cost,
    // computed with an independent high-precision solver and frozen.
    let dispatch = solve_one_part(&reference_scenario(50.0), &SolveOptions::default()).unwrap();
    let x = dispatch.solution.sell[0];
    assert!((x - 45.117_761_068_743_51).abs() <= 1e-6, "x {x}");
    let y = dispatch.solution.generation[0];
    assert!((y - (100.0 - x)).abs() <= 1e-9);
    // First-order condition at the root.
    let marginal_cost = 0.02 * y + 1.0;
    let curve = 50.0 / ((50.0 - x) * (50.0 - x));
    assert!((marginal_cost - curve).abs() <= 1e-6);
    assert!(
        (dispatch.induced_cost - 94.244_043_434_482_24).abs() <= 1e-6,
        "cost {}",
        dispatch.induced_cost
    );
    assert!(
        (dispatch.solution.welfare - (-83.417_236_520_293_4)).abs() <= 1e-6,
        "welfare {}",
        dispatch.solution.welfare
    );
    assert!(
        (dispatch.solution.nodal_price[0] - 2.097_644_778_625_13).abs() <= 1e-6,
        "price {}",
        dispatch.solution.nodal_price[0]
    );
}

#[test]
fn poag_anchor_values_for_both_normalizations() {
    let scenario = reference_scenario(50.0);
    let opts = SolveOptions::default();
    let opportunity = poag(&scenario, &opts, Normalization::OpportunityCost).unwrap();
    assert!(
        (opportunity.poag - 1.169_169_853_329_452).abs() <= 1e-8,
        "opportunity {}",
        opportunity.poag
    );
    assert!(opportunity.poag >= 1.0 - 1e-9);
    let literal = poag(&scenario, &opts, Normalization::LiteralNegativeWelfare).unwrap();
    assert!(
        (literal.poag - 1.228_805_833_608_908).abs() <= 1e-8,
        "literal {}",
        literal.poag
    );
}

#[test]
fn one_part_cost_dominates_the_efficient_opportunity_cost() {
    for capacity in [10.0, 30.0, 50.0, 70.0, 90.0] {
        let scenario = reference_scenario(capacity);
        let result = poag(
            &scenario,
            &SolveOptions::default(),
            Normalization::OpportunityCost,
        )
        .unwrap();
        assert!(
            result.cost_one_part >= result.cost_efficient - 1e-9,
            "capacity {capacity}: {result:?}"
        );
    }
}

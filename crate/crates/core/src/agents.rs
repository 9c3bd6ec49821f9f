//! Closed-form best responses of market participants and the aggregator's
//! optimal two-part pricing.
//!
//! Strict concavity of the utility and strict convexity of the cost make all
//! of these unique and analytic: every response reduces to inverting a
//! marginal at a price and clipping to the participant's feasible box.

use std::fmt;

use crate::domain::{Generator, Prosumer, ProsumerResponse, TwoPartPrice};
use crate::utility::EvalError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentError {
    /// Prices faced by prosumers must be strictly positive.
    NonPositivePrice { price: f64 },
    /// An offer above the wholesale price lets the prosumer buy low and sell
    /// high without bound; such a query is invalid rather than answerable.
    ArbitragePrice { offer: f64, wholesale: f64 },
    /// A payoff was requested at nonpositive consumption.
    NonPositiveConsumption { consumption: f64 },
}

impl fmt::Display for AgentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentError::NonPositivePrice { price } => {
                write!(f, "price must be > 0, got {price}")
            }
            AgentError::ArbitragePrice { offer, wholesale } => write!(
                f,
                "offer {offer} exceeds wholesale price {wholesale}; prosumer can arbitrage"
            ),
            AgentError::NonPositiveConsumption { consumption } => {
                write!(f, "consumption must be > 0, got {consumption}")
            }
        }
    }
}

impl std::error::Error for AgentError {}

impl From<EvalError> for AgentError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::NonPositiveConsumption(z) => {
                AgentError::NonPositiveConsumption { consumption: z }
            }
            EvalError::NonPositiveMarginal(m) => AgentError::NonPositivePrice { price: m },
        }
    }
}

/// The two consumption levels that drive a prosumer's response to a two-part
/// offer: marginal utility equals the wholesale price at `at_wholesale` and
/// the offered unit price at `at_offer`. `at_wholesale <= at_offer` whenever
/// the offer does not exceed the wholesale price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsumptionThresholds {
    pub at_wholesale: f64,
    pub at_offer: f64,
}

/// Computes both thresholds for a prosumer facing wholesale price `wholesale`
/// and unit offer `offer`.
pub fn consumption_thresholds(
    prosumer: &Prosumer,
    wholesale: f64,
    offer: f64,
) -> Result<ConsumptionThresholds, AgentError> {
    if wholesale <= 0.0 {
        return Err(AgentError::NonPositivePrice { price: wholesale });
    }
    if offer <= 0.0 {
        return Err(AgentError::NonPositivePrice { price: offer });
    }
    Ok(ConsumptionThresholds {
        at_wholesale: prosumer.utility.inverse_marginal(wholesale)?,
        at_offer: prosumer.utility.inverse_marginal(offer)?,
    })
}

/// A prosumer's optimal action when she trades directly at the wholesale
/// price: consume where marginal utility meets the price (clipped at the
/// consumption cap), sell the excess capacity or buy the shortfall.
pub fn prosumer_direct_response(
    prosumer: &Prosumer,
    wholesale: f64,
) -> Result<ProsumerResponse, AgentError> {
    if wholesale <= 0.0 {
        return Err(AgentError::NonPositivePrice { price: wholesale });
    }
    let target = prosumer.utility.inverse_marginal(wholesale)?;
    let consumption = target.min(prosumer.consumption_cap);
    let net = prosumer.capacity - consumption;
    Ok(ProsumerResponse {
        sell: net.max(0.0),
        buy: (-net).max(0.0),
    })
}

/// A generator's optimal supply at a wholesale price: marginal cost equals
/// the price, clipped to the dispatch range.
pub fn generator_response(generator: &Generator, wholesale: f64) -> f64 {
    let (y_min, y_max) = generator.cost.bounds();
    generator
        .cost
        .inverse_marginal(wholesale)
        .clamp(y_min, y_max)
}

/// A prosumer's optimal response to a two-part offer `(P, p)` given the
/// wholesale price she buys at.
///
/// With thresholds `(z1, z2)` as in [`consumption_thresholds`]: if her
/// capacity is at most `z2` she sells nothing and buys up to `z1`; otherwise
/// she sells down to `z2`, but only when the participation fee does not
/// exceed her gain from selling. A fee exactly at the bound resolves to
/// participation.
pub fn prosumer_agg_response(
    prosumer: &Prosumer,
    offer: &TwoPartPrice,
    wholesale: f64,
) -> Result<ProsumerResponse, AgentError> {
    if wholesale <= 0.0 {
        return Err(AgentError::NonPositivePrice { price: wholesale });
    }
    if offer.marginal_price > wholesale {
        return Err(AgentError::ArbitragePrice {
            offer: offer.marginal_price,
            wholesale,
        });
    }
    let capacity = prosumer.capacity;
    // A nonpositive unit offer never attracts a sale; only the buy branch
    // remains in play.
    let sell_threshold = if offer.marginal_price > 0.0 {
        prosumer.utility.inverse_marginal(offer.marginal_price)?
    } else {
        f64::INFINITY
    };
    if capacity <= sell_threshold {
        let target = prosumer.utility.inverse_marginal(wholesale)?;
        let buy = (target - capacity)
            .max(0.0)
            .min(prosumer.consumption_cap - capacity);
        return Ok(ProsumerResponse { sell: 0.0, buy });
    }
    let quantity = capacity - sell_threshold;
    let gain = offer.marginal_price * quantity + prosumer.utility.value(sell_threshold)?
        - prosumer.utility.value(capacity)?;
    let sell = if offer.participation_fee <= gain {
        quantity
    } else {
        0.0
    };
    Ok(ProsumerResponse { sell, buy: 0.0 })
}

/// The aggregator's optimal offer to one prosumer, with the induced response
/// and profit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatorOutcome {
    pub price: TwoPartPrice,
    pub response: ProsumerResponse,
    pub profit: f64,
    pub trade_occurs: bool,
}

/// The aggregator's profit-maximizing two-part offer to `prosumer` at
/// wholesale price `wholesale`.
///
/// When the prosumer would not sell even at the wholesale price, any offer
/// earns zero profit; the canonical `(P = 0, p = wholesale)` is returned for
/// determinism. Otherwise the unit price passes the wholesale price through
/// and the fee extracts the prosumer's entire gain from selling.
pub fn aggregator_optimal_price(
    prosumer: &Prosumer,
    wholesale: f64,
) -> Result<AggregatorOutcome, AgentError> {
    if wholesale <= 0.0 {
        return Err(AgentError::NonPositivePrice { price: wholesale });
    }
    let threshold = prosumer.utility.inverse_marginal(wholesale)?;
    if threshold >= prosumer.capacity {
        let price = TwoPartPrice {
            participation_fee: 0.0,
            marginal_price: wholesale,
        };
        let response = prosumer_agg_response(prosumer, &price, wholesale)?;
        return Ok(AggregatorOutcome {
            price,
            response,
            profit: 0.0,
            trade_occurs: false,
        });
    }
    let quantity = prosumer.capacity - threshold;
    let fee = wholesale * quantity + prosumer.utility.value(threshold)?
        - prosumer.utility.value(prosumer.capacity)?;
    Ok(AggregatorOutcome {
        price: TwoPartPrice {
            participation_fee: fee,
            marginal_price: wholesale,
        },
        response: ProsumerResponse {
            sell: quantity,
            buy: 0.0,
        },
        profit: fee,
        trade_occurs: true,
    })
}

/// The aggregator's profit from one prosumer: the participation fee when a
/// sale occurs, plus the wholesale margin on the quantity resold.
pub fn aggregator_profit(offer: &TwoPartPrice, wholesale: f64, response: &ProsumerResponse) -> f64 {
    let fee = if response.sell > 0.0 {
        offer.participation_fee
    } else {
        0.0
    };
    fee + (wholesale - offer.marginal_price) * response.sell
}

/// A prosumer's payoff under a two-part offer: sale revenue net of the fee
/// plus consumption utility, minus wholesale purchases. Selling nothing
/// avoids the fee.
pub fn prosumer_payoff(
    prosumer: &Prosumer,
    response: &ProsumerResponse,
    offer: &TwoPartPrice,
    wholesale: f64,
) -> Result<f64, AgentError> {
    let consumption = prosumer.capacity + response.buy - response.sell;
    if consumption <= 0.0 {
        return Err(AgentError::NonPositiveConsumption { consumption });
    }
    let utility = prosumer.utility.value(consumption)?;
    if response.sell > 0.0 {
        Ok(
            offer.marginal_price * response.sell - offer.participation_fee + utility
                - wholesale * response.buy,
        )
    } else {
        Ok(utility - wholesale * response.buy)
    }
}

//! Double auction, transactive HVAC controllers, constant-price sellers and
//! the main/auxiliary market topology.

mod auction;
mod auxiliary;
mod bid;
mod controller;
mod seller;

pub use auction::{clear_market, Clearing, MarketError, MarketRole, MarketState, PriceWindow};
pub use auxiliary::{sync_auxiliary, AuxiliaryBidder, BidderDirection};
pub use bid::{Bid, Side};
pub use controller::{controller_apply_clearing, controller_bid, ControllerState};
pub use seller::{seller_agents_bid, GeneratorSeller};

/// Default maximum accepted bid price, $/kWh.
pub const DEFAULT_PRICE_CAP: f64 = 0.63;
/// Default market period, seconds.
pub const DEFAULT_PERIOD: i64 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// Every trader bids into a single main market.
    Direct,
    /// Buyers bid into an auxiliary market; auxiliary bidders relay bids
    /// between it and the main market.
    Auxiliary,
}

impl Topology {
    pub fn parse(word: &str) -> Option<Topology> {
        match word.to_ascii_uppercase().as_str() {
            "DIRECT" => Some(Topology::Direct),
            "AUXILIARY" => Some(Topology::Auxiliary),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Topology::Direct => "DIRECT",
            Topology::Auxiliary => "AUXILIARY",
        }
    }
}

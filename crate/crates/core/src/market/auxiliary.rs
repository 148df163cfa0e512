use super::auction::{MarketError, MarketState};
use super::bid::{Bid, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BidderDirection {
    /// Relays a buyer's auxiliary-market bid to the main market.
    BuyerSide,
    /// Relays a seller's main-market bid to the auxiliary market.
    SellerSide,
}

/// Relay between the main and auxiliary markets for one trader.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryBidder {
    pub trader: String,
    pub direction: BidderDirection,
    /// Buyer side: the trader's bid in the previous auxiliary period.
    pub last_bid: Option<Bid>,
}

impl AuxiliaryBidder {
    pub fn new(trader: impl Into<String>, direction: BidderDirection) -> Self {
        AuxiliaryBidder {
            trader: trader.into(),
            direction,
            last_bid: None,
        }
    }
}

/// Moves bids across the two markets for the current period.
///
/// Sellers must already have bid in `mm` and buyers in `am`. Seller-side
/// bidders copy their seller's bid into `am`; buyer-side bidders forward the
/// buyer's previous-period bid into `mm` and remember the current one.
/// `transform` is applied to every relayed bid.
pub fn sync_auxiliary<F>(
    mm: &mut MarketState,
    am: &mut MarketState,
    bidders: &mut [AuxiliaryBidder],
    transform: F,
) -> Result<(), MarketError>
where
    F: Fn(&AuxiliaryBidder, Bid) -> Bid,
{
    for ab in bidders.iter_mut() {
        match ab.direction {
            BidderDirection::SellerSide => {
                let own = mm
                    .book
                    .iter()
                    .find(|b| b.side == Side::Sell && b.trader == ab.trader)
                    .cloned();
                if let Some(mut bid) = own {
                    bid.period = am.period;
                    let bid = transform(ab, bid);
                    am.submit_bid(bid)?;
                }
            }
            BidderDirection::BuyerSide => {
                if let Some(mut bid) = ab.last_bid.clone() {
                    bid.period = mm.period;
                    let bid = transform(ab, bid);
                    mm.submit_bid(bid)?;
                }
                ab.last_bid = am
                    .book
                    .iter()
                    .find(|b| b.side == Side::Buy && b.trader == ab.trader)
                    .cloned();
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Buy,
    Sell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bid {
    pub trader: String,
    pub side: Side,
    /// $/kWh
    pub price: f64,
    /// kW
    pub quantity: f64,
    pub period: u64,
}

impl Bid {
    pub fn buy(trader: impl Into<String>, price: f64, quantity: f64, period: u64) -> Bid {
        Bid {
            trader: trader.into(),
            side: Side::Buy,
            price,
            quantity,
            period,
        }
    }

    pub fn sell(trader: impl Into<String>, price: f64, quantity: f64, period: u64) -> Bid {
        Bid {
            trader: trader.into(),
            side: Side::Sell,
            price,
            quantity,
            period,
        }
    }
}

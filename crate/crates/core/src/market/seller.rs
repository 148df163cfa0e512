use super::auction::MarketState;
use super::bid::Bid;

/// Constant-price generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSeller {
    pub name: String,
    /// $/kWh
    pub price: f64,
    /// kW
    pub capacity: f64,
}

/// One sell bid per generator at its constant price and capacity.
pub fn seller_agents_bid(generators: &[GeneratorSeller], m: &MarketState) -> Vec<Bid> {
    generators
        .iter()
        .filter(|g| g.capacity > 0.0)
        .map(|g| Bid::sell(g.name.clone(), g.price, g.capacity, m.period))
        .collect()
}

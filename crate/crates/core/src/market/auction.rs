use std::collections::VecDeque;

use super::bid::{Bid, Side};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarketError {
    #[error("bid price {price} exceeds the price cap {cap}")]
    PriceCapViolation { price: f64, cap: f64 },
    #[error("bid for period {bid} submitted during period {current}")]
    StalePeriod { bid: u64, current: u64 },
    #[error("invalid bid from {trader}: price {price}, quantity {quantity}")]
    InvalidBid {
        trader: String,
        price: f64,
        quantity: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketRole {
    Main,
    Auxiliary,
}

/// Rolling window of clearing prices with exact mean and population
/// standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceWindow {
    capacity: usize,
    prices: VecDeque<f64>,
    mean: f64,
    std: f64,
}

impl PriceWindow {
    pub fn new(capacity: usize) -> Self {
        PriceWindow {
            capacity: capacity.max(1),
            prices: VecDeque::new(),
            mean: 0.0,
            std: 0.0,
        }
    }

    /// A full window alternating `0.9·m` and `1.1·m`, so that the mean is `m`
    /// and the standard deviation is `0.1·m`.
    pub fn seeded(capacity: usize, m: f64) -> Self {
        let mut w = PriceWindow::new(capacity);
        // Even length keeps the alternation balanced.
        let n = if w.capacity.is_multiple_of(2) {
            w.capacity
        } else {
            w.capacity - 1
        };
        for i in 0..n {
            w.prices
                .push_back(if i % 2 == 0 { 0.9 * m } else { 1.1 * m });
        }
        w.recompute();
        w
    }

    pub fn push(&mut self, price: f64) {
        if self.prices.len() == self.capacity {
            self.prices.pop_front();
        }
        self.prices.push_back(price);
        self.recompute();
    }

    fn recompute(&mut self) {
        let n = self.prices.len();
        if n == 0 {
            self.mean = 0.0;
            self.std = 0.0;
            return;
        }
        let mean = self.prices.iter().sum::<f64>() / n as f64;
        let var = self.prices.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n as f64;
        self.mean = mean;
        self.std = var.sqrt();
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.prices.iter().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clearing {
    pub period: u64,
    pub price: f64,
    /// kW
    pub quantity: f64,
    pub marginal_buy: Option<f64>,
    pub marginal_sell: Option<f64>,
    pub buy_count: usize,
    pub sell_count: usize,
}

impl Clearing {
    pub fn traded(&self) -> bool {
        self.quantity > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    pub name: String,
    pub role: MarketRole,
    /// Seconds.
    pub period_secs: i64,
    pub price_cap: f64,
    /// Index of the period currently accepting bids.
    pub period: u64,
    pub book: Vec<Bid>,
    pub window: PriceWindow,
    /// Price published by the most recent clearing.
    pub last_price: f64,
    pub last_clearing: Option<Clearing>,
}

impl MarketState {
    /// A market whose statistics window covers 24 hours of clearings and is
    /// pre-seeded around `initial_price`.
    pub fn new(
        name: impl Into<String>,
        role: MarketRole,
        period_secs: i64,
        price_cap: f64,
        initial_price: f64,
    ) -> Self {
        let capacity = (86_400 / period_secs.max(1)).max(1) as usize;
        MarketState {
            name: name.into(),
            role,
            period_secs,
            price_cap,
            period: 0,
            book: Vec::new(),
            window: PriceWindow::seeded(capacity, initial_price),
            last_price: initial_price,
            last_clearing: None,
        }
    }

    pub fn p_avg(&self) -> f64 {
        self.window.mean()
    }

    pub fn p_std(&self) -> f64 {
        self.window.std()
    }

    pub fn submit_bid(&mut self, bid: Bid) -> Result<(), MarketError> {
        if bid.period != self.period {
            return Err(MarketError::StalePeriod {
                bid: bid.period,
                current: self.period,
            });
        }
        if !(bid.price.is_finite()
            && bid.quantity.is_finite()
            && bid.price >= 0.0
            && bid.quantity > 0.0)
        {
            return Err(MarketError::InvalidBid {
                trader: bid.trader,
                price: bid.price,
                quantity: bid.quantity,
            });
        }
        if bid.price > self.price_cap {
            return Err(MarketError::PriceCapViolation {
                price: bid.price,
                cap: self.price_cap,
            });
        }
        self.book.push(bid);
        Ok(())
    }

    pub fn count(&self, side: Side) -> usize {
        self.book.iter().filter(|b| b.side == side).count()
    }
}

/// Clears the current period's book by double auction and advances the
/// market to the next period.
///
/// Buys are sorted by descending price and sells by ascending price, ties
/// keeping submission order. Quantity is matched greedily while the buy price
/// is at least the sell price; the price is the midpoint of the last matched
/// buy and sell. Without a match the prior price is repeated.
pub fn clear_market(m: &mut MarketState) -> Clearing {
    let mut buys: Vec<&Bid> = m.book.iter().filter(|b| b.side == Side::Buy).collect();
    let mut sells: Vec<&Bid> = m.book.iter().filter(|b| b.side == Side::Sell).collect();
    buys.sort_by(|a, b| b.price.total_cmp(&a.price));
    sells.sort_by(|a, b| a.price.total_cmp(&b.price));

    let (mut i, mut j) = (0, 0);
    let mut rb = buys.first().map_or(0.0, |b| b.quantity);
    let mut rs = sells.first().map_or(0.0, |s| s.quantity);
    let mut quantity = 0.0;
    let mut marginal = None;
    while i < buys.len() && j < sells.len() && buys[i].price >= sells[j].price {
        let x = rb.min(rs);
        quantity += x;
        marginal = Some((buys[i].price, sells[j].price));
        rb -= x;
        rs -= x;
        if rb <= 0.0 {
            i += 1;
            rb = buys.get(i).map_or(0.0, |b| b.quantity);
        }
        if rs <= 0.0 {
            j += 1;
            rs = sells.get(j).map_or(0.0, |s| s.quantity);
        }
    }

    let price = match marginal {
        Some((b, s)) if quantity > 0.0 => 0.5 * (b + s),
        _ => m.last_price,
    };
    let clearing = Clearing {
        period: m.period,
        price,
        quantity: if marginal.is_some() { quantity } else { 0.0 },
        marginal_buy: marginal.map(|(b, _)| b),
        marginal_sell: marginal.map(|(_, s)| s),
        buy_count: buys.len(),
        sell_count: sells.len(),
    };
    m.book.clear();
    m.period += 1;
    m.last_price = price;
    m.window.push(price);
    m.last_clearing = Some(clearing.clone());
    clearing
}

#[cfg(test)]
mod tests {
    use super::*;

    fn market() -> MarketState {
        MarketState::new("m", MarketRole::Main, 300, 0.63, 0.1)
    }

    #[test]
    fn empty_book_repeats_prior_price() {
        let mut m = market();
        m.last_price = 0.42;
        let c = clear_market(&mut m);
        assert_eq!(c.quantity, 0.0);
        assert_eq!(c.price, 0.42);
        assert_eq!(m.period, 1);
    }

    #[test]
    fn midpoint_rule() {
        let mut m = market();
        m.submit_bid(Bid::buy("b", 0.20, 10.0, 0)).unwrap();
        m.submit_bid(Bid::sell("s", 0.10, 10.0, 0)).unwrap();
        let c = clear_market(&mut m);
        assert!((c.price - 0.15).abs() < 1e-15);
        assert_eq!(c.quantity, 10.0);
        assert!(m.book.is_empty());
    }

    #[test]
    fn partial_fill_marginal_prices() {
        let mut m = market();
        m.submit_bid(Bid::buy("b1", 0.30, 5.0, 0)).unwrap();
        m.submit_bid(Bid::buy("b2", 0.20, 5.0, 0)).unwrap();
        m.submit_bid(Bid::sell("s1", 0.10, 7.0, 0)).unwrap();
        m.submit_bid(Bid::sell("s2", 0.25, 7.0, 0)).unwrap();
        let c = clear_market(&mut m);
        assert_eq!(c.quantity, 7.0);
        assert_eq!(c.marginal_buy, Some(0.20));
        assert_eq!(c.marginal_sell, Some(0.10));
    }

    #[test]
    fn submit_errors() {
        let mut m = market();
        m.submit_bid(Bid::buy("b", 0.5, 1.0, 0)).unwrap();
        assert_eq!(m.book.len(), 1);
        assert!(matches!(
            m.submit_bid(Bid::buy("b", 0.64, 1.0, 0)),
            Err(MarketError::PriceCapViolation { .. })
        ));
        clear_market(&mut m);
        assert_eq!(
            m.submit_bid(Bid::buy("b", 0.1, 1.0, 0)),
            Err(MarketError::StalePeriod { bid: 0, current: 1 })
        );
        assert!(matches!(
            m.submit_bid(Bid::buy("b", 0.1, 0.0, 1)),
            Err(MarketError::InvalidBid { .. })
        ));
    }

    #[test]
    fn seeded_window_statistics() {
        let w = PriceWindow::seeded(288, 0.1);
        assert_eq!(w.len(), 288);
        assert!((w.mean() - 0.1).abs() < 1e-15);
        assert!((w.std() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn window_rolls() {
        let mut w = PriceWindow::new(3);
        for p in [1.0, 2.0, 3.0, 4.0] {
            w.push(p);
        }
        assert_eq!(w.prices().collect::<Vec<_>>(), vec![2.0, 3.0, 4.0]);
        assert_eq!(w.mean(), 3.0);
        assert!((w.std() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}

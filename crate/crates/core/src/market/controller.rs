use super::auction::{Clearing, MarketRole, MarketState};
use super::bid::Bid;
use crate::loads::HouseState;

/// Ramp-mode transactive controller for one house's HVAC.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub name: String,
    pub house: String,
    pub t_min: f64,
    pub t_base: f64,
    pub t_max: f64,
    pub k_ramp: f64,
    pub last_price: Option<f64>,
    /// Market whose prices the controller bids into and observes.
    pub market: MarketRole,
}

/// Bid price `p_avg + (T − T_base)·k·p_std/(T_max − T_base)` clamped to
/// `[0, cap]`, for the house's rated HVAC power. No bid at or below `T_min`.
pub fn controller_bid(c: &ControllerState, h: &HouseState, m: &MarketState) -> Option<Bid> {
    let t = h.air_temperature;
    if t <= c.t_min || h.hvac_rated_power <= 0.0 {
        return None;
    }
    let slope = c.k_ramp * m.p_std() / (c.t_max - c.t_base);
    let price = (m.p_avg() + (t - c.t_base) * slope).clamp(0.0, m.price_cap);
    Some(Bid::buy(
        c.name.clone(),
        price,
        h.hvac_rated_power,
        m.period,
    ))
}

/// New cooling setpoint from a clearing, using the statistics the bid was
/// made against.
pub fn controller_apply_clearing(
    c: &mut ControllerState,
    clearing: &Clearing,
    p_avg: f64,
    p_std: f64,
) -> f64 {
    c.last_price = Some(clearing.price);
    if p_std <= 0.0 {
        return c.t_base;
    }
    let t = c.t_base + (clearing.price - p_avg) * (c.t_max - c.t_base) / (c.k_ramp * p_std);
    t.clamp(c.t_min, c.t_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loads::{HouseState, HvacMode};
    use crate::market::{MarketState, PriceWindow};

    fn controller(k: f64) -> ControllerState {
        ControllerState {
            name: "c".into(),
            house: "h".into(),
            t_min: 68.0,
            t_base: 72.0,
            t_max: 76.0,
            k_ramp: k,
            last_price: None,
            market: MarketRole::Main,
        }
    }

    fn house(t: f64) -> HouseState {
        HouseState {
            air_temperature: t,
            outdoor_temperature: 90.0,
            thermal_capacitance: 3000.0,
            ua: 700.0,
            internal_gains: 2000.0,
            mode: HvacMode::Off,
            hvac_rated_power: 4.0,
            cooling_capacity: 40_000.0,
            cooling_setpoint: 72.0,
            deadband: 2.0,
        }
    }

    /// A market with the requested statistics: two prices `avg ± std`.
    fn market(avg: f64, std: f64) -> MarketState {
        let mut m = MarketState::new("m", MarketRole::Main, 300, 0.63, avg);
        m.window = PriceWindow::new(2);
        m.window.push(avg - std);
        m.window.push(avg + std);
        m
    }

    #[test]
    fn bid_at_base_is_average() {
        let m = market(0.12, 0.04);
        let b = controller_bid(&controller(2.0), &house(72.0), &m).unwrap();
        assert!((b.price - 0.12).abs() < 1e-12);
        assert_eq!(b.quantity, 4.0);
    }

    #[test]
    fn bid_at_max_with_unit_ramp() {
        let m = market(0.12, 0.04);
        let b = controller_bid(&controller(1.0), &house(76.0), &m).unwrap();
        assert!((b.price - 0.16).abs() < 1e-12);
    }

    #[test]
    fn bid_worked_example() {
        let m = market(0.12, 0.04);
        let b = controller_bid(&controller(2.0), &house(74.0), &m).unwrap();
        assert!((b.price - 0.16).abs() < 1e-12);
    }

    #[test]
    fn bid_clamps_and_stops() {
        let m = market(0.5, 0.2);
        let b = controller_bid(&controller(2.0), &house(80.0), &m).unwrap();
        assert_eq!(b.price, 0.63);
        assert!(controller_bid(&controller(2.0), &house(68.0), &m).is_none());
        assert!(controller_bid(&controller(2.0), &house(67.0), &m).is_none());
    }

    fn clearing(price: f64) -> Clearing {
        Clearing {
            period: 0,
            price,
            quantity: 1.0,
            marginal_buy: None,
            marginal_sell: None,
            buy_count: 0,
            sell_count: 0,
        }
    }

    #[test]
    fn apply_clearing() {
        let mut c = controller(2.0);
        assert_eq!(
            controller_apply_clearing(&mut c, &clearing(0.12), 0.12, 0.04),
            72.0
        );
        assert_eq!(c.last_price, Some(0.12));
        assert_eq!(
            controller_apply_clearing(&mut c, &clearing(0.63), 0.12, 0.04),
            76.0
        );
        assert_eq!(
            controller_apply_clearing(&mut c, &clearing(0.0), 0.12, 0.04),
            68.0
        );
        assert!(
            (controller_apply_clearing(&mut c, &clearing(0.14), 0.12, 0.04) - 73.0).abs() < 1e-12
        );
        assert_eq!(
            controller_apply_clearing(&mut c, &clearing(0.5), 0.12, 0.0),
            72.0
        );
    }

    #[test]
    fn bid_and_setpoint_are_inverse() {
        // The bid price is the price at which the new setpoint equals the
        // current temperature.
        let m = market(0.12, 0.04);
        let mut c = controller(1.5);
        let b = controller_bid(&c, &house(73.3), &m).unwrap();
        let t = controller_apply_clearing(&mut c, &clearing(b.price), m.p_avg(), m.p_std());
        assert!((t - 73.3).abs() < 1e-9);
    }
}

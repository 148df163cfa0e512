mod common;

use std::collections::VecDeque;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::oracle::scan_clear;
use gridres_core::attack::{scale_buyer_bid, CompromisedSet};
use gridres_core::loads::{step_house, HouseState, HvacMode, WeatherSample};
use gridres_core::market::{clear_market, Bid, MarketRole, MarketState, PriceWindow};
use gridres_core::scenario::{parse_scenario, pretty_print, validate};
use gridres_core::Timestamp;

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}"
}

fn value_text() -> impl Strategy<Value = String> {
    prop_oneof![
        (-1e6..1e6f64).prop_map(|x| format!("{x}")),
        (
            0.0..1e4f64,
            prop::sample::select(vec![
                "V", "kV", "W", "kW", "MW", "degF", "s", "min", "h", "$/kWh", "Ohm"
            ])
        )
            .prop_map(|(x, u)| format!("{x} {u}")),
        (-50.0..50.0f64, -50.0..50.0f64).prop_map(|(a, b)| format!("{a}{b:+}j Ohm")),
        ident(),
        "[a-zA-Z0-9 _.]{0,12}".prop_map(|s| format!("\"{s}\"")),
        prop::collection::vec(ident(), 2..4).prop_map(|v| v.join(",")),
    ]
}

fn document() -> impl Strategy<Value = String> {
    let class = prop::sample::select(vec![
        "node",
        "house",
        "zipload",
        "overhead_line",
        "auction",
        "triplex_meter",
    ]);
    let object = (
        class,
        ident(),
        prop::collection::btree_map(ident(), value_text(), 0..5),
    )
        .prop_map(|(c, n, props)| {
            let body: String = props
                .iter()
                .filter(|(k, _)| k.as_str() != "name")
                .map(|(k, v)| format!(" {k} {v};"))
                .collect();
            format!("object {c} {{ name {n};{body} }}\n")
        });
    prop::collection::vec(object, 0..8).prop_map(|v| v.concat())
}

fn book() -> impl Strategy<Value = Vec<(bool, u32, u32)>> {
    prop::collection::vec((any::<bool>(), 0u32..=63, 1u32..=50), 0..=20)
}

fn load_book(m: &mut MarketState, bids: &[(bool, u32, u32)]) {
    for (k, &(buy, cents, qty)) in bids.iter().enumerate() {
        let (p, q) = (cents as f64 / 100.0, qty as f64);
        let b = if buy {
            Bid::buy(format!("b{k}"), p, q, m.period)
        } else {
            Bid::sell(format!("s{k}"), p, q, m.period)
        };
        m.submit_bid(b).unwrap();
    }
}

proptest! {
    #[test]
    fn print_then_parse_round_trips(doc in document()) {
        // Duplicate names are legal syntax; only the parse result matters.
        if let Ok(m) = parse_scenario(&doc) {
            let again = parse_scenario(&pretty_print(&m)).unwrap();
            prop_assert_eq!(again.objects.len(), m.objects.len());
            for (a, b) in again.objects.iter().zip(&m.objects) {
                prop_assert_eq!((a.class, &a.name, &a.properties), (b.class, &b.name, &b.properties));
            }
        }
    }

    #[test]
    fn parser_is_total(text in ".{0,2000}") {
        match parse_scenario(&text) {
            Ok(_) => {}
            Err(e) => prop_assert!(e.position.line >= 1 && e.position.column >= 1),
        }
    }

    #[test]
    fn parser_is_total_on_token_soup(tokens in prop::collection::vec(
        prop::sample::select(vec!["object", "node", "{", "}", ";", "name", "n1", "7200", "V", "'", "\"", "clock",
                                  "attack", "kind", "//", "\n", "1+2j", "-", "$/kWh", "recorder", ",", "schedule", "at"]),
        0..400,
    )) {
        let text = tokens.join(" ");
        if let Err(e) = parse_scenario(&text) {
            prop_assert!(e.position.line >= 1);
        }
    }

    #[test]
    fn validation_is_deterministic(doc in document()) {
        if let Ok(m) = parse_scenario(&doc) {
            prop_assert_eq!(validate(&m).render(), validate(&m).render());
        }
    }

    #[test]
    fn auction_matches_scan(bids in book(), prior in 0u32..=63) {
        let mut m = MarketState::new("m", MarketRole::Main, 300, 0.63, 0.1);
        m.last_price = prior as f64 / 100.0;
        load_book(&mut m, &bids);
        let oracle = scan_clear(&m.book, m.last_price);
        let c = clear_market(&mut m);
        prop_assert_eq!(c.price, oracle.price);
        prop_assert_eq!(c.quantity, oracle.quantity);
        prop_assert_eq!(c.marginal_buy, oracle.marginal_buy);
        prop_assert_eq!(c.marginal_sell, oracle.marginal_sell);
    }

    #[test]
    fn cleared_quantity_within_budget(bids in book()) {
        let mut m = MarketState::new("m", MarketRole::Main, 300, 0.63, 0.1);
        load_book(&mut m, &bids);
        let total = |buy: bool| bids.iter().filter(|b| b.0 == buy).map(|b| b.2 as f64).sum::<f64>();
        let c = clear_market(&mut m);
        prop_assert!(c.quantity <= total(true).min(total(false)));
        prop_assert!(c.price >= 0.0 && c.price <= 0.63);
        if c.traded() {
            prop_assert!(c.marginal_sell.unwrap() <= c.price && c.price <= c.marginal_buy.unwrap());
        }
    }

    #[test]
    fn window_statistics_are_exact(prices in prop::collection::vec(0.0..0.63f64, 1..60), cap in 1usize..20) {
        let mut w = PriceWindow::new(cap);
        let mut kept = VecDeque::new();
        for p in prices {
            w.push(p);
            kept.push_back(p);
            if kept.len() > cap {
                kept.pop_front();
            }
            let n = kept.len() as f64;
            let mean = kept.iter().sum::<f64>() / n;
            let std = (kept.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
            prop_assert_eq!(w.prices().collect::<Vec<_>>(), kept.iter().copied().collect::<Vec<_>>());
            prop_assert!((w.mean() - mean).abs() <= 4.0 * f64::EPSILON * mean.abs().max(1e-300));
            prop_assert!((w.std() - std).abs() <= 1e-12);
        }
    }

    #[test]
    fn buyer_scaling_is_monotone_in_lambda(p in 0.0..0.63f64, pm in 0.0..0.63f64, l1 in 0.0..2.0f64, dl in 0.0..2.0f64) {
        let b = Bid::buy("c", p, 3.0, 0);
        let lo = scale_buyer_bid(&b, l1, pm, 0.63);
        let hi = scale_buyer_bid(&b, l1 + dl, pm, 0.63);
        prop_assert!(lo.price <= hi.price);
        prop_assert!(hi.price <= 0.63);
        prop_assert_eq!(lo.quantity, b.quantity);
    }

    #[test]
    fn compromised_set_is_seeded(n in 0usize..120, f in 0.0..=1.0f64, seed in any::<u64>()) {
        let pop: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let a = CompromisedSet::sample(&pop, f, seed);
        prop_assert_eq!(&a, &CompromisedSet::sample(&pop, f, seed));
        prop_assert_eq!(a.len(), (f * n as f64).round() as usize);
        prop_assert!(a.members.iter().all(|m| pop.contains(m)));
    }

    #[test]
    fn cooling_strictly_lowers_temperature(
        t_in in 65.0..85.0f64, t_out in 60.0..105.0f64, ua in 300.0..1200.0f64,
        cap in 1500.0..5000.0f64, gains in 0.0..3000.0f64, dt in 1i64..300,
    ) {
        let q = ua * (t_out - t_in) + gains + 1000.0;
        let h = house(t_in, ua, cap, gains, q.max(1000.0), HvacMode::Cool, 60.0);
        let next = step_house(&h, &weather(t_out), dt);
        prop_assert!(next.air_temperature < t_in);
    }

    #[test]
    fn no_switching_inside_deadband(t_in in 73.1..74.9f64, cool in any::<bool>()) {
        let mode = if cool { HvacMode::Cool } else { HvacMode::Off };
        // Outdoor equal to indoor and no gains: only the HVAC moves the mass,
        // and one second is far too short to leave the band.
        let h = house(t_in, 700.0, 3000.0, 0.0, 0.0, mode, 74.0);
        let next = step_house(&h, &weather(t_in), 1);
        prop_assert_eq!(next.mode, mode);
    }
}

fn house(
    t_in: f64,
    ua: f64,
    cap: f64,
    gains: f64,
    q: f64,
    mode: HvacMode,
    setpoint: f64,
) -> HouseState {
    HouseState {
        air_temperature: t_in,
        outdoor_temperature: t_in,
        thermal_capacitance: cap,
        ua,
        internal_gains: gains,
        mode,
        hvac_rated_power: 3.5,
        cooling_capacity: q,
        cooling_setpoint: setpoint,
        deadband: 2.0,
    }
}

fn weather(t: f64) -> WeatherSample {
    WeatherSample {
        time: Timestamp::from_secs(0),
        temperature: t,
        irradiance: 0.5,
    }
}

#[test]
fn parser_survives_a_mebibyte() {
    let alphabet: Vec<char> = "object node{};name 'x\"\n//0123456789.+-j kV$/"
        .chars()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let text: String = (0..1 << 20)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect();
        if let Err(e) = parse_scenario(&text) {
            assert!(e.position.line >= 1);
        }
    }
    // A well-formed document of the same size parses.
    let mut doc = String::new();
    let mut i = 0;
    while doc.len() < 1 << 20 {
        doc.push_str(&format!(
            "object node {{ name n{i}; nominal_voltage 7200 V; }}\n"
        ));
        i += 1;
    }
    assert_eq!(parse_scenario(&doc).unwrap().objects.len(), i);
}

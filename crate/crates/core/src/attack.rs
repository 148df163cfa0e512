//! Declarative attacks compiled into kernel events and bid transforms.
//!
//! Market attacks act on auxiliary bidders: a seller-side bidder can rewrite
//! the seller's price on its way into the auxiliary market, and a buyer-side
//! bidder can inflate a buyer's bid on its way into the main market. Line
//! attacks toggle branch status at the window edges.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kernel::{Event, Origin};
use crate::market::Bid;
use crate::powerflow::LineStatus;
use crate::scenario::{ObjectClass, ScenarioModel, Value};
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackKind {
    SellerPriceOverride,
    BuyerBidScale,
    LineStatus,
}

impl AttackKind {
    pub fn parse(word: &str) -> Option<AttackKind> {
        match word {
            "SELLER_PRICE_OVERRIDE" => Some(AttackKind::SellerPriceOverride),
            "BUYER_BID_SCALE" => Some(AttackKind::BuyerBidScale),
            "LINE_STATUS" => Some(AttackKind::LineStatus),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            AttackKind::SellerPriceOverride => "SELLER_PRICE_OVERRIDE",
            AttackKind::BuyerBidScale => "BUYER_BID_SCALE",
            AttackKind::LineStatus => "LINE_STATUS",
        }
    }

    pub fn is_market(self) -> bool {
        self != AttackKind::LineStatus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub name: String,
    pub kind: AttackKind,
    pub start: Timestamp,
    pub end: Timestamp,
    /// Fraction of the targeted population compromised, in `[0, 1]`.
    pub fraction: f64,
    /// Override price for seller attacks, $/kWh.
    pub price: Option<f64>,
    /// Intensity for buyer attacks.
    pub lambda: Option<f64>,
    pub lines: Vec<String>,
    pub status: Option<LineStatus>,
    /// Selection seed; the run seed is used when absent.
    pub seed: Option<u64>,
    /// Auction to attack; defaults to the only auction in the model.
    pub market: Option<String>,
}

/// Identifiers of compromised bidders or lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompromisedSet {
    pub members: BTreeSet<String>,
}

impl CompromisedSet {
    /// Seeded uniform draw of `round(f·N)` members without replacement.
    pub fn sample(population: &[String], fraction: f64, seed: u64) -> Self {
        let n = population.len();
        let k = ((fraction.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = rand::seq::index::sample(&mut rng, n, k)
            .into_iter()
            .map(|i| population[i].clone())
            .collect();
        CompromisedSet { members }
    }

    pub fn contains(&self, id: &str) -> bool {
        self.members.contains(id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Bid rewrite installed while a market attack is active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    SellerOverride {
        price: f64,
    },
    BuyerScale {
        lambda: f64,
    },
    /// Line attacks act only through events.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledAttack {
    pub name: String,
    pub kind: AttackKind,
    pub start: Timestamp,
    pub end: Timestamp,
    /// Auction under attack (market attacks only).
    pub market: Option<String>,
    pub events: Vec<Event>,
    pub compromised: CompromisedSet,
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttackError {
    #[error("attack '{attack}': unknown target '{target}'")]
    UnknownTarget { attack: String, target: String },
    #[error("attack '{0}': window is empty")]
    EmptyWindow(String),
    #[error("attack '{attack}': '{target}' is not a line, switch or fuse")]
    NotSwitchable { attack: String, target: String },
    #[error("attack '{attack}': missing '{parameter}'")]
    MissingParameter {
        attack: String,
        parameter: &'static str,
    },
    #[error("attack '{attack}': {reason}")]
    InvalidParameter { attack: String, reason: String },
    #[error("attack '{0}': market attacks need the AUXILIARY topology")]
    RequiresAuxiliary(String),
}

fn market_members(model: &ScenarioModel, class: ObjectClass, market: &str) -> Vec<String> {
    model
        .objects_of(class)
        .filter(|o| o.get("market").and_then(|v| v.as_text().ok()) == Some(market))
        .map(|o| o.name.clone())
        .collect()
}

/// Resolves the auction an attack targets.
pub fn attack_market(a: &AttackConfig, model: &ScenarioModel) -> Result<String, AttackError> {
    match &a.market {
        Some(m)
            if model
                .object(m)
                .is_some_and(|o| o.class == ObjectClass::Auction) =>
        {
            Ok(m.clone())
        }
        Some(m) => Err(AttackError::UnknownTarget {
            attack: a.name.clone(),
            target: m.clone(),
        }),
        None => {
            let auctions: Vec<_> = model.objects_of(ObjectClass::Auction).collect();
            match auctions.as_slice() {
                [only] => Ok(only.name.clone()),
                [] => Err(AttackError::UnknownTarget {
                    attack: a.name.clone(),
                    target: "auction".into(),
                }),
                _ => Err(AttackError::InvalidParameter {
                    attack: a.name.clone(),
                    reason: "several auctions exist; name one with 'market'".into(),
                }),
            }
        }
    }
}

/// Compiles an attack into window-edge events and a standing transform on
/// a seeded compromised set.
pub fn compile_attack(
    a: &AttackConfig,
    model: &ScenarioModel,
    run_seed: u64,
) -> Result<CompiledAttack, AttackError> {
    if a.start >= a.end {
        return Err(AttackError::EmptyWindow(a.name.clone()));
    }
    if !(0.0..=1.0).contains(&a.fraction) {
        return Err(AttackError::InvalidParameter {
            attack: a.name.clone(),
            reason: format!("fraction {} is outside [0, 1]", a.fraction),
        });
    }
    let seed = a.seed.unwrap_or(run_seed);
    let edge = |t: Timestamp, target: &str, property: &str, value: Value| Event {
        time: t,
        target: target.to_string(),
        property: property.to_string(),
        value,
        origin: Origin::Attack,
    };

    match a.kind {
        AttackKind::LineStatus => {
            let status = a.status.ok_or(AttackError::MissingParameter {
                attack: a.name.clone(),
                parameter: "status",
            })?;
            if a.lines.is_empty() {
                return Err(AttackError::MissingParameter {
                    attack: a.name.clone(),
                    parameter: "lines",
                });
            }
            for l in &a.lines {
                match model.object(l) {
                    None => {
                        return Err(AttackError::UnknownTarget {
                            attack: a.name.clone(),
                            target: l.clone(),
                        })
                    }
                    Some(o) if !o.class.is_switchable() => {
                        return Err(AttackError::NotSwitchable {
                            attack: a.name.clone(),
                            target: l.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
            let compromised = CompromisedSet::sample(&a.lines, a.fraction, seed);
            let restore = match status {
                LineStatus::Open => LineStatus::Closed,
                LineStatus::Closed => LineStatus::Open,
            };
            let mut events = Vec::new();
            for (t, s) in [(a.start, status), (a.end, restore)] {
                for l in a.lines.iter().filter(|l| compromised.contains(l)) {
                    events.push(edge(t, l, "status", Value::word(s.keyword())));
                }
            }
            Ok(CompiledAttack {
                name: a.name.clone(),
                kind: a.kind,
                start: a.start,
                end: a.end,
                market: None,
                events,
                compromised,
                transform: Transform::None,
            })
        }
        AttackKind::SellerPriceOverride | AttackKind::BuyerBidScale => {
            let market = attack_market(a, model)?;
            let (population, transform) = if a.kind == AttackKind::SellerPriceOverride {
                let price = a.price.ok_or(AttackError::MissingParameter {
                    attack: a.name.clone(),
                    parameter: "price",
                })?;
                if !(price >= 0.0 && price.is_finite()) {
                    return Err(AttackError::InvalidParameter {
                        attack: a.name.clone(),
                        reason: format!("override price {price} is negative"),
                    });
                }
                (
                    market_members(model, ObjectClass::GeneratorSeller, &market),
                    Transform::SellerOverride { price },
                )
            } else {
                let lambda = a.lambda.ok_or(AttackError::MissingParameter {
                    attack: a.name.clone(),
                    parameter: "lambda",
                })?;
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return Err(AttackError::InvalidParameter {
                        attack: a.name.clone(),
                        reason: format!("lambda {lambda} is negative"),
                    });
                }
                (
                    market_members(model, ObjectClass::Controller, &market),
                    Transform::BuyerScale { lambda },
                )
            };
            let compromised = CompromisedSet::sample(&population, a.fraction, seed);
            let events = vec![
                edge(a.start, &a.name, "active", Value::word("TRUE")),
                edge(a.end, &a.name, "active", Value::word("FALSE")),
            ];
            Ok(CompiledAttack {
                name: a.name.clone(),
                kind: a.kind,
                start: a.start,
                end: a.end,
                market: Some(market),
                events,
                compromised,
                transform,
            })
        }
    }
}

/// `p̂ = p + λ·p_m`, clamped to the price cap; quantity unchanged.
pub fn scale_buyer_bid(b: &Bid, lambda: f64, p_m: f64, price_cap: f64) -> Bid {
    Bid {
        price: (b.price + lambda * p_m).min(price_cap),
        ..b.clone()
    }
}

/// Replaces a sell bid's price; quantity unchanged.
pub fn seller_override(b: &Bid, price: f64) -> Bid {
    Bid { price, ..b.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn ts(s: &str) -> Timestamp {
        Timestamp::parse(s).unwrap()
    }

    fn model_with_sellers(n: usize) -> ScenarioModel {
        let mut text = String::from("object auction { name mkt; topology AUXILIARY; }\n");
        for i in 0..n {
            text.push_str(&format!(
                "object generator_seller {{ name g{i}; market mkt; price 0.1 $/kWh; capacity 40 kW; }}\n"
            ));
        }
        text.push_str(
            "object node { name n1; bustype SWING; nominal_voltage 7200 V; }
             object node { name n2; nominal_voltage 7200 V; }
             object underground_line { name L1; from n1; to n2; impedance 1+1j Ohm; }
             object triplex_node { name t; nominal_voltage 240 V; }
             object transformer { name X1; from n2; to t; ratio 30; }",
        );
        parse_scenario(&text).unwrap()
    }

    fn config(kind: AttackKind) -> AttackConfig {
        AttackConfig {
            name: "a".into(),
            kind,
            start: ts("2019-07-01 10:00:00"),
            end: ts("2019-07-01 12:00:00"),
            fraction: 1.0,
            price: None,
            lambda: None,
            lines: vec![],
            status: None,
            seed: Some(42),
            market: None,
        }
    }

    #[test]
    fn line_attack_window_edges() {
        let m = model_with_sellers(0);
        let mut a = config(AttackKind::LineStatus);
        a.start = ts("2019-07-01 11:00:00");
        a.end = ts("2019-07-01 11:30:00");
        a.lines = vec!["L1".into()];
        a.status = Some(LineStatus::Open);
        let c = compile_attack(&a, &m, 0).unwrap();
        let ev: Vec<_> = c
            .events
            .iter()
            .map(|e| (e.time, e.target.as_str(), e.value.to_string()))
            .collect();
        assert_eq!(
            ev,
            vec![
                (ts("2019-07-01 11:00:00"), "L1", "OPEN".to_string()),
                (ts("2019-07-01 11:30:00"), "L1", "CLOSED".to_string()),
            ]
        );
    }

    #[test]
    fn line_attack_errors() {
        let m = model_with_sellers(0);
        let mut a = config(AttackKind::LineStatus);
        a.status = Some(LineStatus::Open);
        a.lines = vec!["X1".into()];
        assert!(matches!(
            compile_attack(&a, &m, 0),
            Err(AttackError::NotSwitchable { .. })
        ));
        a.lines = vec!["nope".into()];
        assert!(matches!(
            compile_attack(&a, &m, 0),
            Err(AttackError::UnknownTarget { .. })
        ));
        a.lines = vec!["L1".into()];
        a.end = a.start;
        assert_eq!(
            compile_attack(&a, &m, 0),
            Err(AttackError::EmptyWindow("a".into()))
        );
    }

    #[test]
    fn full_seller_override() {
        let m = model_with_sellers(50);
        let mut a = config(AttackKind::SellerPriceOverride);
        a.price = Some(0.63);
        let c = compile_attack(&a, &m, 0).unwrap();
        assert_eq!(c.compromised.len(), 50);
        assert_eq!(c.transform, Transform::SellerOverride { price: 0.63 });
        assert_eq!(c.market.as_deref(), Some("mkt"));
        assert_eq!(c.events.len(), 2);
    }

    #[test]
    fn partial_compromise_is_deterministic() {
        let m = model_with_sellers(50);
        let mut a = config(AttackKind::SellerPriceOverride);
        a.price = Some(0.63);
        a.fraction = 0.2;
        let c1 = compile_attack(&a, &m, 0).unwrap();
        let c2 = compile_attack(&a, &m, 0).unwrap();
        assert_eq!(c1.compromised.len(), 10);
        assert_eq!(c1.compromised, c2.compromised);
    }

    #[test]
    fn eq1_examples() {
        let b = Bid::buy("c", 0.10, 3.0, 0);
        assert_eq!(scale_buyer_bid(&b, 0.0, 0.2, 0.63), b);
        assert!((scale_buyer_bid(&b, 0.5, 0.20, 0.63).price - 0.20).abs() < 1e-15);
        let hi = Bid::buy("c", 0.60, 3.0, 0);
        let s = scale_buyer_bid(&hi, 0.5, 0.20, 0.63);
        assert_eq!(s.price, 0.63);
        assert_eq!(s.quantity, 3.0);
    }

    #[test]
    fn override_examples() {
        let b = Bid::sell("g", 0.1, 40.0, 0);
        assert_eq!(seller_override(&b, 0.63).price, 0.63);
        assert_eq!(seller_override(&b, 0.1), b);
    }
}

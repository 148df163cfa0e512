use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use super::event::Origin;
use crate::attack::CompiledAttack;
use crate::loads::{hvac_power, HouseState, HvacMode, SolarPanel};
use crate::market::{
    AuxiliaryBidder, BidderDirection, ControllerState, GeneratorSeller, MarketRole, MarketState,
    Topology, DEFAULT_PERIOD, DEFAULT_PRICE_CAP,
};
use crate::powerflow::{compute_islands, LineStatus, Network, NetworkState, SwitchError};
use crate::recorder::{format_value, FEEDER_TARGET};
use crate::scenario::schema::{self, Setting, ATTACK_SETTABLE};
use crate::scenario::{GridObject, NetworkIndex, ObjectClass, ScenarioModel, Value};
use crate::time::Timestamp;
use crate::units::UnitClass;

/// Default thermostat deadband, degF.
pub const DEFAULT_DEADBAND: f64 = 2.0;
pub const DEFAULT_RAMP: f64 = 2.0;
/// Default seller capacity, kW: a 2 MW fleet shared by 50 sellers.
pub const DEFAULT_SELLER_CAPACITY: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("unknown target '{0}'")]
    UnknownTarget(String),
    #[error("'{target}' has no property '{property}'")]
    UnknownProperty { target: String, property: String },
    #[error("bad value for {target}.{property}: {reason}")]
    BadValue {
        target: String,
        property: String,
        reason: String,
    },
    #[error(transparent)]
    Switch(#[from] SwitchError),
}

/// One property write, as logged.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRecord {
    pub time: Timestamp,
    pub target: String,
    pub property: String,
    pub old_value: String,
    pub new_value: String,
    pub origin: Origin,
}

/// A sampled property. De-energized targets report `deenergized = true`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reading {
    pub value: f64,
    pub deenergized: bool,
}

impl Reading {
    fn live(value: f64) -> Self {
        Reading {
            value,
            deenergized: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceState {
    pub house: String,
    /// kW
    pub base_power: f64,
    pub power_factor: f64,
    /// kW drawn at the current step.
    pub power: f64,
}

impl ApplianceState {
    pub fn reactive(&self) -> f64 {
        let pf = self.power_factor.clamp(1e-6, 1.0);
        self.power * (pf.acos()).tan()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolarState {
    pub inverter: String,
    pub panel: SolarPanel,
    /// kW generated at the current step.
    pub output: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerRuntime {
    pub state: ControllerState,
    /// Auction the controller trades in.
    pub auction: String,
    /// Price of the latest bid, 0 when it did not bid.
    pub bid_price: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SellerRuntime {
    pub seller: GeneratorSeller,
    pub auction: String,
}

/// An auction object: the main market and, under the auxiliary topology, the
/// auxiliary market and its relays.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionRuntime {
    pub topology: Topology,
    pub main: MarketState,
    pub aux: Option<MarketState>,
    pub bidders: Vec<AuxiliaryBidder>,
}

impl AuctionRuntime {
    /// The market controllers bid into and take prices from.
    pub fn observed(&self) -> &MarketState {
        self.aux.as_ref().unwrap_or(&self.main)
    }

    fn set_price_cap(&mut self, cap: f64) {
        self.main.price_cap = cap;
        if let Some(a) = &mut self.aux {
            a.price_cap = cap;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackRuntime {
    pub compiled: CompiledAttack,
    pub active: bool,
}

/// Feeder-wide totals, kW.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeederTotals {
    /// Gross consumption of energized houses and appliances.
    pub total_load: f64,
    pub hvac_load: f64,
    pub solar_output: f64,
    pub losses: f64,
    pub source_power: f64,
}

/// Everything the kernel advances.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub time: Timestamp,
    pub network: Option<Network>,
    /// Energized flag per bus, kept in step with line statuses.
    pub energized: Vec<bool>,
    /// Latest power-flow solution.
    pub flow: Option<NetworkState>,
    /// VA drawn per bus at the latest solve.
    pub bus_load: Vec<Complex64>,
    pub houses: BTreeMap<String, HouseState>,
    pub appliances: BTreeMap<String, ApplianceState>,
    pub solar: BTreeMap<String, SolarState>,
    pub controllers: BTreeMap<String, ControllerRuntime>,
    pub sellers: BTreeMap<String, SellerRuntime>,
    pub auctions: BTreeMap<String, AuctionRuntime>,
    pub attacks: BTreeMap<String, AttackRuntime>,
    /// Auction whose unresponsive demand includes each house.
    pub house_auction: BTreeMap<String, String>,
    /// Houses with a controller.
    pub controlled: BTreeSet<String>,
    pub feeder: FeederTotals,
    classes: BTreeMap<String, ObjectClass>,
}

fn quantity(o: &GridObject, key: &str, class: UnitClass) -> Option<f64> {
    o.get(key).and_then(|v| v.as_quantity(class).ok())
}

fn scalar(o: &GridObject, key: &str) -> Option<f64> {
    o.get(key).and_then(|v| v.as_scalar().ok())
}

fn text(o: &GridObject, key: &str) -> String {
    o.get(key)
        .and_then(|v| v.as_text().ok())
        .unwrap_or_default()
        .to_string()
}

fn bad(target: &str, property: &str, reason: impl ToString) -> StateError {
    StateError::BadValue {
        target: target.to_string(),
        property: property.to_string(),
        reason: reason.to_string(),
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl SimState {
    /// Initial state of a validated model. `topology` overrides the
    /// auctions' own setting; `outdoor` seeds house outdoor temperatures.
    pub fn new(
        model: &ScenarioModel,
        index: Option<NetworkIndex>,
        attacks: Vec<CompiledAttack>,
        topology: Option<Topology>,
        t0: Timestamp,
        outdoor: f64,
    ) -> Self {
        let network = index.map(Network::new);
        let energized = network
            .as_ref()
            .map(|n| compute_islands(&n.index, n.statuses()))
            .unwrap_or_default();
        let n_bus = energized.len();
        let classes = model
            .objects
            .iter()
            .map(|o| (o.name.clone(), o.class))
            .collect();

        let mut houses = BTreeMap::new();
        for o in model.objects_of(ObjectClass::House) {
            let mode = o
                .get("hvac_mode")
                .and_then(|v| v.as_word().ok())
                .and_then(HvacMode::parse)
                .unwrap_or(HvacMode::Off);
            houses.insert(
                o.name.clone(),
                HouseState {
                    air_temperature: quantity(o, "air_temperature", UnitClass::Temperature)
                        .unwrap_or(0.0),
                    outdoor_temperature: outdoor,
                    thermal_capacitance: scalar(o, "thermal_capacitance").unwrap_or(1.0),
                    ua: scalar(o, "ua").unwrap_or(1.0),
                    internal_gains: scalar(o, "internal_gains").unwrap_or(0.0),
                    mode,
                    hvac_rated_power: quantity(o, "hvac_power", UnitClass::Power).unwrap_or(0.0),
                    cooling_capacity: scalar(o, "cooling_capacity").unwrap_or(0.0),
                    cooling_setpoint: quantity(o, "cooling_setpoint", UnitClass::Temperature)
                        .unwrap_or(0.0),
                    deadband: quantity(o, "deadband", UnitClass::Temperature)
                        .unwrap_or(DEFAULT_DEADBAND),
                },
            );
        }

        let mut appliances = BTreeMap::new();
        for o in model
            .objects
            .iter()
            .filter(|o| matches!(o.class, ObjectClass::Zipload | ObjectClass::Waterheater))
        {
            appliances.insert(
                o.name.clone(),
                ApplianceState {
                    house: text(o, "parent"),
                    base_power: quantity(o, "base_power", UnitClass::Power).unwrap_or(0.0),
                    power_factor: scalar(o, "power_factor").unwrap_or(1.0),
                    power: 0.0,
                },
            );
        }

        let mut solar = BTreeMap::new();
        for o in model.objects_of(ObjectClass::Solar) {
            solar.insert(
                o.name.clone(),
                SolarState {
                    inverter: text(o, "parent"),
                    panel: SolarPanel {
                        rating: quantity(o, "rating", UnitClass::Power).unwrap_or(0.0),
                        efficiency: scalar(o, "efficiency").unwrap_or(1.0),
                    },
                    output: 0.0,
                },
            );
        }

        let mut sellers = BTreeMap::new();
        for o in model.objects_of(ObjectClass::GeneratorSeller) {
            sellers.insert(
                o.name.clone(),
                SellerRuntime {
                    seller: GeneratorSeller {
                        name: o.name.clone(),
                        price: quantity(o, "price", UnitClass::Price).unwrap_or(0.0),
                        capacity: quantity(o, "capacity", UnitClass::Power)
                            .unwrap_or(DEFAULT_SELLER_CAPACITY),
                    },
                    auction: text(o, "market"),
                },
            );
        }

        let mut auctions = BTreeMap::new();
        for o in model.objects_of(ObjectClass::Auction) {
            let topology = topology.unwrap_or_else(|| {
                o.get("topology")
                    .and_then(|v| v.as_word().ok())
                    .and_then(Topology::parse)
                    .unwrap_or(Topology::Direct)
            });
            let period =
                quantity(o, "period", UnitClass::Time).map_or(DEFAULT_PERIOD, |p| p as i64);
            let cap = quantity(o, "price_cap", UnitClass::Price).unwrap_or(DEFAULT_PRICE_CAP);
            // Warm-up: statistics start around the sellers' mean offer.
            let offers: Vec<f64> = sellers
                .values()
                .filter(|s| s.auction == o.name)
                .map(|s| s.seller.price)
                .collect();
            let mean_offer = if offers.is_empty() {
                0.0
            } else {
                offers.iter().sum::<f64>() / offers.len() as f64
            };
            let initial = quantity(o, "initial_price", UnitClass::Price).unwrap_or(mean_offer);
            let main = MarketState::new(o.name.clone(), MarketRole::Main, period, cap, initial);
            let (aux, bidders) = match topology {
                Topology::Direct => (None, Vec::new()),
                Topology::Auxiliary => {
                    let mut bidders: Vec<AuxiliaryBidder> = sellers
                        .iter()
                        .filter(|(_, s)| s.auction == o.name)
                        .map(|(n, _)| AuxiliaryBidder::new(n.clone(), BidderDirection::SellerSide))
                        .collect();
                    bidders.extend(
                        model
                            .objects_of(ObjectClass::Controller)
                            .filter(|c| text(c, "market") == o.name)
                            .map(|c| c.name.clone())
                            .collect::<BTreeSet<_>>()
                            .into_iter()
                            .map(|n| AuxiliaryBidder::new(n, BidderDirection::BuyerSide)),
                    );
                    let aux = MarketState::new(
                        o.name.clone(),
                        MarketRole::Auxiliary,
                        period,
                        cap,
                        initial,
                    );
                    (Some(aux), bidders)
                }
            };
            auctions.insert(
                o.name.clone(),
                AuctionRuntime {
                    topology,
                    main,
                    aux,
                    bidders,
                },
            );
        }

        let mut controllers = BTreeMap::new();
        let mut controlled = BTreeSet::new();
        let mut house_auction = BTreeMap::new();
        for o in model.objects_of(ObjectClass::Controller) {
            let auction = text(o, "market");
            let house = text(o, "parent");
            let role = match auctions.get(&auction).map(|a| a.topology) {
                Some(Topology::Auxiliary) => MarketRole::Auxiliary,
                _ => MarketRole::Main,
            };
            controlled.insert(house.clone());
            house_auction.insert(house.clone(), auction.clone());
            controllers.insert(
                o.name.clone(),
                ControllerRuntime {
                    state: ControllerState {
                        name: o.name.clone(),
                        house,
                        t_min: quantity(o, "min_setpoint", UnitClass::Temperature).unwrap_or(0.0),
                        t_base: quantity(o, "base_setpoint", UnitClass::Temperature).unwrap_or(0.0),
                        t_max: quantity(o, "max_setpoint", UnitClass::Temperature).unwrap_or(0.0),
                        k_ramp: scalar(o, "ramp").unwrap_or(DEFAULT_RAMP),
                        last_price: None,
                        market: role,
                    },
                    auction,
                    bid_price: 0.0,
                },
            );
        }
        // Houses without a controller feed the first auction.
        if let Some(first) = auctions.keys().next() {
            for h in houses.keys() {
                house_auction
                    .entry(h.clone())
                    .or_insert_with(|| first.clone());
            }
        }

        let attacks = attacks
            .into_iter()
            .map(|a| {
                (
                    a.name.clone(),
                    AttackRuntime {
                        compiled: a,
                        active: false,
                    },
                )
            })
            .collect();

        SimState {
            time: t0,
            network,
            energized,
            flow: None,
            bus_load: vec![Complex64::new(0.0, 0.0); n_bus],
            houses,
            appliances,
            solar,
            controllers,
            sellers,
            auctions,
            attacks,
            house_auction,
            controlled,
            feeder: FeederTotals::default(),
            classes,
        }
    }

    pub fn class_of(&self, name: &str) -> Option<ObjectClass> {
        self.classes.get(name).copied()
    }

    /// Bus an object draws from or sits on.
    fn bus_of(&self, name: &str) -> Option<usize> {
        let index = &self.network.as_ref()?.index;
        index.bus(name).or_else(|| index.attachment(name))
    }

    /// Whether an object is connected to the source. Objects off the
    /// network (markets, controllers) always are.
    pub fn is_live(&self, name: &str) -> bool {
        if let Some(net) = &self.network {
            if let Some(e) = net.index.edge(name) {
                return self.energized[net.index.edges[e].from];
            }
        }
        self.bus_of(name).is_none_or(|b| self.energized[b])
    }

    fn house_reading(&self, name: &str, value: f64) -> Reading {
        Reading {
            value,
            deenergized: !self.is_live(name),
        }
    }

    pub fn read_property(&self, target: &str, property: &str) -> Result<Reading, StateError> {
        let unknown = || StateError::UnknownProperty {
            target: target.to_string(),
            property: property.to_string(),
        };
        if target == FEEDER_TARGET {
            let f = &self.feeder;
            let v = match property {
                "total_load" => f.total_load,
                "hvac_load" => f.hvac_load,
                "solar_output" => f.solar_output,
                "losses" => f.losses,
                "source_power" => f.source_power,
                _ => return Err(unknown()),
            };
            return Ok(Reading::live(v));
        }
        if let Some(a) = self.attacks.get(target) {
            return match property {
                "active" => Ok(Reading::live(flag(a.active))),
                _ => Err(unknown()),
            };
        }
        let class = self
            .class_of(target)
            .ok_or_else(|| StateError::UnknownTarget(target.to_string()))?;
        if !schema::recordable(class).contains(&property) {
            return Err(unknown());
        }
        let live = self.is_live(target);
        let wrap = |value: f64| Reading {
            value,
            deenergized: !live,
        };
        use ObjectClass as C;
        match class {
            c if c.is_bus() => {
                let b = self.bus_of(target).ok_or_else(unknown)?;
                let v = self
                    .flow
                    .as_ref()
                    .map_or(Complex64::new(0.0, 0.0), |f| f.voltages[b]);
                Ok(wrap(match property {
                    "voltage_mag" => v.norm(),
                    "voltage_ang" => v.arg().to_degrees(),
                    "measured_power" => self.bus_load[b].re / 1000.0,
                    _ => flag(live),
                }))
            }
            c if c.is_branch() => {
                let net = self.network.as_ref().ok_or_else(unknown)?;
                let e = net.index.edge(target).ok_or_else(unknown)?;
                let v = match (property, &self.flow) {
                    ("status", _) => flag(net.statuses()[e] == LineStatus::Closed),
                    ("current_mag", Some(f)) => f.currents[e].norm(),
                    ("losses", Some(f)) => f.edge_losses(&net.index, e).re / 1000.0,
                    _ => 0.0,
                };
                Ok(wrap(v))
            }
            C::House => {
                let h = &self.houses[target];
                let appliances: f64 = self
                    .appliances
                    .values()
                    .filter(|a| a.house == target)
                    .map(|a| a.power)
                    .sum();
                Ok(self.house_reading(
                    target,
                    match property {
                        "air_temperature" => h.air_temperature,
                        "outdoor_temperature" => h.outdoor_temperature,
                        "cooling_setpoint" => h.cooling_setpoint,
                        "hvac_power" => hvac_power(h),
                        "hvac_on" => flag(h.mode == HvacMode::Cool),
                        _ => hvac_power(h) + appliances,
                    },
                ))
            }
            C::Zipload | C::Waterheater => {
                let a = &self.appliances[target];
                Ok(wrap(if property == "power" {
                    a.power
                } else {
                    a.base_power
                }))
            }
            C::Solar => Ok(wrap(self.solar[target].output)),
            C::Inverter => Ok(wrap(
                self.solar
                    .values()
                    .filter(|s| s.inverter == target)
                    .map(|s| s.output)
                    .sum(),
            )),
            C::Controller => {
                let c = &self.controllers[target];
                Ok(Reading::live(match property {
                    "bid_price" => c.bid_price,
                    "last_price" => c.state.last_price.unwrap_or(0.0),
                    _ => c.state.t_base,
                }))
            }
            C::GeneratorSeller => {
                let s = &self.sellers[target].seller;
                Ok(Reading::live(if property == "price" {
                    s.price
                } else {
                    s.capacity
                }))
            }
            C::Auction => {
                let a = &self.auctions[target];
                let obs = a.observed();
                let last = obs.last_clearing.as_ref();
                let main = a.main.last_clearing.as_ref();
                Ok(Reading::live(match property {
                    "clearing_price" => obs.last_price,
                    "cleared_quantity" => last.map_or(0.0, |c| c.quantity),
                    "bid_count_buy" => last.map_or(0.0, |c| c.buy_count as f64),
                    "bid_count_sell" => last.map_or(0.0, |c| c.sell_count as f64),
                    "p_avg" => obs.p_avg(),
                    "p_std" => obs.p_std(),
                    "main_clearing_price" => a.main.last_price,
                    "main_cleared_quantity" => main.map_or(0.0, |c| c.quantity),
                    _ => a.main.price_cap,
                }))
            }
            _ => Err(unknown()),
        }
    }

    /// Writes a property and returns the old and new values as logged.
    pub fn set_property(
        &mut self,
        target: &str,
        property: &str,
        value: &Value,
    ) -> Result<(String, String), StateError> {
        let unknown = || StateError::UnknownProperty {
            target: target.to_string(),
            property: property.to_string(),
        };
        let kind = if self.attacks.contains_key(target) {
            (property == ATTACK_SETTABLE.0).then_some(ATTACK_SETTABLE.1)
        } else {
            let class = self
                .class_of(target)
                .ok_or_else(|| StateError::UnknownTarget(target.to_string()))?;
            schema::settable_property(class, property)
        }
        .ok_or_else(unknown)?;
        let setting = kind.read(value).map_err(|e| bad(target, property, e))?;

        let number = |s: Setting| match s {
            Setting::Number(x) => Ok(x),
            _ => Err(bad(target, property, "expected a number")),
        };
        let show = format_value;
        if let Some(a) = self.attacks.get_mut(target) {
            let Setting::Flag(on) = setting else {
                return Err(bad(target, property, "expected TRUE or FALSE"));
            };
            let old = a.active;
            a.active = on;
            let word = |b: bool| if b { "TRUE" } else { "FALSE" }.to_string();
            return Ok((word(old), word(on)));
        }

        use ObjectClass as C;
        let class = self.class_of(target).ok_or_else(unknown)?;
        match class {
            c if c.is_branch() => {
                let Setting::Status(s) = setting else {
                    return Err(bad(target, property, "expected OPEN or CLOSED"));
                };
                let net = self.network.as_mut().ok_or_else(unknown)?;
                let old = net.status_of(target).ok_or_else(unknown)?;
                net.set_line_status(target, s)?;
                self.energized = net.energized().to_vec();
                Ok((old.keyword().to_string(), s.keyword().to_string()))
            }
            C::House => {
                let h = self.houses.get_mut(target).ok_or_else(unknown)?;
                if let Setting::Mode(m) = setting {
                    let old = h.mode;
                    h.mode = m;
                    return Ok((old.keyword().to_string(), m.keyword().to_string()));
                }
                let x = number(setting)?;
                let slot = match property {
                    "cooling_setpoint" => &mut h.cooling_setpoint,
                    "air_temperature" => &mut h.air_temperature,
                    "deadband" => &mut h.deadband,
                    "internal_gains" => &mut h.internal_gains,
                    _ => return Err(unknown()),
                };
                Ok((show(std::mem::replace(slot, x)), show(x)))
            }
            C::Zipload | C::Waterheater => {
                let a = self.appliances.get_mut(target).ok_or_else(unknown)?;
                let x = number(setting)?;
                let slot = if property == "base_power" {
                    &mut a.base_power
                } else {
                    &mut a.power_factor
                };
                Ok((show(std::mem::replace(slot, x)), show(x)))
            }
            C::Solar => {
                let s = self.solar.get_mut(target).ok_or_else(unknown)?;
                let x = number(setting)?;
                let slot = if property == "rating" {
                    &mut s.panel.rating
                } else {
                    &mut s.panel.efficiency
                };
                Ok((show(std::mem::replace(slot, x)), show(x)))
            }
            C::Controller => {
                let c = &mut self.controllers.get_mut(target).ok_or_else(unknown)?.state;
                let x = number(setting)?;
                let slot = match property {
                    "base_setpoint" => &mut c.t_base,
                    "min_setpoint" => &mut c.t_min,
                    "max_setpoint" => &mut c.t_max,
                    _ => &mut c.k_ramp,
                };
                Ok((show(std::mem::replace(slot, x)), show(x)))
            }
            C::GeneratorSeller => {
                let s = &mut self.sellers.get_mut(target).ok_or_else(unknown)?.seller;
                let x = number(setting)?;
                let slot = if property == "price" {
                    &mut s.price
                } else {
                    &mut s.capacity
                };
                Ok((show(std::mem::replace(slot, x)), show(x)))
            }
            C::Auction => {
                let a = self.auctions.get_mut(target).ok_or_else(unknown)?;
                let x = number(setting)?;
                if x <= 0.0 {
                    return Err(bad(target, property, "price cap must be positive"));
                }
                let old = a.main.price_cap;
                a.set_price_cap(x);
                Ok((show(old), show(x)))
            }
            _ => Err(unknown()),
        }
    }
}

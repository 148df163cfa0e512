//! Per-class property tables: what a scenario may declare, what events and
//! players may write, and what recorders may read.

use super::model::{ObjectClass, Value, ValueError};
use crate::loads::HvacMode;
use crate::powerflow::LineStatus;
use crate::units::UnitClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Quantity(UnitClass),
    /// Dimensionless number.
    Scalar,
    Impedance,
    /// One of a fixed set of bare words.
    Keyword(&'static [&'static str]),
    /// Name of an object of one of these classes.
    Ref(&'static [ObjectClass]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropertySpec {
    pub key: &'static str,
    pub kind: Kind,
    pub required: bool,
}

const fn req(key: &'static str, kind: Kind) -> PropertySpec {
    PropertySpec {
        key,
        kind,
        required: true,
    }
}

const fn opt(key: &'static str, kind: Kind) -> PropertySpec {
    PropertySpec {
        key,
        kind,
        required: false,
    }
}

use ObjectClass as C;
use UnitClass as U;

pub const BUSES: &[ObjectClass] = &[C::Node, C::TriplexNode, C::TriplexMeter, C::Meter];
const METERS: &[ObjectClass] = &[C::TriplexMeter, C::Meter];
const STATUS: Kind = Kind::Keyword(&["OPEN", "CLOSED"]);

const BUS: &[PropertySpec] = &[
    opt("bustype", Kind::Keyword(&["SWING", "PQ"])),
    req("nominal_voltage", Kind::Quantity(U::Voltage)),
    opt("parent", Kind::Ref(BUSES)),
];
const LINE: &[PropertySpec] = &[
    req("from", Kind::Ref(BUSES)),
    req("to", Kind::Ref(BUSES)),
    req("impedance", Kind::Impedance),
    opt("status", STATUS),
];
const SWITCH: &[PropertySpec] = &[
    req("from", Kind::Ref(BUSES)),
    req("to", Kind::Ref(BUSES)),
    opt("impedance", Kind::Impedance),
    opt("status", STATUS),
];
const TRANSFORMER: &[PropertySpec] = &[
    req("from", Kind::Ref(BUSES)),
    req("to", Kind::Ref(BUSES)),
    req("ratio", Kind::Scalar),
    opt("impedance", Kind::Impedance),
];
const HOUSE: &[PropertySpec] = &[
    req("parent", Kind::Ref(METERS)),
    req("air_temperature", Kind::Quantity(U::Temperature)),
    req("cooling_setpoint", Kind::Quantity(U::Temperature)),
    opt("deadband", Kind::Quantity(U::Temperature)),
    req("thermal_capacitance", Kind::Scalar),
    req("ua", Kind::Scalar),
    opt("internal_gains", Kind::Scalar),
    req("cooling_capacity", Kind::Scalar),
    req("hvac_power", Kind::Quantity(U::Power)),
    opt("hvac_mode", Kind::Keyword(&["OFF", "COOL"])),
];
const APPLIANCE: &[PropertySpec] = &[
    req("parent", Kind::Ref(&[C::House])),
    req("base_power", Kind::Quantity(U::Power)),
    opt("power_factor", Kind::Scalar),
];
const SOLAR: &[PropertySpec] = &[
    req("parent", Kind::Ref(&[C::Inverter])),
    req("rating", Kind::Quantity(U::Power)),
    opt("efficiency", Kind::Scalar),
];
const INVERTER: &[PropertySpec] = &[req("parent", Kind::Ref(METERS))];
const AUCTION: &[PropertySpec] = &[
    opt("period", Kind::Quantity(U::Time)),
    opt("price_cap", Kind::Quantity(U::Price)),
    opt("initial_price", Kind::Quantity(U::Price)),
    opt("topology", Kind::Keyword(&["DIRECT", "AUXILIARY"])),
];
const CONTROLLER: &[PropertySpec] = &[
    req("parent", Kind::Ref(&[C::House])),
    req("market", Kind::Ref(&[C::Auction])),
    req("base_setpoint", Kind::Quantity(U::Temperature)),
    req("min_setpoint", Kind::Quantity(U::Temperature)),
    req("max_setpoint", Kind::Quantity(U::Temperature)),
    opt("ramp", Kind::Scalar),
];
const SELLER: &[PropertySpec] = &[
    req("market", Kind::Ref(&[C::Auction])),
    req("price", Kind::Quantity(U::Price)),
    opt("capacity", Kind::Quantity(U::Power)),
];

/// Declarable properties of a class (besides `name`).
pub fn properties(class: ObjectClass) -> &'static [PropertySpec] {
    match class {
        C::Node | C::TriplexNode | C::TriplexMeter | C::Meter => BUS,
        C::UndergroundLine | C::OverheadLine => LINE,
        C::Switch | C::Fuse => SWITCH,
        C::Transformer => TRANSFORMER,
        C::House => HOUSE,
        C::Zipload | C::Waterheater => APPLIANCE,
        C::Solar => SOLAR,
        C::Inverter => INVERTER,
        C::Auction => AUCTION,
        C::Controller => CONTROLLER,
        C::GeneratorSeller => SELLER,
    }
}

pub fn property(class: ObjectClass, key: &str) -> Option<&'static PropertySpec> {
    properties(class).iter().find(|p| p.key == key)
}

/// What a run-time write accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Settable {
    Quantity(UnitClass),
    Scalar,
    Status,
    Mode,
    Flag,
}

/// A run-time write after type checking, in canonical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Setting {
    Number(f64),
    Status(LineStatus),
    Mode(HvacMode),
    Flag(bool),
}

fn keyword<T>(
    v: &Value,
    expected: &'static str,
    parse: impl Fn(&str) -> Option<T>,
) -> Result<T, ValueError> {
    v.as_word()
        .ok()
        .and_then(parse)
        .ok_or_else(|| ValueError::WrongKind {
            expected,
            found: v.kind_name(),
        })
}

impl Settable {
    pub fn read(self, v: &Value) -> Result<Setting, ValueError> {
        let finite = |x: f64| {
            if x.is_finite() {
                Ok(Setting::Number(x))
            } else {
                Err(ValueError::WrongKind {
                    expected: "finite number",
                    found: x.to_string(),
                })
            }
        };
        match self {
            Settable::Quantity(u) => finite(v.as_quantity(u)?),
            Settable::Scalar => finite(v.as_scalar()?),
            Settable::Status => {
                keyword(v, "OPEN or CLOSED", LineStatus::parse).map(Setting::Status)
            }
            Settable::Mode => keyword(v, "OFF or COOL", HvacMode::parse).map(Setting::Mode),
            Settable::Flag => match v {
                Value::Number { value, unit: None } if *value == 0.0 || *value == 1.0 => {
                    Ok(Setting::Flag(*value == 1.0))
                }
                _ => keyword(v, "TRUE or FALSE", |w| match w {
                    "TRUE" => Some(true),
                    "FALSE" => Some(false),
                    _ => None,
                })
                .map(Setting::Flag),
            },
        }
    }
}

/// Properties that events and players may write, by class.
pub fn settable(class: ObjectClass) -> &'static [(&'static str, Settable)] {
    use Settable as S;
    match class {
        C::UndergroundLine | C::OverheadLine | C::Switch | C::Fuse => &[("status", S::Status)],
        C::House => &[
            ("cooling_setpoint", S::Quantity(U::Temperature)),
            ("air_temperature", S::Quantity(U::Temperature)),
            ("deadband", S::Quantity(U::Temperature)),
            ("internal_gains", S::Scalar),
            ("hvac_mode", S::Mode),
        ],
        C::Zipload | C::Waterheater => &[
            ("base_power", S::Quantity(U::Power)),
            ("power_factor", S::Scalar),
        ],
        C::Solar => &[("rating", S::Quantity(U::Power)), ("efficiency", S::Scalar)],
        C::Controller => &[
            ("base_setpoint", S::Quantity(U::Temperature)),
            ("min_setpoint", S::Quantity(U::Temperature)),
            ("max_setpoint", S::Quantity(U::Temperature)),
            ("ramp", S::Scalar),
        ],
        C::GeneratorSeller => &[
            ("price", S::Quantity(U::Price)),
            ("capacity", S::Quantity(U::Power)),
        ],
        C::Auction => &[("price_cap", S::Quantity(U::Price))],
        C::Node | C::TriplexNode | C::TriplexMeter | C::Meter | C::Transformer | C::Inverter => &[],
    }
}

/// Writable property of an attack, toggled by its window-edge events.
pub const ATTACK_SETTABLE: (&str, Settable) = ("active", Settable::Flag);

/// How `property` of an object of `class` may be written, if at all.
pub fn settable_property(class: ObjectClass, property: &str) -> Option<Settable> {
    settable(class)
        .iter()
        .find(|(k, _)| *k == property)
        .map(|(_, s)| *s)
}

/// Properties recorders may sample, by class.
pub fn recordable(class: ObjectClass) -> &'static [&'static str] {
    match class {
        C::Node | C::TriplexNode | C::TriplexMeter | C::Meter => {
            &["voltage_mag", "voltage_ang", "measured_power", "energized"]
        }
        C::UndergroundLine | C::OverheadLine | C::Switch | C::Fuse | C::Transformer => {
            &["current_mag", "losses", "status"]
        }
        C::House => &[
            "air_temperature",
            "outdoor_temperature",
            "cooling_setpoint",
            "hvac_power",
            "hvac_on",
            "total_load",
        ],
        C::Zipload | C::Waterheater => &["power", "base_power"],
        C::Solar | C::Inverter => &["power_output"],
        C::Controller => &["bid_price", "last_price", "base_setpoint"],
        C::GeneratorSeller => &["price", "capacity"],
        C::Auction => &[
            "clearing_price",
            "cleared_quantity",
            "bid_count_buy",
            "bid_count_sell",
            "p_avg",
            "p_std",
            "main_clearing_price",
            "main_cleared_quantity",
            "price_cap",
        ],
    }
}

pub const FEEDER_RECORDABLE: &[&str] = &[
    "total_load",
    "hvac_load",
    "solar_output",
    "losses",
    "source_power",
];
pub const ATTACK_RECORDABLE: &[&str] = &["active"];

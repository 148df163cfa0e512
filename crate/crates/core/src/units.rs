//! The fixed unit table used by the scenario language.
//!
//! Every quantity is stored in the canonical unit of its class: volts,
//! kilowatts, degrees Fahrenheit, seconds, dollars per kWh and ohms.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitClass {
    Voltage,
    Power,
    Temperature,
    Time,
    Price,
    Impedance,
}

impl UnitClass {
    pub fn canonical(self) -> Unit {
        match self {
            UnitClass::Voltage => Unit::Volt,
            UnitClass::Power => Unit::KiloWatt,
            UnitClass::Temperature => Unit::DegF,
            UnitClass::Time => Unit::Second,
            UnitClass::Price => Unit::DollarPerKwh,
            UnitClass::Impedance => Unit::Ohm,
        }
    }
}

impl fmt::Display for UnitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UnitClass::Voltage => "voltage",
            UnitClass::Power => "power",
            UnitClass::Temperature => "temperature",
            UnitClass::Time => "time",
            UnitClass::Price => "price",
            UnitClass::Impedance => "impedance",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Volt,
    KiloVolt,
    Watt,
    KiloWatt,
    MegaWatt,
    DegF,
    Second,
    Minute,
    Hour,
    DollarPerKwh,
    Ohm,
}

const ALL: [Unit; 11] = [
    Unit::Volt,
    Unit::KiloVolt,
    Unit::Watt,
    Unit::KiloWatt,
    Unit::MegaWatt,
    Unit::DegF,
    Unit::Second,
    Unit::Minute,
    Unit::Hour,
    Unit::DollarPerKwh,
    Unit::Ohm,
];

impl Unit {
    pub fn parse(symbol: &str) -> Option<Unit> {
        ALL.iter().copied().find(|u| u.symbol() == symbol)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Volt => "V",
            Unit::KiloVolt => "kV",
            Unit::Watt => "W",
            Unit::KiloWatt => "kW",
            Unit::MegaWatt => "MW",
            Unit::DegF => "degF",
            Unit::Second => "s",
            Unit::Minute => "min",
            Unit::Hour => "h",
            Unit::DollarPerKwh => "$/kWh",
            Unit::Ohm => "Ohm",
        }
    }

    pub fn class(self) -> UnitClass {
        match self {
            Unit::Volt | Unit::KiloVolt => UnitClass::Voltage,
            Unit::Watt | Unit::KiloWatt | Unit::MegaWatt => UnitClass::Power,
            Unit::DegF => UnitClass::Temperature,
            Unit::Second | Unit::Minute | Unit::Hour => UnitClass::Time,
            Unit::DollarPerKwh => UnitClass::Price,
            Unit::Ohm => UnitClass::Impedance,
        }
    }

    /// Multiplier that converts a value in this unit to the canonical unit
    /// of its class.
    pub fn to_canonical(self) -> f64 {
        match self {
            Unit::Volt => 1.0,
            Unit::KiloVolt => 1000.0,
            Unit::Watt => 1e-3,
            Unit::KiloWatt => 1.0,
            Unit::MegaWatt => 1000.0,
            Unit::DegF => 1.0,
            Unit::Second => 1.0,
            Unit::Minute => 60.0,
            Unit::Hour => 3600.0,
            Unit::DollarPerKwh => 1.0,
            Unit::Ohm => 1.0,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

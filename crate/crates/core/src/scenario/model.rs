use std::fmt;

use crate::attack::AttackConfig;
use crate::kernel::Schedule;
use crate::recorder::{PlayerConfig, RecorderConfig};
use crate::time::Timestamp;
use crate::units::{Unit, UnitClass};

/// A property value as written in a scenario document.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number {
        value: f64,
        unit: Option<Unit>,
    },
    Complex {
        re: f64,
        im: f64,
        unit: Option<Unit>,
    },
    /// A quoted string.
    Text(String),
    /// A bare word: an object reference or a keyword such as `OPEN`.
    Word(String),
    /// Comma-separated bare words.
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValueError {
    #[error("expected a {expected}, found {found}")]
    WrongKind {
        expected: &'static str,
        found: String,
    },
    #[error("unit {unit} is a {found} unit, expected {expected}")]
    UnitMismatch {
        unit: Unit,
        found: UnitClass,
        expected: UnitClass,
    },
    #[error("unexpected unit {0} on a dimensionless value")]
    UnexpectedUnit(Unit),
}

impl Value {
    pub fn number(value: f64) -> Value {
        Value::Number { value, unit: None }
    }

    pub fn quantity(value: f64, unit: Unit) -> Value {
        Value::Number {
            value,
            unit: Some(unit),
        }
    }

    pub fn word(w: impl Into<String>) -> Value {
        Value::Word(w.into())
    }

    pub(crate) fn kind_name(&self) -> String {
        match self {
            Value::Number { .. } => "number".into(),
            Value::Complex { .. } => "complex number".into(),
            Value::Text(t) => format!("string \"{t}\""),
            Value::Word(w) => format!("word '{w}'"),
            Value::List(_) => "list".into(),
        }
    }

    /// Reads a quantity of `class`, converted to the canonical unit.
    /// A bare number is taken to already be in the canonical unit.
    pub fn as_quantity(&self, class: UnitClass) -> Result<f64, ValueError> {
        match self {
            Value::Number { value, unit: None } => Ok(*value),
            Value::Number {
                value,
                unit: Some(u),
            } => {
                if u.class() == class {
                    Ok(value * u.to_canonical())
                } else {
                    Err(ValueError::UnitMismatch {
                        unit: *u,
                        found: u.class(),
                        expected: class,
                    })
                }
            }
            other => Err(ValueError::WrongKind {
                expected: "number",
                found: other.kind_name(),
            }),
        }
    }

    pub fn as_scalar(&self) -> Result<f64, ValueError> {
        match self {
            Value::Number { value, unit: None } => Ok(*value),
            Value::Number { unit: Some(u), .. } => Err(ValueError::UnexpectedUnit(*u)),
            other => Err(ValueError::WrongKind {
                expected: "number",
                found: other.kind_name(),
            }),
        }
    }

    /// Reads an impedance in ohms. A real number is accepted as a purely
    /// resistive impedance.
    pub fn as_impedance(&self) -> Result<(f64, f64), ValueError> {
        match self {
            Value::Complex { re, im, unit } => match unit {
                None | Some(Unit::Ohm) => Ok((*re, *im)),
                Some(u) => Err(ValueError::UnitMismatch {
                    unit: *u,
                    found: u.class(),
                    expected: UnitClass::Impedance,
                }),
            },
            Value::Number { .. } => Ok((self.as_quantity(UnitClass::Impedance)?, 0.0)),
            other => Err(ValueError::WrongKind {
                expected: "complex impedance",
                found: other.kind_name(),
            }),
        }
    }

    pub fn as_word(&self) -> Result<&str, ValueError> {
        match self {
            Value::Word(w) => Ok(w),
            other => Err(ValueError::WrongKind {
                expected: "word",
                found: other.kind_name(),
            }),
        }
    }

    /// Words and quoted strings both read as text.
    pub fn as_text(&self) -> Result<&str, ValueError> {
        match self {
            Value::Word(w) | Value::Text(w) => Ok(w),
            other => Err(ValueError::WrongKind {
                expected: "string",
                found: other.kind_name(),
            }),
        }
    }

    pub fn as_list(&self) -> Result<Vec<String>, ValueError> {
        match self {
            Value::List(items) => Ok(items.clone()),
            Value::Word(w) => Ok(vec![w.clone()]),
            other => Err(ValueError::WrongKind {
                expected: "list of names",
                found: other.kind_name(),
            }),
        }
    }

    pub fn as_timestamp(&self) -> Result<Timestamp, ValueError> {
        let text = self.as_text()?;
        Timestamp::parse(text).map_err(|_| ValueError::WrongKind {
            expected: "timestamp",
            found: self.kind_name(),
        })
    }
}

fn write_unit(f: &mut fmt::Formatter<'_>, unit: &Option<Unit>) -> fmt::Result {
    match unit {
        Some(u) => write!(f, " {u}"),
        None => Ok(()),
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number { value, unit } => {
                write!(f, "{value}")?;
                write_unit(f, unit)
            }
            Value::Complex { re, im, unit } => {
                if *im < 0.0 || (*im == 0.0 && im.is_sign_negative()) {
                    write!(f, "{re}-{}j", -im)?;
                } else {
                    write!(f, "{re}+{im}j")?;
                }
                write_unit(f, unit)
            }
            Value::Text(t) if t.contains('"') => write!(f, "'{t}'"),
            Value::Text(t) => write!(f, "\"{t}\""),
            Value::Word(w) => f.write_str(w),
            Value::List(items) => f.write_str(&items.join(",")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectClass {
    Node,
    UndergroundLine,
    OverheadLine,
    Switch,
    Fuse,
    Transformer,
    TriplexNode,
    TriplexMeter,
    Meter,
    House,
    Zipload,
    Waterheater,
    Solar,
    Inverter,
    Auction,
    Controller,
    GeneratorSeller,
}

pub const ALL_CLASSES: [ObjectClass; 17] = [
    ObjectClass::Node,
    ObjectClass::UndergroundLine,
    ObjectClass::OverheadLine,
    ObjectClass::Switch,
    ObjectClass::Fuse,
    ObjectClass::Transformer,
    ObjectClass::TriplexNode,
    ObjectClass::TriplexMeter,
    ObjectClass::Meter,
    ObjectClass::House,
    ObjectClass::Zipload,
    ObjectClass::Waterheater,
    ObjectClass::Solar,
    ObjectClass::Inverter,
    ObjectClass::Auction,
    ObjectClass::Controller,
    ObjectClass::GeneratorSeller,
];

impl ObjectClass {
    pub fn parse(keyword: &str) -> Option<ObjectClass> {
        ALL_CLASSES.iter().copied().find(|c| c.keyword() == keyword)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            ObjectClass::Node => "node",
            ObjectClass::UndergroundLine => "underground_line",
            ObjectClass::OverheadLine => "overhead_line",
            ObjectClass::Switch => "switch",
            ObjectClass::Fuse => "fuse",
            ObjectClass::Transformer => "transformer",
            ObjectClass::TriplexNode => "triplex_node",
            ObjectClass::TriplexMeter => "triplex_meter",
            ObjectClass::Meter => "meter",
            ObjectClass::House => "house",
            ObjectClass::Zipload => "zipload",
            ObjectClass::Waterheater => "waterheater",
            ObjectClass::Solar => "solar",
            ObjectClass::Inverter => "inverter",
            ObjectClass::Auction => "auction",
            ObjectClass::Controller => "controller",
            ObjectClass::GeneratorSeller => "generator_seller",
        }
    }

    /// Electrical buses: the vertices of the network tree.
    pub fn is_bus(self) -> bool {
        matches!(
            self,
            ObjectClass::Node
                | ObjectClass::TriplexNode
                | ObjectClass::TriplexMeter
                | ObjectClass::Meter
        )
    }

    /// Two-terminal network elements declared with `from` and `to`.
    pub fn is_branch(self) -> bool {
        matches!(
            self,
            ObjectClass::UndergroundLine
                | ObjectClass::OverheadLine
                | ObjectClass::Switch
                | ObjectClass::Fuse
                | ObjectClass::Transformer
        )
    }

    /// Elements whose status may be toggled: lines, switches and fuses.
    pub fn is_switchable(self) -> bool {
        self.is_branch() && self != ObjectClass::Transformer
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Source position (1-based line and column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub key: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridObject {
    pub class: ObjectClass,
    pub name: String,
    /// Properties other than `name`, in declaration order.
    pub properties: Vec<Property>,
    pub position: Position,
}

impl GridObject {
    pub fn new(class: ObjectClass, name: impl Into<String>) -> Self {
        GridObject {
            class,
            name: name.into(),
            properties: Vec::new(),
            position: Position::default(),
        }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.properties.push(Property {
            key: key.to_string(),
            value,
        });
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.properties
            .iter()
            .find(|p| p.key == key)
            .map(|p| &p.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockConfig {
    pub start: Timestamp,
    pub stop: Timestamp,
    /// Step length in seconds.
    pub timestep: i64,
}

impl ClockConfig {
    pub fn steps(&self) -> i64 {
        (self.stop - self.start) / self.timestep
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioModel {
    pub clock: Option<ClockConfig>,
    pub objects: Vec<GridObject>,
    pub schedules: Vec<Schedule>,
    pub attacks: Vec<AttackConfig>,
    pub recorders: Vec<RecorderConfig>,
    pub players: Vec<PlayerConfig>,
    pub weather_source: Option<String>,
}

impl ScenarioModel {
    pub fn object(&self, name: &str) -> Option<&GridObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn objects_of(&self, class: ObjectClass) -> impl Iterator<Item = &GridObject> {
        self.objects.iter().filter(move |o| o.class == class)
    }
}

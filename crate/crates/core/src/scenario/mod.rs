//! Scenario language: parsing, the in-memory model, validation and the
//! derived network index.

mod model;
mod network;
mod parser;
mod print;
pub mod schema;
mod validate;

pub use model::{
    ClockConfig, GridObject, ObjectClass, Position, Property, ScenarioModel, Value, ValueError,
    ALL_CLASSES,
};
pub use network::{
    analyze_network, build_network_index, Bus, Edge, NetworkIndex, TopologyCode, TopologyError,
    TopologyIssue,
};
pub use parser::{parse_scenario, ParseError, ParseErrorKind};
pub use print::pretty_print;
pub use validate::{validate, Diagnostic, Location, ValidationReport};

#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use gridres_core::kernel::{simulate, RunOptions, SimulationResult};
use gridres_core::market::Topology;
use gridres_core::scenario::{parse_scenario, ScenarioModel};
use gridres_core::Timestamp;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture(name: &str) -> ScenarioModel {
    parse_scenario(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn opts(seed: u64, topology: Option<Topology>) -> RunOptions {
    RunOptions {
        seed,
        topology,
        base_dir: fixture_dir(),
    }
}

pub fn run(model: &ScenarioModel, topology: Option<Topology>) -> SimulationResult {
    let r = simulate(model, &opts(0, topology)).expect("run failed");
    assert!(r.meta.complete, "run incomplete: {:?}", r.meta.failure);
    r
}

pub fn ts(s: &str) -> Timestamp {
    s.parse().unwrap()
}

/// `(time, value)` pairs of one recorded column.
pub fn series(r: &SimulationResult, recorder: &str, property: &str) -> Vec<(Timestamp, f64)> {
    let table = &r.tables[recorder];
    let col = table
        .config
        .properties
        .iter()
        .position(|p| p == property)
        .unwrap_or_else(|| panic!("{recorder} has no {property}"));
    table
        .rows
        .iter()
        .map(|row| (row.time, row.values[col]))
        .collect()
}

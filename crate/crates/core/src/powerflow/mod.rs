//! Single-phase forward-back sweep power flow on a radial feeder.

mod islands;
mod sweep;

pub use islands::{compute_islands, Network, SwitchError};
pub use sweep::{
    solve_bus_loads, solve_powerflow, LoadInjection, NetworkState, PowerflowError, SolverDivergence,
};

/// Convergence tolerance on the per-unit voltage update.
pub const TOLERANCE_PU: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 50;
/// System power base for per-unit balance checks, VA.
pub const S_BASE: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineStatus {
    Closed,
    Open,
}

impl LineStatus {
    pub fn parse(word: &str) -> Option<LineStatus> {
        match word.to_ascii_uppercase().as_str() {
            "OPEN" => Some(LineStatus::Open),
            "CLOSED" => Some(LineStatus::Closed),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            LineStatus::Open => "OPEN",
            LineStatus::Closed => "CLOSED",
        }
    }
}

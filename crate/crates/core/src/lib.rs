//! Transactive smart-grid simulator for studying market-bid manipulation and
//! physical line attacks on a radial distribution feeder.
//!
//! The pipeline is: [`scenario::parse_scenario`] → [`scenario::validate`] →
//! [`kernel::build_event_list`] → [`kernel::run`] → [`recorder::write_results`].

pub mod attack;
pub mod genfeeder;
pub mod kernel;
pub mod loads;
pub mod market;
pub mod powerflow;
pub mod recorder;
pub mod scenario;
pub mod time;
pub mod units;

pub use time::Timestamp;

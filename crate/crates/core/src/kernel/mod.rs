//! Simulation clock, event queue and main loop.

mod event;
mod run;
mod state;

pub use event::{
    build_event_list, Event, EventQueue, Origin, OutOfWindow, Schedule, ScheduleEntry,
};
pub use run::{
    compile_attacks, run, run_with_hook, simulate, PauseHook, RunError, RunMetadata, RunOptions,
    SimulationResult,
};
pub use state::{
    ApplianceState, AttackRuntime, AuctionRuntime, AuditRecord, ControllerRuntime, FeederTotals,
    Reading, SellerRuntime, SimState, SolarState, StateError, DEFAULT_DEADBAND, DEFAULT_RAMP,
    DEFAULT_SELLER_CAPACITY,
};

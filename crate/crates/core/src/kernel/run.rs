use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use super::event::{build_event_list, Event, EventQueue, Origin};
use super::state::{AuditRecord, SimState, StateError};
use crate::attack::{
    compile_attack, scale_buyer_bid, seller_override, AttackError, CompiledAttack, CompromisedSet,
    Transform,
};
use crate::loads::{hvac_power, solar_output, step_house, HvacMode, Weather};
use crate::market::{
    clear_market, controller_apply_clearing, controller_bid, seller_agents_bid, sync_auxiliary,
    AuxiliaryBidder, Bid, BidderDirection, GeneratorSeller, MarketError, Topology,
};
use crate::powerflow::solve_bus_loads;
use crate::recorder::{
    read_player, read_weather, record, InputError, PlayerConfig, RecorderTable, RecorderTables,
    TimeSeries,
};
use crate::scenario::{analyze_network, validate, ScenarioModel, ValidationReport, Value};
use crate::time::Timestamp;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    /// Seeds attack target selection when an attack has no seed of its own.
    pub seed: u64,
    /// Forces every auction onto one topology.
    pub topology: Option<Topology>,
    /// Directory that player and weather file names are relative to.
    pub base_dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("scenario is not runnable:\n{}", .0.render())]
    Invalid(ValidationReport),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("weather data does not cover the run start {0}")]
    WeatherCoverage(Timestamp),
    #[error("at {time}: {source}")]
    Event { time: Timestamp, source: StateError },
    #[error("market '{market}': {source}")]
    Market { market: String, source: MarketError },
}

/// Called at every step boundary before due events are applied. Events
/// pushed here take part in the same step when due.
pub trait PauseHook {
    fn on_pause(&mut self, t: Timestamp, state: &SimState, queue: &mut EventQueue);
}

impl<F: FnMut(Timestamp, &SimState, &mut EventQueue)> PauseHook for F {
    fn on_pause(&mut self, t: Timestamp, state: &SimState, queue: &mut EventQueue) {
        self(t, state, queue)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub start: Timestamp,
    pub stop: Timestamp,
    pub timestep: i64,
    /// Number of timesteps between start and stop.
    pub steps: i64,
    pub complete: bool,
    pub failure: Option<String>,
    pub seed: u64,
    pub topology: Option<Topology>,
    pub attacks: Vec<String>,
    pub powerflow_solves: u64,
    pub powerflow_max_iterations: usize,
    pub powerflow_total_iterations: u64,
    pub max_balance_residual_pu: f64,
    /// kW
    pub peak_total_load: f64,
    /// Highest price controllers observed.
    pub max_clearing_price: Option<f64>,
    pub max_main_clearing_price: Option<f64>,
    /// Not serialized.
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub tables: RecorderTables,
    pub audit: Vec<AuditRecord>,
    pub final_state: SimState,
    pub meta: RunMetadata,
}

struct PlayerRuntime {
    config: PlayerConfig,
    series: TimeSeries,
    last: Option<f64>,
}

fn max_opt(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.max(b)))
}

/// Compiles attacks, builds the event queue and runs.
pub fn simulate(model: &ScenarioModel, opts: &RunOptions) -> Result<SimulationResult, RunError> {
    let report = validate(model);
    if !report.is_runnable() {
        return Err(RunError::Invalid(report));
    }
    let clock = model
        .clock
        .ok_or_else(|| RunError::Invalid(report.clone()))?;
    let compiled = compile_attacks(model, opts.seed)?;
    let events: Vec<Event> = compiled
        .iter()
        .flat_map(|a| a.events.iter().cloned())
        .collect();
    let (queue, _) = build_event_list(&model.schedules, &events, clock.start, clock.stop);
    run(model, queue, opts)
}

pub fn compile_attacks(
    model: &ScenarioModel,
    seed: u64,
) -> Result<Vec<CompiledAttack>, AttackError> {
    model
        .attacks
        .iter()
        .map(|a| compile_attack(a, model, seed))
        .collect()
}

pub fn run(
    model: &ScenarioModel,
    queue: EventQueue,
    opts: &RunOptions,
) -> Result<SimulationResult, RunError> {
    run_with_hook(
        model,
        queue,
        opts,
        &mut |_: Timestamp, _: &SimState, _: &mut EventQueue| {},
    )
}

/// Runs the main loop from start to stop inclusive. Within a step: pause
/// hook, due events, players, loads, market (on period boundaries), power
/// flow, recorders (on their intervals).
pub fn run_with_hook(
    model: &ScenarioModel,
    mut queue: EventQueue,
    opts: &RunOptions,
    hook: &mut dyn PauseHook,
) -> Result<SimulationResult, RunError> {
    let wall = Instant::now();
    let report = validate(model);
    let Some(clock) = model.clock.filter(|_| report.is_runnable()) else {
        return Err(RunError::Invalid(report));
    };
    let (t0, tf, dt) = (clock.start, clock.stop, clock.timestep);

    let weather = match &model.weather_source {
        Some(file) => Weather::Table(read_weather(&opts.base_dir.join(file))?),
        None => Weather::Synthetic,
    };
    let weather_at = |t: Timestamp| weather.at(t).ok_or(RunError::WeatherCoverage(t0));
    let first = weather_at(t0)?;

    let mut players = Vec::new();
    for p in &model.players {
        players.push(PlayerRuntime {
            config: p.clone(),
            series: read_player(&opts.base_dir.join(&p.file))?,
            last: None,
        });
    }

    let compiled = compile_attacks(model, opts.seed)?;
    let (index, _) = analyze_network(model);
    let mut state = SimState::new(model, index, compiled, opts.topology, t0, first.temperature);
    for a in state.attacks.values() {
        if let Some(m) = &a.compiled.market {
            if state
                .auctions
                .get(m)
                .is_none_or(|x| x.topology != Topology::Auxiliary)
            {
                return Err(AttackError::RequiresAuxiliary(a.compiled.name.clone()).into());
            }
        }
    }

    let mut tables: RecorderTables = model
        .recorders
        .iter()
        .map(|r| {
            (
                r.name.clone(),
                RecorderTable {
                    config: r.clone(),
                    rows: Vec::new(),
                },
            )
        })
        .collect();
    let mut meta = RunMetadata {
        start: t0,
        stop: tf,
        timestep: dt,
        steps: (tf - t0) / dt,
        complete: true,
        failure: None,
        seed: opts.seed,
        topology: state.auctions.values().next().map(|a| a.topology),
        attacks: model
            .attacks
            .iter()
            .map(|a| format!("{} {}", a.name, a.kind.keyword()))
            .collect(),
        powerflow_solves: 0,
        powerflow_max_iterations: 0,
        powerflow_total_iterations: 0,
        max_balance_residual_pu: 0.0,
        peak_total_load: 0.0,
        max_clearing_price: None,
        max_main_clearing_price: None,
        wall_time: Duration::ZERO,
    };
    let mut audit = Vec::new();

    for k in 0..=meta.steps {
        let t = t0 + k * dt;
        state.time = t;
        hook.on_pause(t, &state, &mut queue);

        while let Some(e) = queue.pop_due(t) {
            let (old, new) = state
                .set_property(&e.target, &e.property, &e.value)
                .map_err(|source| RunError::Event { time: t, source })?;
            audit.push(AuditRecord {
                time: t,
                target: e.target,
                property: e.property,
                old_value: old,
                new_value: new,
                origin: e.origin,
            });
        }

        for p in &mut players {
            let Some(v) = p.series.value_at(t) else {
                continue;
            };
            if p.last == Some(v) {
                continue;
            }
            p.last = Some(v);
            let (old, new) = state
                .set_property(&p.config.target, &p.config.property, &Value::number(v))
                .map_err(|source| RunError::Event { time: t, source })?;
            audit.push(AuditRecord {
                time: t,
                target: p.config.target.clone(),
                property: p.config.property.clone(),
                old_value: old,
                new_value: new,
                origin: Origin::Player,
            });
        }

        let now = weather_at(t)?;
        let before = if k > 0 {
            Some(weather_at(t + -dt)?)
        } else {
            None
        };
        advance_loads(
            &mut state,
            before.as_ref(),
            now.temperature,
            now.irradiance,
            dt,
        );

        if state
            .auctions
            .values()
            .any(|a| (t - t0) % a.main.period_secs == 0)
        {
            clear_auctions(&mut state, t - t0, &mut meta)?;
        }

        if let Err(failure) = solve(&mut state, &mut meta) {
            meta.complete = false;
            meta.failure = Some(format!("at {t}: {failure}"));
            break;
        }

        for table in tables.values_mut() {
            if (t - t0) % table.config.interval == 0 {
                let row = record(&table.config, t, &state)
                    .map_err(|source| RunError::Event { time: t, source })?;
                table.rows.push(row);
            }
        }
    }

    meta.wall_time = wall.elapsed();
    Ok(SimulationResult {
        tables,
        audit,
        final_state: state,
        meta,
    })
}

/// Thermal step over the previous interval, thermostat, and appliance and
/// solar output at the current instant. Loads on dead buses draw nothing.
fn advance_loads(
    state: &mut SimState,
    before: Option<&crate::loads::WeatherSample>,
    outdoor: f64,
    irradiance: f64,
    dt: i64,
) {
    let live: Vec<bool> = state.houses.keys().map(|h| state.is_live(h)).collect();
    for ((_, h), live) in state.houses.iter_mut().zip(live) {
        match before {
            Some(w) => *h = step_house(h, w, dt),
            None => h.outdoor_temperature = outdoor,
        }
        if !live {
            h.mode = HvacMode::Off;
        }
    }
    let live: Vec<bool> = state.appliances.keys().map(|a| state.is_live(a)).collect();
    for (a, live) in state.appliances.values_mut().zip(live) {
        a.power = if live { a.base_power } else { 0.0 };
    }
    let live: Vec<bool> = state.solar.keys().map(|s| state.is_live(s)).collect();
    let sample = crate::loads::WeatherSample {
        time: state.time,
        temperature: outdoor,
        irradiance,
    };
    for (s, live) in state.solar.values_mut().zip(live) {
        s.output = if live {
            solar_output(&s.panel, &sample)
        } else {
            0.0
        };
    }
}

fn submit(m: &mut crate::market::MarketState, bid: Bid) -> Result<(), RunError> {
    let market = m.name.clone();
    m.submit_bid(bid)
        .map_err(|source| RunError::Market { market, source })
}

/// Clears every auction whose period boundary falls at `elapsed` seconds.
fn clear_auctions(
    state: &mut SimState,
    elapsed: i64,
    meta: &mut RunMetadata,
) -> Result<(), RunError> {
    let names: Vec<String> = state
        .auctions
        .iter()
        .filter(|(_, a)| elapsed % a.main.period_secs == 0)
        .map(|(n, _)| n.clone())
        .collect();
    for name in names {
        // Demand that does not respond to price bids at the cap.
        let mut unresponsive = 0.0;
        for (h, house) in &state.houses {
            if state.house_auction.get(h) == Some(&name)
                && !state.controlled.contains(h)
                && state.is_live(h)
            {
                unresponsive += hvac_power(house);
            }
        }
        for a in state.appliances.values() {
            if state.house_auction.get(&a.house) == Some(&name) {
                unresponsive += a.power;
            }
        }

        let auction = &state.auctions[&name];
        let gens: Vec<GeneratorSeller> = state
            .sellers
            .values()
            .filter(|s| s.auction == name)
            .map(|s| s.seller.clone())
            .collect();
        let sells = seller_agents_bid(&gens, &auction.main);
        let mut buys: Vec<(String, Option<Bid>)> = Vec::new();
        for (c, ctl) in state.controllers.iter().filter(|(_, c)| c.auction == name) {
            let bid = match state.houses.get(&ctl.state.house) {
                Some(h) if state.is_live(&ctl.state.house) => {
                    controller_bid(&ctl.state, h, auction.observed())
                }
                _ => None,
            };
            buys.push((c.clone(), bid));
        }
        let transforms: Vec<(Transform, CompromisedSet)> = state
            .attacks
            .values()
            .filter(|a| a.active && a.compiled.market.as_deref() == Some(name.as_str()))
            .map(|a| (a.compiled.transform, a.compiled.compromised.clone()))
            .collect();

        let auction = state
            .auctions
            .get_mut(&name)
            .unwrap_or_else(|| unreachable!());
        let cap = auction.main.price_cap;
        let unresponsive_id = format!("{name}:unresponsive");
        let (clearing, p_avg, p_std) = match &mut auction.aux {
            None => {
                let m = &mut auction.main;
                for b in sells {
                    submit(m, b)?;
                }
                for b in buys.iter().filter_map(|(_, b)| b.clone()) {
                    submit(m, b)?;
                }
                if unresponsive > 0.0 {
                    submit(m, Bid::buy(unresponsive_id, cap, unresponsive, m.period))?;
                }
                let stats = (m.p_avg(), m.p_std());
                (clear_market(m), stats.0, stats.1)
            }
            Some(am) => {
                let mm = &mut auction.main;
                for b in sells {
                    submit(mm, b)?;
                }
                for b in buys.iter().filter_map(|(_, b)| b.clone()) {
                    submit(am, b)?;
                }
                if unresponsive > 0.0 {
                    submit(
                        mm,
                        Bid::buy(unresponsive_id.clone(), cap, unresponsive, mm.period),
                    )?;
                    submit(am, Bid::buy(unresponsive_id, cap, unresponsive, am.period))?;
                }
                let p_m = mm.last_price;
                let relay = |ab: &AuxiliaryBidder, bid: Bid| {
                    let mut bid = bid;
                    for (t, set) in &transforms {
                        if !set.contains(&ab.trader) {
                            continue;
                        }
                        match (ab.direction, t) {
                            (BidderDirection::SellerSide, Transform::SellerOverride { price }) => {
                                bid = seller_override(&bid, *price)
                            }
                            (BidderDirection::BuyerSide, Transform::BuyerScale { lambda }) => {
                                bid = scale_buyer_bid(&bid, *lambda, p_m, cap)
                            }
                            _ => {}
                        }
                    }
                    bid
                };
                sync_auxiliary(mm, am, &mut auction.bidders, relay).map_err(|source| {
                    RunError::Market {
                        market: name.clone(),
                        source,
                    }
                })?;
                let stats = (am.p_avg(), am.p_std());
                let main = clear_market(mm);
                meta.max_main_clearing_price = max_opt(meta.max_main_clearing_price, main.price);
                (clear_market(am), stats.0, stats.1)
            }
        };
        meta.max_clearing_price = max_opt(meta.max_clearing_price, clearing.price);
        if auction.aux.is_none() {
            meta.max_main_clearing_price = max_opt(meta.max_main_clearing_price, clearing.price);
        }

        for (c, bid) in buys {
            let Some(ctl) = state.controllers.get_mut(&c) else {
                continue;
            };
            ctl.bid_price = bid.map_or(0.0, |b| b.price);
            let setpoint = controller_apply_clearing(&mut ctl.state, &clearing, p_avg, p_std);
            if let Some(h) = state.houses.get_mut(&ctl.state.house) {
                h.cooling_setpoint = setpoint;
            }
        }
    }
    Ok(())
}

/// Solves the network for the current loads and refreshes feeder totals.
fn solve(
    state: &mut SimState,
    meta: &mut RunMetadata,
) -> Result<(), crate::powerflow::SolverDivergence> {
    let mut hvac = 0.0;
    let mut total = 0.0;
    let mut solar = 0.0;
    let n_bus = state.energized.len();
    let mut per_bus = vec![Complex64::new(0.0, 0.0); n_bus];
    let index = state.network.as_ref().map(|n| &n.index);
    let bus = |name: &str| index.and_then(|i| i.attachment(name));

    for (name, h) in &state.houses {
        if !state.is_live(name) {
            continue;
        }
        let p = hvac_power(h);
        hvac += p;
        total += p;
        if let Some(b) = bus(name) {
            per_bus[b] += Complex64::new(p * 1000.0, 0.0);
        }
    }
    for (name, a) in &state.appliances {
        total += a.power;
        if let Some(b) = bus(name) {
            per_bus[b] += Complex64::new(a.power, a.reactive()) * 1000.0;
        }
    }
    for (name, s) in &state.solar {
        solar += s.output;
        if let Some(b) = bus(name) {
            per_bus[b] -= Complex64::new(s.output * 1000.0, 0.0);
        }
    }

    let (losses, source) = match &state.network {
        Some(net) => {
            let flow = solve_bus_loads(&net.index, net.statuses(), &per_bus)?;
            meta.powerflow_solves += 1;
            meta.powerflow_total_iterations += flow.iterations as u64;
            meta.powerflow_max_iterations = meta.powerflow_max_iterations.max(flow.iterations);
            meta.max_balance_residual_pu =
                meta.max_balance_residual_pu.max(flow.balance_residual_pu());
            let out = (flow.losses.re / 1000.0, flow.source_power.re / 1000.0);
            for (b, live) in flow.energized.iter().enumerate() {
                if !live {
                    per_bus[b] = Complex64::new(0.0, 0.0);
                }
            }
            state.flow = Some(flow);
            out
        }
        None => (0.0, total - solar),
    };
    state.bus_load = per_bus;
    state.feeder = super::state::FeederTotals {
        total_load: total,
        hvac_load: hvac,
        solar_output: solar,
        losses,
        source_power: source,
    };
    meta.peak_total_load = meta.peak_total_load.max(total);
    Ok(())
}

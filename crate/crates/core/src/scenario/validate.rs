use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::model::{GridObject, ObjectClass, Position, ScenarioModel, Value, ValueError};
use super::network::{analyze_network, TopologyCode};
use super::schema::{self, Kind, Settable, ATTACK_RECORDABLE, ATTACK_SETTABLE, FEEDER_RECORDABLE};
use crate::attack::{compile_attack, AttackError};
use crate::kernel::build_event_list;
use crate::market::{Topology, DEFAULT_PERIOD, DEFAULT_PRICE_CAP};
use crate::recorder::FEEDER_TARGET;

/// Where a diagnostic points. Ordered document first, then objects by
/// source position, then blocks by kind and name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Document,
    Object { position: Position, name: String },
    Block { kind: &'static str, name: String },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Document => f.write_str("document"),
            Location::Object { position, name } => write!(f, "{position} object '{name}'"),
            Location::Block { kind, name } if name.is_empty() => f.write_str(kind),
            Location::Block { kind, name } => write!(f, "{kind} '{name}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub location: Location,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.code, self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_runnable(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.errors
            .iter()
            .chain(&self.warnings)
            .any(|d| d.code == code)
    }

    /// Stable text form: one line per diagnostic, errors first.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for d in &self.errors {
            out.push_str(&format!("error {d}\n"));
        }
        for d in &self.warnings {
            out.push_str(&format!("warning {d}\n"));
        }
        out
    }
}

struct Checker<'a> {
    model: &'a ScenarioModel,
    names: BTreeMap<&'a str, &'a GridObject>,
    attacks: BTreeSet<&'a str>,
    report: ValidationReport,
}

fn at(o: &GridObject) -> Location {
    Location::Object {
        position: o.position,
        name: o.name.clone(),
    }
}

fn block(kind: &'static str, name: &str) -> Location {
    Location::Block {
        kind,
        name: name.to_string(),
    }
}

fn value_code(e: &ValueError) -> &'static str {
    match e {
        ValueError::UnitMismatch { .. } | ValueError::UnexpectedUnit(_) => "UNIT_MISMATCH",
        ValueError::WrongKind { .. } => "BAD_VALUE",
    }
}

impl<'a> Checker<'a> {
    fn error(&mut self, location: Location, code: &'static str, message: impl Into<String>) {
        self.report.errors.push(Diagnostic {
            location,
            code,
            message: message.into(),
        });
    }

    fn warn(&mut self, location: Location, code: &'static str, message: impl Into<String>) {
        self.report.warnings.push(Diagnostic {
            location,
            code,
            message: message.into(),
        });
    }

    fn number(&self, o: &GridObject, key: &str) -> Option<f64> {
        let spec = schema::property(o.class, key)?;
        let v = o.get(key)?;
        match spec.kind {
            Kind::Quantity(u) => v.as_quantity(u).ok(),
            Kind::Scalar => v.as_scalar().ok(),
            _ => None,
        }
    }

    fn names(&mut self) {
        let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
        for o in &self.model.objects {
            if o.name == FEEDER_TARGET {
                self.error(
                    at(o),
                    "RESERVED_NAME",
                    format!("'{FEEDER_TARGET}' is reserved for feeder totals"),
                );
            }
            if seen.insert(&o.name, ()).is_some() {
                self.error(
                    at(o),
                    "DUPLICATE_NAME",
                    format!("name '{}' is already used", o.name),
                );
            }
        }
        for a in &self.model.attacks {
            if a.name == FEEDER_TARGET || seen.insert(&a.name, ()).is_some() {
                self.error(
                    block("attack", &a.name),
                    "DUPLICATE_NAME",
                    format!("name '{}' is already used", a.name),
                );
            }
        }
        let dup = |kind: &'static str, names: Vec<&str>, report: &mut Vec<Diagnostic>| {
            let mut seen = BTreeSet::new();
            for n in names {
                if !seen.insert(n) {
                    report.push(Diagnostic {
                        location: block(kind, n),
                        code: "DUPLICATE_NAME",
                        message: format!("{kind} name '{n}' is already used"),
                    });
                }
            }
        };
        let m = self.model;
        dup(
            "schedule",
            m.schedules.iter().map(|s| s.name.as_str()).collect(),
            &mut self.report.errors,
        );
        dup(
            "recorder",
            m.recorders.iter().map(|s| s.name.as_str()).collect(),
            &mut self.report.errors,
        );
        dup(
            "player",
            m.players.iter().map(|s| s.name.as_str()).collect(),
            &mut self.report.errors,
        );
    }

    fn clock(&mut self) {
        let Some(c) = self.model.clock else {
            self.error(
                Location::Document,
                "NO_CLOCK",
                "the scenario has no clock block",
            );
            return;
        };
        if c.start >= c.stop {
            self.error(
                block("clock", ""),
                "BAD_CLOCK",
                format!("start {} is not before stop {}", c.start, c.stop),
            );
        }
        if c.timestep <= 0 {
            self.error(
                block("clock", ""),
                "BAD_CLOCK",
                format!("timestep {} s is not positive", c.timestep),
            );
        } else if (c.stop - c.start) % c.timestep != 0 {
            self.error(
                block("clock", ""),
                "BAD_CLOCK",
                format!("timestep {} s does not divide the run length", c.timestep),
            );
        }
    }

    fn clock_ok(&self) -> bool {
        self.model.clock.is_some_and(|c| {
            c.start < c.stop && c.timestep > 0 && (c.stop - c.start) % c.timestep == 0
        })
    }

    fn properties(&mut self, o: &GridObject) {
        for p in &o.properties {
            let Some(spec) = schema::property(o.class, &p.key) else {
                self.warn(
                    at(o),
                    "UNKNOWN_PROPERTY",
                    format!("{} has no property '{}'; it is ignored", o.class, p.key),
                );
                continue;
            };
            let checked: Result<(), ValueError> = match spec.kind {
                Kind::Quantity(u) => v_finite(p.value.as_quantity(u)),
                Kind::Scalar => v_finite(p.value.as_scalar()),
                Kind::Impedance => p
                    .value
                    .as_impedance()
                    .and_then(|(r, x)| v_finite(Ok(r)).and(v_finite(Ok(x)))),
                Kind::Keyword(words) => match p.value.as_word() {
                    Ok(w) if words.contains(&w) => Ok(()),
                    _ => Err(ValueError::WrongKind {
                        expected: "keyword",
                        found: p.value.to_string(),
                    }),
                },
                Kind::Ref(classes) => match p.value.as_text() {
                    Ok(name) => {
                        match self.names.get(name) {
                            None => self.error(
                                at(o),
                                "DANGLING_REF",
                                format!("'{}' refers to missing object '{name}'", p.key),
                            ),
                            Some(t) if !classes.contains(&t.class) => self.error(
                                at(o),
                                "BAD_REFERENCE",
                                format!("'{}' refers to '{name}', a {}", p.key, t.class),
                            ),
                            Some(_) => {}
                        }
                        Ok(())
                    }
                    Err(e) => Err(e),
                },
            };
            if let Err(e) = checked {
                let msg = match spec.kind {
                    Kind::Keyword(words) => format!(
                        "'{}' must be one of {}, found {}",
                        p.key,
                        words.join(", "),
                        p.value
                    ),
                    _ => format!("'{}': {e}", p.key),
                };
                self.error(at(o), value_code(&e), msg);
            }
        }
        for spec in schema::properties(o.class).iter().filter(|s| s.required) {
            if o.get(spec.key).is_none() {
                self.error(
                    at(o),
                    "MISSING_PROPERTY",
                    format!("{} requires '{}'", o.class, spec.key),
                );
            }
        }
    }

    fn range(&mut self, o: &GridObject, key: &str, ok: impl Fn(f64) -> bool, rule: &str) {
        if let Some(x) = self.number(o, key) {
            if !ok(x) {
                self.error(at(o), "BAD_RANGE", format!("'{key}' = {x} must be {rule}"));
            }
        }
    }

    fn auction_cap(&self, market: Option<&Value>) -> f64 {
        market
            .and_then(|v| v.as_text().ok())
            .and_then(|m| self.names.get(m))
            .filter(|a| a.class == ObjectClass::Auction)
            .and_then(|a| self.number(a, "price_cap"))
            .unwrap_or(DEFAULT_PRICE_CAP)
    }

    fn ranges(&mut self, o: &GridObject) {
        use ObjectClass as C;
        let positive = |x: f64| x > 0.0;
        let nonneg = |x: f64| x >= 0.0;
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        match o.class {
            c if c.is_bus() => self.range(o, "nominal_voltage", positive, "positive"),
            C::Transformer => self.range(o, "ratio", positive, "positive"),
            C::House => {
                self.range(o, "thermal_capacitance", positive, "positive");
                self.range(o, "ua", positive, "positive");
                self.range(o, "deadband", positive, "positive");
                self.range(o, "cooling_capacity", nonneg, "non-negative");
                self.range(o, "hvac_power", nonneg, "non-negative");
            }
            C::Zipload | C::Waterheater => {
                self.range(o, "base_power", nonneg, "non-negative");
                self.range(o, "power_factor", unit, "in (0, 1]");
            }
            C::Solar => {
                self.range(o, "rating", positive, "positive");
                self.range(o, "efficiency", unit, "in (0, 1]");
            }
            C::Auction => {
                self.range(o, "price_cap", positive, "positive");
                let cap = self.number(o, "price_cap").unwrap_or(DEFAULT_PRICE_CAP);
                self.range(
                    o,
                    "initial_price",
                    |x| (0.0..=cap).contains(&x),
                    "within [0, price_cap]",
                );
                let period = self.number(o, "period").unwrap_or(DEFAULT_PERIOD as f64);
                let dt = self.model.clock.map(|c| c.timestep).filter(|d| *d > 0);
                let on_grid = period > 0.0
                    && period.fract() == 0.0
                    && dt.is_none_or(|d| (period as i64) % d == 0);
                if !on_grid {
                    self.error(
                        at(o),
                        "BAD_PERIOD",
                        format!("period {period} s is not a positive multiple of the timestep"),
                    );
                }
            }
            C::Controller => {
                self.range(o, "ramp", positive, "positive");
                let (lo, base, hi) = (
                    self.number(o, "min_setpoint"),
                    self.number(o, "base_setpoint"),
                    self.number(o, "max_setpoint"),
                );
                if let (Some(lo), Some(base), Some(hi)) = (lo, base, hi) {
                    if !(lo < base && base < hi) {
                        self.error(
                            at(o),
                            "BAD_RANGE",
                            format!(
                                "setpoints must satisfy min < base < max, found {lo}, {base}, {hi}"
                            ),
                        );
                    }
                }
            }
            C::GeneratorSeller => {
                let cap = self.auction_cap(o.get("market"));
                self.range(
                    o,
                    "price",
                    |x| (0.0..=cap).contains(&x),
                    "within [0, price_cap]",
                );
                self.range(o, "capacity", positive, "positive");
            }
            _ => {}
        }
    }

    fn controllers(&mut self) {
        let mut by_house: BTreeMap<&str, &str> = BTreeMap::new();
        for c in self.model.objects_of(ObjectClass::Controller) {
            let Some(house) = c.get("parent").and_then(|v| v.as_text().ok()) else {
                continue;
            };
            if let Some(first) = by_house.insert(house, &c.name) {
                self.error(
                    at(c),
                    "DUPLICATE_CONTROLLER",
                    format!("house '{house}' already has controller '{first}'"),
                );
            }
        }
    }

    fn topology(&mut self) {
        let (index, issues) = analyze_network(self.model);
        let by_pos: BTreeMap<Position, &GridObject> =
            self.model.objects.iter().map(|o| (o.position, o)).collect();
        for i in issues {
            let location = match by_pos.get(&i.position) {
                Some(o) if i.code != TopologyCode::NoSource => at(o),
                _ => Location::Document,
            };
            self.error(location, i.code.code(), i.message);
        }
        let Some(index) = index else { return };
        for (i, e) in index.edges.iter().enumerate() {
            let Some(o) = self.names.get(e.name.as_str()).copied() else {
                continue;
            };
            let (up, down) = (
                index.buses[e.from].nominal_voltage,
                index.buses[e.to].nominal_voltage,
            );
            let expected = up / e.ratio;
            if up > 0.0 && down > 0.0 && ((down - expected) / expected).abs() > 0.01 {
                self.warn(
                    at(o),
                    "NOMINAL_VOLTAGE_MISMATCH",
                    format!(
                        "'{}' joins {} V to {} V with ratio {}",
                        index.edges[i].name, up, down, e.ratio
                    ),
                );
            }
        }
    }

    /// How a run-time write to `target.property` is typed, or a diagnostic.
    fn write_kind(&self, target: &str, property: &str) -> Result<Settable, (&'static str, String)> {
        if self.attacks.contains(target) {
            return if property == ATTACK_SETTABLE.0 {
                Ok(ATTACK_SETTABLE.1)
            } else {
                Err((
                    "NOT_SETTABLE",
                    format!("attack '{target}' has no settable '{property}'"),
                ))
            };
        }
        match self.names.get(target) {
            None => Err(("DANGLING_REF", format!("unknown target '{target}'"))),
            Some(o) => schema::settable_property(o.class, property).ok_or_else(|| {
                (
                    "NOT_SETTABLE",
                    format!("{} '{target}' has no settable '{property}'", o.class),
                )
            }),
        }
    }

    fn schedules(&mut self) {
        for s in &self.model.schedules {
            let loc = block("schedule", &s.name);
            if s.repeat.is_some_and(|r| r <= 0) {
                self.error(
                    loc.clone(),
                    "BAD_SCHEDULE",
                    "repeat period must be positive",
                );
            }
            if s.entries.windows(2).any(|w| w[0].time > w[1].time) {
                self.error(loc.clone(), "BAD_SCHEDULE", "entries are not in time order");
            }
            for e in &s.entries {
                match self.write_kind(&e.target, &e.property) {
                    Err((code, msg)) => self.error(loc.clone(), code, msg),
                    Ok(kind) => {
                        if let Err(err) = kind.read(&e.value) {
                            self.error(
                                loc.clone(),
                                value_code(&err),
                                format!("{}.{} at {}: {err}", e.target, e.property, e.time),
                            );
                        }
                    }
                }
            }
        }
        if self.clock_ok() {
            let c = self.model.clock.unwrap_or_else(|| unreachable!());
            let (_, dropped) = build_event_list(&self.model.schedules, &[], c.start, c.stop);
            for d in dropped {
                self.warn(
                    block("schedule", &d.schedule),
                    "OUT_OF_WINDOW",
                    format!(
                        "{}.{} at {} is outside the run and is dropped",
                        d.target, d.property, d.time
                    ),
                );
            }
        }
    }

    fn attacks(&mut self) {
        for a in &self.model.attacks {
            let loc = block("attack", &a.name);
            if let Some(c) = self.model.clock {
                if a.start < c.start || a.end > c.stop {
                    self.error(
                        loc.clone(),
                        "ATTACK_WINDOW",
                        format!("window {} to {} is not inside the run", a.start, a.end),
                    );
                }
            }
            if a.lambda.is_some_and(|l| !(l >= 0.0 && l.is_finite())) {
                self.error(loc.clone(), "BAD_RANGE", "lambda must be non-negative");
            }
            if !(0.0..=1.0).contains(&a.fraction) {
                self.error(
                    loc.clone(),
                    "BAD_RANGE",
                    format!("fraction {} is outside [0, 1]", a.fraction),
                );
                continue;
            }
            match compile_attack(a, self.model, 0) {
                Ok(compiled) => {
                    if let Some(m) = &compiled.market {
                        let market = self.names[m.as_str()];
                        let topology = market
                            .get("topology")
                            .and_then(|v| v.as_word().ok())
                            .and_then(Topology::parse)
                            .unwrap_or(Topology::Direct);
                        if topology != Topology::Auxiliary {
                            self.error(
                                loc.clone(),
                                "ATTACK_TOPOLOGY",
                                format!("market attacks need auction '{m}' to use the AUXILIARY topology"),
                            );
                        }
                        if let Some(p) = a.price {
                            let cap = self.auction_cap(Some(&Value::word(m.clone())));
                            if !(0.0..=cap).contains(&p) {
                                self.error(
                                    loc.clone(),
                                    "BAD_RANGE",
                                    format!("price {p} is outside [0, {cap}]"),
                                );
                            }
                        }
                    }
                }
                Err(e) => {
                    let code = match &e {
                        AttackError::UnknownTarget { .. } => "DANGLING_REF",
                        AttackError::EmptyWindow(_) => "ATTACK_WINDOW",
                        AttackError::NotSwitchable { .. } => "NOT_SWITCHABLE",
                        AttackError::MissingParameter { .. } => "MISSING_PROPERTY",
                        AttackError::InvalidParameter { .. } => "BAD_VALUE",
                        AttackError::RequiresAuxiliary(_) => "ATTACK_TOPOLOGY",
                    };
                    self.error(loc.clone(), code, e.to_string());
                }
            }
        }
    }

    fn recorders(&mut self) {
        let dt = self.model.clock.map(|c| c.timestep).filter(|d| *d > 0);
        let mut files = BTreeSet::new();
        for r in &self.model.recorders {
            let loc = block("recorder", &r.name);
            let recordable: Option<&[&str]> = if r.target == FEEDER_TARGET {
                Some(FEEDER_RECORDABLE)
            } else if self.attacks.contains(r.target.as_str()) {
                Some(ATTACK_RECORDABLE)
            } else {
                self.names
                    .get(r.target.as_str())
                    .map(|o| schema::recordable(o.class))
            };
            match recordable {
                None => self.error(
                    loc.clone(),
                    "DANGLING_REF",
                    format!("unknown target '{}'", r.target),
                ),
                Some(props) => {
                    for p in r.properties.iter().filter(|p| !props.contains(&p.as_str())) {
                        self.error(
                            loc.clone(),
                            "NOT_RECORDABLE",
                            format!("'{}' has no recordable '{p}'", r.target),
                        );
                    }
                }
            }
            if r.properties.is_empty() {
                self.error(loc.clone(), "BAD_RECORDER", "no properties listed");
            }
            if r.interval <= 0 || dt.is_some_and(|d| r.interval % d != 0) {
                self.error(
                    loc.clone(),
                    "BAD_RECORDER",
                    format!(
                        "interval {} s is not a positive multiple of the timestep",
                        r.interval
                    ),
                );
            }
            let plain = !r.file.is_empty()
                && !r.file.contains(['/', '\\'])
                && r.file != "."
                && r.file != ".."
                && r.file != "events.csv"
                && r.file != "summary.txt";
            if !plain {
                self.error(
                    loc.clone(),
                    "BAD_RECORDER",
                    format!(
                        "file '{}' must be a plain file name other than events.csv and summary.txt",
                        r.file
                    ),
                );
            } else if !files.insert(r.file.as_str()) {
                self.error(
                    loc.clone(),
                    "BAD_RECORDER",
                    format!("file '{}' is written by another recorder", r.file),
                );
            }
        }
    }

    fn players(&mut self) {
        for p in &self.model.players {
            let loc = block("player", &p.name);
            match self.write_kind(&p.target, &p.property) {
                Err((code, msg)) => self.error(loc, code, msg),
                Ok(Settable::Quantity(_) | Settable::Scalar) => {}
                Ok(_) => self.error(
                    loc,
                    "NOT_SETTABLE",
                    format!(
                        "players can only drive numeric properties, not '{}'",
                        p.property
                    ),
                ),
            }
        }
    }
}

fn v_finite(r: Result<f64, ValueError>) -> Result<(), ValueError> {
    match r {
        Ok(x) if x.is_finite() => Ok(()),
        Ok(x) => Err(ValueError::WrongKind {
            expected: "finite number",
            found: x.to_string(),
        }),
        Err(e) => Err(e),
    }
}

/// Checks every model invariant and reports all violations. The output is a
/// pure function of the model, sorted by location, code and message.
pub fn validate(model: &ScenarioModel) -> ValidationReport {
    let mut names = BTreeMap::new();
    for o in &model.objects {
        names.entry(o.name.as_str()).or_insert(o);
    }
    let mut c = Checker {
        model,
        names,
        attacks: model.attacks.iter().map(|a| a.name.as_str()).collect(),
        report: ValidationReport::default(),
    };
    c.clock();
    c.names();
    for o in &model.objects {
        c.properties(o);
        c.ranges(o);
    }
    c.controllers();
    c.topology();
    c.schedules();
    c.attacks();
    c.recorders();
    c.players();
    let mut report = c.report;
    report.errors.sort();
    report.errors.dedup();
    report.warnings.sort();
    report.warnings.dedup();
    report
}

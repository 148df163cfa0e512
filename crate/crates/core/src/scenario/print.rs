use std::fmt::Write;

use super::model::{ScenarioModel, Value};

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// A name as a bare word when the lexer would read it back as one.
fn name(s: &str) -> String {
    if is_ident(s) {
        s.to_string()
    } else {
        Value::Text(s.to_string()).to_string()
    }
}

/// Renders a model in the scenario language. Parsing the output yields an
/// equal model (up to source positions).
pub fn pretty_print(model: &ScenarioModel) -> String {
    let mut out = String::new();
    // Writing to a String cannot fail.
    let _ = write_model(&mut out, model);
    out
}

fn write_model(out: &mut String, model: &ScenarioModel) -> std::fmt::Result {
    if let Some(c) = &model.clock {
        writeln!(out, "clock {{")?;
        writeln!(out, "    start '{}';", c.start)?;
        writeln!(out, "    stop '{}';", c.stop)?;
        writeln!(out, "    timestep {} s;", c.timestep)?;
        writeln!(out, "}}\n")?;
    }
    if let Some(w) = &model.weather_source {
        writeln!(
            out,
            "weather {{\n    file {};\n}}\n",
            Value::Text(w.clone())
        )?;
    }
    for o in &model.objects {
        writeln!(out, "object {} {{", o.class)?;
        writeln!(out, "    name {};", name(&o.name))?;
        for p in &o.properties {
            writeln!(out, "    {} {};", p.key, p.value)?;
        }
        writeln!(out, "}}\n")?;
    }
    for s in &model.schedules {
        writeln!(out, "schedule {} {{", s.name)?;
        if let Some(r) = s.repeat {
            writeln!(out, "    repeat {r} s;")?;
        }
        for e in &s.entries {
            writeln!(
                out,
                "    at '{}' {} {} {};",
                e.time, e.target, e.property, e.value
            )?;
        }
        writeln!(out, "}}\n")?;
    }
    for a in &model.attacks {
        writeln!(out, "attack {} {{", a.name)?;
        writeln!(out, "    kind {};", a.kind.keyword())?;
        writeln!(out, "    start '{}';", a.start)?;
        writeln!(out, "    end '{}';", a.end)?;
        writeln!(out, "    fraction {};", a.fraction)?;
        if let Some(p) = a.price {
            writeln!(out, "    price {p} $/kWh;")?;
        }
        if let Some(l) = a.lambda {
            writeln!(out, "    lambda {l};")?;
        }
        if !a.lines.is_empty() {
            writeln!(out, "    lines {};", a.lines.join(","))?;
        }
        if let Some(s) = a.status {
            writeln!(out, "    status {};", s.keyword())?;
        }
        if let Some(s) = a.seed {
            writeln!(out, "    seed {s};")?;
        }
        if let Some(m) = &a.market {
            writeln!(out, "    market {m};")?;
        }
        writeln!(out, "}}\n")?;
    }
    for r in &model.recorders {
        writeln!(out, "recorder {} {{", r.name)?;
        writeln!(out, "    target {};", r.target)?;
        writeln!(out, "    property {};", r.properties.join(","))?;
        writeln!(out, "    interval {} s;", r.interval)?;
        writeln!(out, "    file {};", Value::Text(r.file.clone()))?;
        writeln!(out, "}}\n")?;
    }
    for p in &model.players {
        writeln!(out, "player {} {{", p.name)?;
        writeln!(out, "    target {};", name(&p.target))?;
        writeln!(out, "    property {};", name(&p.property))?;
        writeln!(out, "    file {};", Value::Text(p.file.clone()))?;
        writeln!(out, "}}\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn round_trip_all_blocks() {
        let text = r#"
            clock { start '2019-07-01 00:00:00'; stop '2019-07-01 06:00:00'; timestep 60 s; }
            weather { file "w.csv"; }
            object node { name n1; bustype SWING; nominal_voltage 7.2 kV; }
            object overhead_line { name l1; from n1; to n2; impedance 0.3-0.1j Ohm; status OPEN; }
            object house { name 'odd name'; note 'say "hi"'; }
            schedule s { repeat 1 h; at '2019-07-01 01:00:00' l1 status CLOSED; }
            attack a { kind LINE_STATUS; start '2019-07-01 01:00:00'; end '2019-07-01 02:00:00'; lines l1,l2; status OPEN; seed 3; }
            attack b { kind BUYER_BID_SCALE; start '2019-07-01 01:00:00'; end '2019-07-01 02:00:00'; lambda 0.1; fraction 0.5; market m; }
            recorder r { target feeder; property total_load,losses; interval 5 min; file "out.csv"; }
            player p { target zl1; property base_power; file "p.csv"; }
        "#;
        let m = parse_scenario(text).unwrap();
        let printed = pretty_print(&m);
        let again = parse_scenario(&printed).unwrap();
        assert_eq!(again.clock, m.clock);
        assert_eq!(again.weather_source, m.weather_source);
        assert_eq!(again.schedules, m.schedules);
        assert_eq!(again.attacks, m.attacks);
        assert_eq!(again.recorders, m.recorders);
        assert_eq!(again.players, m.players);
        assert_eq!(again.objects.len(), m.objects.len());
        for (a, b) in again.objects.iter().zip(&m.objects) {
            assert_eq!(
                (a.class, &a.name, &a.properties),
                (b.class, &b.name, &b.properties)
            );
        }
    }
}

//! Seeded generator for residential test feeders.
//!
//! Layout: a SWING node feeds a backbone of underground lines; each backbone
//! node has a center-tap transformer serving up to five houses, each on its
//! own triplex line and meter. Every house gets a zipload, a water heater and
//! a transactive controller bidding into one auxiliary-topology auction with
//! 50 flat-price sellers.
//!
//! Parameter ranges (uniform):
//!
//! | parameter | range |
//! |---|---|
//! | UA | 600–900 Btu/(h·degF) |
//! | thermal capacitance | 2500–3500 Btu/degF |
//! | internal gains | 1500–3000 Btu/h |
//! | HVAC electric power | 3–4 kW |
//! | COP | 3–3.5 (capacity = kW·COP·3412 Btu/h) |
//! | base setpoint | 72–76 degF; comfort range base−3 to base+5 |
//! | ramp | 1.5–2.5 |
//! | zipload | 0.2–0.4 kW at power factor 0.95 |
//! | water heater | 0.1–0.3 kW |
//!
//! The seller fleet is sized to 1.15 times the appliance load, so that
//! price-responsive cooling competes for the remaining supply.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HOUSES_PER_TRANSFORMER: usize = 5;
pub const SELLERS: usize = 50;
pub const SELLER_PRICE: f64 = 0.10;
/// Seller fleet capacity as a multiple of total appliance load.
pub const FLEET_MARGIN: f64 = 1.15;
const BTU_PER_KWH: f64 = 3412.0;

struct House {
    ua: f64,
    capacitance: f64,
    gains: f64,
    hvac_kw: f64,
    capacity: f64,
    base: f64,
    air: f64,
    ramp: f64,
    zip: f64,
    water: f64,
}

fn draw(rng: &mut ChaCha8Rng) -> House {
    let hvac_kw = rng.gen_range(3.0..4.0);
    let cop = rng.gen_range(3.0..3.5);
    let base: f64 = rng.gen_range(72.0..76.0);
    House {
        ua: rng.gen_range(600.0..900.0),
        capacitance: rng.gen_range(2500.0..3500.0),
        gains: rng.gen_range(1500.0..3000.0),
        hvac_kw,
        capacity: hvac_kw * cop * BTU_PER_KWH,
        base,
        air: base + rng.gen_range(-1.0..1.0),
        ramp: rng.gen_range(1.5..2.5),
        zip: rng.gen_range(0.2..0.4),
        water: rng.gen_range(0.1..0.3),
    }
}

/// A one-day scenario with `houses` houses (at least one), deterministic in
/// `seed`.
pub fn generate_feeder(houses: usize, seed: u64) -> String {
    let houses = houses.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<House> = (0..houses).map(|_| draw(&mut rng)).collect();
    let backbone = houses.div_ceil(HOUSES_PER_TRANSFORMER);

    let mut out = String::new();
    // Writing to a String cannot fail.
    let _ = write_feeder(&mut out, &params, backbone, houses, seed);
    out
}

fn write_feeder(
    out: &mut String,
    params: &[House],
    backbone: usize,
    houses: usize,
    seed: u64,
) -> std::fmt::Result {
    writeln!(out, "// Generated feeder: {houses} houses, seed {seed}.")?;
    writeln!(out, "clock {{")?;
    writeln!(out, "    start '2019-07-01 00:00:00';")?;
    writeln!(out, "    stop '2019-07-02 00:00:00';")?;
    writeln!(out, "    timestep 60 s;")?;
    writeln!(out, "}}\n")?;

    writeln!(
        out,
        "object node {{ name n0; bustype SWING; nominal_voltage 7200 V; }}"
    )?;
    for i in 1..=backbone {
        writeln!(out, "object node {{ name n{i}; nominal_voltage 7200 V; }}")?;
        writeln!(
            out,
            "object underground_line {{ name ul{i}; from n{}; to n{i}; impedance 0.05+0.03j Ohm; }}",
            i - 1
        )?;
        writeln!(
            out,
            "object transformer {{ name xf{i}; from n{i}; to tn{i}; ratio 30; impedance 0.01+0.02j Ohm; }}"
        )?;
        writeln!(
            out,
            "object triplex_node {{ name tn{i}; nominal_voltage 240 V; }}"
        )?;
    }
    writeln!(out)?;

    for (j, h) in params.iter().enumerate() {
        let j = j + 1;
        let xf = (j - 1) / HOUSES_PER_TRANSFORMER + 1;
        writeln!(
            out,
            "object overhead_line {{ name tl{j}; from tn{xf}; to tm{j}; impedance 0.002+0.001j Ohm; }}"
        )?;
        writeln!(
            out,
            "object triplex_meter {{ name tm{j}; nominal_voltage 240 V; }}"
        )?;
        writeln!(out, "object house {{")?;
        writeln!(out, "    name h{j};")?;
        writeln!(out, "    parent tm{j};")?;
        writeln!(out, "    air_temperature {:.2} degF;", h.air)?;
        writeln!(out, "    cooling_setpoint {:.2} degF;", h.base)?;
        writeln!(out, "    deadband 2 degF;")?;
        writeln!(out, "    thermal_capacitance {:.1};", h.capacitance)?;
        writeln!(out, "    ua {:.1};", h.ua)?;
        writeln!(out, "    internal_gains {:.1};", h.gains)?;
        writeln!(out, "    cooling_capacity {:.1};", h.capacity)?;
        writeln!(out, "    hvac_power {:.3} kW;", h.hvac_kw)?;
        writeln!(out, "}}")?;
        writeln!(
            out,
            "object zipload {{ name z{j}; parent h{j}; base_power {:.3} kW; power_factor 0.95; }}",
            h.zip
        )?;
        writeln!(
            out,
            "object waterheater {{ name w{j}; parent h{j}; base_power {:.3} kW; }}",
            h.water
        )?;
        writeln!(out, "object controller {{")?;
        writeln!(out, "    name c{j};")?;
        writeln!(out, "    parent h{j};")?;
        writeln!(out, "    market mkt;")?;
        writeln!(out, "    base_setpoint {:.2} degF;", h.base)?;
        writeln!(out, "    min_setpoint {:.2} degF;", h.base - 3.0)?;
        writeln!(out, "    max_setpoint {:.2} degF;", h.base + 5.0)?;
        writeln!(out, "    ramp {:.3};", h.ramp)?;
        writeln!(out, "}}\n")?;
    }

    // Round appliance loads as printed so the fleet matches the document.
    let appliance_kw: f64 = params.iter().map(|h| round3(h.zip) + round3(h.water)).sum();
    let per_seller = FLEET_MARGIN * appliance_kw / SELLERS as f64;
    writeln!(
        out,
        "object auction {{ name mkt; period 300 s; price_cap 0.63 $/kWh; topology AUXILIARY; }}"
    )?;
    for g in 1..=SELLERS {
        writeln!(
            out,
            "object generator_seller {{ name g{g}; market mkt; price {SELLER_PRICE} $/kWh; capacity {per_seller:.4} kW; }}"
        )?;
    }
    writeln!(out)?;
    writeln!(
        out,
        "recorder feeder_load {{ target feeder; property total_load,hvac_load,losses,source_power; interval 60 s; file \"feeder.csv\"; }}"
    )?;
    writeln!(
        out,
        "recorder market {{ target mkt; property clearing_price,main_clearing_price,cleared_quantity,p_avg,p_std; interval 300 s; file \"market.csv\"; }}"
    )?;
    Ok(())
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_scenario, validate, ObjectClass};

    #[test]
    fn single_house_validates() {
        let m = parse_scenario(&generate_feeder(1, 0)).unwrap();
        let r = validate(&m);
        assert!(r.is_runnable(), "{}", r.render());
        assert!(r.warnings.is_empty(), "{}", r.render());
        assert_eq!(m.objects_of(ObjectClass::House).count(), 1);
    }

    #[test]
    fn paper_scale_and_determinism() {
        let doc = generate_feeder(109, 7);
        assert_eq!(doc, generate_feeder(109, 7));
        assert_ne!(doc, generate_feeder(109, 8));
        let m = parse_scenario(&doc).unwrap();
        assert_eq!(m.objects_of(ObjectClass::House).count(), 109);
        assert_eq!(m.objects_of(ObjectClass::GeneratorSeller).count(), SELLERS);
        assert!(validate(&m).is_runnable());
    }
}

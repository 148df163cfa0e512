//! House thermal dynamics, appliance schedules, weather and rooftop solar.
//!
//! Houses use a single-mass equivalent thermal parameter model. Heat flows
//! are in Btu/h, capacitance in Btu/degF and temperatures in degF.

use crate::recorder::TimeSeries;
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HvacMode {
    Off,
    Cool,
}

impl HvacMode {
    pub fn parse(word: &str) -> Option<HvacMode> {
        match word.to_ascii_uppercase().as_str() {
            "OFF" => Some(HvacMode::Off),
            "COOL" => Some(HvacMode::Cool),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            HvacMode::Off => "OFF",
            HvacMode::Cool => "COOL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HouseState {
    pub air_temperature: f64,
    pub outdoor_temperature: f64,
    pub thermal_capacitance: f64,
    pub ua: f64,
    pub internal_gains: f64,
    pub mode: HvacMode,
    /// Electric power drawn while cooling, kW.
    pub hvac_rated_power: f64,
    /// Heat removed while cooling, Btu/h.
    pub cooling_capacity: f64,
    pub cooling_setpoint: f64,
    pub deadband: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherSample {
    pub time: Timestamp,
    pub temperature: f64,
    /// In `[0, 1]`.
    pub irradiance: f64,
}

/// Advances a house by `dt` seconds with explicit Euler, then applies the
/// thermostat.
pub fn step_house(h: &HouseState, w: &WeatherSample, dt: i64) -> HouseState {
    let hours = dt as f64 / 3600.0;
    let q_hvac = match h.mode {
        HvacMode::Cool => h.cooling_capacity,
        HvacMode::Off => 0.0,
    };
    let flow = h.ua * (w.temperature - h.air_temperature) + h.internal_gains - q_hvac;
    let mut next = h.clone();
    next.air_temperature = h.air_temperature + hours / h.thermal_capacitance * flow;
    next.outdoor_temperature = w.temperature;
    let half = h.deadband / 2.0;
    next.mode = match h.mode {
        HvacMode::Off if next.air_temperature > h.cooling_setpoint + half => HvacMode::Cool,
        HvacMode::Cool if next.air_temperature < h.cooling_setpoint - half => HvacMode::Off,
        m => m,
    };
    next
}

/// kW drawn by the HVAC unit.
pub fn hvac_power(h: &HouseState) -> f64 {
    match h.mode {
        HvacMode::Cool => h.hvac_rated_power,
        HvacMode::Off => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarPanel {
    /// kW
    pub rating: f64,
    pub efficiency: f64,
}

/// kW generated; the caller injects it as negative load.
pub fn solar_output(p: &SolarPanel, w: &WeatherSample) -> f64 {
    p.rating * w.irradiance.clamp(0.0, 1.0) * p.efficiency
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error("player '{series}' has no sample at or before {time}")]
    MissingPlayerData { series: String, time: Timestamp },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadProfile {
    /// kW
    Constant(f64),
    Player(TimeSeries),
}

/// kW drawn by a zipload or water heater at `t` (step-hold).
pub fn scheduled_load(profile: &LoadProfile, t: Timestamp) -> Result<f64, LoadError> {
    match profile {
        LoadProfile::Constant(p) => Ok(*p),
        LoadProfile::Player(series) => {
            series
                .value_at(t)
                .ok_or_else(|| LoadError::MissingPlayerData {
                    series: series.name.clone(),
                    time: t,
                })
        }
    }
}

/// Outdoor conditions over a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Weather {
    /// A smooth summer day: 73–93 degF peaking at 15:00, daylight 06:00–20:00.
    Synthetic,
    /// Step-hold lookup into strictly increasing samples.
    Table(Vec<WeatherSample>),
}

impl Weather {
    pub fn at(&self, t: Timestamp) -> Option<WeatherSample> {
        match self {
            Weather::Synthetic => Some(synthetic_weather(t)),
            Weather::Table(rows) => {
                let idx = rows.partition_point(|s| s.time <= t);
                idx.checked_sub(1)
                    .map(|i| WeatherSample { time: t, ..rows[i] })
            }
        }
    }

    /// Whether lookups at `t0` and every later instant succeed.
    pub fn covers(&self, t0: Timestamp) -> bool {
        self.at(t0).is_some()
    }
}

pub fn synthetic_weather(t: Timestamp) -> WeatherSample {
    use std::f64::consts::PI;
    let h = t.hour_of_day();
    let temperature = 83.0 + 10.0 * (2.0 * PI * (h - 15.0) / 24.0).cos();
    let irradiance = if (6.0..=20.0).contains(&h) {
        (PI * (h - 6.0) / 14.0).sin().max(0.0)
    } else {
        0.0
    };
    WeatherSample {
        time: t,
        temperature,
        irradiance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn house() -> HouseState {
        HouseState {
            air_temperature: 75.0,
            outdoor_temperature: 75.0,
            thermal_capacitance: 3000.0,
            ua: 700.0,
            internal_gains: 0.0,
            mode: HvacMode::Off,
            hvac_rated_power: 4.0,
            cooling_capacity: 40_000.0,
            cooling_setpoint: 75.0,
            deadband: 2.0,
        }
    }

    fn ts(s: &str) -> Timestamp {
        Timestamp::parse(s).unwrap()
    }

    fn weather(temp: f64) -> WeatherSample {
        WeatherSample {
            time: ts("2019-07-01 12:00:00"),
            temperature: temp,
            irradiance: 0.0,
        }
    }

    #[test]
    fn equilibrium_is_fixed() {
        let h = house();
        let n = step_house(&h, &weather(75.0), 60);
        assert_eq!(n.air_temperature, 75.0);
        assert_eq!(n.mode, HvacMode::Off);
    }

    #[test]
    fn thermostat_follows_setpoint_changes() {
        let mut h = house();
        h.internal_gains = 2000.0;
        h.air_temperature = 77.0;
        h.mode = HvacMode::Cool;
        h.cooling_setpoint = 70.0;
        let w = weather(90.0);
        // High price pushes the setpoint up: the unit turns off.
        h.cooling_setpoint = 80.0;
        let h1 = step_house(&h, &w, 60);
        assert_eq!(h1.mode, HvacMode::Off);
        // Back to 70: it turns on again.
        let mut h2 = h1.clone();
        h2.cooling_setpoint = 70.0;
        let h3 = step_house(&h2, &w, 60);
        assert_eq!(h3.mode, HvacMode::Cool);
    }

    #[test]
    fn no_chatter_inside_deadband() {
        let mut h = house();
        h.air_temperature = 75.5;
        let w = weather(75.5);
        for _ in 0..100 {
            h = step_house(&h, &w, 60);
            assert_eq!(h.mode, HvacMode::Off);
        }
    }

    #[test]
    fn cooling_lowers_temperature() {
        let mut h = house();
        h.mode = HvacMode::Cool;
        h.air_temperature = 78.0;
        h.cooling_setpoint = 60.0;
        h.internal_gains = 2000.0;
        let w = weather(95.0);
        let mut prev = h.air_temperature;
        for _ in 0..30 {
            h = step_house(&h, &w, 60);
            assert!(h.air_temperature < prev);
            prev = h.air_temperature;
        }
    }

    #[test]
    fn hvac_power_by_mode() {
        let mut h = house();
        assert_eq!(hvac_power(&h), 0.0);
        h.mode = HvacMode::Cool;
        assert_eq!(hvac_power(&h), 4.0);
    }

    #[test]
    fn solar() {
        let mut w = weather(80.0);
        let p = SolarPanel {
            rating: 5.0,
            efficiency: 1.0,
        };
        assert_eq!(solar_output(&p, &w), 0.0);
        w.irradiance = 1.0;
        assert_eq!(solar_output(&p, &w), 5.0);
        w.irradiance = 0.8;
        let p = SolarPanel {
            rating: 5.0,
            efficiency: 0.9,
        };
        assert!((solar_output(&p, &w) - 3.6).abs() < 1e-12);
    }

    #[test]
    fn scheduled_loads() {
        let c = LoadProfile::Constant(0.5);
        assert_eq!(scheduled_load(&c, ts("2019-07-01 03:00:00")).unwrap(), 0.5);
        let series = TimeSeries::new(
            "zl",
            vec![
                (ts("2019-07-01 10:00:00"), 1.0),
                (ts("2019-07-01 11:00:00"), 2.0),
            ],
        )
        .unwrap();
        let p = LoadProfile::Player(series);
        assert_eq!(scheduled_load(&p, ts("2019-07-01 10:30:00")).unwrap(), 1.0);
        assert_eq!(scheduled_load(&p, ts("2019-07-01 11:00:00")).unwrap(), 2.0);
        assert!(matches!(
            scheduled_load(&p, ts("2019-07-01 09:00:00")),
            Err(LoadError::MissingPlayerData { .. })
        ));
    }

    #[test]
    fn synthetic_day() {
        let peak = synthetic_weather(ts("2019-07-01 15:00:00"));
        assert!((peak.temperature - 93.0).abs() < 1e-12);
        let night = synthetic_weather(ts("2019-07-01 03:00:00"));
        assert!((night.temperature - 73.0).abs() < 1e-12);
        assert_eq!(night.irradiance, 0.0);
        let noon = synthetic_weather(ts("2019-07-01 13:00:00"));
        assert!((noon.irradiance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_weather_is_step_hold() {
        let rows = vec![
            WeatherSample {
                time: ts("2019-07-01 00:00:00"),
                temperature: 70.0,
                irradiance: 0.0,
            },
            WeatherSample {
                time: ts("2019-07-01 01:00:00"),
                temperature: 72.0,
                irradiance: 0.1,
            },
        ];
        let w = Weather::Table(rows);
        assert_eq!(w.at(ts("2019-07-01 00:59:00")).unwrap().temperature, 70.0);
        assert_eq!(w.at(ts("2019-07-01 05:00:00")).unwrap().temperature, 72.0);
        assert!(w.at(ts("2019-06-30 23:00:00")).is_none());
    }
}

//! Player and weather input, recorder sampling and result serialization.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::kernel::{SimState, SimulationResult, StateError};
use crate::loads::WeatherSample;
use crate::time::Timestamp;

/// Reserved recorder target for feeder-wide totals.
pub const FEEDER_TARGET: &str = "feeder";

/// Timestamped values with step-hold lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub name: String,
    pub rows: Vec<(Timestamp, f64)>,
}

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}: expected header '{expected}'")]
    BadHeader {
        file: String,
        expected: &'static str,
    },
    #[error("{file}:{line}: malformed row: {reason}")]
    MalformedRow {
        file: String,
        line: u64,
        reason: String,
    },
    #[error("{file}:{line}: time does not increase")]
    NonMonotonicTime { file: String, line: u64 },
}

impl TimeSeries {
    /// Fails with the index of the first row whose time does not increase.
    pub fn new(name: impl Into<String>, rows: Vec<(Timestamp, f64)>) -> Result<Self, usize> {
        if let Some(i) = rows.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(i + 1);
        }
        Ok(TimeSeries {
            name: name.into(),
            rows,
        })
    }

    /// Value of the last sample at or before `t`.
    pub fn value_at(&self, t: Timestamp) -> Option<f64> {
        let idx = self.rows.partition_point(|(time, _)| *time <= t);
        idx.checked_sub(1).map(|i| self.rows[i].1)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn read_rows(
    text: &str,
    file: &str,
    header: &'static str,
) -> Result<Vec<(u64, Vec<String>)>, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let expected: Vec<&str> = header.split(',').collect();
    let found = reader.headers().map_err(|e| InputError::MalformedRow {
        file: file.to_string(),
        line: 1,
        reason: e.to_string(),
    })?;
    if found.iter().collect::<Vec<_>>() != expected {
        return Err(InputError::BadHeader {
            file: file.to_string(),
            expected: header,
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| InputError::MalformedRow {
            file: file.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        out.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(
    row: &[String],
    i: usize,
    file: &str,
    line: u64,
    what: &str,
) -> Result<T, InputError> {
    row.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| InputError::MalformedRow {
            file: file.to_string(),
            line,
            reason: format!("bad {what} '{}'", row.get(i).map_or("", |s| s.as_str())),
        })
}

/// Parses a `time,value` player document.
pub fn parse_player(text: &str, name: &str) -> Result<TimeSeries, InputError> {
    let mut rows: Vec<(Timestamp, f64)> = Vec::new();
    for (line, row) in read_rows(text, name, "time,value")? {
        let t: Timestamp = field(&row, 0, name, line, "time")?;
        let v: f64 = field(&row, 1, name, line, "value")?;
        if !v.is_finite() {
            return Err(InputError::MalformedRow {
                file: name.to_string(),
                line,
                reason: "value is not finite".into(),
            });
        }
        if rows.last().is_some_and(|(prev, _)| t <= *prev) {
            return Err(InputError::NonMonotonicTime {
                file: name.to_string(),
                line,
            });
        }
        rows.push((t, v));
    }
    Ok(TimeSeries {
        name: name.to_string(),
        rows,
    })
}

fn read_text(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_player(path: &Path) -> Result<TimeSeries, InputError> {
    parse_player(&read_text(path)?, &path.display().to_string())
}

/// Parses a `time,temperature_degF,irradiance_fraction` weather document.
pub fn parse_weather(text: &str, name: &str) -> Result<Vec<WeatherSample>, InputError> {
    let mut out: Vec<WeatherSample> = Vec::new();
    for (line, row) in read_rows(text, name, "time,temperature_degF,irradiance_fraction")? {
        let time: Timestamp = field(&row, 0, name, line, "time")?;
        let temperature: f64 = field(&row, 1, name, line, "temperature")?;
        let irradiance: f64 = field(&row, 2, name, line, "irradiance")?;
        if !temperature.is_finite() || !(0.0..=1.0).contains(&irradiance) {
            return Err(InputError::MalformedRow {
                file: name.to_string(),
                line,
                reason: "temperature must be finite and irradiance within [0, 1]".into(),
            });
        }
        if out.last().is_some_and(|s| time <= s.time) {
            return Err(InputError::NonMonotonicTime {
                file: name.to_string(),
                line,
            });
        }
        out.push(WeatherSample {
            time,
            temperature,
            irradiance,
        });
    }
    Ok(out)
}

pub fn read_weather(path: &Path) -> Result<Vec<WeatherSample>, InputError> {
    parse_weather(&read_text(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecorderConfig {
    pub name: String,
    pub target: String,
    pub properties: Vec<String>,
    /// Seconds; a positive multiple of the timestep.
    pub interval: i64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerConfig {
    pub name: String,
    pub target: String,
    pub property: String,
    pub file: String,
}

pub const FLAG_DEENERGIZED: &str = "DEENERGIZED";

#[derive(Debug, Clone, PartialEq)]
pub struct RecorderRow {
    pub time: Timestamp,
    pub values: Vec<f64>,
    /// Empty, or [`FLAG_DEENERGIZED`].
    pub flags: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecorderTable {
    pub config: RecorderConfig,
    pub rows: Vec<RecorderRow>,
}

impl RecorderTable {
    pub fn column(&self, property: &str) -> Option<Vec<f64>> {
        let i = self.config.properties.iter().position(|p| p == property)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }
}

/// Samples the configured properties; de-energized targets read as zero.
pub fn record(
    cfg: &RecorderConfig,
    t: Timestamp,
    state: &SimState,
) -> Result<RecorderRow, StateError> {
    let mut values = Vec::with_capacity(cfg.properties.len());
    let mut dead = false;
    for p in &cfg.properties {
        let r = state.read_property(&cfg.target, p)?;
        dead |= r.deenergized;
        values.push(if r.deenergized { 0.0 } else { r.value });
    }
    Ok(RecorderRow {
        time: t,
        values,
        flags: if dead {
            FLAG_DEENERGIZED.to_string()
        } else {
            String::new()
        },
    })
}

/// Fixed-point text with six significant digits. Rounding is done by the
/// standard library's exact float formatting, so output is platform stable.
pub fn format_value(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let out = if exp > 5 {
        let negative = mantissa.starts_with('-');
        let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
        let zeros = "0".repeat((exp - 5) as usize);
        format!("{}{digits}{zeros}", if negative { "-" } else { "" })
    } else {
        let decimals = (5 - exp).clamp(0, 12) as usize;
        format!("{x:.decimals$}")
    };
    if out.starts_with('-') && out[1..].chars().all(|c| c == '0' || c == '.') {
        out[1..].to_string()
    } else {
        out
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct IoFailure {
    pub path: PathBuf,
    pub source: io::Error,
}

fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), IoFailure> {
    let fail = |source: io::Error| IoFailure {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| fail(e.into()))?;
    w.write_record(header).map_err(|e| fail(e.into()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| fail(e.into()))?;
    }
    w.flush().map_err(fail)
}

/// Lines of the run summary, `key = value`.
pub fn summary_lines(result: &SimulationResult) -> Vec<(String, String)> {
    let m = &result.meta;
    let mut out: Vec<(String, String)> = vec![
        ("start".into(), m.start.to_string()),
        ("stop".into(), m.stop.to_string()),
        ("timestep_s".into(), m.timestep.to_string()),
        ("steps".into(), m.steps.to_string()),
        ("complete".into(), m.complete.to_string()),
    ];
    if let Some(f) = &m.failure {
        out.push(("failure".into(), f.clone()));
    }
    out.push(("seed".into(), m.seed.to_string()));
    out.push((
        "topology".into(),
        m.topology
            .map_or("none".to_string(), |t| t.keyword().to_string()),
    ));
    out.push(("attacks".into(), m.attacks.join(", ")));
    out.push(("events_applied".into(), result.audit.len().to_string()));
    out.push(("powerflow_solves".into(), m.powerflow_solves.to_string()));
    out.push((
        "powerflow_max_iterations".into(),
        m.powerflow_max_iterations.to_string(),
    ));
    let mean = if m.powerflow_solves > 0 {
        m.powerflow_total_iterations as f64 / m.powerflow_solves as f64
    } else {
        0.0
    };
    out.push(("powerflow_mean_iterations".into(), format_value(mean)));
    out.push((
        "max_balance_residual_pu".into(),
        format!("{:.3e}", m.max_balance_residual_pu),
    ));
    out.push(("peak_total_load_kw".into(), format_value(m.peak_total_load)));
    if let Some(p) = m.max_clearing_price {
        out.push(("max_clearing_price".into(), format_value(p)));
    }
    if let Some(p) = m.max_main_clearing_price {
        out.push(("max_main_clearing_price".into(), format_value(p)));
    }
    out
}

/// Writes one CSV per recorder, `events.csv` and `summary.txt` into `out_dir`
/// and returns the written paths in sorted order.
pub fn write_results(result: &SimulationResult, out_dir: &Path) -> Result<Vec<PathBuf>, IoFailure> {
    fs::create_dir_all(out_dir).map_err(|source| IoFailure {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut manifest = Vec::new();

    for table in result.tables.values() {
        let path = out_dir.join(&table.config.file);
        let mut header = vec!["time".to_string()];
        header.extend(table.config.properties.iter().cloned());
        header.push("flags".into());
        write_csv(
            &path,
            &header,
            table.rows.iter().map(|r| {
                let mut row = vec![r.time.to_string()];
                row.extend(r.values.iter().map(|v| format_value(*v)));
                row.push(r.flags.clone());
                row
            }),
        )?;
        manifest.push(path);
    }

    let events = out_dir.join("events.csv");
    let header: Vec<String> = [
        "time",
        "target",
        "property",
        "old_value",
        "new_value",
        "origin",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    write_csv(
        &events,
        &header,
        result.audit.iter().map(|a| {
            vec![
                a.time.to_string(),
                a.target.clone(),
                a.property.clone(),
                a.old_value.clone(),
                a.new_value.clone(),
                a.origin.keyword().to_string(),
            ]
        }),
    )?;
    manifest.push(events);

    let summary = out_dir.join("summary.txt");
    let text: String = summary_lines(result)
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect();
    fs::write(&summary, text).map_err(|source| IoFailure {
        path: summary.clone(),
        source,
    })?;
    manifest.push(summary);

    manifest.sort();
    Ok(manifest)
}

/// Recorder tables keyed by recorder name.
pub type RecorderTables = BTreeMap<String, RecorderTable>;

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> Timestamp {
        Timestamp::parse(s).unwrap()
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_value(0.0), "0.00000");
        assert_eq!(format_value(-0.0), "0.00000");
        assert_eq!(format_value(0.63), "0.630000");
        assert_eq!(format_value(7200.0), "7200.00");
        assert_eq!(format_value(123456.7), "123457");
        assert_eq!(format_value(1234567.0), "1234570");
        assert_eq!(format_value(-2.5), "-2.50000");
        assert_eq!(format_value(9.999995), "10.0000");
        assert_eq!(format_value(1e-9), "0.000000001000");
        assert_eq!(format_value(-1e-15), "0.000000000000");
    }

    #[test]
    fn player_parsing() {
        let s = parse_player("time,value\n", "p").unwrap();
        assert!(s.is_empty());
        let s = parse_player(
            "time,value\n2019-07-01 10:00:00,1.0\n2019-07-01 11:00:00,2.0\n",
            "p",
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.value_at(ts("2019-07-01 10:30:00")), Some(1.0));
        assert_eq!(s.value_at(ts("2019-07-01 09:59:59")), None);
    }

    #[test]
    fn player_errors() {
        let e = parse_player(
            "time,value\n2019-07-01 11:00:00,1\n2019-07-01 10:00:00,2\n",
            "p",
        )
        .unwrap_err();
        assert!(matches!(e, InputError::NonMonotonicTime { line: 3, .. }));
        let e = parse_player("time,value\n2019-07-01 11:00:00,abc\n", "p").unwrap_err();
        assert!(matches!(e, InputError::MalformedRow { line: 2, .. }));
        let e = parse_player("t,v\n", "p").unwrap_err();
        assert!(matches!(e, InputError::BadHeader { .. }));
        let e = parse_player("time,value\n2019-07-01 11:00:00\n", "p").unwrap_err();
        assert!(matches!(e, InputError::MalformedRow { .. }));
    }

    #[test]
    fn weather_parsing() {
        let w = parse_weather(
            "time,temperature_degF,irradiance_fraction\n2019-07-01 00:00:00,75,0\n2019-07-01 12:00:00,92,0.8\n",
            "w",
        )
        .unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].irradiance, 0.8);
        assert!(parse_weather(
            "time,temperature_degF,irradiance_fraction\n2019-07-01 00:00:00,75,1.5\n",
            "w"
        )
        .is_err());
    }

    #[test]
    fn series_rejects_unsorted() {
        let t = ts("2019-07-01 00:00:00");
        assert_eq!(TimeSeries::new("x", vec![(t, 1.0), (t, 2.0)]), Err(1));
    }
}

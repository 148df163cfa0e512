//! Scenario-local wall-clock time.
//!
//! Timestamps are naive (no timezone) and stored as whole seconds since
//! `1970-01-01 00:00:00`. The textual form is always `YYYY-MM-DD HH:MM:SS`.

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime};

const FORMAT: &str = "%Y-%m-%d %H:%M:%S";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid timestamp '{0}', expected 'YYYY-MM-DD HH:MM:SS'")]
pub struct TimestampError(pub String);

impl Timestamp {
    pub const fn from_secs(secs: i64) -> Self {
        Timestamp(secs)
    }

    pub const fn secs(self) -> i64 {
        self.0
    }

    pub fn parse(text: &str) -> Result<Self, TimestampError> {
        NaiveDateTime::parse_from_str(text.trim(), FORMAT)
            .map(|dt| Timestamp(dt.and_utc().timestamp()))
            .map_err(|_| TimestampError(text.to_string()))
    }

    /// Fractional hour of the day, in `[0, 24)`.
    pub fn hour_of_day(self) -> f64 {
        let secs = self.0.rem_euclid(86_400);
        secs as f64 / 3600.0
    }

    fn naive(self) -> NaiveDateTime {
        DateTime::from_timestamp(self.0, 0)
            .map(|d| d.naive_utc())
            .unwrap_or_default()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.naive().format(FORMAT))
    }
}

impl FromStr for Timestamp {
    type Err = TimestampError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timestamp::parse(s)
    }
}

impl Add<i64> for Timestamp {
    type Output = Timestamp;

    fn add(self, rhs: i64) -> Timestamp {
        Timestamp(self.0 + rhs)
    }
}

impl Sub for Timestamp {
    type Output = i64;

    fn sub(self, rhs: Timestamp) -> i64 {
        self.0 - rhs.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let t = Timestamp::parse("2019-07-01 10:30:05").unwrap();
        assert_eq!(t.to_string(), "2019-07-01 10:30:05");
        assert!((t.hour_of_day() - (10.5 + 5.0 / 3600.0)).abs() < 1e-12);
    }

    #[test]
    fn arithmetic() {
        let t = Timestamp::parse("2019-07-01 10:00:00").unwrap();
        let u = t + 3600;
        assert_eq!(u.to_string(), "2019-07-01 11:00:00");
        assert_eq!(u - t, 3600);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Timestamp::parse("2019-07-01").is_err());
        assert!(Timestamp::parse("10:00:00").is_err());
        assert!(Timestamp::parse("2019-13-01 00:00:00").is_err());
    }
}

//! Hour-aligned UTC timestamps.
//!
//! The sensor cadence is one reading per hour, so timestamps are stored as
//! whole hours since the Unix epoch and parsed/printed as ISO-8601 UTC.

use chrono::{DateTime, TimeZone, Utc};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TimeError {
    #[error("bad timestamp `{0}`: expected ISO-8601 UTC")]
    Unparseable(String),
    #[error("timestamp `{0}` is not aligned to the hour")]
    NotHourAligned(String),
}

/// Whole hours since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HourStamp(pub i64);

impl HourStamp {
    pub fn parse_iso(s: &str) -> Result<Self, TimeError> {
        let dt = DateTime::parse_from_rfc3339(s)
            .map_err(|_| TimeError::Unparseable(s.to_string()))?
            .with_timezone(&Utc);
        let secs = dt.timestamp();
        if secs.rem_euclid(3600) != 0 || dt.timestamp_subsec_nanos() != 0 {
            return Err(TimeError::NotHourAligned(s.to_string()));
        }
        Ok(HourStamp(secs.div_euclid(3600)))
    }

    pub fn to_iso(self) -> String {
        let dt = Utc
            .timestamp_opt(self.0 * 3600, 0)
            .single()
            .expect("hour stamp in range");
        dt.format("%Y-%m-%dT%H:%M:%SZ").to_string()
    }

    pub fn minus_hours(self, hours: i64) -> Self {
        HourStamp(self.0 - hours)
    }

    pub fn plus_hours(self, hours: i64) -> Self {
        HourStamp(self.0 + hours)
    }

    /// Hour of day in 0..24.
    pub fn hour_of_day(self) -> u32 {
        self.0.rem_euclid(24) as u32
    }

    /// Hour of week in 0..168, starting from a Thursday (epoch weekday).
    pub fn hour_of_week(self) -> u32 {
        self.0.rem_euclid(168) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = HourStamp::parse_iso("2024-03-01T17:00:00Z").unwrap();
        assert_eq!(t.to_iso(), "2024-03-01T17:00:00Z");
        assert_eq!(t.minus_hours(1).to_iso(), "2024-03-01T16:00:00Z");
        assert_eq!(t.minus_hours(168).to_iso(), "2024-02-23T17:00:00Z");
    }

    #[test]
    fn offset_timezone_normalizes_to_utc() {
        let a = HourStamp::parse_iso("2024-03-01T18:00:00+01:00").unwrap();
        let b = HourStamp::parse_iso("2024-03-01T17:00:00Z").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_misaligned() {
        assert_eq!(
            HourStamp::parse_iso("2024-03-01T17:30:00Z"),
            Err(TimeError::NotHourAligned("2024-03-01T17:30:00Z".into()))
        );
        assert!(matches!(
            HourStamp::parse_iso("yesterday"),
            Err(TimeError::Unparseable(_))
        ));
    }
}

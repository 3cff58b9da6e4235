//! Calendar times as used by date attributes and the date widget.
//!
//! Times are naive (UTC) with one-second resolution; the store keeps them as
//! epoch seconds.

use chrono::{DateTime, NaiveDate, NaiveDateTime, Timelike, Utc};

pub type CalendarTime = NaiveDateTime;

const ISO_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn from_ymd_hms(year: i32, month: u32, day: u32, hour: u32, minute: u32, second: u32) -> Option<CalendarTime> {
    NaiveDate::from_ymd_opt(year, month, day)?.and_hms_opt(hour, minute, second)
}

pub fn from_epoch_seconds(secs: i64) -> Option<CalendarTime> {
    DateTime::<Utc>::from_timestamp(secs, 0).map(|t| t.naive_utc())
}

pub fn to_epoch_seconds(t: &CalendarTime) -> i64 {
    t.and_utc().timestamp()
}

/// Parses `YYYY-MM-DDTHH:MM:SS`.
pub fn parse_iso(s: &str) -> Option<CalendarTime> {
    NaiveDateTime::parse_from_str(s, ISO_FORMAT).ok()
}

pub fn format_iso(t: &CalendarTime) -> String {
    t.format(ISO_FORMAT).to_string()
}

/// Current UTC time, truncated to whole seconds.
pub fn now() -> CalendarTime {
    let t = Utc::now().naive_utc();
    t.with_nanosecond(0).unwrap_or(t)
}

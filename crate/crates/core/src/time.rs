//! Simulation clock.
//!
//! One period is one day. Within a day, time is measured in minutes from the
//! start of the day, so a `SimTime` is a (day, minute) pair whose minute part
//! always stays below the configured minutes per day.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Default capacity of one machine-day in minutes.
pub const DEFAULT_MINUTES_PER_DAY: f64 = 1440.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimTime {
    pub day: u32,
    pub minute: f64,
}

impl SimTime {
    pub const ZERO: SimTime = SimTime { day: 0, minute: 0.0 };

    pub fn new(day: u32, minute: f64) -> Self {
        Self { day, minute }
    }

    pub fn day_start(day: u32) -> Self {
        Self { day, minute: 0.0 }
    }

    /// Builds a normalized time from a fractional day count.
    pub fn from_days(days: f64, minutes_per_day: f64) -> Self {
        debug_assert!(days >= 0.0);
        let day = days.floor();
        let mut minute = (days - day) * minutes_per_day;
        let mut day = day as u32;
        if minute >= minutes_per_day {
            day += 1;
            minute = 0.0;
        }
        Self { day, minute }
    }

    /// Adds a non-negative duration in minutes and normalizes the result.
    pub fn plus_minutes(self, minutes: f64, minutes_per_day: f64) -> Self {
        debug_assert!(minutes >= 0.0);
        let total = self.minute + minutes;
        if total < minutes_per_day {
            return Self { day: self.day, minute: total };
        }
        let extra_days = (total / minutes_per_day).floor();
        let mut minute = total - extra_days * minutes_per_day;
        let mut day = self.day + extra_days as u32;
        if minute >= minutes_per_day {
            day += 1;
            minute = 0.0;
        }
        Self { day, minute }
    }

    /// Time as a fractional number of days.
    pub fn as_days(self, minutes_per_day: f64) -> f64 {
        self.day as f64 + self.minute / minutes_per_day
    }

    /// Signed difference `self - earlier` in minutes.
    pub fn minutes_since(self, earlier: SimTime, minutes_per_day: f64) -> f64 {
        (self.day as f64 - earlier.day as f64) * minutes_per_day + (self.minute - earlier.minute)
    }
}

impl Eq for SimTime {}

impl PartialOrd for SimTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.day
            .cmp(&other.day)
            .then_with(|| self.minute.total_cmp(&other.minute))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:.3})", self.day, self.minute)
    }
}

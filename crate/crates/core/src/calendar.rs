// SPDX-License-Identifier: Apache-2.0

//! Day-indexed count series and their calendar covariates.

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Days per year used for the seasonal harmonics.
pub const DEFAULT_PERIOD_DAYS: f64 = 365.25;

/// One observation day as seen by the design matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalendarDay {
    /// 1-based index within the series.
    pub t: u32,
    pub weekday: bool,
    /// Phase within the seasonal period, in `[0, 1)`.
    pub year_fraction: f64,
}

impl CalendarDay {
    pub fn new(t: u32, weekday: bool, year_fraction: f64) -> Self {
        Self {
            t,
            weekday,
            year_fraction,
        }
    }

    /// Builds the calendar day for `date`, with phase measured from `epoch`.
    pub fn from_date(t: u32, date: NaiveDate, epoch: NaiveDate, period_days: f64) -> Self {
        let elapsed = (date - epoch).num_days() as f64;
        Self {
            t,
            weekday: is_weekday(date),
            year_fraction: (elapsed / period_days).rem_euclid(1.0),
        }
    }
}

pub fn is_weekday(date: NaiveDate) -> bool {
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Consecutive daily counts anchored at a calendar start date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSeries {
    pub start: NaiveDate,
    pub counts: Vec<u64>,
}

impl CountSeries {
    pub fn new(start: NaiveDate, counts: Vec<u64>) -> Self {
        Self { start, counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Calendar date of 1-based day `t`.
    pub fn date(&self, t: u32) -> NaiveDate {
        self.start + chrono::Days::new(u64::from(t.saturating_sub(1)))
    }

    /// Day index of `date`, if it lies inside the series.
    pub fn day_of(&self, date: NaiveDate) -> Option<u32> {
        let offset = (date - self.start).num_days();
        if offset < 0 || offset as usize >= self.counts.len() {
            return None;
        }
        Some(offset as u32 + 1)
    }

    pub fn calendar_days(&self, epoch: NaiveDate, period_days: f64) -> Vec<CalendarDay> {
        (1..=self.counts.len() as u32)
            .map(|t| CalendarDay::from_date(t, self.date(t), epoch, period_days))
            .collect()
    }

    /// Builds a series from dated records, rejecting gaps and disorder.
    pub fn from_records(records: &[(NaiveDate, u64)]) -> Result<Self> {
        let Some(&(start, _)) = records.first() else {
            return Err(Error::InsufficientData("count file has no records".into()));
        };
        for (i, pair) in records.windows(2).enumerate() {
            let (prev, next) = (pair[0].0, pair[1].0);
            if next != prev + chrono::Days::new(1) {
                return Err(Error::RangeMismatch(format!(
                    "non-consecutive days at record {}: {} followed by {}",
                    i + 2,
                    prev,
                    next
                )));
            }
        }
        Ok(Self {
            start,
            counts: records.iter().map(|&(_, c)| c).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn weekend_detection() {
        // 2024-01-06 was a Saturday.
        assert!(!is_weekday(date(2024, 1, 6)));
        assert!(!is_weekday(date(2024, 1, 7)));
        assert!(is_weekday(date(2024, 1, 8)));
    }

    #[test]
    fn year_fraction_wraps_and_handles_pre_epoch_dates() {
        let epoch = date(2020, 1, 1);
        let d = CalendarDay::from_date(1, epoch, epoch, 365.25);
        assert_eq!(d.year_fraction, 0.0);
        let before = CalendarDay::from_date(1, date(2019, 12, 31), epoch, 365.25);
        assert!(before.year_fraction > 0.99 && before.year_fraction < 1.0);
    }

    #[test]
    fn gap_is_reported() {
        let recs = [(date(2024, 1, 1), 3), (date(2024, 1, 3), 4)];
        let err = CountSeries::from_records(&recs).unwrap_err();
        assert!(err.to_string().contains("2024-01-01 followed by 2024-01-03"));
    }

    #[test]
    fn day_lookup() {
        let s = CountSeries::new(date(2024, 2, 27), vec![1, 2, 3, 4]);
        assert_eq!(s.date(3), date(2024, 2, 29));
        assert_eq!(s.day_of(date(2024, 3, 1)), Some(4));
        assert_eq!(s.day_of(date(2024, 3, 2)), None);
    }
}

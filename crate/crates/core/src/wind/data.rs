use std::collections::BTreeMap;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const HOURS: usize = 24;
/// Ten-minute intervals per day.
pub const INTERVALS_PER_DAY: usize = 144;

/// One row of a wind measurement file.
#[derive(Debug, Clone, PartialEq)]
pub struct WindRecord {
    pub timestamp: NaiveDateTime,
    pub speed: f64,
    pub power: f64,
}

/// Daily log-wind profiles for one site.
#[derive(Debug, Clone, PartialEq)]
pub struct WindSampleSet {
    pub site_label: String,
    /// `n_days x 24` matrix of log hourly mean speed.
    pub samples: Matrix,
    pub dates: Vec<NaiveDate>,
}

impl WindSampleSet {
    pub fn new(site_label: impl Into<String>, samples: Matrix, dates: Vec<NaiveDate>) -> Result<Self> {
        if samples.cols() != HOURS {
            return Err(Error::Dimension {
                what: "hours per wind sample",
                expected: HOURS,
                got: samples.cols(),
            });
        }
        if samples.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::data("wind samples must be finite"));
        }
        Ok(WindSampleSet {
            site_label: site_label.into(),
            samples,
            dates,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.rows() == 0
    }

    /// Column means.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.len().max(1) as f64;
        (0..HOURS)
            .map(|t| (0..self.len()).map(|i| self.samples[(i, t)]).sum::<f64>() / n)
            .collect()
    }
}

/// What `hourly_average` threw away.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AveragingReport {
    pub days_kept: usize,
    pub days_dropped: usize,
    /// `(record index, reason)` for records that were rejected outright.
    pub rejected: Vec<(usize, String)>,
}

/// Groups 10-minute records into days, keeps days with all 144 intervals,
/// and turns each into 24 log hourly means.
pub fn hourly_average(site_label: &str, records: &[WindRecord]) -> Result<(WindSampleSet, AveragingReport)> {
    let mut report = AveragingReport::default();
    let mut days: BTreeMap<NaiveDate, Vec<Option<f64>>> = BTreeMap::new();
    let mut bad_days = std::collections::BTreeSet::new();
    for (k, r) in records.iter().enumerate() {
        let date = r.timestamp.date();
        let slot = r.timestamp.hour() as usize * 6 + r.timestamp.minute() as usize / 10;
        let day = days.entry(date).or_insert_with(|| vec![None; INTERVALS_PER_DAY]);
        if !(r.speed > 0.0) || !r.speed.is_finite() {
            report
                .rejected
                .push((k, format!("nonpositive or non-finite speed {}", r.speed)));
            bad_days.insert(date);
            continue;
        }
        if r.timestamp.minute() % 10 != 0 || r.timestamp.second() != 0 {
            report
                .rejected
                .push((k, "timestamp not on a 10-minute boundary".into()));
            continue;
        }
        if day[slot].is_some() {
            report.rejected.push((k, "duplicate interval".into()));
            continue;
        }
        day[slot] = Some(r.speed);
    }
    let mut rows = Vec::new();
    let mut dates = Vec::new();
    for (date, slots) in days {
        if bad_days.contains(&date) || slots.iter().any(Option::is_none) {
            report.days_dropped += 1;
            continue;
        }
        let speeds: Vec<f64> = slots.into_iter().flatten().collect();
        rows.push(
            speeds
                .chunks(6)
                .map(|h| (h.iter().sum::<f64>() / 6.0).ln())
                .collect::<Vec<f64>>(),
        );
        dates.push(date);
    }
    report.days_kept = rows.len();
    let samples = if rows.is_empty() {
        Matrix::zeros(0, HOURS)
    } else {
        Matrix::from_rows(&rows)?
    };
    Ok((WindSampleSet::new(site_label, samples, dates)?, report))
}

#[derive(Deserialize)]
struct CsvRow {
    timestamp: String,
    speed_mps: f64,
    power_mw: f64,
}

const TIME_FORMATS: [&str; 4] = [
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
];

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim().trim_end_matches('Z');
    TIME_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Reads `timestamp,speed_mps,power_mw` rows.
pub fn read_wind_csv(path: impl AsRef<Path>) -> Result<Vec<WindRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_wind_csv(file, &path.display().to_string())
}

pub fn parse_wind_csv(reader: impl std::io::Read, source: &str) -> Result<Vec<WindRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (k, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let line = k + 2;
        let row = row.map_err(|e| Error::Syntax {
            path: source.into(),
            line,
            msg: e.to_string(),
        })?;
        let timestamp = parse_timestamp(&row.timestamp).ok_or_else(|| Error::Syntax {
            path: source.into(),
            line,
            msg: format!("unrecognised timestamp '{}'", row.timestamp),
        })?;
        out.push(WindRecord {
            timestamp,
            speed: row.speed_mps,
            power: row.power_mw,
        });
    }
    Ok(out)
}

pub fn write_wind_csv(records: &[WindRecord], mut out: impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "timestamp,speed_mps,power_mw")?;
    for r in records {
        writeln!(
            out,
            "{},{},{}",
            r.timestamp.format("%Y-%m-%d %H:%M:%S"),
            r.speed,
            r.power
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(date: NaiveDate, speed: impl Fn(usize) -> f64) -> Vec<WindRecord> {
        (0..INTERVALS_PER_DAY)
            .map(|k| WindRecord {
                timestamp: date.and_hms_opt((k / 6) as u32, (k % 6 * 10) as u32, 0).unwrap(),
                speed: speed(k),
                power: 0.0,
            })
            .collect()
    }

    fn d(n: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 3, n).unwrap()
    }

    #[test]
    fn constant_day() {
        let (s, rep) = hourly_average("a", &day(d(1), |_| 6.0)).unwrap();
        assert_eq!(rep.days_kept, 1);
        assert!(s.samples.row(0).iter().all(|v| (v - 6f64.ln()).abs() < 1e-15));
    }

    #[test]
    fn alternating_day_averages_to_six() {
        let (s, _) = hourly_average("a", &day(d(1), |k| if k % 2 == 0 { 4.0 } else { 8.0 })).unwrap();
        assert!(s.samples.row(0).iter().all(|v| (v - 6f64.ln()).abs() < 1e-15));
    }

    #[test]
    fn incomplete_day_dropped() {
        let mut recs = day(d(1), |_| 5.0);
        let mut second = day(d(2), |_| 7.0);
        second.remove(40);
        recs.extend(second);
        let (s, rep) = hourly_average("a", &recs).unwrap();
        assert_eq!(rep.days_dropped, 1);
        assert_eq!(s.len(), 1);
        assert_eq!(s.dates, vec![d(1)]);
    }

    #[test]
    fn nonpositive_speed_rejected() {
        let (s, rep) = hourly_average("a", &day(d(1), |k| if k == 3 { 0.0 } else { 5.0 })).unwrap();
        assert_eq!(s.len(), 0);
        assert_eq!(rep.rejected.len(), 1);
        assert_eq!(rep.rejected[0].0, 3);
    }

    #[test]
    fn csv_round_trip() {
        let recs = day(d(5), |k| 3.0 + k as f64 * 0.01);
        let mut buf = Vec::new();
        write_wind_csv(&recs, &mut buf).unwrap();
        let back = parse_wind_csv(&buf[..], "mem").unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn csv_error_has_line() {
        let text = "timestamp,speed_mps,power_mw\n2024-01-01 00:00,5,1\n2024-01-01 00:10,abc,1\n";
        match parse_wind_csv(text.as_bytes(), "w.csv") {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}

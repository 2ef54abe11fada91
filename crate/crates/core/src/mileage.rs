//! Cumulative mileage processes `d(t)`.
//!
//! Every realized path is piecewise linear with piecewise-constant speed, which
//! lets the pricing code integrate mileage-driven intensities exactly segment by
//! segment.

use std::io::Read;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trip {
    pub start: f64,
    pub end: f64,
    pub miles: f64,
}

/// Sorted, non-overlapping trips. Touching trips (`end == next.start`) are allowed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripLog {
    trips: Vec<Trip>,
}

fn check_trip(trip: &Trip) -> std::result::Result<(), String> {
    if !(trip.start.is_finite() && trip.end.is_finite() && trip.miles.is_finite()) {
        return Err("fields must be finite numbers".into());
    }
    if trip.start < 0.0 {
        return Err(format!("start {} is negative", trip.start));
    }
    if trip.end <= trip.start {
        return Err(format!("end {} must be after start {}", trip.end, trip.start));
    }
    if trip.miles < 0.0 {
        return Err(format!("miles {} is negative", trip.miles));
    }
    Ok(())
}

impl TripLog {
    /// Builds a log from trips in any order. Errors name the offending trip by
    /// its 1-based position in `trips`.
    pub fn new(trips: Vec<Trip>) -> Result<Self> {
        Self::from_numbered(trips.into_iter().enumerate().map(|(i, t)| (i + 1, t)).collect())
    }

    fn from_numbered(mut numbered: Vec<(usize, Trip)>) -> Result<Self> {
        for (line, trip) in &numbered {
            check_trip(trip).map_err(|message| Error::TripLog { line: *line, message })?;
        }
        numbered.sort_by(|a, b| a.1.start.total_cmp(&b.1.start));
        for pair in numbered.windows(2) {
            let (_, prev) = pair[0];
            let (line, next) = pair[1];
            if next.start < prev.end {
                return Err(Error::TripLog {
                    line,
                    message: format!(
                        "trip [{}, {}] overlaps the trip ending at {}",
                        next.start, next.end, prev.end
                    ),
                });
            }
        }
        Ok(TripLog {
            trips: numbered.into_iter().map(|(_, t)| t).collect(),
        })
    }

    /// Parses CSV with the header `start,end,miles`. Line numbers in errors count
    /// the header as line 1.
    pub fn from_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader.headers().map_err(|e| Error::TripLog {
            line: 1,
            message: e.to_string(),
        })?;
        if headers.iter().collect::<Vec<_>>() != ["start", "end", "miles"] {
            return Err(Error::TripLog {
                line: 1,
                message: format!("expected header `start,end,miles`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut numbered = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::TripLog {
                line: e.position().map(|p| p.line() as usize).unwrap_or(i + 2),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(i + 2);
            let field = |k: usize, name: &str| -> Result<f64> {
                let raw = record.get(k).unwrap_or("");
                raw.parse::<f64>().map_err(|_| Error::TripLog {
                    line,
                    message: format!("cannot parse {name} `{raw}` as a number"),
                })
            };
            let trip = Trip {
                start: field(0, "start")?,
                end: field(1, "end")?,
                miles: field(2, "miles")?,
            };
            numbered.push((line, trip));
        }
        Self::from_numbered(numbered)
    }

    pub fn trips(&self) -> &[Trip] {
        &self.trips
    }

    pub fn is_empty(&self) -> bool {
        self.trips.is_empty()
    }

    pub fn total_miles(&self) -> f64 {
        self.trips.iter().map(|t| t.miles).sum()
    }

    /// Concatenation of two logs; fails if any trips overlap.
    pub fn merge(&self, other: &TripLog) -> Result<TripLog> {
        TripLog::new(self.trips.iter().chain(other.trips.iter()).copied().collect())
    }
}

/// A realized mileage trajectory on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MileagePath {
    /// `0 = b_0 < b_1 < ... < b_n = horizon`.
    breakpoints: Vec<f64>,
    /// Speed on `[b_k, b_{k+1})`.
    speeds: Vec<f64>,
    /// Distance at each breakpoint.
    distance: Vec<f64>,
}

/// One constant-speed piece of a [`MileagePath`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub speed: f64,
}

struct PathBuilder {
    breakpoints: Vec<f64>,
    speeds: Vec<f64>,
    distance: Vec<f64>,
}

impl PathBuilder {
    fn new() -> Self {
        PathBuilder {
            breakpoints: vec![0.0],
            speeds: Vec::new(),
            distance: vec![0.0],
        }
    }

    fn cursor(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Appends `[cursor, end)` at `speed`, crediting `miles` of distance.
    fn push(&mut self, end: f64, speed: f64, miles: f64) {
        if end <= self.cursor() {
            return;
        }
        let d = *self.distance.last().unwrap();
        self.breakpoints.push(end);
        self.speeds.push(speed);
        self.distance.push(d + miles);
    }

    fn finish(mut self, horizon: f64) -> MileagePath {
        if self.cursor() < horizon {
            self.push(horizon, 0.0, 0.0);
        }
        MileagePath {
            breakpoints: self.breakpoints,
            speeds: self.speeds,
            distance: self.distance,
        }
    }
}

impl MileagePath {
    pub fn constant(speed: f64, horizon: f64) -> Self {
        let mut b = PathBuilder::new();
        b.push(horizon, speed, speed * horizon);
        b.finish(horizon)
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.speeds)
            .map(|(w, &speed)| Segment {
                start: w[0],
                end: w[1],
                speed,
            })
    }

    /// Interior breakpoints, where the speed may jump.
    pub fn interior_breakpoints(&self) -> &[f64] {
        let n = self.breakpoints.len();
        &self.breakpoints[1..n - 1]
    }

    pub fn max_speed(&self) -> f64 {
        self.speeds.iter().copied().fold(0.0, f64::max)
    }

    fn check(&self, s: f64) -> Result<()> {
        if s.is_nan() || s < 0.0 || s > self.horizon() {
            return Err(Error::OutOfRange {
                time: s,
                horizon: self.horizon(),
            });
        }
        Ok(())
    }

    fn segment_index(&self, s: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= s);
        k.saturating_sub(1).min(self.speeds.len() - 1)
    }

    /// Right-continuous speed; at the horizon the last segment's speed.
    pub fn speed_at(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        Ok(self.speeds[self.segment_index(s)])
    }

    pub fn cumulative(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        if t == self.horizon() {
            return Ok(*self.distance.last().unwrap());
        }
        let k = self.segment_index(t);
        Ok(self.distance[k] + self.speeds[k] * (t - self.breakpoints[k]))
    }

    pub fn total_distance(&self) -> f64 {
        *self.distance.last().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MileageModel {
    ConstantSpeed { speed: f64 },
    FromTripLog(TripLog),
    /// On/off driving with exponential sojourns, starting idle at time 0.
    AlternatingRenewal {
        mean_drive: f64,
        mean_idle: f64,
        speed: f64,
    },
}

impl MileageModel {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
            }
        };
        let pos = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        match self {
            MileageModel::ConstantSpeed { speed } => nonneg("speed", *speed),
            MileageModel::FromTripLog(_) => Ok(()),
            MileageModel::AlternatingRenewal {
                mean_drive,
                mean_idle,
                speed,
            } => {
                pos("mean_drive", *mean_drive)?;
                pos("mean_idle", *mean_idle)?;
                nonneg("speed", *speed)
            }
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, MileageModel::AlternatingRenewal { .. })
    }

    /// Realizes `d(t)` on `[0, horizon]`. Deterministic models ignore `rng`.
    pub fn realize_path<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Result<MileagePath> {
        self.validate()?;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid("horizon", format!("must be finite and > 0, got {horizon}")));
        }
        Ok(match self {
            MileageModel::ConstantSpeed { speed } => MileagePath::constant(*speed, horizon),
            MileageModel::FromTripLog(log) => {
                let mut b = PathBuilder::new();
                for trip in log.trips() {
                    if trip.start >= horizon {
                        break;
                    }
                    let speed = trip.miles / (trip.end - trip.start);
                    b.push(trip.start, 0.0, 0.0);
                    if trip.end <= horizon {
                        b.push(trip.end, speed, trip.miles);
                    } else {
                        b.push(horizon, speed, speed * (horizon - trip.start));
                    }
                }
                b.finish(horizon)
            }
            MileageModel::AlternatingRenewal {
                mean_drive,
                mean_idle,
                speed,
            } => {
                let mut b = PathBuilder::new();
                let mut driving = false;
                loop {
                    let mean = if driving { *mean_drive } else { *mean_idle };
                    let e: f64 = Exp1.sample(rng);
                    let end = (b.cursor() + mean * e).min(horizon);
                    let v = if driving { *speed } else { 0.0 };
                    b.push(end, v, v * (end - b.cursor()));
                    if end >= horizon {
                        break;
                    }
                    driving = !driving;
                }
                b.finish(horizon)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_piecewise, Tolerance};
    use crate::rng;
    use crate::stats::SampleSummary;
    use proptest::prelude::*;

    fn log(csv: &str) -> Result<TripLog> {
        TripLog::from_csv(csv.as_bytes())
    }

    #[test]
    fn ingest_examples() {
        let one = log("start,end,miles\n0,1,30\n").unwrap();
        assert_eq!(one.trips(), &[Trip { start: 0.0, end: 1.0, miles: 30.0 }]);

        match log("start,end,miles\n0,2,10\n1,3,10\n") {
            Err(Error::TripLog { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("overlaps"));
            }
            other => panic!("expected overlap error, got {other:?}"),
        }

        let empty = log("start,end,miles\n").unwrap();
        assert!(empty.is_empty());
        let path = MileageModel::FromTripLog(empty)
            .realize_path(3.0, &mut rng::stream(0))
            .unwrap();
        assert_eq!(path.cumulative(3.0).unwrap(), 0.0);
        assert_eq!(path.cumulative(1.2).unwrap(), 0.0);
    }

    #[test]
    fn ingest_rejects_bad_rows() {
        assert!(matches!(log("start,end,miles\n0,1,-3\n"), Err(Error::TripLog { line: 2, .. })));
        assert!(matches!(log("start,end,miles\n-1,1,3\n"), Err(Error::TripLog { line: 2, .. })));
        assert!(matches!(log("start,end,miles\n2,1,3\n"), Err(Error::TripLog { line: 2, .. })));
        assert!(matches!(log("start,end,miles\n0,1,3\n1,x,3\n"), Err(Error::TripLog { line: 3, .. })));
        assert!(matches!(log("begin,end,miles\n0,1,3\n"), Err(Error::TripLog { line: 1, .. })));
        assert!(matches!(log("start,end,miles\n0,1\n"), Err(Error::TripLog { .. })));
    }

    #[test]
    fn ingest_sorts_and_allows_touching_trips() {
        let l = log("start,end,miles\n1,2,5\n0,1,3\n").unwrap();
        assert_eq!(l.trips()[0].start, 0.0);
        assert_eq!(l.total_miles(), 8.0);
    }

    #[test]
    fn realize_examples() {
        let mut r = rng::stream(0);
        let p = MileageModel::ConstantSpeed { speed: 30.0 }.realize_path(2.0, &mut r).unwrap();
        assert_eq!(p.cumulative(2.0).unwrap(), 60.0);
        assert_eq!(p.speed_at(0.5).unwrap(), 30.0);

        let l = TripLog::new(vec![Trip { start: 0.0, end: 1.0, miles: 30.0 }]).unwrap();
        let p = MileageModel::FromTripLog(l).realize_path(2.0, &mut r).unwrap();
        assert_eq!(p.cumulative(1.0).unwrap(), 30.0);
        assert_eq!(p.cumulative(2.0).unwrap(), 30.0);
        assert_eq!(p.speed_at(1.5).unwrap(), 0.0);
        assert_eq!(p.speed_at(0.0).unwrap(), 30.0);
        assert!(matches!(p.speed_at(2.5), Err(Error::OutOfRange { .. })));
        assert!(p.speed_at(-0.1).is_err());
        assert!(p.cumulative(2.1).is_err());
    }

    #[test]
    fn trip_log_paths_truncate_at_horizon() {
        let l = TripLog::new(vec![
            Trip { start: 0.5, end: 1.0, miles: 10.0 },
            Trip { start: 1.5, end: 2.5, miles: 20.0 },
            Trip { start: 3.0, end: 4.0, miles: 7.0 },
        ])
        .unwrap();
        let p = MileageModel::FromTripLog(l).realize_path(2.0, &mut rng::stream(0)).unwrap();
        assert_eq!(p.cumulative(0.5).unwrap(), 0.0);
        assert_eq!(p.cumulative(1.0).unwrap(), 10.0);
        assert!((p.cumulative(2.0).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(p.speed_at(1.7).unwrap(), 20.0);
    }

    #[test]
    fn trip_ends_match_running_sums_exactly() {
        let trips: Vec<Trip> = (0..50)
            .map(|k| Trip {
                start: 0.37 * k as f64,
                end: 0.37 * k as f64 + 0.11 + 0.001 * k as f64,
                miles: 0.1 * k as f64 + 1.3,
            })
            .collect();
        let l = TripLog::new(trips.clone()).unwrap();
        let p = MileageModel::FromTripLog(l).realize_path(100.0, &mut rng::stream(0)).unwrap();
        let mut running = 0.0;
        for t in &trips {
            running += t.miles;
            assert_eq!(p.cumulative(t.end).unwrap(), running);
        }
    }

    #[test]
    fn speed_integrates_to_cumulative() {
        let model = MileageModel::AlternatingRenewal { mean_drive: 0.3, mean_idle: 0.5, speed: 40.0 };
        let p = model.realize_path(5.0, &mut rng::stream(3)).unwrap();
        let q = integrate_piecewise(
            |s| p.speed_at(s).unwrap(),
            0.0,
            5.0,
            p.interior_breakpoints(),
            Tolerance::default(),
        );
        let d = p.cumulative(5.0).unwrap();
        assert!(((q.value - d) / d).abs() < 1e-9, "{} vs {}", q.value, d);
    }

    #[test]
    fn renewal_starts_idle_and_is_reproducible() {
        let model = MileageModel::AlternatingRenewal { mean_drive: 1.0, mean_idle: 1.0, speed: 30.0 };
        let a = model.realize_path(50.0, &mut rng::stream(8)).unwrap();
        let b = model.realize_path(50.0, &mut rng::stream(8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.speed_at(0.0).unwrap(), 0.0);
        let c = model.realize_path(50.0, &mut rng::stream(9)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn renewal_long_run_rate() {
        // renewal-reward: v * mean_drive / (mean_drive + mean_idle) = 15
        let model = MileageModel::AlternatingRenewal { mean_drive: 1.0, mean_idle: 1.0, speed: 30.0 };
        let rates: Vec<f64> = (0..10_000u64)
            .map(|i| {
                let mut r = rng::path_stream(77, rng::Purpose::Adhoc, i);
                model.realize_path(1000.0, &mut r).unwrap().cumulative(1000.0).unwrap() / 1000.0
            })
            .collect();
        let s = SampleSummary::from_slice(&rates);
        assert!((s.mean - 15.0).abs() < 4.0 * s.std_error(), "{} ± {}", s.mean, s.std_error());
    }

    #[test]
    fn rejects_invalid_models() {
        let mut r = rng::stream(0);
        assert!(MileageModel::ConstantSpeed { speed: -1.0 }.realize_path(1.0, &mut r).is_err());
        assert!(MileageModel::AlternatingRenewal { mean_drive: 0.0, mean_idle: 1.0, speed: 1.0 }
            .realize_path(1.0, &mut r)
            .is_err());
        assert!(MileageModel::ConstantSpeed { speed: 1.0 }.realize_path(0.0, &mut r).is_err());
    }

    proptest! {
        #[test]
        fn cumulative_is_nondecreasing(seed in any::<u64>(), drive in 0.05f64..3.0, idle in 0.05f64..3.0, speed in 0.0f64..100.0) {
            let model = MileageModel::AlternatingRenewal { mean_drive: drive, mean_idle: idle, speed };
            let horizon = 10.0;
            let p = model.realize_path(horizon, &mut rng::stream(seed)).unwrap();
            let mut prev = 0.0;
            prop_assert_eq!(p.cumulative(0.0).unwrap(), 0.0);
            for k in 0..=10_000 {
                let t = horizon * k as f64 / 10_000.0;
                let d = p.cumulative(t).unwrap();
                prop_assert!(d >= prev);
                prev = d;
            }
        }
    }
}

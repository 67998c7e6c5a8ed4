use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Transverse and longitudinal energy scales tabulated against the anneal
/// fraction `s`, linearly interpolated between knots.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule<T> {
    s: Vec<T>,
    delta: Vec<T>,
    escale: Vec<T>,
    source: String,
}

/// Energy scales at one anneal fraction, GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleValue<T> {
    pub delta: T,
    pub escale: T,
}

#[derive(Deserialize)]
struct Row {
    s: f64,
    delta_ghz: f64,
    escale_ghz: f64,
}

/// Label carried by the built-in schedule so it is never mistaken for device data.
pub const SYNTHETIC_LABEL: &str = "SYNTHETIC";

impl<T: Real> AnnealSchedule<T> {
    /// Builds a schedule from `(s, delta, escale)` knots.
    pub fn from_rows(rows: &[(T, T, T)], source: impl Into<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::validation("schedule has no rows"));
        }
        for (k, &(s, d, e)) in rows.iter().enumerate() {
            let row = k + 1;
            if ![s, d, e].iter().all(|v| v.is_finite_value()) {
                return Err(Error::validation(format!("schedule row {row}: non-finite value")));
            }
            if d < T::zero() || e < T::zero() {
                return Err(Error::validation(format!("schedule row {row}: negative energy")));
            }
            if s < T::zero() || s > T::one() {
                return Err(Error::validation(format!(
                    "schedule row {row}: s = {} outside [0, 1]",
                    s.to_f64_lossy()
                )));
            }
            if k > 0 {
                let prev = rows[k - 1].0;
                if s == prev {
                    return Err(Error::validation(format!(
                        "schedule row {row}: duplicate s = {}",
                        s.to_f64_lossy()
                    )));
                }
                if s < prev {
                    return Err(Error::validation(format!(
                        "schedule row {row}: s = {} is not increasing",
                        s.to_f64_lossy()
                    )));
                }
            }
        }
        Ok(Self {
            s: rows.iter().map(|r| r.0).collect(),
            delta: rows.iter().map(|r| r.1).collect(),
            escale: rows.iter().map(|r| r.2).collect(),
            source: source.into(),
        })
    }

    /// Parses CSV text with header `s,delta_ghz,escale_ghz`.
    pub fn load<R: Read>(reader: R, source: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
            .clone();
        for want in ["s", "delta_ghz", "escale_ghz"] {
            if !headers.iter().any(|h| h == want) {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("missing column `{want}` (expected header s,delta_ghz,escale_ghz)"),
                });
            }
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let row: Row = record
                .deserialize(Some(&headers))
                .map_err(|e| Error::Parse { line, message: e.to_string() })?;
            let vals = [row.s, row.delta_ghz, row.escale_ghz];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse { line, message: "non-finite value".into() });
            }
            rows.push((T::lit(row.s), T::lit(row.delta_ghz), T::lit(row.escale_ghz)));
        }
        Self::from_rows(&rows, source)
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::load(file, path.display().to_string())
    }

    /// Smooth monotone stand-in for device data: `delta = 10 (1-s)^3.5`,
    /// `escale = 0.1 + 7.9 s^3`, 201 knots over [0, 1].
    pub fn synthetic() -> Self {
        let rows: Vec<(T, T, T)> = (0..=200)
            .map(|k| {
                let s = k as f64 / 200.0;
                let delta = 10.0 * (1.0 - s).powf(3.5);
                let escale = 0.1 + 7.9 * s.powi(3);
                (T::lit(s), T::lit(delta), T::lit(escale))
            })
            .collect();
        Self::from_rows(&rows, SYNTHETIC_LABEL).expect("synthetic schedule is valid")
    }

    pub fn is_synthetic(&self) -> bool {
        self.source == SYNTHETIC_LABEL
    }

    /// Where the knots came from: a file path or [`SYNTHETIC_LABEL`].
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn domain(&self) -> (T, T) {
        (self.s[0], self.s[self.s.len() - 1])
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        (0..self.s.len()).map(move |k| (self.s[k], self.delta[k], self.escale[k]))
    }

    /// Interpolated energy scales; queries outside the knot range are errors.
    pub fn at(&self, s: T) -> Result<ScheduleValue<T>> {
        let (lo, hi) = self.domain();
        if !s.is_finite_value() || s < lo || s > hi {
            return Err(Error::OutOfRange {
                what: "s",
                value: s.to_f64_lossy(),
                min: lo.to_f64_lossy(),
                max: hi.to_f64_lossy(),
            });
        }
        let k = self.s.partition_point(|&x| x <= s);
        if k == 0 || k == self.s.len() {
            let i = if k == 0 { 0 } else { self.s.len() - 1 };
            return Ok(ScheduleValue { delta: self.delta[i], escale: self.escale[i] });
        }
        let (s0, s1) = (self.s[k - 1], self.s[k]);
        let t = (s - s0) / (s1 - s0);
        let lerp = |v: &[T]| v[k - 1] + t * (v[k] - v[k - 1]);
        Ok(ScheduleValue { delta: lerp(&self.delta), escale: lerp(&self.escale) })
    }

    pub fn delta(&self, s: T) -> Result<T> {
        self.at(s).map(|v| v.delta)
    }

    pub fn energy_scale(&self, s: T) -> Result<T> {
        self.at(s).map(|v| v.escale)
    }

    /// True when `delta` never increases between consecutive knots.
    pub fn delta_non_increasing(&self) -> bool {
        self.delta.windows(2).all(|w| w[1] <= w[0])
    }

    /// True when `escale` never decreases between consecutive knots.
    pub fn escale_non_decreasing(&self) -> bool {
        self.escale.windows(2).all(|w| w[1] >= w[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_midpoint() {
        let s = AnnealSchedule::<f64>::from_rows(&[(0.0, 10.0, 0.1), (1.0, 0.0, 8.0)], "t").unwrap();
        let v = s.at(0.5).unwrap();
        assert!((v.delta - 5.0).abs() < 1e-14);
        assert!((v.escale - 4.05).abs() < 1e-14);
        assert_eq!(s.at(1.0).unwrap().delta, 0.0);
        assert_eq!(s.at(0.0).unwrap().escale, 0.1);
    }

    #[test]
    fn out_of_domain_is_error() {
        let s = AnnealSchedule::<f64>::from_rows(&[(0.0, 10.0, 0.1), (1.0, 0.0, 8.0)], "t").unwrap();
        assert!(matches!(s.at(1.2), Err(Error::OutOfRange { .. })));
        let narrow = AnnealSchedule::<f64>::from_rows(&[(0.2, 1.0, 1.0), (0.4, 0.5, 2.0)], "t").unwrap();
        assert!(narrow.at(0.1).is_err());
        assert!(narrow.at(f64::NAN).is_err());
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "s,delta_ghz,escale_ghz\n0.0,10,0.1\n0.5,oops,1\n";
        match AnnealSchedule::<f64>::load(text.as_bytes(), "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let short = "s,delta_ghz,escale_ghz\n0.0,10\n";
        assert!(matches!(AnnealSchedule::<f64>::load(short.as_bytes(), "t"), Err(Error::Parse { line: 2, .. })));
        let header = "s,delta,escale\n0,1,1\n";
        assert!(matches!(AnnealSchedule::<f64>::load(header.as_bytes(), "t"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn rejects_duplicate_and_decreasing_s() {
        let dup = "s,delta_ghz,escale_ghz\n0.1,1,1\n0.1,1,1\n";
        let err = AnnealSchedule::<f64>::load(dup.as_bytes(), "t").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let back = "s,delta_ghz,escale_ghz\n0.3,1,1\n0.1,1,1\n";
        assert!(matches!(AnnealSchedule::<f64>::load(back.as_bytes(), "t"), Err(Error::Validation(_))));
        let neg = "s,delta_ghz,escale_ghz\n0.3,-1,1\n";
        assert!(AnnealSchedule::<f64>::load(neg.as_bytes(), "t").is_err());
    }

    #[test]
    fn columns_may_be_reordered() {
        let text = "escale_ghz, s, delta_ghz\n0.1, 0, 10\n8, 1, 0\n";
        let s = AnnealSchedule::<f64>::load(text.as_bytes(), "t").unwrap();
        assert!((s.delta(0.25).unwrap() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn synthetic_is_monotone_and_labeled() {
        let s = AnnealSchedule::<f64>::synthetic();
        assert!(s.is_synthetic());
        assert!(s.delta_non_increasing() && s.escale_non_decreasing());
        assert_eq!(s.domain(), (0.0, 1.0));
        assert!((s.delta(0.0).unwrap() - 10.0).abs() < 1e-12);
        assert!((s.energy_scale(1.0).unwrap() - 8.0).abs() < 1e-12);
        let s32 = AnnealSchedule::<f32>::synthetic();
        assert!((s32.delta(0.5).unwrap() - s.delta(0.5).unwrap() as f32).abs() < 1e-5);
    }
}

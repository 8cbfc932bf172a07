//! Series ingestion and synthetic fixtures.

use std::path::Path;

use forecast_lab::datasets::{AIRLINE, AIRLINE_PERIOD, AIRLINE_TRAIN};
use forecast_lab::TimeSeries;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{BenchError, Result};

/// Level of synthetic series at `t = 0`.
pub const SYNTH_BASE: f64 = 100.0;
/// Relative amplitude of the synthetic seasonal profile.
pub const SYNTH_AMPLITUDE: f64 = 0.25;

/// A loaded series plus any defaults known for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub series: TimeSeries,
    pub period: Option<usize>,
    pub n_train: Option<usize>,
}

/// Loads `"airline"` from the bundled data, otherwise reads a CSV file.
pub fn load_dataset(source: &str) -> Result<Dataset> {
    if source.eq_ignore_ascii_case("airline") {
        return Ok(Dataset {
            name: "airline".into(),
            series: airline(),
            period: Some(AIRLINE_PERIOD),
            n_train: Some(AIRLINE_TRAIN),
        });
    }
    Ok(Dataset {
        name: Path::new(source)
            .file_stem()
            .map_or_else(|| source.to_string(), |s| s.to_string_lossy().into_owned()),
        series: load_csv(source)?,
        period: None,
        n_train: None,
    })
}

pub fn airline() -> TimeSeries {
    TimeSeries::new(AIRLINE.to_vec()).expect("bundled series is valid")
}

/// One observation per row. The value is the last field, so a leading date
/// column is ignored; a non-numeric first row is taken as a header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    if path
        .to_str()
        .is_some_and(|p| p.eq_ignore_ascii_case("airline"))
    {
        return Ok(airline());
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_csv(&text).map_err(|e| match e {
        BenchError::Data(m) => BenchError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_csv(text: &str) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| BenchError::Data(format!("row {row}: {e}")))?;
        let Some(field) = record.iter().next_back().filter(|f| !f.is_empty()) else {
            if record.iter().all(str::is_empty) {
                continue;
            }
            return Err(BenchError::Data(format!("row {row}: missing value")));
        };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(BenchError::Data(format!("row {row}: non-finite value {v}"))),
            Err(_) if row == 1 => continue,
            Err(_) => {
                return Err(BenchError::Data(format!(
                    "row {row}: '{field}' is not a number"
                )))
            }
        }
    }
    if values.is_empty() {
        return Err(BenchError::Data("series is empty".into()));
    }
    TimeSeries::new(values).map_err(|e| BenchError::Data(e.to_string()))
}

/// `(base + trend·t)·(1 + A·sin(2π(t mod s)/s)) + noise`, with Gaussian noise
/// of standard deviation `noise_sd`.
pub fn generate_synthetic(
    s: usize,
    n: usize,
    trend: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<TimeSeries> {
    if s < 2 {
        return Err(BenchError::Usage(format!(
            "seasonal period must be at least 2, got {s}"
        )));
    }
    if n < 2 * s {
        return Err(BenchError::Usage(format!(
            "need n >= 2s, got n = {n}, s = {s}"
        )));
    }
    if !trend.is_finite() || !(noise_sd >= 0.0) || !noise_sd.is_finite() {
        return Err(BenchError::Usage(
            "trend must be finite and noise_sd nonnegative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).map_err(|e| BenchError::Usage(e.to_string()))?;
    let values = (0..n)
        .map(|t| {
            let phase = 2.0 * std::f64::consts::PI * (t % s) as f64 / s as f64;
            let clean = (SYNTH_BASE + trend * t as f64) * (1.0 + SYNTH_AMPLITUDE * phase.sin());
            if noise_sd > 0.0 {
                clean + noise.sample(&mut rng)
            } else {
                clean
            }
        })
        .collect();
    Ok(TimeSeries::new(values)?.with_period(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use forecast_lab::series::detect_seasonality;

    #[test]
    fn builtin_airline() {
        let d = load_dataset("airline").unwrap();
        assert_eq!(d.series.len(), 144);
        assert_eq!(d.series.values()[0], 112.0);
        assert_eq!(d.series.values()[143], 432.0);
        assert_eq!((d.period, d.n_train), (Some(12), Some(132)));
    }

    #[test]
    fn plain_header_and_date_columns() {
        assert_eq!(parse_csv("1\n2\n3\n").unwrap().values(), &[1.0, 2.0, 3.0]);
        assert_eq!(parse_csv("value\n4\n5\n").unwrap().values(), &[4.0, 5.0]);
        assert_eq!(
            parse_csv("date,y\n1949-01,112\n1949-02,118\n")
                .unwrap()
                .values(),
            &[112.0, 118.0]
        );
    }

    #[test]
    fn errors_name_the_row() {
        let e = parse_csv("1\n2\nabc\n").unwrap_err().to_string();
        assert!(e.contains("row 3"), "{e}");
        assert!(parse_csv("value\n").is_err());
        assert!(parse_csv("1\nNaN\n")
            .unwrap_err()
            .to_string()
            .contains("row 2"));
        assert!(matches!(
            load_csv("/nonexistent/file.csv"),
            Err(BenchError::Data(_))
        ));
    }

    #[test]
    fn synthetic_series() {
        let a = generate_synthetic(4, 20, 0.0, 0.0, 1).unwrap();
        for t in 4..20 {
            assert_eq!(a.values()[t], a.values()[t - 4]);
        }
        let b = generate_synthetic(12, 60, 1.0, 2.0, 9).unwrap();
        assert_eq!(b, generate_synthetic(12, 60, 1.0, 2.0, 9).unwrap());
        assert_ne!(b, generate_synthetic(12, 60, 1.0, 2.0, 10).unwrap());
        assert!(generate_synthetic(12, 23, 1.0, 0.0, 1).is_err());
        assert!(generate_synthetic(12, 48, 1.0, -1.0, 1).is_err());
    }

    #[test]
    fn seasonality_fires_on_synthetic_monte_carlo() {
        let fired = (0..20)
            .filter(|&seed| {
                let y = generate_synthetic(12, 144, 1.0, 0.05 * SYNTH_BASE, seed).unwrap();
                detect_seasonality(&y, 12).unwrap()
            })
            .count();
        assert!(fired >= 19, "{fired}/20");
    }
}

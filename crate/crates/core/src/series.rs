//! Time-series container, correlogram, seasonality detection, normalization
//! and forecast error metrics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// An ordered sequence of finite observations with an optional seasonal
/// period hint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    period: Option<usize>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("time series must contain at least one observation"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("observation {i} is not finite")));
        }
        Ok(Self {
            values,
            period: None,
        })
    }

    /// Attaches a seasonal period, which must satisfy `2 <= s <= len / 2`.
    pub fn with_period(mut self, s: usize) -> Result<Self> {
        if s < 2 || s > self.values.len() / 2 {
            return Err(invalid(format!(
                "period {s} outside [2, {}] for a series of length {}",
                self.values.len() / 2,
                self.values.len()
            )));
        }
        self.period = Some(s);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: a series holds at least one observation.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Keeps the period hint only if it is still valid for `values`.
    fn derive(&self, values: Vec<f64>) -> Result<Self> {
        let series = Self::new(values)?;
        match self.period {
            Some(s) if s >= 2 && s <= series.len() / 2 => series.with_period(s),
            _ => Ok(series),
        }
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample autocorrelation `r_k` using the full-series mean in both the
/// numerator and the denominator.
pub fn autocorrelation(series: &TimeSeries, lag: usize) -> Result<f64> {
    let y = series.values();
    let n = y.len();
    if n < 2 {
        return Err(invalid("autocorrelation needs at least two observations"));
    }
    if lag >= n {
        return Err(invalid(format!("lag {lag} out of range for length {n}")));
    }
    let m = mean(y);
    let denom: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
    if denom <= 0.0 {
        return Err(Error::Degenerate(
            "constant series has zero variance".into(),
        ));
    }
    if lag == 0 {
        return Ok(1.0);
    }
    let num: f64 = y[..n - lag]
        .iter()
        .zip(&y[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    Ok(num / denom)
}

/// `r_0 ..= r_max_lag`.
pub fn correlogram(series: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    (0..=max_lag).map(|k| autocorrelation(series, k)).collect()
}

/// The `2 / sqrt(N)` significance threshold of the seasonality rule.
pub fn seasonality_threshold(n: usize) -> f64 {
    2.0 / (n as f64).sqrt()
}

/// Rule-of-thumb seasonality test.
///
/// For `N <= 60` requires `r_s > 2/sqrt(N)`; for longer series both `r_s`
/// and `r_2s` must exceed the threshold. Ties fail.
pub fn detect_seasonality(series: &TimeSeries, candidate_s: usize) -> Result<bool> {
    let n = series.len();
    if candidate_s == 0 {
        return Err(invalid("candidate period must be positive"));
    }
    let long = n > 60;
    let needed = if long { 2 * candidate_s } else { candidate_s };
    if needed > n.saturating_sub(1) {
        return Err(invalid(format!(
            "candidate period {candidate_s} too large for a series of length {n}"
        )));
    }
    let threshold = seasonality_threshold(n);
    let r_s = autocorrelation(series, candidate_s)?;
    if !(r_s > threshold) {
        return Ok(false);
    }
    if long {
        let r_2s = autocorrelation(series, 2 * candidate_s)?;
        return Ok(r_2s > threshold);
    }
    Ok(true)
}

/// Min-max map onto `[0, 1]`, frozen from the data it was fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMap {
    y_min: f64,
    y_max: f64,
}

impl NormalizationMap {
    pub fn new(y_min: f64, y_max: f64) -> Result<Self> {
        if !(y_min.is_finite() && y_max.is_finite()) {
            return Err(invalid("normalization bounds must be finite"));
        }
        if !(y_min < y_max) {
            return Err(Error::Degenerate(format!(
                "normalization range [{y_min}, {y_max}] is empty"
            )));
        }
        Ok(Self { y_min, y_max })
    }

    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("cannot fit a normalization map on no data"));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(lo, hi)
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn range(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let r = self.range();
        values.iter().map(|v| (v - self.y_min) / r).collect()
    }

    /// Inverse map; values outside `[0, 1]` extrapolate linearly.
    pub fn invert(&self, values: &[f64]) -> Vec<f64> {
        let r = self.range();
        values.iter().map(|v| v * r + self.y_min).collect()
    }
}

/// Normalizes a series onto `[0, 1]` using its own min and max.
pub fn normalize(series: &TimeSeries) -> Result<(TimeSeries, NormalizationMap)> {
    let map = NormalizationMap::fit(series.values())?;
    let scaled = series.derive(map.apply(series.values()))?;
    Ok((scaled, map))
}

pub fn denormalize(values: &[f64], map: &NormalizationMap) -> Vec<f64> {
    map.invert(values)
}

/// Order-preserving split into the first `n_train` observations and the rest.
pub fn split(series: &TimeSeries, n_train: usize) -> Result<(TimeSeries, TimeSeries)> {
    let n = series.len();
    if n_train == 0 || n_train >= n {
        return Err(invalid(format!(
            "training size {n_train} must lie in [1, {}]",
            n.saturating_sub(1)
        )));
    }
    let (a, b) = series.values().split_at(n_train);
    Ok((series.derive(a.to_vec())?, series.derive(b.to_vec())?))
}

/// Mean absolute and mean squared forecast error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mae: f64,
    pub mse: f64,
}

pub fn evaluate(actual: &[f64], forecast: &[f64]) -> Result<ErrorMetrics> {
    if actual.is_empty() {
        return Err(invalid("cannot evaluate an empty forecast"));
    }
    if actual.len() != forecast.len() {
        return Err(invalid(format!(
            "actual has {} values but forecast has {}",
            actual.len(),
            forecast.len()
        )));
    }
    let n = actual.len() as f64;
    let (abs, sq) = actual
        .iter()
        .zip(forecast)
        .fold((0.0, 0.0), |(abs, sq), (a, f)| {
            let e = a - f;
            (abs + e.abs(), sq + e * e)
        });
    Ok(ErrorMetrics {
        mae: abs / n,
        mse: sq / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn random_series(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect()
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(TimeSeries::new(vec![]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn period_hint_bounds() {
        assert!(ts(&[1.0; 8]).with_period(4).is_ok());
        assert!(ts(&[1.0; 8]).with_period(5).is_err());
        assert!(ts(&[1.0; 8]).with_period(1).is_err());
    }

    #[test]
    fn lag_zero_is_one() {
        assert_eq!(
            autocorrelation(&ts(&[3.0, 1.0, 4.0, 1.0, 5.0]), 0).unwrap(),
            1.0
        );
    }

    #[test]
    fn hand_evaluated_lag_one() {
        // mean 2.5: numerator (-1.5)(-0.5) + (-0.5)(0.5) + (0.5)(1.5) = 1.25, denominator 5
        assert_abs_diff_eq!(
            autocorrelation(&ts(&[1.0, 2.0, 3.0, 4.0]), 1).unwrap(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn autocorrelation_errors() {
        assert!(matches!(
            autocorrelation(&ts(&[2.0, 2.0, 2.0]), 1),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            autocorrelation(&ts(&[1.0, 2.0, 3.0]), 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(autocorrelation(&ts(&[1.0]), 0).is_err());
    }

    #[test]
    fn seasonality_short_branch_uses_single_lag() {
        // period-4 pattern, N = 16 <= 60
        let v: Vec<f64> = (0..16).map(|t| [1.0, 5.0, 8.0, 2.0][t % 4]).collect();
        assert!(detect_seasonality(&ts(&v), 4).unwrap());
        assert!(!detect_seasonality(&ts(&v), 2).unwrap());
    }

    #[test]
    fn seasonality_rejects_large_candidates() {
        let v = random_series(1, 100);
        assert!(detect_seasonality(&ts(&v), 50).is_err());
        assert!(detect_seasonality(&ts(&v), 49).is_ok());
        let short = random_series(2, 20);
        assert!(detect_seasonality(&ts(&short), 20).is_err());
        assert!(detect_seasonality(&ts(&short), 19).is_ok());
    }

    #[test]
    fn iid_noise_rarely_looks_seasonal() {
        let mut fired = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
            if detect_seasonality(&ts(&v), 12).unwrap() {
                fired += 1;
            }
        }
        assert!(fired <= 10, "noise flagged seasonal {fired}/100 times");
    }

    #[test]
    fn normalize_examples() {
        let (n, map) = normalize(&ts(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(n.values(), &[0.0, 0.5, 1.0]);
        assert_eq!((map.y_min(), map.y_max()), (2.0, 6.0));
        let (n, _) = normalize(&ts(&[0.0, 1.0])).unwrap();
        assert_eq!(n.values(), &[0.0, 1.0]);
        assert!(matches!(
            normalize(&ts(&[3.0, 3.0])),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn denormalize_examples() {
        let map = NormalizationMap::new(2.0, 6.0).unwrap();
        assert_eq!(denormalize(&[0.0, 0.5, 1.0], &map), vec![2.0, 4.0, 6.0]);
        assert_eq!(denormalize(&[0.0], &map), vec![2.0]);
        // extrapolation outside [0, 1]
        assert_eq!(denormalize(&[1.5], &map), vec![8.0]);
        assert!(NormalizationMap::new(1.0, 1.0).is_err());
    }

    #[test]
    fn split_examples() {
        let v: Vec<f64> = (0..144).map(f64::from).collect();
        let (a, b) = split(&ts(&v), 132).unwrap();
        assert_eq!((a.len(), b.len()), (132, 12));
        let v: Vec<f64> = (0..187).map(f64::from).collect();
        let (a, b) = split(&ts(&v), 168).unwrap();
        assert_eq!((a.len(), b.len()), (168, 19));
        let (a, b) = split(&ts(&[1.0, 2.0]), 1).unwrap();
        assert_eq!((a.values(), b.values()), (&[1.0][..], &[2.0][..]));
        assert!(split(&ts(&[1.0, 2.0]), 0).is_err());
        assert!(split(&ts(&[1.0, 2.0]), 2).is_err());
    }

    #[test]
    fn split_keeps_valid_period_hint_only() {
        let v: Vec<f64> = (0..48).map(f64::from).collect();
        let s = ts(&v).with_period(12).unwrap();
        let (a, b) = split(&s, 36).unwrap();
        assert_eq!(a.period(), Some(12));
        assert_eq!(b.period(), None);
    }

    #[test]
    fn evaluate_examples() {
        let m = evaluate(&[1.0, 2.0], &[2.0, 4.0]).unwrap();
        assert_eq!((m.mae, m.mse), (1.5, 2.5));
        let m = evaluate(&[3.0, -1.0], &[3.0, -1.0]).unwrap();
        assert_eq!((m.mae, m.mse), (0.0, 0.0));
        assert!(evaluate(&[], &[]).is_err());
        assert!(evaluate(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn power_mean_inequality_on_seeded_pairs() {
        for seed in 0..50 {
            let a = random_series(seed, 20);
            let f = random_series(seed + 1000, 20);
            let m = evaluate(&a, &f).unwrap();
            assert!(m.mae <= m.mse.sqrt() + 1e-12);
        }
    }

    #[test]
    fn bounded_on_seeded_series() {
        for seed in 0..100 {
            let s = ts(&random_series(seed, 40));
            for k in 0..40 {
                let r = autocorrelation(&s, k).unwrap();
                assert!(r.abs() <= 1.0 + 1e-12, "seed {seed} lag {k}: {r}");
            }
        }
    }

    #[test]
    fn normalization_round_trip_on_seeded_series() {
        for seed in 0..100 {
            let v = random_series(seed, 30);
            let (n, map) = normalize(&ts(&v)).unwrap();
            let back = denormalize(n.values(), &map);
            for (x, y) in v.iter().zip(&back) {
                assert!((x - y).abs() < 1e-12 * map.range());
            }
        }
    }

    proptest! {
        #[test]
        fn affine_invariance(
            v in prop::collection::vec(-100.0f64..100.0, 8..40),
            a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
            b in -50.0f64..50.0,
        ) {
            let s = ts(&v);
            prop_assume!(autocorrelation(&s, 0).is_ok());
            let t = ts(&v.iter().map(|x| a * x + b).collect::<Vec<_>>());
            for k in 0..v.len() {
                let r1 = autocorrelation(&s, k).unwrap();
                let r2 = autocorrelation(&t, k).unwrap();
                prop_assert!((r1 - r2).abs() < 1e-10);
            }
        }

        #[test]
        fn seasonality_unchanged_by_normalization(
            v in prop::collection::vec(0.0f64..100.0, 30..90),
            s in 2usize..10,
        ) {
            let series = ts(&v);
            prop_assume!(autocorrelation(&series, 0).is_ok());
            let (n, _) = normalize(&series).unwrap();
            prop_assert_eq!(
                detect_seasonality(&series, s).unwrap(),
                detect_seasonality(&n, s).unwrap()
            );
        }

        #[test]
        fn evaluate_is_symmetric(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..30),
        ) {
            let (a, f): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assert_eq!(evaluate(&a, &f).unwrap(), evaluate(&f, &a).unwrap());
        }

        #[test]
        fn normalize_then_denormalize_is_identity(
            v in prop::collection::vec(-1e6f64..1e6, 2..50),
        ) {
            let s = ts(&v);
            prop_assume!(NormalizationMap::fit(&v).is_ok());
            let (n, map) = normalize(&s).unwrap();
            for (x, y) in v.iter().zip(denormalize(n.values(), &map)) {
                prop_assert!((x - y).abs() <= 1e-12 * map.range().max(x.abs()));
            }
            let again = map.apply(&denormalize(n.values(), &map));
            for (x, y) in n.values().iter().zip(again) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}

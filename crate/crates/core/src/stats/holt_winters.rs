use serde::{Deserialize, Serialize};

use super::simplex::nelder_mead;
use crate::error::{invalid, Error, Result};

/// Smoothing constants for level, trend and seasonal index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HwParams {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl HwParams {
    pub fn new(alpha: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            gamma,
            delta,
        };
        if [alpha, gamma, delta]
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
        {
            Ok(p)
        } else {
            Err(invalid(format!(
                "smoothing constants must lie in [0, 1], got {p:?}"
            )))
        }
    }

    fn clamped(p: &[f64]) -> Self {
        Self {
            alpha: p[0].clamp(0.0, 1.0),
            gamma: p[1].clamp(0.0, 1.0),
            delta: p[2].clamp(0.0, 1.0),
        }
    }
}

/// Multiplicative Holt-Winters state. The seasonal indices form a ring;
/// `pos` is the slot of the next observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoltWintersState {
    pub level: f64,
    pub trend: f64,
    pub indices: Vec<f64>,
    pub pos: usize,
    pub params: HwParams,
}

impl HoltWintersState {
    pub fn new(level: f64, trend: f64, indices: Vec<f64>, params: HwParams) -> Result<Self> {
        if indices.is_empty() || indices.iter().any(|i| !(*i > 0.0)) {
            return Err(Error::Domain("seasonal indices must be positive".into()));
        }
        Ok(Self {
            level,
            trend,
            indices,
            pos: 0,
            params,
        })
    }

    pub fn period(&self) -> usize {
        self.indices.len()
    }

    /// One smoothing step with observation `y`.
    pub fn update(&mut self, y: f64) -> Result<()> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!(
                "multiplicative Holt-Winters needs positive observations, got {y}"
            )));
        }
        let HwParams {
            alpha,
            gamma,
            delta,
        } = self.params;
        let prev = self.indices[self.pos];
        let level = alpha * (y / prev) + (1.0 - alpha) * (self.level + self.trend);
        self.trend = gamma * (level - self.level) + (1.0 - gamma) * self.trend;
        self.indices[self.pos] = delta * (y / level) + (1.0 - delta) * prev;
        self.level = level;
        self.pos = (self.pos + 1) % self.period();
        Ok(())
    }

    /// `(L + k·T)·I` with the index of the season `k` steps ahead.
    pub fn forecast(&self, k: usize) -> Result<f64> {
        if k < 1 {
            return Err(invalid("forecast step must be at least 1"));
        }
        let i = self.indices[(self.pos + k - 1) % self.period()];
        Ok((self.level + k as f64 * self.trend) * i)
    }

    pub fn forecast_horizon(&self, horizon: usize) -> Result<Vec<f64>> {
        (1..=horizon).map(|k| self.forecast(k)).collect()
    }
}

/// Level from the first season's mean, trend from the change between the
/// first two season means, indices from `y / season mean` averaged over both
/// seasons and rescaled to sum to `s`.
pub fn hw_init(series: &[f64], s: usize, params: HwParams) -> Result<HoltWintersState> {
    if s < 1 {
        return Err(invalid("seasonal period must be positive"));
    }
    if series.len() < 2 * s {
        return Err(invalid(format!(
            "need two full seasons ({}) to initialise, got {}",
            2 * s,
            series.len()
        )));
    }
    if let Some(t) = series.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!(
            "multiplicative Holt-Winters needs positive observations (index {t} is {})",
            series[t]
        )));
    }
    let m1 = series[..s].iter().sum::<f64>() / s as f64;
    let m2 = series[s..2 * s].iter().sum::<f64>() / s as f64;
    let raw: Vec<f64> = (0..s)
        .map(|i| (series[i] / m1 + series[s + i] / m2) / 2.0)
        .collect();
    let total: f64 = raw.iter().sum();
    let indices = raw.iter().map(|v| v * s as f64 / total).collect();
    HoltWintersState::new(m1, (m2 - m1) / s as f64, indices, params)
}

/// Initialises on the first two seasons and smooths from observation `s`
/// onward, returning the one-step-ahead SSE over that range and the final state.
pub fn hw_filter(series: &[f64], s: usize, params: HwParams) -> Result<(f64, HoltWintersState)> {
    let mut state = hw_init(series, s, params)?;
    let mut sse = 0.0;
    for &y in &series[s..] {
        let e = y - state.forecast(1)?;
        sse += e * e;
        state.update(y)?;
    }
    if !sse.is_finite() || !state.level.is_finite() {
        return Err(Error::Numeric("Holt-Winters recursion diverged".into()));
    }
    Ok((sse, state))
}

/// Minimizes the one-step SSE over `[0, 1]³`: a 0.1 grid, then a simplex
/// refinement with parameters clamped to the box.
pub fn fit_hw(series: &[f64], s: usize) -> Result<HoltWintersState> {
    if series.len() < 3 * s {
        return Err(invalid(format!(
            "need at least {} observations to fit Holt-Winters, got {}",
            3 * s,
            series.len()
        )));
    }
    hw_init(series, s, HwParams::clamped(&[0.0; 3]))?;
    let objective = |p: &[f64]| {
        hw_filter(series, s, HwParams::clamped(p))
            .map(|(e, st)| {
                if st.indices.iter().all(|i| *i > 0.0) {
                    e
                } else {
                    f64::INFINITY
                }
            })
            .unwrap_or(f64::INFINITY)
    };
    let mut best = (vec![0.5; 3], f64::INFINITY);
    for a in 0..=10 {
        for g in 0..=10 {
            for d in 0..=10 {
                let p = [a as f64 / 10.0, g as f64 / 10.0, d as f64 / 10.0];
                let v = objective(&p);
                if v < best.1 {
                    best = (p.to_vec(), v);
                }
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Fit(
            "one-step SSE is not finite anywhere on the grid".into(),
        ));
    }
    let refined = nelder_mead(objective, &best.0, 0.05, 1e-8, 2000);
    let p = if refined.1 <= best.1 {
        refined.0
    } else {
        best.0
    };
    Ok(hw_filter(series, s, HwParams::clamped(&p))?.1)
}

use serde::{Deserialize, Serialize};

use super::simplex::nelder_mead;
use crate::error::{invalid, Error, Result};

/// Upper limit on `|θ|` and `|Θ|` during fitting.
const BOX: f64 = 0.99;
const GRID_STEP: f64 = 0.05;

/// SARIMA(0,1,1)×(0,1,1)_s:
/// `(1 − B)(1 − B^s) y_t = (1 − θB)(1 − ΘB^s) Z_t`.
///
/// Note the minus signs on the MA polynomials: a positive `θ` means the
/// forecast discounts the previous shock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaAirline {
    pub theta: f64,
    pub seasonal_theta: f64,
    pub s: usize,
    /// CSS divided by the number of differenced observations.
    pub residual_variance: f64,
    pub css: f64,
}

/// `(1 − B)^d (1 − B^s)^D y`, with `d, D ∈ {0, 1}`.
pub fn difference(values: &[f64], d: usize, seasonal_d: usize, s: usize) -> Result<Vec<f64>> {
    if d > 1 || seasonal_d > 1 {
        return Err(invalid("only d, D in {0, 1} are supported"));
    }
    if seasonal_d == 1 && s == 0 {
        return Err(invalid("seasonal differencing needs a positive period"));
    }
    let lost = d + seasonal_d * s;
    if values.len() <= lost {
        return Err(invalid(format!(
            "series of length {} is too short to difference away {lost} observations",
            values.len()
        )));
    }
    let mut w = values.to_vec();
    if d == 1 {
        w = w.windows(2).map(|p| p[1] - p[0]).collect();
    }
    if seasonal_d == 1 {
        w = (s..w.len()).map(|t| w[t] - w[t - s]).collect();
    }
    Ok(w)
}

fn check_coefficients(theta: f64, seasonal_theta: f64) -> Result<()> {
    if !(theta.abs() < 1.0 && seasonal_theta.abs() < 1.0) {
        return Err(invalid(format!(
            "MA coefficients must lie strictly inside (-1, 1), got ({theta}, {seasonal_theta})"
        )));
    }
    Ok(())
}

/// Innovations `Z_t` of the differenced series, from
/// `Z_t = W_t + θZ_{t−1} + ΘZ_{t−s} − θΘZ_{t−s−1}` with pre-sample `Z = 0`.
pub fn sarima_residuals(
    series: &[f64],
    theta: f64,
    seasonal_theta: f64,
    s: usize,
) -> Result<Vec<f64>> {
    check_coefficients(theta, seasonal_theta)?;
    let w = difference(series, 1, 1, s)?;
    Ok(residuals_of(&w, theta, seasonal_theta, s))
}

fn residuals_of(w: &[f64], theta: f64, big: f64, s: usize) -> Vec<f64> {
    let mut z = vec![0.0; w.len()];
    for t in 0..w.len() {
        let mut v = w[t];
        if t >= 1 {
            v += theta * z[t - 1];
        }
        if t >= s {
            v += big * z[t - s];
        }
        if t > s {
            v -= theta * big * z[t - s - 1];
        }
        z[t] = v;
    }
    z
}

/// Conditional sum of squares `Σ Z_t²`.
pub fn sarima_css(series: &[f64], theta: f64, seasonal_theta: f64, s: usize) -> Result<f64> {
    let css: f64 = sarima_residuals(series, theta, seasonal_theta, s)?
        .iter()
        .map(|z| z * z)
        .sum();
    if !css.is_finite() {
        return Err(Error::Numeric("CSS recursion diverged".into()));
    }
    Ok(css)
}

/// Fits `(θ, Θ)` by conditional least squares: a 0.05 grid over the open box
/// `(−0.99, 0.99)²` and a simplex refinement from the best cell.
pub fn fit_sarima(series: &[f64], s: usize) -> Result<SarimaAirline> {
    if s < 1 {
        return Err(invalid("seasonal period must be positive"));
    }
    if series.len() < 3 * s {
        return Err(invalid(format!(
            "need at least {} observations to fit the airline model, got {}",
            3 * s,
            series.len()
        )));
    }
    let w = difference(series, 1, 1, s)?;
    let css = |p: &[f64]| {
        if p[0].abs() >= BOX || p[1].abs() >= BOX {
            return f64::INFINITY;
        }
        let v: f64 = residuals_of(&w, p[0], p[1], s).iter().map(|z| z * z).sum();
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let steps = (0.95 / GRID_STEP).round() as i32;
    let mut best = (vec![0.0, 0.0], css(&[0.0, 0.0]));
    for i in -steps..=steps {
        for j in -steps..=steps {
            let p = [i as f64 * GRID_STEP, j as f64 * GRID_STEP];
            let v = css(&p);
            if v < best.1 {
                best = (p.to_vec(), v);
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Fit("CSS is not finite anywhere on the grid".into()));
    }
    let refined = nelder_mead(css, &best.0, GRID_STEP / 2.0, 1e-6, 2000);
    let (p, v) = if refined.1 <= best.1 { refined } else { best };
    Ok(SarimaAirline {
        theta: p[0],
        seasonal_theta: p[1],
        s,
        residual_variance: v / w.len() as f64,
        css: v,
    })
}

/// Forecasts `horizon` steps past the end of `history` with future shocks set
/// to zero: `ŷ_t = y_{t−1} + y_{t−s} − y_{t−s−1} − θZ_{t−1} − ΘZ_{t−s} + θΘZ_{t−s−1}`.
pub fn forecast_sarima(model: &SarimaAirline, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
    if horizon < 1 {
        return Err(invalid("forecast horizon must be at least 1"));
    }
    let s = model.s;
    check_coefficients(model.theta, model.seasonal_theta)?;
    if history.len() < s + 1 {
        return Err(invalid(format!(
            "history of length {} is shorter than s + 1 = {}",
            history.len(),
            s + 1
        )));
    }
    // shocks indexed like the observations; the first s + 1 are pre-sample zeros
    let mut z = vec![0.0; s + 1];
    if history.len() > s + 1 {
        z.extend(sarima_residuals(
            history,
            model.theta,
            model.seasonal_theta,
            s,
        )?);
    }
    let (th, big) = (model.theta, model.seasonal_theta);
    let mut y = history.to_vec();
    for _ in 0..horizon {
        let t = y.len();
        let zt = |i: usize| z.get(i).copied().unwrap_or(0.0);
        let f = y[t - 1] + y[t - s] - y[t - s - 1] - th * zt(t - 1) - big * zt(t - s)
            + th * big * zt(t - s - 1);
        y.push(f);
    }
    Ok(y.split_off(history.len()))
}

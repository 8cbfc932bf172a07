//! Classical baselines: the airline SARIMA model and multiplicative
//! Holt-Winters smoothing.

mod holt_winters;
mod sarima;
mod simplex;

pub use holt_winters::{fit_hw, hw_filter, hw_init, HoltWintersState, HwParams};
pub use sarima::{
    difference, fit_sarima, forecast_sarima, sarima_css, sarima_residuals, SarimaAirline,
};

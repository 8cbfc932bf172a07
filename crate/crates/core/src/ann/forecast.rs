use super::network::{Sann, CONTEXT_INIT};
use super::patterns::{build_patterns_with, PatternLayout};
use super::topology::SannTopology;
use crate::error::{invalid, Result};

/// Context after sweeping the patterns of `history` in order, starting from
/// the initial context. Empty for feedforward topologies.
pub fn warm_context(
    params: &[f64],
    topology: &SannTopology,
    history: &[f64],
    layout: PatternLayout,
) -> Result<Vec<f64>> {
    let net = Sann::new(topology, params)?;
    if !net.is_elman() {
        return Ok(Vec::new());
    }
    let mut ctx = vec![CONTEXT_INIT; topology.h()];
    if history.len() < 2 * topology.s() {
        return Ok(ctx);
    }
    let patterns = build_patterns_with(history, topology.s(), layout)?;
    let mut hidden = vec![0.0; topology.h()];
    for (x, _) in patterns.iter() {
        net.hidden(x, &ctx, &mut hidden);
        ctx.copy_from_slice(&hidden);
    }
    Ok(ctx)
}

/// Iterated multi-season forecast with sliding-window warm-up.
pub fn forecast_iterated(
    params: &[f64],
    topology: &SannTopology,
    history: &[f64],
    horizon: usize,
) -> Result<Vec<f64>> {
    forecast_iterated_with(params, topology, history, PatternLayout::Sliding, horizon)
}

/// Feeds the last observed season through the network, appends the `s`
/// outputs as pseudo-observations and repeats until `horizon` values exist;
/// the last block is truncated. Elman nets first warm their context over the
/// training patterns of `history` cut with `layout`.
pub fn forecast_iterated_with(
    params: &[f64],
    topology: &SannTopology,
    history: &[f64],
    layout: PatternLayout,
    horizon: usize,
) -> Result<Vec<f64>> {
    if horizon < 1 {
        return Err(invalid("forecast horizon must be at least 1"));
    }
    let s = topology.s();
    if history.len() < s {
        return Err(invalid(format!(
            "history of length {} is shorter than one season ({s})",
            history.len()
        )));
    }
    let net = Sann::new(topology, params)?;
    let mut ctx = warm_context(params, topology, history, layout)?;
    let mut input = history[history.len() - s..].to_vec();
    let mut hidden = vec![0.0; topology.h()];
    let mut out = vec![0.0; s];
    let mut forecasts = Vec::with_capacity(horizon + s);
    while forecasts.len() < horizon {
        net.hidden(&input, &ctx, &mut hidden);
        net.output(&hidden, &mut out);
        if net.is_elman() {
            ctx.copy_from_slice(&hidden);
        }
        forecasts.extend_from_slice(&out);
        input.copy_from_slice(&out);
    }
    forecasts.truncate(horizon);
    Ok(forecasts)
}

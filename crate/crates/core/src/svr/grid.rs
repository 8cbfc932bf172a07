use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_dual, SvrHyper};
use crate::error::{invalid, Error, Result};

/// Candidate `C` and `σ` values with a fixed `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrGrid {
    pub c: Vec<f64>,
    pub sigma: Vec<f64>,
    pub epsilon: f64,
}

impl Default for SvrGrid {
    fn default() -> Self {
        Self {
            c: (-2..=10).map(|e| 2f64.powi(e)).collect(),
            sigma: (-3..=4).map(|e| 2f64.powi(e)).collect(),
            epsilon: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub hyper: SvrHyper,
    pub validation_mse: f64,
    /// `(C, σ, validation MSE)` per cell; `None` when the fit failed.
    pub cells: Vec<(f64, f64, Option<f64>)>,
}

/// Fits every cell on all but the last `val_len` pairs and scores one-step
/// MSE on the held-out tail.
pub fn grid_search(
    inputs: &[Vec<f64>],
    targets: &[f64],
    grid: &SvrGrid,
    val_len: usize,
) -> Result<GridResult> {
    if grid.c.is_empty() || grid.sigma.is_empty() {
        return Err(invalid("grid must have at least one C and one sigma"));
    }
    if inputs.len() != targets.len() {
        return Err(invalid("inputs and targets must have equal lengths"));
    }
    if val_len == 0 || val_len + 2 > targets.len() {
        return Err(invalid(format!(
            "cannot hold out {val_len} of {} pairs for validation",
            targets.len()
        )));
    }
    let cut = targets.len() - val_len;
    let cells: Vec<(f64, f64)> = grid
        .c
        .iter()
        .flat_map(|&c| grid.sigma.iter().map(move |&s| (c, s)))
        .collect();
    let scored: Vec<(f64, f64, Option<f64>)> = cells
        .par_iter()
        .map(|&(c, sigma)| {
            let score = SvrHyper::new(c, sigma, grid.epsilon)
                .and_then(|h| solve_dual(&inputs[..cut], &targets[..cut], &h))
                .and_then(|m| {
                    let mut sum = 0.0;
                    for (x, y) in inputs[cut..].iter().zip(&targets[cut..]) {
                        let e = m.predict(x)? - y;
                        sum += e * e;
                    }
                    Ok(sum / val_len as f64)
                })
                .ok()
                .filter(|v| v.is_finite());
            (c, sigma, score)
        })
        .collect();
    let mut best: Option<(f64, f64, f64)> = None;
    for &(c, sigma, score) in &scored {
        let Some(mse) = score else { continue };
        let better = match best {
            None => true,
            Some((bc, bs, bm)) => mse < bm || (mse == bm && (c < bc || (c == bc && sigma > bs))),
        };
        if better {
            best = Some((c, sigma, mse));
        }
    }
    let (c, sigma, mse) = best.ok_or_else(|| Error::Fit("every grid cell failed".into()))?;
    Ok(GridResult {
        hyper: SvrHyper::new(c, sigma, grid.epsilon)?,
        validation_mse: mse,
        cells: scored,
    })
}

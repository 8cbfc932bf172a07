use nalgebra::{DMatrix, DVector};

use super::gradient::jacobian_unchecked;
use super::{init_params, Monitor, Split, StopReason, TrainOptions, TrainTrace};
use crate::ann::{NetKind, PatternSet, Sann, SannTopology};
use crate::error::{Error, Result};
use crate::ParameterVector;

const JITTER: f64 = 1e-10;

/// Levenberg–Marquardt from [`init_params`]`(topology, opts.seed)`.
pub fn train_lm(
    topology: &SannTopology,
    patterns: &PatternSet,
    opts: &TrainOptions,
) -> Result<(ParameterVector, TrainTrace)> {
    let start = init_params(topology, opts.seed).into_inner();
    train_lm_from(topology, patterns, start, opts)
}

/// Levenberg–Marquardt on a feedforward net from the given starting point.
///
/// Each epoch solves `(JᵀJ + λI)δ = −Jᵀr`, dividing `λ` by `lm_factor` when
/// the step lowers the training SSE and multiplying it otherwise, retrying
/// until a step is accepted or `λ` passes `lm_lambda_max`. With a validation
/// split the parameters of the best validation epoch are returned.
pub fn train_lm_from(
    topology: &SannTopology,
    patterns: &PatternSet,
    start: Vec<f64>,
    opts: &TrainOptions,
) -> Result<(ParameterVector, TrainTrace)> {
    opts.validate()?;
    if topology.kind() == NetKind::Elman {
        return Err(Error::Unsupported(
            "Levenberg–Marquardt is only used for feedforward networks".into(),
        ));
    }
    let split = Split::new(patterns, opts.validation)?;
    let mut w = start;
    let net = Sann::new(topology, &w)?;
    net.check_patterns(patterns)?;
    let mut err = net.sse_from(&split.train, 0);
    if !err.is_finite() {
        return Err(Error::Training("initial SSE is not finite".into()));
    }
    let validate = |w: &[f64]| {
        split
            .cut
            .map(|cut| Sann::new(topology, w).map(|n| n.sse_from(split.all, cut)))
            .transpose()
    };

    let mut trace = TrainTrace::new(err);
    let mut monitor = Monitor::new(opts.patience);
    if let Some(v) = validate(&w)? {
        monitor.observe(v, &w);
    }
    let mut lambda = opts.lm_lambda0;
    for _ in 0..opts.max_epochs {
        let net = Sann::new(topology, &w)?;
        let jac = jacobian_unchecked(&net, &split.train);
        let r = DVector::from_vec(super::residuals(&w, topology, &split.train)?);
        let g = jac.tr_mul(&r);
        if g.norm() <= opts.min_grad {
            trace.stop = StopReason::Converged;
            break;
        }
        let a = jac.tr_mul(&jac);
        let mut accepted = false;
        while lambda <= opts.lm_lambda_max {
            let delta = solve_damped(&a, &g, lambda)?;
            let cand: Vec<f64> = w.iter().zip(delta.iter()).map(|(x, d)| x + d).collect();
            let c = Sann::new(topology, &cand)?.sse_from(&split.train, 0);
            if c < err {
                w = cand;
                err = c;
                lambda /= opts.lm_factor;
                accepted = true;
                break;
            }
            lambda *= opts.lm_factor;
        }
        let v = validate(&w)?;
        trace.push(err, v, accepted);
        if !accepted {
            trace.stop = StopReason::Converged;
            break;
        }
        if let Some(v) = v {
            if monitor.observe(v, &w) {
                trace.stop = StopReason::EarlyStop;
                break;
            }
        }
    }
    let best = match split.cut {
        Some(_) => monitor.best_params().unwrap_or(w),
        None => w,
    };
    Ok((
        ParameterVector::new(best).map_err(|e| Error::Training(e.to_string()))?,
        trace,
    ))
}

/// Solves `(A + λI)δ = −g` by Cholesky, retrying once with a small jitter.
fn solve_damped(a: &DMatrix<f64>, g: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let n = a.nrows();
    for jitter in [0.0, JITTER] {
        let m = a + DMatrix::identity(n, n) * (lambda + jitter);
        if let Some(ch) = m.cholesky() {
            let delta = -ch.solve(g);
            if delta.iter().all(|d| d.is_finite()) {
                return Ok(delta);
            }
        }
    }
    Err(Error::Training(format!(
        "normal equations are singular at λ = {lambda:e}"
    )))
}

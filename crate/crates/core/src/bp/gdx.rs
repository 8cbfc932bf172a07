use super::gradient::gradient_into;
use super::{init_params, Monitor, Split, StopReason, TrainOptions, TrainTrace};
use crate::ann::{PatternSet, Sann, SannTopology};
use crate::error::{Error, Result};
use crate::ParameterVector;

/// Gradient descent with momentum and adaptive learning rate, from
/// [`init_params`]`(topology, opts.seed)`. Works for both network kinds.
pub fn train_gdx(
    topology: &SannTopology,
    patterns: &PatternSet,
    opts: &TrainOptions,
) -> Result<(ParameterVector, TrainTrace)> {
    let start = init_params(topology, opts.seed).into_inner();
    train_gdx_from(topology, patterns, start, opts)
}

pub fn train_gdx_from(
    topology: &SannTopology,
    patterns: &PatternSet,
    start: Vec<f64>,
    opts: &TrainOptions,
) -> Result<(ParameterVector, TrainTrace)> {
    Sann::new(topology, &start)?.check_patterns(patterns)?;
    let split = Split::new(patterns, opts.validation)?;
    let objective = |w: &[f64]| Sann::new(topology, w).map(|n| n.sse_from(&split.train, 0));
    let grad = |w: &[f64], g: &mut [f64]| {
        let net = Sann::new(topology, w)?;
        gradient_into(&net, &split.train, g);
        Ok(())
    };
    let (w, trace) = match split.cut {
        Some(cut) => {
            let validate = |w: &[f64]| Sann::new(topology, w).map(|n| n.sse_from(split.all, cut));
            gdx_minimize(start, objective, grad, Some(validate), opts)?
        }
        None => gdx_minimize(
            start,
            objective,
            grad,
            None::<fn(&[f64]) -> Result<f64>>,
            opts,
        )?,
    };
    Ok((
        ParameterVector::new(w).map_err(|e| Error::Training(e.to_string()))?,
        trace,
    ))
}

/// Minimizes `objective` with the update `Δw ← mc·Δw − lr·∇`.
///
/// A step that lowers the objective multiplies `lr` by `gdx_inc`; a step that
/// raises it by more than the factor `gdx_max_perf_inc` is discarded, resets
/// the momentum and multiplies `lr` by `gdx_dec`. Anything in between is kept
/// at the same rate. With a validation closure, the best-validation point is
/// returned and training stops after `patience` epochs without improvement.
pub fn gdx_minimize<F, G, V>(
    x0: Vec<f64>,
    objective: F,
    gradient: G,
    validation: Option<V>,
    opts: &TrainOptions,
) -> Result<(Vec<f64>, TrainTrace)>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64], &mut [f64]) -> Result<()>,
    V: FnMut(&[f64]) -> Result<f64>,
{
    run(x0, objective, gradient, validation, opts).map(|(w, t, _)| (w, t))
}

/// As [`gdx_minimize`], also returning the learning rate used at each epoch.
fn run<F, G, V>(
    x0: Vec<f64>,
    mut objective: F,
    mut gradient: G,
    mut validation: Option<V>,
    opts: &TrainOptions,
) -> Result<(Vec<f64>, TrainTrace, Vec<f64>)>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64], &mut [f64]) -> Result<()>,
    V: FnMut(&[f64]) -> Result<f64>,
{
    opts.validate()?;
    let mut w = x0;
    let mut err = objective(&w)?;
    if !err.is_finite() {
        return Err(Error::Training("initial objective is not finite".into()));
    }
    let mut trace = TrainTrace::new(err);
    let mut monitor = Monitor::new(opts.patience);
    if let Some(v) = validation.as_mut() {
        monitor.observe(v(&w)?, &w);
    }
    let mut g = vec![0.0; w.len()];
    gradient(&w, &mut g)?;
    let mut dw = vec![0.0; w.len()];
    let mut cand = vec![0.0; w.len()];
    let mut lr = opts.gdx_lr0;
    let mut rates = Vec::new();
    for _ in 0..opts.max_epochs {
        if g.iter().map(|x| x * x).sum::<f64>().sqrt() <= opts.min_grad {
            trace.stop = StopReason::Converged;
            break;
        }
        rates.push(lr);
        for i in 0..w.len() {
            dw[i] = opts.gdx_momentum * dw[i] - lr * g[i];
            cand[i] = w[i] + dw[i];
        }
        let c = objective(&cand)?;
        let accepted = c.is_finite() && c <= opts.gdx_max_perf_inc * err;
        if accepted {
            if c < err {
                lr *= opts.gdx_inc;
            }
            std::mem::swap(&mut w, &mut cand);
            err = c;
            gradient(&w, &mut g)?;
        } else {
            lr *= opts.gdx_dec;
            dw.iter_mut().for_each(|d| *d = 0.0);
        }
        let v = validation.as_mut().map(|f| f(&w)).transpose()?;
        trace.push(err, v, accepted);
        if let Some(v) = v {
            if monitor.observe(v, &w) {
                trace.stop = StopReason::EarlyStop;
                break;
            }
        }
    }
    let best = match validation {
        Some(_) => monitor.best_params().unwrap_or(w),
        None => w,
    };
    Ok((best, trace, rates))
}

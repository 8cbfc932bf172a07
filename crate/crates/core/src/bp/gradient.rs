use nalgebra::DMatrix;

use crate::ann::{NetKind, PatternSet, Sann, SannTopology, CONTEXT_INIT};
use crate::error::{Error, Result};

/// Writes `∂SSE/∂w` over a chronological sweep of `patterns` into `grad`.
/// Elman context is threaded forward but treated as a constant input at each
/// step (truncated backpropagation).
pub(crate) fn gradient_into(net: &Sann<'_>, patterns: &PatternSet, grad: &mut [f64]) {
    let lay = net.lay;
    let (s, h) = (lay.s, lay.h);
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut ctx = vec![CONTEXT_INIT; if net.is_elman() { h } else { 0 }];
    let mut hidden = vec![0.0; h];
    let mut out = vec![0.0; s];
    let mut delta = vec![0.0; h];
    for (x, t) in patterns.iter() {
        net.hidden(x, &ctx, &mut hidden);
        net.output(&hidden, &mut out);
        delta.iter_mut().for_each(|d| *d = 0.0);
        for m in 0..s {
            let e2 = 2.0 * (out[m] - t[m]);
            grad[lay.output_bias + m] += e2;
            let row = lay.output_row(m);
            for j in 0..h {
                grad[row.start + j] += e2 * hidden[j];
                delta[j] += e2 * net.w[row.start + j];
            }
        }
        for j in 0..h {
            let d = delta[j] * hidden[j] * (1.0 - hidden[j]);
            grad[j] += d;
            for (g, xi) in grad[lay.input_row(j)].iter_mut().zip(x) {
                *g += d * xi;
            }
            if net.is_elman() {
                for (g, c) in grad[lay.context_row(j)].iter_mut().zip(&ctx) {
                    *g += d * c;
                }
            }
        }
        if net.is_elman() {
            ctx.copy_from_slice(&hidden);
        }
    }
}

/// Gradient of the training SSE in parameter-vector layout.
///
/// For Elman topologies the derivative is truncated: each step's context is
/// held fixed, so this equals the exact gradient of the SSE with the context
/// sequence frozen at its current values.
pub fn gradient(
    params: &[f64],
    topology: &SannTopology,
    patterns: &PatternSet,
) -> Result<Vec<f64>> {
    let net = Sann::new(topology, params)?;
    net.check_patterns(patterns)?;
    let mut g = vec![0.0; params.len()];
    gradient_into(&net, patterns, &mut g);
    Ok(g)
}

/// Network output minus target, pattern-major.
pub fn residuals(
    params: &[f64],
    topology: &SannTopology,
    patterns: &PatternSet,
) -> Result<Vec<f64>> {
    let net = Sann::new(topology, params)?;
    net.check_patterns(patterns)?;
    let lay = net.lay;
    let mut ctx = vec![CONTEXT_INIT; if net.is_elman() { lay.h } else { 0 }];
    let mut hidden = vec![0.0; lay.h];
    let mut out = vec![0.0; lay.s];
    let mut r = Vec::with_capacity(patterns.residual_count());
    for (x, t) in patterns.iter() {
        net.hidden(x, &ctx, &mut hidden);
        net.output(&hidden, &mut out);
        r.extend(out.iter().zip(t).map(|(o, t)| o - t));
        if net.is_elman() {
            ctx.copy_from_slice(&hidden);
        }
    }
    Ok(r)
}

/// Jacobian of [`residuals`] with respect to the parameters, one row per
/// residual. Feedforward only.
pub fn jacobian(
    params: &[f64],
    topology: &SannTopology,
    patterns: &PatternSet,
) -> Result<DMatrix<f64>> {
    if topology.kind() == NetKind::Elman {
        return Err(Error::Unsupported(
            "the Jacobian is only defined for feedforward networks".into(),
        ));
    }
    let net = Sann::new(topology, params)?;
    net.check_patterns(patterns)?;
    Ok(jacobian_unchecked(&net, patterns))
}

pub(crate) fn jacobian_unchecked(net: &Sann<'_>, patterns: &PatternSet) -> DMatrix<f64> {
    let lay = net.lay;
    let (s, h) = (lay.s, lay.h);
    let mut jac = DMatrix::zeros(patterns.len() * s, lay.len);
    let mut hidden = vec![0.0; h];
    let mut slope = vec![0.0; h];
    for (p, (x, _)) in patterns.iter().enumerate() {
        net.hidden(x, &[], &mut hidden);
        for j in 0..h {
            slope[j] = hidden[j] * (1.0 - hidden[j]);
        }
        for m in 0..s {
            let r = p * s + m;
            jac[(r, lay.output_bias + m)] = 1.0;
            let row = lay.output_row(m);
            for j in 0..h {
                jac[(r, row.start + j)] = hidden[j];
                let d = net.w[row.start + j] * slope[j];
                jac[(r, j)] = d;
                for (i, xi) in lay.input_row(j).zip(x) {
                    jac[(r, i)] = d * xi;
                }
            }
        }
    }
    jac
}

use super::patterns::PatternSet;
use super::topology::{Layout, NetKind, SannTopology};
use crate::error::{invalid, Result};

/// Initial value of every context unit at the start of a sweep.
pub const CONTEXT_INIT: f64 = 0.5;

#[inline]
pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Hidden activations carried from one Elman step to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmanContext(Vec<f64>);

impl ElmanContext {
    /// All units at the logistic midpoint.
    pub fn initial(h: usize) -> Self {
        Self(vec![CONTEXT_INIT; h])
    }

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("context activations must be finite"));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A parameter slice checked against a topology.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sann<'a> {
    pub lay: Layout,
    pub kind: NetKind,
    pub w: &'a [f64],
}

impl<'a> Sann<'a> {
    pub fn new(topology: &SannTopology, w: &'a [f64]) -> Result<Self> {
        let lay = topology.layout();
        if w.len() != lay.len {
            return Err(invalid(format!(
                "topology needs {} parameters, got {}",
                lay.len,
                w.len()
            )));
        }
        Ok(Self {
            lay,
            kind: topology.kind(),
            w,
        })
    }

    pub fn is_elman(&self) -> bool {
        self.kind == NetKind::Elman
    }

    /// Logistic hidden activations; `ctx` is ignored for feedforward nets.
    pub fn hidden(&self, x: &[f64], ctx: &[f64], out: &mut [f64]) {
        let lay = &self.lay;
        for (j, slot) in out.iter_mut().enumerate().take(lay.h) {
            let mut z = self.w[j];
            z += dot(&self.w[lay.input_row(j)], x);
            if self.is_elman() {
                z += dot(&self.w[lay.context_row(j)], ctx);
            }
            *slot = logistic(z);
        }
    }

    /// Identity output layer.
    pub fn output(&self, hidden: &[f64], out: &mut [f64]) {
        let lay = &self.lay;
        let bias = &self.w[lay.output_biases()];
        for (m, slot) in out.iter_mut().enumerate().take(lay.s) {
            *slot = bias[m] + dot(&self.w[lay.output_row(m)], hidden);
        }
    }

    /// Sweeps `patterns` in order, threading the context for Elman nets, and
    /// sums squared errors of patterns with index `>= scored_from`.
    pub fn sse_from(&self, patterns: &PatternSet, scored_from: usize) -> f64 {
        let mut ctx = vec![CONTEXT_INIT; if self.is_elman() { self.lay.h } else { 0 }];
        let mut hidden = vec![0.0; self.lay.h];
        let mut out = vec![0.0; self.lay.s];
        let mut total = 0.0;
        for (i, (x, t)) in patterns.iter().enumerate() {
            self.hidden(x, &ctx, &mut hidden);
            self.output(&hidden, &mut out);
            if i >= scored_from {
                total += out
                    .iter()
                    .zip(t)
                    .map(|(o, t)| (t - o) * (t - o))
                    .sum::<f64>();
            }
            if self.is_elman() {
                ctx.copy_from_slice(&hidden);
            }
        }
        total
    }

    pub fn check_patterns(&self, patterns: &PatternSet) -> Result<()> {
        if patterns.is_empty() {
            return Err(invalid("pattern set is empty"));
        }
        if patterns.s() != self.lay.s {
            return Err(invalid(format!(
                "patterns have window {} but the network has {} inputs",
                patterns.s(),
                self.lay.s
            )));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(invalid(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

/// One feedforward pass: `out_m = α0_m + Σ_j α_jm · logistic(β0_j + Σ_i β_ij x_i)`.
pub fn forward_sfann(params: &[f64], topology: &SannTopology, input: &[f64]) -> Result<Vec<f64>> {
    if topology.kind() != NetKind::Feedforward {
        return Err(invalid("forward_sfann needs a feedforward topology"));
    }
    let net = Sann::new(topology, params)?;
    check_len("input", input.len(), topology.s())?;
    let mut hidden = vec![0.0; topology.h()];
    let mut out = vec![0.0; topology.s()];
    net.hidden(input, &[], &mut hidden);
    net.output(&hidden, &mut out);
    Ok(out)
}

/// One Elman step. The returned context is the new hidden activation vector.
pub fn forward_seann(
    params: &[f64],
    topology: &SannTopology,
    input: &[f64],
    ctx: &ElmanContext,
) -> Result<(Vec<f64>, ElmanContext)> {
    if topology.kind() != NetKind::Elman {
        return Err(invalid("forward_seann needs an Elman topology"));
    }
    let net = Sann::new(topology, params)?;
    check_len("input", input.len(), topology.s())?;
    check_len("context", ctx.len(), topology.h())?;
    let mut hidden = vec![0.0; topology.h()];
    let mut out = vec![0.0; topology.s()];
    net.hidden(input, ctx.as_slice(), &mut hidden);
    net.output(&hidden, &mut out);
    Ok((out, ElmanContext(hidden)))
}

/// Sum of squared errors over every pattern and output node. Elman nets
/// start from [`ElmanContext::initial`] and thread the context through the
/// patterns in order.
pub fn sse(params: &[f64], topology: &SannTopology, patterns: &PatternSet) -> Result<f64> {
    let net = Sann::new(topology, params)?;
    net.check_patterns(patterns)?;
    Ok(net.sse_from(patterns, 0))
}

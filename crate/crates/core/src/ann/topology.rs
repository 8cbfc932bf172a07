use std::ops::{Deref, Range};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NetKind {
    Feedforward,
    Elman,
}

/// An `s × h × s` seasonal network: `s` input and output nodes, `h` hidden
/// nodes, and for the Elman kind an `h`-node context layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SannTopology {
    s: usize,
    h: usize,
    kind: NetKind,
}

impl SannTopology {
    pub fn new(s: usize, h: usize, kind: NetKind) -> Result<Self> {
        if s < 2 {
            return Err(invalid(format!("seasonal period must be >= 2, got {s}")));
        }
        if h < 1 {
            return Err(invalid("a SANN needs at least one hidden node"));
        }
        Ok(Self { s, h, kind })
    }

    pub fn feedforward(s: usize, h: usize) -> Result<Self> {
        Self::new(s, h, NetKind::Feedforward)
    }

    pub fn elman(s: usize, h: usize) -> Result<Self> {
        Self::new(s, h, NetKind::Elman)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn kind(&self) -> NetKind {
        self.kind
    }

    pub fn with_hidden(&self, h: usize) -> Result<Self> {
        Self::new(self.s, h, self.kind)
    }

    /// Length of the flat parameter vector: `s + h(2s+1)` for feedforward,
    /// `h(s+h+1) + s(h+1)` for Elman.
    pub fn param_count(&self) -> usize {
        self.layout().len
    }

    pub(crate) fn layout(&self) -> Layout {
        let (s, h) = (self.s, self.h);
        let input = h;
        let context = input + h * s;
        let ctx_len = match self.kind {
            NetKind::Feedforward => 0,
            NetKind::Elman => h * h,
        };
        let output_bias = context + ctx_len;
        let output = output_bias + s;
        Layout {
            s,
            h,
            input,
            context,
            ctx_len,
            output_bias,
            output,
            len: output + s * h,
        }
    }
}

pub fn param_count(topology: &SannTopology) -> usize {
    topology.param_count()
}

/// Offsets into the flat parameter vector.
///
/// Order: hidden biases `β0_j`, input weights `β_ij` (row per hidden node),
/// context weights `γ_kj` (Elman only, row per hidden node), output biases
/// `α0_m`, output weights `α_jm` (row per output node).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub s: usize,
    pub h: usize,
    pub input: usize,
    pub context: usize,
    pub ctx_len: usize,
    pub output_bias: usize,
    pub output: usize,
    pub len: usize,
}

impl Layout {
    /// Input weights feeding hidden node `j`.
    pub fn input_row(&self, j: usize) -> Range<usize> {
        let start = self.input + j * self.s;
        start..start + self.s
    }

    /// Context weights feeding hidden node `j` (empty for feedforward).
    pub fn context_row(&self, j: usize) -> Range<usize> {
        if self.ctx_len == 0 {
            return self.context..self.context;
        }
        let start = self.context + j * self.h;
        start..start + self.h
    }

    pub fn output_biases(&self) -> Range<usize> {
        self.output_bias..self.output_bias + self.s
    }

    /// Hidden-to-output weights of output node `m`.
    pub fn output_row(&self, m: usize) -> Range<usize> {
        let start = self.output + m * self.h;
        start..start + self.h
    }
}

/// Flat vector of every weight and bias of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("parameter {i} is not finite")));
        }
        Ok(Self(values))
    }

    /// Validates the length against `topology` as well.
    pub fn for_topology(topology: &SannTopology, values: Vec<f64>) -> Result<Self> {
        if values.len() != topology.param_count() {
            return Err(invalid(format!(
                "topology needs {} parameters, got {}",
                topology.param_count(),
                values.len()
            )));
        }
        Self::new(values)
    }

    pub fn zeros(topology: &SannTopology) -> Self {
        Self(vec![0.0; topology.param_count()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts weights layer by layer, independently of `Layout`.
    fn layer_count(s: usize, h: usize, kind: NetKind) -> usize {
        let hidden = h * s + h;
        let context = if kind == NetKind::Elman { h * h } else { 0 };
        let output = s * h + s;
        hidden + context + output
    }

    #[test]
    fn counts_match_closed_forms() {
        assert_eq!(SannTopology::feedforward(12, 1).unwrap().param_count(), 37);
        assert_eq!(SannTopology::feedforward(4, 3).unwrap().param_count(), 31);
        assert_eq!(SannTopology::elman(2, 4).unwrap().param_count(), 38);
        for s in 2..15 {
            for h in 1..30 {
                let ff = SannTopology::feedforward(s, h).unwrap();
                assert_eq!(ff.param_count(), s + h * (2 * s + 1));
                assert_eq!(ff.param_count(), layer_count(s, h, NetKind::Feedforward));
                let el = SannTopology::elman(s, h).unwrap();
                assert_eq!(el.param_count(), h * (s + h + 1) + s * (h + 1));
                assert_eq!(el.param_count(), layer_count(s, h, NetKind::Elman));
            }
        }
    }

    #[test]
    fn layout_ranges_tile_the_vector() {
        for kind in [NetKind::Feedforward, NetKind::Elman] {
            let t = SannTopology::new(3, 2, kind).unwrap();
            let lay = t.layout();
            let mut seen = vec![0u8; lay.len];
            let mut mark = |r: Range<usize>| r.for_each(|i| seen[i] += 1);
            mark(0..lay.h);
            for j in 0..lay.h {
                mark(lay.input_row(j));
                mark(lay.context_row(j));
            }
            mark(lay.output_biases());
            for m in 0..lay.s {
                mark(lay.output_row(m));
            }
            assert!(seen.iter().all(|&c| c == 1), "{kind:?}: {seen:?}");
        }
    }

    #[test]
    fn rejects_bad_topologies_and_lengths() {
        assert!(SannTopology::feedforward(1, 1).is_err());
        assert!(SannTopology::feedforward(2, 0).is_err());
        let t = SannTopology::feedforward(2, 1).unwrap();
        assert!(ParameterVector::for_topology(&t, vec![0.0; 6]).is_err());
        assert!(ParameterVector::for_topology(&t, vec![0.0; 7]).is_ok());
        assert!(ParameterVector::new(vec![f64::NAN]).is_err());
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How consecutive input/target windows are cut from a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PatternLayout {
    /// Stride 1: every window start, `N - 2s + 1` patterns.
    #[default]
    Sliding,
    /// Stride `s`: one pattern per pair of whole seasons, anchored so the
    /// last target window ends at the last observation. Leading
    /// observations that do not fill a season are dropped.
    SeasonAligned,
}

impl PatternLayout {
    pub fn stride(&self, s: usize) -> usize {
        match self {
            PatternLayout::Sliding => 1,
            PatternLayout::SeasonAligned => s,
        }
    }
}

/// Chronologically ordered `(input season, next season)` training pairs.
///
/// The target window of pattern `i` always starts exactly `s` steps after
/// its input window.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    s: usize,
    stride: usize,
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

/// Sliding windows with stride 1.
pub fn build_patterns(series: &[f64], s: usize) -> Result<PatternSet> {
    build_patterns_with(series, s, PatternLayout::Sliding)
}

pub fn build_patterns_with(series: &[f64], s: usize, layout: PatternLayout) -> Result<PatternSet> {
    if s == 0 {
        return Err(invalid("window size must be positive"));
    }
    let n = series.len();
    if n < 2 * s {
        return Err(invalid(format!(
            "series of length {n} is shorter than two windows of {s}"
        )));
    }
    let stride = layout.stride(s);
    let count = (n - 2 * s) / stride + 1;
    let offset = n - 2 * s - (count - 1) * stride;
    let (inputs, targets) = (0..count)
        .map(|i| {
            let start = offset + i * stride;
            (
                series[start..start + s].to_vec(),
                series[start + s..start + 2 * s].to_vec(),
            )
        })
        .unzip();
    Ok(PatternSet {
        s,
        stride,
        inputs,
        targets,
    })
}

impl PatternSet {
    /// Builds a set from explicit pairs (stride recorded as 1).
    pub fn from_pairs(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(invalid(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let s = inputs.first().map_or(0, Vec::len);
        if inputs.iter().chain(&targets).any(|v| v.len() != s) {
            return Err(invalid("every input and target must have the same length"));
        }
        Ok(Self {
            s,
            stride: 1,
            inputs,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.inputs
            .iter()
            .zip(&self.targets)
            .map(|(x, t)| (x.as_slice(), t.as_slice()))
    }

    /// Number of trailing patterns forming the final season-sized block.
    pub fn last_season_block(&self) -> usize {
        self.s.div_ceil(self.stride.max(1)).min(self.len())
    }

    /// First `len - k` patterns and the trailing `k`.
    pub fn split_tail(&self, k: usize) -> (PatternSet, PatternSet) {
        let cut = self.len().saturating_sub(k);
        let part = |r: std::ops::Range<usize>| PatternSet {
            s: self.s,
            stride: self.stride,
            inputs: self.inputs[r.clone()].to_vec(),
            targets: self.targets[r].to_vec(),
        };
        (part(0..cut), part(cut..self.len()))
    }

    /// Total number of target values.
    pub fn residual_count(&self) -> usize {
        self.len() * self.s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sliding_counts() {
        let v: Vec<f64> = (0..132).map(f64::from).collect();
        assert_eq!(build_patterns(&v, 12).unwrap().len(), 109);
        assert_eq!(build_patterns(&v[..24], 12).unwrap().len(), 1);
        assert!(build_patterns(&v[..23], 12).is_err());
    }

    #[test]
    fn sliding_enumeration() {
        let p = build_patterns(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2).unwrap();
        let want_in = [[1.0, 2.0], [2.0, 3.0], [3.0, 4.0]];
        let want_t = [[3.0, 4.0], [4.0, 5.0], [5.0, 6.0]];
        assert_eq!(p.len(), 3);
        for (i, (x, t)) in p.iter().enumerate() {
            assert_eq!(x, want_in[i]);
            assert_eq!(t, want_t[i]);
        }
    }

    #[test]
    fn season_aligned_is_anchored_at_the_end() {
        let v: Vec<f64> = (0..132).map(f64::from).collect();
        let p = build_patterns_with(&v, 12, PatternLayout::SeasonAligned).unwrap();
        assert_eq!(p.len(), 10);
        assert_eq!(p.residual_count(), 132 - 12);
        assert_eq!(p.targets().last().unwrap().last(), Some(&131.0));
        assert_eq!(p.inputs()[0][0], 0.0);
        // 14 observations with s = 4: leading two dropped
        let w: Vec<f64> = (0..14).map(f64::from).collect();
        let p = build_patterns_with(&w, 4, PatternLayout::SeasonAligned).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.inputs()[0], vec![2.0, 3.0, 4.0, 5.0]);
        assert_eq!(p.targets()[1], vec![10.0, 11.0, 12.0, 13.0]);
    }

    #[test]
    fn target_starts_s_after_input() {
        let v: Vec<f64> = (0..50).map(f64::from).collect();
        for layout in [PatternLayout::Sliding, PatternLayout::SeasonAligned] {
            let p = build_patterns_with(&v, 5, layout).unwrap();
            for (x, t) in p.iter() {
                assert_eq!(t[0] - x[0], 5.0);
            }
        }
    }

    #[test]
    fn validation_block_sizes() {
        let v: Vec<f64> = (0..132).map(f64::from).collect();
        let sl = build_patterns(&v, 12).unwrap();
        assert_eq!(sl.last_season_block(), 12);
        let (a, b) = sl.split_tail(12);
        assert_eq!((a.len(), b.len()), (97, 12));
        let al = build_patterns_with(&v, 12, PatternLayout::SeasonAligned).unwrap();
        assert_eq!(al.last_season_block(), 1);
    }

    #[test]
    fn from_pairs_validates() {
        assert!(PatternSet::from_pairs(vec![vec![1.0]], vec![]).is_err());
        assert!(PatternSet::from_pairs(vec![vec![1.0, 2.0]], vec![vec![1.0]]).is_err());
        assert_eq!(
            PatternSet::from_pairs(vec![vec![1.0]], vec![vec![2.0]])
                .unwrap()
                .s(),
            1
        );
    }
}

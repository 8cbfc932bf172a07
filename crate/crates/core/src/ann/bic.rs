use super::network::sse;
use super::patterns::{build_patterns_with, PatternLayout, PatternSet};
use super::topology::SannTopology;
use crate::error::{invalid, Error, Result};

/// Training SSE is floored here before taking its logarithm.
pub const SSE_FLOOR: f64 = 1e-12;

/// `N_{s,h} + N_{s,h}·ln n + n·ln(S/n)` where `N_{s,h}` is the parameter count.
pub fn bic(topology: &SannTopology, n: usize, sse_value: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("effective observation count must be positive"));
    }
    if !(sse_value > 0.0) || !sse_value.is_finite() {
        return Err(Error::Domain(format!(
            "BIC needs a positive finite SSE, got {sse_value}"
        )));
    }
    let p = topology.param_count() as f64;
    let n = n as f64;
    Ok(p + p * n.ln() + n * (sse_value / n).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub h: usize,
    pub sse: f64,
    pub bic: f64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenSelection {
    pub h: usize,
    pub bic: f64,
    /// Candidates that trained successfully, in the order tried.
    pub scores: Vec<CandidateScore>,
    /// Candidates whose training failed, with the reason.
    pub skipped: Vec<(usize, Error)>,
}

impl HiddenSelection {
    pub fn chosen(&self) -> &CandidateScore {
        self.scores
            .iter()
            .find(|c| c.h == self.h)
            .expect("chosen candidate is always scored")
    }
}

/// Trains one feedforward network per candidate `h` and keeps the one with the
/// smallest BIC, preferring smaller `h` on ties. The effective observation
/// count is `n = N − s`.
pub fn select_hidden_nodes<F>(
    series: &[f64],
    s: usize,
    layout: PatternLayout,
    candidates: impl IntoIterator<Item = usize>,
    mut trainer: F,
) -> Result<HiddenSelection>
where
    F: FnMut(&SannTopology, &PatternSet) -> Result<Vec<f64>>,
{
    let patterns = build_patterns_with(series, s, layout)?;
    let n = series.len() - s;
    let mut scores: Vec<CandidateScore> = Vec::new();
    let mut skipped = Vec::new();
    let mut tried = 0;
    for h in candidates {
        tried += 1;
        let scored = SannTopology::feedforward(s, h).and_then(|topo| {
            let params = trainer(&topo, &patterns)?;
            let e = sse(&params, &topo, &patterns)?;
            if !e.is_finite() {
                return Err(Error::Training(format!("non-finite SSE for h = {h}")));
            }
            let b = bic(&topo, n, e.max(SSE_FLOOR))?;
            Ok(CandidateScore {
                h,
                sse: e,
                bic: b,
                params,
            })
        });
        match scored {
            Ok(c) => scores.push(c),
            Err(e) => skipped.push((h, e)),
        }
    }
    if tried == 0 {
        return Err(invalid("no hidden-node candidates given"));
    }
    let best = scores
        .iter()
        .min_by(|a, b| a.bic.total_cmp(&b.bic).then(a.h.cmp(&b.h)))
        .ok_or_else(|| Error::Training("every hidden-node candidate failed".into()))?;
    Ok(HiddenSelection {
        h: best.h,
        bic: best.bic,
        scores: scores.clone(),
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_form_examples() {
        let t = SannTopology::feedforward(12, 1).unwrap();
        let b = bic(&t, 120, 0.6).unwrap();
        assert!((b - (-421.66)).abs() < 0.01, "{b}");
        let t = SannTopology::feedforward(4, 3).unwrap();
        let want = 31.0 + 31.0 * 44f64.ln() + 44.0 * (0.1f64 / 44.0).ln();
        assert!((bic(&t, 44, 0.1).unwrap() - want).abs() < 1e-12);
        assert!(matches!(bic(&t, 44, 0.0), Err(Error::Domain(_))));
        assert!(bic(&t, 0, 1.0).is_err());
    }

    #[test]
    fn bic_strictly_increases_in_h() {
        let mut prev = f64::NEG_INFINITY;
        for h in 1..20 {
            let b = bic(&SannTopology::feedforward(12, h).unwrap(), 120, 0.3).unwrap();
            assert!(b > prev);
            prev = b;
        }
    }

    fn series() -> Vec<f64> {
        (0..48).map(|t| (t % 4) as f64 * 0.2 + 0.1).collect()
    }

    #[test]
    fn single_candidate_and_ties() {
        let zero = |t: &SannTopology, _: &PatternSet| Ok(vec![0.0; t.param_count()]);
        let sel = select_hidden_nodes(&series(), 4, PatternLayout::Sliding, [3], zero).unwrap();
        assert_eq!(sel.h, 3);

        // A trainer giving a perfect fit everywhere: SSE floors to 1e-12 and
        // the BIC penalty decides; smaller h wins.
        let s = series();
        let exact = |t: &SannTopology, _: &PatternSet| {
            let lay = t.layout();
            let mut w = vec![0.0; t.param_count()];
            for m in 0..4 {
                w[lay.output_biases().start + m] = 0.1 + 0.2 * m as f64;
            }
            Ok(w)
        };
        let sel =
            select_hidden_nodes(&s, 4, PatternLayout::SeasonAligned, [2, 1, 3], exact).unwrap();
        assert_eq!(sel.h, 1);
    }

    #[test]
    fn equal_bic_prefers_smaller_h() {
        // min_by keeps the first minimum; ensure ordering by h as well
        let a = CandidateScore {
            h: 3,
            sse: 1.0,
            bic: 5.0,
            params: vec![],
        };
        let b = CandidateScore {
            h: 2,
            sse: 1.0,
            bic: 5.0,
            params: vec![],
        };
        let best = [a, b]
            .into_iter()
            .min_by(|a, b| a.bic.total_cmp(&b.bic).then(a.h.cmp(&b.h)))
            .unwrap();
        assert_eq!(best.h, 2);
    }

    #[test]
    fn failing_candidates_are_skipped() {
        let flaky = |t: &SannTopology, _: &PatternSet| {
            if t.h() == 2 {
                Err(Error::Training("boom".into()))
            } else {
                Ok(vec![0.0; t.param_count()])
            }
        };
        let sel = select_hidden_nodes(&series(), 4, PatternLayout::Sliding, [2, 4], flaky).unwrap();
        assert_eq!(sel.h, 4);
        assert_eq!(sel.skipped.len(), 1);
        let fail = |_: &SannTopology, _: &PatternSet| Err(Error::Training("no".into()));
        assert!(select_hidden_nodes(&series(), 4, PatternLayout::Sliding, [1, 2], fail).is_err());
        assert!(select_hidden_nodes(&series(), 4, PatternLayout::Sliding, [], fail).is_err());
    }

    #[test]
    fn chosen_bic_is_reproducible() {
        let trainer = |t: &SannTopology, _: &PatternSet| {
            Ok((0..t.param_count())
                .map(|i| (i as f64 * 0.37).sin() * 0.3)
                .collect())
        };
        let s = series();
        let sel = select_hidden_nodes(&s, 4, PatternLayout::Sliding, 1..=4, trainer).unwrap();
        let c = sel.chosen();
        let topo = SannTopology::feedforward(4, c.h).unwrap();
        let p = build_patterns_with(&s, 4, PatternLayout::Sliding).unwrap();
        let again = bic(
            &topo,
            s.len() - 4,
            sse(&c.params, &topo, &p).unwrap().max(SSE_FLOOR),
        )
        .unwrap();
        assert_eq!(again, sel.bic);
        assert!(sel.scores.iter().all(|c| c.bic >= sel.bic));
    }
}

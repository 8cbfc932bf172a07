//! Backpropagation training: gradients, Levenberg–Marquardt for feedforward
//! nets and gradient descent with momentum and adaptive learning rate
//! (`traingdx` style) for either kind.

mod gdx;
mod gradient;
mod lm;

pub use gdx::{gdx_minimize, train_gdx, train_gdx_from};
pub use gradient::{gradient, jacobian, residuals};
pub use lm::{train_lm, train_lm_from};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ann::{PatternSet, SannTopology};
use crate::error::{invalid, Result};
use crate::ParameterVector;

/// Which training patterns are held out for early stopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ValidationSplit {
    None,
    /// The trailing patterns covering the final season.
    #[default]
    LastSeason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub max_epochs: usize,
    pub seed: u64,
    pub validation: ValidationSplit,
    pub patience: usize,
    pub lm_lambda0: f64,
    pub lm_factor: f64,
    /// LM gives up (converged) once the damping exceeds this.
    pub lm_lambda_max: f64,
    /// Gradient norm below which training counts as converged.
    pub min_grad: f64,
    pub gdx_lr0: f64,
    pub gdx_momentum: f64,
    pub gdx_inc: f64,
    pub gdx_dec: f64,
    pub gdx_max_perf_inc: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            max_epochs: 1000,
            seed: 1,
            validation: ValidationSplit::LastSeason,
            patience: 6,
            lm_lambda0: 1e-3,
            lm_factor: 10.0,
            lm_lambda_max: 1e10,
            min_grad: 1e-10,
            gdx_lr0: 0.01,
            gdx_momentum: 0.9,
            gdx_inc: 1.05,
            gdx_dec: 0.7,
            gdx_max_perf_inc: 1.04,
        }
    }
}

impl TrainOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.patience >= 1, "patience must be positive"),
            (self.lm_lambda0 > 0.0, "lm_lambda0 must be positive"),
            (self.lm_factor > 1.0, "lm_factor must exceed 1"),
            (
                self.lm_lambda_max > self.lm_lambda0,
                "lm_lambda_max must exceed lm_lambda0",
            ),
            (self.min_grad >= 0.0, "min_grad must be nonnegative"),
            (self.gdx_lr0 > 0.0, "gdx_lr0 must be positive"),
            (
                (0.0..1.0).contains(&self.gdx_momentum),
                "gdx_momentum must be in [0, 1)",
            ),
            (self.gdx_inc > 1.0, "gdx_inc must exceed 1"),
            (
                self.gdx_dec > 0.0 && self.gdx_dec < 1.0,
                "gdx_dec must be in (0, 1)",
            ),
            (
                self.gdx_max_perf_inc > 1.0,
                "gdx_max_perf_inc must exceed 1",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(invalid(*msg)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    MaxEpochs,
    EarlyStop,
    Converged,
}

/// Per-epoch record of a training run. All vectors have one entry per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    /// Training SSE of the starting point.
    pub initial_sse: f64,
    /// Training SSE after each epoch.
    pub train_sse: Vec<f64>,
    pub validation_sse: Vec<Option<f64>>,
    pub accepted: Vec<bool>,
    pub stop: StopReason,
}

impl TrainTrace {
    pub(crate) fn new(initial_sse: f64) -> Self {
        Self {
            initial_sse,
            train_sse: Vec::new(),
            validation_sse: Vec::new(),
            accepted: Vec::new(),
            stop: StopReason::MaxEpochs,
        }
    }

    pub(crate) fn push(&mut self, sse: f64, validation: Option<f64>, accepted: bool) {
        self.train_sse.push(sse);
        self.validation_sse.push(validation);
        self.accepted.push(accepted);
    }

    pub fn epochs(&self) -> usize {
        self.train_sse.len()
    }

    pub fn final_sse(&self) -> f64 {
        self.train_sse.last().copied().unwrap_or(self.initial_sse)
    }
}

/// I.i.d. uniform on `[-0.5, 0.5]`, deterministic in `seed`.
pub fn init_params(topology: &SannTopology, seed: u64) -> ParameterVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..topology.param_count())
        .map(|_| rng.gen_range(-0.5..=0.5))
        .collect();
    ParameterVector::new(v).expect("uniform draws are finite")
}

/// Training patterns plus the index from which patterns count as validation.
pub(crate) struct Split<'a> {
    pub all: &'a PatternSet,
    pub train: PatternSet,
    pub cut: Option<usize>,
}

impl<'a> Split<'a> {
    pub fn new(patterns: &'a PatternSet, how: ValidationSplit) -> Result<Self> {
        if patterns.is_empty() {
            return Err(invalid("pattern set is empty"));
        }
        let k = match how {
            ValidationSplit::None => 0,
            ValidationSplit::LastSeason => patterns.last_season_block(),
        };
        if k == 0 {
            return Ok(Self {
                all: patterns,
                train: patterns.clone(),
                cut: None,
            });
        }
        if k >= patterns.len() {
            return Err(invalid(format!(
                "{} patterns leave nothing to train on after holding out {k} for validation",
                patterns.len()
            )));
        }
        let (train, _) = patterns.split_tail(k);
        let cut = train.len();
        Ok(Self {
            all: patterns,
            train,
            cut: Some(cut),
        })
    }
}

/// Early-stopping bookkeeping on a validation score.
#[derive(Debug)]
pub(crate) struct Monitor {
    patience: usize,
    best: f64,
    best_params: Option<Vec<f64>>,
    fails: usize,
}

impl Monitor {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_params: None,
            fails: 0,
        }
    }

    /// Records a validation score; true once `patience` consecutive scores
    /// have failed to improve on the best.
    pub fn observe(&mut self, score: f64, params: &[f64]) -> bool {
        if score < self.best {
            self.best = score;
            self.best_params = Some(params.to_vec());
            self.fails = 0;
        } else {
            self.fails += 1;
        }
        self.fails >= self.patience
    }

    pub fn best_params(self) -> Option<Vec<f64>> {
        self.best_params
    }
}

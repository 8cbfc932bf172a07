//! Particle swarm training of network parameter vectors.
//!
//! Three update rules share one velocity kernel
//! `v ← χ·(a·v + c1·r1·(p − x) + c2·r2·(g − x))`:
//!
//! - basic PSO: `χ = 1`, random `r1`, `r2`;
//! - Trelea: `χ = 1`, `c1 = c2 = b`, `r1 = r2 = ½`, so the step is
//!   `a·v + b·(p_d − x)` with `p_d` the midpoint of personal and global best;
//! - Clerc: `χ` from [`constriction_factor`], `a = 1`, random `r1`, `r2`.
//!
//! After the velocity update each component is clamped to `±v_max`; a
//! position leaving the bounds is clamped and that velocity component zeroed.

mod swarm;

pub use swarm::{Fixed, Particle, Swarm, UniformSource};

use serde::{Deserialize, Serialize};

use crate::ann::{PatternSet, Sann, SannTopology};
use crate::bp::{Monitor, Split, StopReason, TrainTrace, ValidationSplit};
use crate::error::{invalid, Error, Result};
use crate::ParameterVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PsoVariant {
    Basic {
        inertia: f64,
        c1: f64,
        c2: f64,
    },
    Trelea {
        inertia: f64,
        b: f64,
    },
    Clerc {
        kappa: f64,
        phi: f64,
        c1: f64,
        c2: f64,
    },
}

impl PsoVariant {
    pub const TRELEA_I: Self = Self::Trelea {
        inertia: 0.6,
        b: 1.7,
    };
    pub const TRELEA_II: Self = Self::Trelea {
        inertia: 0.729,
        b: 1.494,
    };
    pub const CLERC: Self = Self::Clerc {
        kappa: 0.729,
        phi: 4.0,
        c1: 2.0,
        c2: 2.0,
    };

    pub fn name(&self) -> &'static str {
        match self {
            Self::Basic { .. } => "basic",
            Self::Trelea { .. } => "trelea",
            Self::Clerc { .. } => "clerc",
        }
    }
}

/// Clerc's constriction `2κ / (φ − 2 + √(φ² − 4φ))` for `φ ≥ 4`, else `κ`.
pub fn constriction_factor(kappa: f64, phi: f64) -> f64 {
    if phi >= 4.0 {
        2.0 * kappa / (phi - 2.0 + (phi * phi - 4.0 * phi).sqrt())
    } else {
        kappa
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoOptions {
    pub swarm_size: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub v_max: f64,
    pub lower: f64,
    pub upper: f64,
    /// Initial positions are uniform in `±init_range`.
    pub init_range: f64,
    /// Initial velocities are uniform in `±init_velocity`.
    pub init_velocity: f64,
    pub patience: usize,
    pub validation: ValidationSplit,
    /// Evaluate particle fitness on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for PsoOptions {
    fn default() -> Self {
        Self {
            swarm_size: 24,
            max_iter: 500,
            seed: 1,
            v_max: 2.0,
            lower: -10.0,
            upper: 10.0,
            init_range: 1.0,
            init_velocity: 0.5,
            patience: 6,
            validation: ValidationSplit::None,
            parallel: false,
        }
    }
}

impl PsoOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(invalid("swarm size must be positive"));
        }
        if !(self.v_max > 0.0) {
            return Err(invalid("v_max must be positive"));
        }
        if !(self.lower < self.upper) {
            return Err(invalid("lower bound must be below upper bound"));
        }
        if !(self.init_range > 0.0
            && -self.init_range >= self.lower
            && self.init_range <= self.upper)
        {
            return Err(invalid(
                "initial range must be positive and inside the bounds",
            ));
        }
        if !(self.init_velocity >= 0.0) {
            return Err(invalid("initial velocity range must be nonnegative"));
        }
        if self.patience == 0 {
            return Err(invalid("patience must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PsoResult {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    /// `train_sse` holds the global best fitness after each iteration and
    /// `accepted` whether that iteration improved it.
    pub trace: TrainTrace,
    pub swarm: Swarm,
}

/// Minimizes `fitness` over `dim` dimensions.
///
/// With a `validation` score the global best is checked after every
/// iteration; the run stops after `opts.patience` iterations without a new
/// best validation score and returns the best-validation global best.
pub fn minimize<F, V>(
    fitness: F,
    dim: usize,
    variant: &PsoVariant,
    opts: &PsoOptions,
    mut validation: Option<V>,
) -> Result<PsoResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
    V: FnMut(&[f64]) -> f64,
{
    let mut swarm = Swarm::new(dim, opts)?;
    swarm.evaluate(&fitness, opts.parallel);
    if !swarm.global_best_fitness().is_finite() {
        return Err(Error::Training("no particle has a finite fitness".into()));
    }
    let mut trace = TrainTrace::new(swarm.global_best_fitness());
    let mut monitor = Monitor::new(opts.patience);
    if let Some(v) = validation.as_mut() {
        monitor.observe(v(swarm.global_best()), swarm.global_best());
    }
    for _ in 0..opts.max_iter {
        let before = swarm.global_best_fitness();
        swarm.step(variant);
        swarm.evaluate(&fitness, opts.parallel);
        let score = validation.as_mut().map(|v| v(swarm.global_best()));
        trace.push(
            swarm.global_best_fitness(),
            score,
            swarm.global_best_fitness() < before,
        );
        if let Some(score) = score {
            if monitor.observe(score, swarm.global_best()) {
                trace.stop = StopReason::EarlyStop;
                break;
            }
        }
    }
    let (best, best_fitness) = match validation {
        Some(_) => {
            let b = monitor
                .best_params()
                .unwrap_or_else(|| swarm.global_best().to_vec());
            let f = fitness(&b);
            (b, f)
        }
        None => (swarm.global_best().to_vec(), swarm.global_best_fitness()),
    };
    Ok(PsoResult {
        best,
        best_fitness,
        trace,
        swarm,
    })
}

/// Swarm training with fitness equal to the training SSE. The dimension is
/// the topology's parameter count.
pub fn train_pso(
    topology: &SannTopology,
    patterns: &PatternSet,
    variant: &PsoVariant,
    opts: &PsoOptions,
) -> Result<(ParameterVector, TrainTrace)> {
    Sann::new(topology, &vec![0.0; topology.param_count()])?.check_patterns(patterns)?;
    let split = Split::new(patterns, opts.validation)?;
    let fitness = |w: &[f64]| match Sann::new(topology, w) {
        Ok(net) => net.sse_from(&split.train, 0),
        Err(_) => f64::INFINITY,
    };
    let dim = topology.param_count();
    let result = match split.cut {
        Some(cut) => {
            let v = |w: &[f64]| {
                Sann::new(topology, w).map_or(f64::INFINITY, |n| n.sse_from(split.all, cut))
            };
            minimize(fitness, dim, variant, opts, Some(v))?
        }
        None => minimize(fitness, dim, variant, opts, None::<fn(&[f64]) -> f64>)?,
    };
    let params = ParameterVector::new(result.best).map_err(|e| Error::Training(e.to_string()))?;
    Ok((params, result.trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann::{build_patterns_with, sse, PatternLayout};
    use crate::datasets::AIRLINE;
    use crate::series::NormalizationMap;

    type NoVal = fn(&[f64]) -> f64;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn variants() -> [PsoVariant; 3] {
        [
            PsoVariant::TRELEA_I,
            PsoVariant::TRELEA_II,
            PsoVariant::CLERC,
        ]
    }

    #[test]
    fn constriction_examples() {
        assert_eq!(constriction_factor(0.729, 4.0), 0.729);
        assert!((constriction_factor(1.0, 4.1) - 0.7298).abs() < 1e-4);
        assert_eq!(constriction_factor(0.5, 3.0), 0.5);
    }

    #[test]
    fn sphere_converges_for_every_variant() {
        let opts = PsoOptions {
            max_iter: 200,
            ..PsoOptions::default()
        };
        for v in variants() {
            let r = minimize(sphere, 5, &v, &opts, None::<NoVal>).unwrap();
            assert!(r.best_fitness < 1e-3, "{v:?}: {}", r.best_fitness);
        }
    }

    #[test]
    fn global_best_never_increases() {
        let opts = PsoOptions {
            max_iter: 100,
            ..PsoOptions::default()
        };
        let rastrigin = |x: &[f64]| {
            x.iter()
                .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos() + 10.0)
                .sum::<f64>()
        };
        let mut all = variants().to_vec();
        all.push(PsoVariant::Basic {
            inertia: 0.7,
            c1: 1.5,
            c2: 1.5,
        });
        for v in all {
            let r = minimize(rastrigin, 6, &v, &opts, None::<NoVal>).unwrap();
            let mut prev = r.trace.initial_sse;
            for f in &r.trace.train_sse {
                assert!(*f <= prev);
                prev = *f;
            }
        }
    }

    fn check_state(swarm: &Swarm, opts: &PsoOptions, f: impl Fn(&[f64]) -> f64) {
        for p in swarm.particles() {
            assert!(p
                .position
                .iter()
                .all(|x| (opts.lower..=opts.upper).contains(x)));
            assert!(p.velocity.iter().all(|v| v.abs() <= opts.v_max));
            assert!(p.best_fitness <= f(&p.position));
            assert!(swarm.global_best_fitness() <= p.best_fitness);
        }
    }

    #[test]
    fn bounds_and_personal_bests_hold_every_step() {
        // a far-off optimum pushes particles into the walls
        let shifted = |x: &[f64]| x.iter().map(|v| (v - 30.0).powi(2)).sum::<f64>();
        let opts = PsoOptions {
            swarm_size: 8,
            ..PsoOptions::default()
        };
        for v in variants() {
            let mut swarm = Swarm::new(4, &opts).unwrap();
            swarm.evaluate(shifted, false);
            for _ in 0..60 {
                swarm.step(&v);
                swarm.evaluate(shifted, false);
                check_state(&swarm, &opts, shifted);
            }
        }
    }

    #[test]
    fn trelea_ignores_the_seed() {
        let opts = PsoOptions {
            swarm_size: 6,
            ..PsoOptions::default()
        };
        let start = Swarm::new(3, &opts).unwrap().particles().to_vec();
        let run = |seed| {
            let o = PsoOptions {
                seed,
                ..opts.clone()
            };
            let mut s = Swarm::from_particles(start.clone(), &o).unwrap();
            s.evaluate(sphere, false);
            for _ in 0..25 {
                s.step(&PsoVariant::TRELEA_I);
                s.evaluate(sphere, false);
            }
            s.particles().to_vec()
        };
        assert_eq!(run(1), run(99));
    }

    #[test]
    fn basic_with_half_draws_equals_trelea() {
        let opts = PsoOptions {
            swarm_size: 5,
            ..PsoOptions::default()
        };
        let mut a = Swarm::new(4, &opts).unwrap();
        a.evaluate(sphere, false);
        let mut b = a.clone();
        for _ in 0..10 {
            a.step_basic_with(0.6, 1.7, 1.7, &mut Fixed(0.5));
            a.evaluate(sphere, false);
            b.step_trelea(0.6, 1.7);
            b.evaluate(sphere, false);
            assert_eq!(a.particles(), b.particles());
        }
    }

    #[test]
    fn trelea_single_step_arithmetic() {
        // v = 0.5, x = 0, p = g = 2: v' = 0.6·0.5 + 1.7·(2 − 0) = 3.7 (v_max raised to keep it)
        let opts = PsoOptions {
            swarm_size: 1,
            v_max: 5.0,
            ..PsoOptions::default()
        };
        let mut p = Particle::new(vec![0.0], vec![0.5]);
        p.best_position = vec![2.0];
        p.best_fitness = 0.0;
        let mut s = Swarm::from_particles(vec![p], &opts).unwrap();
        s.step_trelea(0.6, 1.7);
        let q = &s.particles()[0];
        assert!((q.velocity[0] - 3.7).abs() < 1e-12);
        assert!((q.position[0] - 3.7).abs() < 1e-12);
    }

    #[test]
    fn consensus_point_is_fixed() {
        let opts = PsoOptions {
            swarm_size: 1,
            ..PsoOptions::default()
        };
        for v in variants() {
            let mut p = Particle::new(vec![0.3, -0.2], vec![0.0, 0.0]);
            p.best_fitness = sphere(&p.position);
            let mut s = Swarm::from_particles(vec![p], &opts).unwrap();
            s.step(&v);
            assert_eq!(s.particles()[0].position, vec![0.3, -0.2]);
        }
        let mut p = Particle::new(vec![0.3], vec![0.0]);
        p.best_fitness = 0.1;
        let mut s = Swarm::from_particles(vec![p], &opts).unwrap();
        s.step_basic(0.7, 1.5, 1.5);
        assert_eq!(s.particles()[0].position, vec![0.3]);
    }

    #[test]
    fn seeded_runs_reproduce() {
        let opts = PsoOptions {
            max_iter: 10,
            seed: 7,
            ..PsoOptions::default()
        };
        let basic = PsoVariant::Basic {
            inertia: 0.7,
            c1: 1.5,
            c2: 1.5,
        };
        let a = minimize(sphere, 5, &basic, &opts, None::<NoVal>).unwrap();
        let b = minimize(sphere, 5, &basic, &opts, None::<NoVal>).unwrap();
        assert_eq!(a.swarm.particles(), b.swarm.particles());
        let par = PsoOptions {
            parallel: true,
            ..opts
        };
        let c = minimize(sphere, 5, &basic, &par, None::<NoVal>).unwrap();
        assert_eq!(a.swarm.particles(), c.swarm.particles());
    }

    #[test]
    fn zero_budget_returns_best_initial_particle() {
        let opts = PsoOptions {
            max_iter: 0,
            ..PsoOptions::default()
        };
        let r = minimize(sphere, 3, &PsoVariant::CLERC, &opts, None::<NoVal>).unwrap();
        let init = Swarm::new(3, &opts).unwrap();
        let best = init
            .particles()
            .iter()
            .map(|p| sphere(&p.position))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_fitness, best);
        assert_eq!(r.trace.epochs(), 0);
    }

    #[test]
    fn all_nonfinite_fitness_is_an_error() {
        let r = minimize(
            |_: &[f64]| f64::NAN,
            2,
            &PsoVariant::CLERC,
            &PsoOptions::default(),
            None::<NoVal>,
        );
        assert!(matches!(r, Err(Error::Training(_))));
    }

    #[test]
    fn airline_training_improves_on_initial_swarm() {
        let train = &AIRLINE[..132];
        let map = NormalizationMap::fit(train).unwrap();
        let p = build_patterns_with(&map.apply(train), 12, PatternLayout::SeasonAligned).unwrap();
        let t = SannTopology::feedforward(12, 1).unwrap();
        for seed in 1..=5 {
            let opts = PsoOptions {
                seed,
                max_iter: 100,
                ..PsoOptions::default()
            };
            let (w, trace) = train_pso(&t, &p, &PsoVariant::TRELEA_I, &opts).unwrap();
            assert!(trace.final_sse() < trace.initial_sse);
            assert_eq!(sse(&w, &t, &p).unwrap(), trace.final_sse());
        }
    }
}

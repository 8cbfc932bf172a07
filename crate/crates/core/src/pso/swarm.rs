use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{constriction_factor, PsoOptions, PsoVariant};
use crate::error::{invalid, Result};

/// Source of the `r1`, `r2` acceleration draws.
pub trait UniformSource {
    /// A draw from `[0, 1)`.
    fn next_uniform(&mut self) -> f64;
}

impl<R: RngCore> UniformSource for R {
    fn next_uniform(&mut self) -> f64 {
        self.gen::<f64>()
    }
}

/// Returns the same value on every draw.
#[derive(Debug, Clone, Copy)]
pub struct Fixed(pub f64);

impl UniformSource for Fixed {
    fn next_uniform(&mut self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Fitness at `position`; infinite until evaluated.
    pub fitness: f64,
}

impl Particle {
    pub fn new(position: Vec<f64>, velocity: Vec<f64>) -> Self {
        Self {
            best_position: position.clone(),
            position,
            velocity,
            best_fitness: f64::INFINITY,
            fitness: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Swarm {
    particles: Vec<Particle>,
    global_best: Vec<f64>,
    global_best_fitness: f64,
    iteration: usize,
    lower: f64,
    upper: f64,
    v_max: f64,
    /// One stream per particle index.
    rngs: Vec<ChaCha8Rng>,
}

/// `χ·(a·v + c1·r1·(p − x) + c2·r2·(g − x))`, shared by every variant.
#[inline]
#[allow(clippy::too_many_arguments)]
fn velocity(
    v: f64,
    x: f64,
    p: f64,
    g: f64,
    chi: f64,
    a: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
) -> f64 {
    chi * (a * v + c1 * r1 * (p - x) + c2 * r2 * (g - x))
}

impl Swarm {
    /// Positions uniform in `±opts.init_range`, velocities uniform in
    /// `±opts.init_velocity`, each particle drawing from its own stream.
    pub fn new(dim: usize, opts: &PsoOptions) -> Result<Self> {
        opts.validate()?;
        if dim == 0 {
            return Err(invalid("swarm dimension must be positive"));
        }
        let mut rngs: Vec<ChaCha8Rng> = (0..opts.swarm_size)
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
                r.set_stream(i as u64);
                r
            })
            .collect();
        let particles = rngs
            .iter_mut()
            .map(|r| {
                let x = (0..dim)
                    .map(|_| r.gen_range(-opts.init_range..=opts.init_range))
                    .collect();
                let v = (0..dim)
                    .map(|_| r.gen_range(-opts.init_velocity..=opts.init_velocity))
                    .collect();
                Particle::new(x, v)
            })
            .collect();
        Ok(Self {
            particles,
            global_best: vec![0.0; dim],
            global_best_fitness: f64::INFINITY,
            iteration: 0,
            lower: opts.lower,
            upper: opts.upper,
            v_max: opts.v_max,
            rngs,
        })
    }

    /// A swarm with explicit particles; randomized steps draw from streams of `seed`.
    pub fn from_particles(particles: Vec<Particle>, opts: &PsoOptions) -> Result<Self> {
        opts.validate()?;
        let dim = particles.first().map_or(0, |p| p.position.len());
        if dim == 0
            || particles
                .iter()
                .any(|p| p.position.len() != dim || p.velocity.len() != dim)
        {
            return Err(invalid(
                "particles must be nonempty and share one dimension",
            ));
        }
        let rngs = (0..particles.len())
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
                r.set_stream(i as u64);
                r
            })
            .collect();
        let mut swarm = Self {
            particles,
            global_best: vec![0.0; dim],
            global_best_fitness: f64::INFINITY,
            iteration: 0,
            lower: opts.lower,
            upper: opts.upper,
            v_max: opts.v_max,
            rngs,
        };
        swarm.refresh_global_best();
        Ok(swarm)
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn global_best(&self) -> &[f64] {
        &self.global_best
    }

    pub fn global_best_fitness(&self) -> f64 {
        self.global_best_fitness
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn dim(&self) -> usize {
        self.global_best.len()
    }

    /// Scores every particle, then updates personal and global bests.
    /// Non-finite fitness values count as `+∞`.
    pub fn evaluate<F>(&mut self, fitness: F, parallel: bool)
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let score = |p: &mut Particle| {
            let f = fitness(&p.position);
            p.fitness = if f.is_finite() { f } else { f64::INFINITY };
            if p.fitness < p.best_fitness {
                p.best_fitness = p.fitness;
                p.best_position.copy_from_slice(&p.position);
            }
        };
        if parallel {
            self.particles.par_iter_mut().for_each(score);
        } else {
            self.particles.iter_mut().for_each(score);
        }
        self.refresh_global_best();
    }

    /// Improves the global best from personal bests; ties keep the lowest index.
    fn refresh_global_best(&mut self) {
        let mut best: Option<usize> = None;
        for (i, p) in self.particles.iter().enumerate() {
            if p.best_fitness
                < best.map_or(self.global_best_fitness, |b| self.particles[b].best_fitness)
            {
                best = Some(i);
            }
        }
        if let Some(i) = best {
            self.global_best_fitness = self.particles[i].best_fitness;
            self.global_best
                .copy_from_slice(&self.particles[i].best_position);
        }
    }

    pub fn step(&mut self, variant: &PsoVariant) {
        match *variant {
            PsoVariant::Basic { inertia, c1, c2 } => self.step_basic(inertia, c1, c2),
            PsoVariant::Trelea { inertia, b } => self.step_trelea(inertia, b),
            PsoVariant::Clerc { kappa, phi, c1, c2 } => self.step_clerc(kappa, phi, c1, c2),
        }
    }

    /// `v ← a·v + c1·r1·(p − x) + c2·r2·(g − x)` with fresh draws per particle
    /// and dimension from the particle's own stream.
    pub fn step_basic(&mut self, inertia: f64, c1: f64, c2: f64) {
        self.advance(Draws::Streams, 1.0, inertia, c1, c2);
    }

    /// [`Swarm::step_basic`] drawing every `r` from `source`.
    pub fn step_basic_with(
        &mut self,
        inertia: f64,
        c1: f64,
        c2: f64,
        source: &mut dyn UniformSource,
    ) {
        self.advance(Draws::Shared(source), 1.0, inertia, c1, c2);
    }

    /// Deterministic update `v ← a·v + b·(p_d − x)` with `p_d` the midpoint of
    /// personal and global best, evaluated as `b·½·(p − x) + b·½·(g − x)`.
    /// Consumes no random numbers.
    pub fn step_trelea(&mut self, inertia: f64, b: f64) {
        self.advance(Draws::Shared(&mut Fixed(0.5)), 1.0, inertia, b, b);
    }

    /// `v ← χ·(v + c1·r1·(p − x) + c2·r2·(g − x))` with unit inertia inside the bracket.
    pub fn step_clerc(&mut self, kappa: f64, phi: f64, c1: f64, c2: f64) {
        let chi = constriction_factor(kappa, phi);
        self.advance(Draws::Streams, chi, 1.0, c1, c2);
    }

    fn advance(&mut self, mut draws: Draws<'_>, chi: f64, a: f64, c1: f64, c2: f64) {
        let g = &self.global_best;
        for (i, p) in self.particles.iter_mut().enumerate() {
            let src: &mut dyn UniformSource = match &mut draws {
                Draws::Streams => &mut self.rngs[i],
                Draws::Shared(s) => &mut **s,
            };
            for d in 0..g.len() {
                let (r1, r2) = (src.next_uniform(), src.next_uniform());
                let x = p.position[d];
                let v = velocity(
                    p.velocity[d],
                    x,
                    p.best_position[d],
                    g[d],
                    chi,
                    a,
                    c1,
                    c2,
                    r1,
                    r2,
                )
                .clamp(-self.v_max, self.v_max);
                let nx = x + v;
                if nx < self.lower || nx > self.upper {
                    p.position[d] = nx.clamp(self.lower, self.upper);
                    p.velocity[d] = 0.0;
                } else {
                    p.position[d] = nx;
                    p.velocity[d] = v;
                }
            }
        }
        self.iteration += 1;
    }
}

enum Draws<'a> {
    Streams,
    Shared(&'a mut dyn UniformSource),
}

//! Sequential minimal optimization for the ε-SVR dual in the doubled form
//!
//! `min ½ aᵀQa + pᵀa  s.t.  yᵀa = 0,  0 ≤ a_t ≤ C_t`
//!
//! over `a = (α, α*)`, with `y = (+1…, −1…)`, `p = (ε − z, ε + z)` and
//! `Q_ts = y_t y_s K(x_t, x_s)`. Working pairs follow the maximal-violator /
//! second-order rule.

const TAU: f64 = 1e-12;

pub(crate) struct Problem<'a> {
    /// `n × n` kernel matrix, row-major.
    pub kernel: &'a [f64],
    pub targets: &'a [f64],
    pub epsilon: f64,
    /// Upper bound for each of the `n` points (shared by `α_i` and `α*_i`).
    pub upper: &'a [f64],
    pub tol: f64,
    pub max_iter: usize,
}

pub(crate) struct Outcome {
    /// `α_i − α*_i`.
    pub beta: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective (to be maximized) after every iteration, when requested.
    pub objective_trace: Vec<f64>,
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    fn k(&self, t: usize, s: usize) -> f64 {
        let n = self.n();
        self.kernel[(t % n) * n + s % n]
    }

    #[inline]
    fn sign(&self, t: usize) -> f64 {
        if t < self.n() {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    fn cap(&self, t: usize) -> f64 {
        self.upper[t % self.n()]
    }

    pub fn solve(&self, record: bool) -> Outcome {
        let n = self.n();
        let m = 2 * n;
        let mut a = vec![0.0; m];
        let p: Vec<f64> = (0..m)
            .map(|t| {
                if t < n {
                    self.epsilon - self.targets[t]
                } else {
                    self.epsilon + self.targets[t - n]
                }
            })
            .collect();
        let mut g = p.clone();
        let objective = |a: &[f64], g: &[f64]| -> f64 {
            -0.5 * a
                .iter()
                .zip(g)
                .zip(&p)
                .map(|((a, g), p)| a * (g + p))
                .sum::<f64>()
        };
        let mut trace = Vec::new();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            let Some((i, j)) = self.select(&a, &g) else {
                converged = true;
                break;
            };
            iterations += 1;
            let (yi, yj) = (self.sign(i), self.sign(j));
            let (ci, cj) = (self.cap(i), self.cap(j));
            let qij = yi * yj * self.k(i, j);
            let (qii, qjj) = (self.k(i, i), self.k(j, j));
            let (old_i, old_j) = (a[i], a[j]);
            if yi != yj {
                let quad = (qii + qjj + 2.0 * qij).max(TAU);
                let delta = (-g[i] - g[j]) / quad;
                let diff = a[i] - a[j];
                a[i] += delta;
                a[j] += delta;
                if diff > 0.0 {
                    if a[j] < 0.0 {
                        a[j] = 0.0;
                        a[i] = diff;
                    }
                } else if a[i] < 0.0 {
                    a[i] = 0.0;
                    a[j] = -diff;
                }
                if diff > ci - cj {
                    if a[i] > ci {
                        a[i] = ci;
                        a[j] = ci - diff;
                    }
                } else if a[j] > cj {
                    a[j] = cj;
                    a[i] = cj + diff;
                }
            } else {
                let quad = (qii + qjj - 2.0 * qij).max(TAU);
                let delta = (g[i] - g[j]) / quad;
                let sum = a[i] + a[j];
                a[i] -= delta;
                a[j] += delta;
                if sum > ci {
                    if a[i] > ci {
                        a[i] = ci;
                        a[j] = sum - ci;
                    }
                } else if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = sum;
                }
                if sum > cj {
                    if a[j] > cj {
                        a[j] = cj;
                        a[i] = sum - cj;
                    }
                } else if a[i] < 0.0 {
                    a[i] = 0.0;
                    a[j] = sum;
                }
            }
            let (di, dj) = (a[i] - old_i, a[j] - old_j);
            for t in 0..m {
                let yt = self.sign(t);
                g[t] += yt * yi * self.k(t, i) * di + yt * yj * self.k(t, j) * dj;
            }
            if record {
                trace.push(objective(&a, &g));
            }
        }
        let beta = (0..n).map(|i| a[i] - a[i + n]).collect();
        Outcome {
            beta,
            bias: -self.rho(&a, &g),
            iterations,
            converged,
            objective_trace: trace,
        }
    }

    /// Maximal violator `i` and its second-order partner `j`, or `None` once
    /// the violation is within tolerance.
    fn select(&self, a: &[f64], g: &[f64]) -> Option<(usize, usize)> {
        let m = a.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..m {
            let up = if self.sign(t) > 0.0 {
                a[t] < self.cap(t)
            } else {
                a[t] > 0.0
            };
            if up && -self.sign(t) * g[t] >= gmax {
                gmax = -self.sign(t) * g[t];
                i = t;
            }
        }
        if i == usize::MAX {
            return None;
        }
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        let mut j = usize::MAX;
        for t in 0..m {
            let low = if self.sign(t) > 0.0 {
                a[t] > 0.0
            } else {
                a[t] < self.cap(t)
            };
            if !low {
                continue;
            }
            let yg = -self.sign(t) * g[t];
            gmin = gmin.min(yg);
            let b = gmax - yg;
            if b > 0.0 {
                let quad = self.k(i, i) + self.k(t, t) - 2.0 * self.k(i, t);
                let score = -(b * b) / quad.max(TAU);
                if score <= best {
                    best = score;
                    j = t;
                }
            }
        }
        if gmax - gmin < self.tol || j == usize::MAX {
            return None;
        }
        Some((i, j))
    }

    fn rho(&self, a: &[f64], g: &[f64]) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum) = (0usize, 0.0);
        for t in 0..a.len() {
            let y = self.sign(t);
            let yg = y * g[t];
            if a[t] >= self.cap(t) {
                if y < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if a[t] <= 0.0 {
                if y > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}

//! ε-insensitive support vector regression with an RBF kernel.

mod grid;
mod smo;

pub use grid::{grid_search, GridResult, SvrGrid};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Maximum KKT violation accepted at convergence.
pub const KKT_TOL: f64 = 1e-4;
const MAX_ITER: usize = 1_000_000;

/// `exp(−‖x − y‖² / 2σ²)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], sigma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrHyper {
    pub c: f64,
    pub sigma: f64,
    pub epsilon: f64,
}

impl SvrHyper {
    pub fn new(c: f64, sigma: f64, epsilon: f64) -> Result<Self> {
        if !(c > 0.0 && sigma > 0.0 && epsilon >= 0.0)
            || !(c.is_finite() && sigma.is_finite() && epsilon.is_finite())
        {
            return Err(invalid(format!(
                "need C > 0, sigma > 0, epsilon >= 0; got ({c}, {sigma}, {epsilon})"
            )));
        }
        Ok(Self { c, sigma, epsilon })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub support: Vec<Vec<f64>>,
    /// `α_i − α*_i` of each support vector.
    pub beta: Vec<f64>,
    /// Training-set index of each support vector.
    pub support_index: Vec<usize>,
    pub bias: f64,
    pub hyper: SvrHyper,
    /// False when the iteration cap was hit before the KKT tolerance.
    pub converged: bool,
    pub iterations: usize,
}

impl SvrModel {
    /// `Σ β_i K(x, x_i) + b` over the support vectors.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if let Some(first) = self.support.first() {
            if first.len() != x.len() {
                return Err(invalid(format!(
                    "input has {} features, model expects {}",
                    x.len(),
                    first.len()
                )));
            }
        }
        Ok(self
            .support
            .iter()
            .zip(&self.beta)
            .map(|(sv, b)| b * rbf_kernel(sv, x, self.hyper.sigma))
            .sum::<f64>()
            + self.bias)
    }

    /// `β` over all `n` training points, zeros for non-support points.
    pub fn full_beta(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (i, b) in self.support_index.iter().zip(&self.beta) {
            out[*i] = *b;
        }
        out
    }
}

pub fn predict(model: &SvrModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// The ε-SVR dual objective `−½ βᵀKβ − ε Σ|β_i| + Σ z_i β_i` (to be maximized).
pub fn dual_objective(inputs: &[Vec<f64>], targets: &[f64], beta: &[f64], hyper: &SvrHyper) -> f64 {
    let mut quad = 0.0;
    for (i, xi) in inputs.iter().enumerate() {
        for (j, xj) in inputs.iter().enumerate() {
            quad += beta[i] * beta[j] * rbf_kernel(xi, xj, hyper.sigma);
        }
    }
    let lin: f64 = targets
        .iter()
        .zip(beta)
        .map(|(z, b)| z * b - hyper.epsilon * b.abs())
        .sum();
    -0.5 * quad + lin
}

/// Solves the dual with box `[−C, C]` on every `β_i`.
pub fn solve_dual(inputs: &[Vec<f64>], targets: &[f64], hyper: &SvrHyper) -> Result<SvrModel> {
    solve_dual_weighted(inputs, targets, hyper, &vec![1.0; targets.len()])
}

/// Solves the dual with box `[−C·w_i, C·w_i]` on `β_i`.
pub fn solve_dual_weighted(
    inputs: &[Vec<f64>],
    targets: &[f64],
    hyper: &SvrHyper,
    weights: &[f64],
) -> Result<SvrModel> {
    solve_inner(inputs, targets, hyper, weights, KKT_TOL, false).map(|(m, _)| m)
}

/// Dual objective after every SMO iteration, for diagnostics.
pub fn solve_dual_traced(
    inputs: &[Vec<f64>],
    targets: &[f64],
    hyper: &SvrHyper,
) -> Result<(SvrModel, Vec<f64>)> {
    solve_inner(
        inputs,
        targets,
        hyper,
        &vec![1.0; targets.len()],
        KKT_TOL,
        true,
    )
}

fn solve_inner(
    inputs: &[Vec<f64>],
    targets: &[f64],
    hyper: &SvrHyper,
    weights: &[f64],
    tol: f64,
    record: bool,
) -> Result<(SvrModel, Vec<f64>)> {
    SvrHyper::new(hyper.c, hyper.sigma, hyper.epsilon)?;
    let n = targets.len();
    if n < 2 {
        return Err(invalid("need at least two training pairs"));
    }
    if inputs.len() != n || weights.len() != n {
        return Err(invalid(
            "inputs, targets and weights must have equal lengths",
        ));
    }
    let dim = inputs[0].len();
    if inputs.iter().any(|x| x.len() != dim) {
        return Err(invalid("every input must have the same length"));
    }
    if targets
        .iter()
        .chain(inputs.iter().flatten())
        .any(|v| !v.is_finite())
    {
        return Err(invalid("training data must be finite"));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(invalid("box weights must be positive"));
    }
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = rbf_kernel(&inputs[i], &inputs[j], hyper.sigma);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    let upper: Vec<f64> = weights.iter().map(|w| w * hyper.c).collect();
    let out = smo::Problem {
        kernel: &kernel,
        targets,
        epsilon: hyper.epsilon,
        upper: &upper,
        tol,
        max_iter: MAX_ITER,
    }
    .solve(record);
    let support_index: Vec<usize> = (0..n).filter(|&i| out.beta[i] != 0.0).collect();
    let model = SvrModel {
        support: support_index.iter().map(|&i| inputs[i].clone()).collect(),
        beta: support_index.iter().map(|&i| out.beta[i]).collect(),
        support_index,
        bias: out.bias,
        hyper: *hyper,
        converged: out.converged,
        iterations: out.iterations,
    };
    Ok((model, out.objective_trace))
}

/// Lag windows of length `lags` with the next observation as target.
pub fn embed(series: &[f64], lags: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if lags == 0 || series.len() <= lags {
        return Err(invalid(format!(
            "series of length {} cannot be embedded with {lags} lags",
            series.len()
        )));
    }
    Ok((lags..series.len())
        .map(|t| (series[t - lags..t].to_vec(), series[t]))
        .unzip())
}

/// Iterated one-step forecasts, feeding predictions back as inputs.
pub fn forecast_svr(
    model: &SvrModel,
    history: &[f64],
    lags: usize,
    horizon: usize,
) -> Result<Vec<f64>> {
    if horizon < 1 {
        return Err(invalid("forecast horizon must be at least 1"));
    }
    if history.len() < lags {
        return Err(invalid("history is shorter than the lag window"));
    }
    let mut window = history[history.len() - lags..].to_vec();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let y = model.predict(&window)?;
        out.push(y);
        window.remove(0);
        window.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen()).collect())
            .collect();
        let y = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (x, y)
    }

    /// Projected gradient on the doubled dual `min ½aᵀQa + pᵀa`, projecting onto
    /// `{yᵀa = 0, 0 ≤ a ≤ C}` by bisection on the multiplier of the equality.
    fn brute_force(x: &[Vec<f64>], z: &[f64], hyper: &SvrHyper) -> Vec<f64> {
        let n = z.len();
        let m = 2 * n;
        let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
        let k = |t: usize, s: usize| rbf_kernel(&x[t % n], &x[s % n], hyper.sigma);
        let q: Vec<Vec<f64>> = (0..m)
            .map(|t| (0..m).map(|s| sign(t) * sign(s) * k(t, s)).collect())
            .collect();
        let p: Vec<f64> = (0..m).map(|t| hyper.epsilon - sign(t) * z[t % n]).collect();
        let project = |v: &[f64]| -> Vec<f64> {
            let at = |mu: f64| -> Vec<f64> {
                (0..m)
                    .map(|t| (v[t] - mu * sign(t)).clamp(0.0, hyper.c))
                    .collect()
            };
            let g = |mu: f64| {
                at(mu)
                    .iter()
                    .enumerate()
                    .map(|(t, a)| sign(t) * a)
                    .sum::<f64>()
            };
            let (mut lo, mut hi) = (-1e3, 1e3);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            at(0.5 * (lo + hi))
        };
        let lip: f64 = q
            .iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let step = 1.0 / lip;
        let mut a = vec![0.0; m];
        for _ in 0..200_000 {
            let grad: Vec<f64> = (0..m)
                .map(|t| q[t].iter().zip(&a).map(|(q, a)| q * a).sum::<f64>() + p[t])
                .collect();
            let next = project(
                &a.iter()
                    .zip(&grad)
                    .map(|(a, g)| a - step * g)
                    .collect::<Vec<_>>(),
            );
            let moved = next
                .iter()
                .zip(&a)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            a = next;
            if moved < 1e-12 {
                break;
            }
        }
        (0..n).map(|i| a[i] - a[i + n]).collect()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(rbf_kernel(&[0.3, 0.7], &[0.3, 0.7], 0.2), 1.0);
        assert!((rbf_kernel(&[0.0], &[1.0], 1.0) - (-0.5f64).exp()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a: Vec<f64> = (0..4).map(|_| rng.gen()).collect();
            let b: Vec<f64> = (0..4).map(|_| rng.gen()).collect();
            let k = rbf_kernel(&a, &b, 0.7);
            assert_eq!(k, rbf_kernel(&b, &a, 0.7));
            assert!(k > 0.0 && k <= 1.0);
        }
    }

    #[test]
    fn all_inside_the_tube() {
        let x = vec![vec![0.0], vec![1.0]];
        let h = SvrHyper::new(1.0, 1.0, 0.1).unwrap();
        let m = solve_dual(&x, &[0.50, 0.55], &h).unwrap();
        assert!(m.beta.is_empty());
        let p = m.predict(&[0.4]).unwrap();
        assert!((p - 0.525).abs() <= 0.05 + 1e-12, "{p}");
        assert!((p - 0.50).abs() <= 0.1 && (p - 0.55).abs() <= 0.1);
    }

    #[test]
    fn matches_brute_force_qp_on_small_instances() {
        for seed in 0..10 {
            for n in 2..=6 {
                let (x, y) = instance(seed * 10 + n as u64, n, 2);
                let h = SvrHyper::new(2.0, 0.5, 0.05).unwrap();
                let m = solve_dual(&x, &y, &h).unwrap();
                assert!(m.converged);
                let beta = m.full_beta(n);
                let oracle = brute_force(&x, &y, &h);
                let got = dual_objective(&x, &y, &beta, &h);
                let want = dual_objective(&x, &y, &oracle, &h);
                assert!(
                    (got - want).abs() < 1e-4,
                    "seed {seed} n {n}: {got} vs {want}"
                );
                assert!(beta.iter().sum::<f64>().abs() < 1e-8);
                assert!(beta.iter().all(|b| b.abs() <= h.c + 1e-8));
            }
        }
    }

    #[test]
    fn five_point_predictions_match_oracle() {
        let (x, y) = instance(77, 5, 3);
        let h = SvrHyper::new(4.0, 0.8, 0.02).unwrap();
        let m = solve_dual(&x, &y, &h).unwrap();
        let oracle = brute_force(&x, &y, &h);
        let got = dual_objective(&x, &y, &m.full_beta(5), &h);
        assert!((got - dual_objective(&x, &y, &oracle, &h)).abs() < 1e-4);
        let f = |q: &[f64]| -> f64 {
            x.iter()
                .zip(&oracle)
                .map(|(xi, bi)| bi * rbf_kernel(xi, q, h.sigma))
                .sum()
        };
        // bias from the free coefficients: z_i − f(x_i) = ε·sign(β_i)
        let free: Vec<f64> = (0..5)
            .filter(|&i| oracle[i].abs() > 1e-6 && oracle[i].abs() < h.c - 1e-6)
            .map(|i| y[i] - f(&x[i]) - h.epsilon * oracle[i].signum())
            .collect();
        assert!(!free.is_empty());
        let bias = free.iter().sum::<f64>() / free.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let q: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
            let (a, b) = (m.predict(&q).unwrap(), f(&q) + bias);
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn objective_never_decreases() {
        let (x, y) = instance(5, 30, 3);
        let h = SvrHyper::new(10.0, 0.4, 0.01).unwrap();
        let (_, trace) = solve_dual_traced(&x, &y, &h).unwrap();
        assert!(!trace.is_empty());
        let mut prev = 0.0;
        for v in trace {
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn duplicate_point_equals_doubled_box() {
        let (x, y) = instance(21, 6, 2);
        let h = SvrHyper::new(0.5, 0.6, 0.01).unwrap();
        let mut xd = x.clone();
        let mut yd = y.clone();
        xd.push(x[2].clone());
        yd.push(y[2]);
        let (dup, _) = solve_inner(&xd, &yd, &h, &[1.0; 7], 1e-10, false).unwrap();
        let mut w = vec![1.0; 6];
        w[2] = 2.0;
        let (merged, _) = solve_inner(&x, &y, &h, &w, 1e-10, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let q: Vec<f64> = (0..2).map(|_| rng.gen()).collect();
            let a = dup.predict(&q).unwrap();
            let b = merged.predict(&q).unwrap();
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn prediction_ignores_pruned_zeros() {
        let (x, y) = instance(8, 12, 2);
        let h = SvrHyper::new(1.0, 0.5, 0.1).unwrap();
        let m = solve_dual(&x, &y, &h).unwrap();
        assert!(m.beta.iter().all(|b| *b != 0.0));
        let full = m.full_beta(12);
        let q = [0.2, 0.9];
        let naive: f64 = x
            .iter()
            .zip(&full)
            .map(|(xi, b)| b * rbf_kernel(xi, &q, h.sigma))
            .sum::<f64>()
            + m.bias;
        assert!((m.predict(&q).unwrap() - naive).abs() < 1e-12);
    }

    #[test]
    fn huge_epsilon_gives_constant_model() {
        let (x, y) = instance(9, 10, 2);
        let h = SvrHyper::new(1.0, 0.5, 5.0).unwrap();
        let m = solve_dual(&x, &y, &h).unwrap();
        assert!(m.beta.is_empty());
        assert_eq!(m.predict(&[0.1, 0.1]).unwrap(), m.bias);
    }

    #[test]
    fn permutation_invariant_predictions() {
        let (x, y) = instance(12, 15, 2);
        let h = SvrHyper::new(3.0, 0.5, 0.02).unwrap();
        let a = solve_dual(&x, &y, &h).unwrap();
        let order: Vec<usize> = (0..15).rev().collect();
        let xp: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
        let yp: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        let b = solve_dual(&xp, &yp, &h).unwrap();
        for q in &x {
            assert!((a.predict(q).unwrap() - b.predict(q).unwrap()).abs() < 1e-3);
        }
    }

    #[test]
    fn single_support_vector_prediction() {
        let h = SvrHyper::new(1.0, 1.0, 0.0).unwrap();
        let m = SvrModel {
            support: vec![vec![0.5]],
            beta: vec![1.0],
            support_index: vec![0],
            bias: 0.0,
            hyper: h,
            converged: true,
            iterations: 0,
        };
        assert_eq!(m.predict(&[0.5]).unwrap(), 1.0);
        assert!(m.predict(&[0.5, 0.1]).is_err());
    }

    #[test]
    fn embedding_and_iterated_forecast() {
        let (x, y) = embed(&[1.0, 2.0, 3.0, 4.0, 5.0], 2).unwrap();
        assert_eq!(x, vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0]]);
        assert_eq!(y, vec![3.0, 4.0, 5.0]);
        let constant = SvrModel {
            support: vec![],
            beta: vec![],
            support_index: vec![],
            bias: 0.7,
            hyper: SvrHyper::new(1.0, 1.0, 0.1).unwrap(),
            converged: true,
            iterations: 0,
        };
        assert_eq!(
            forecast_svr(&constant, &[0.1, 0.2, 0.3], 2, 3).unwrap(),
            vec![0.7; 3]
        );
    }
}

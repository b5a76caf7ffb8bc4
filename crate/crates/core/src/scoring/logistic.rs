//! L2-regularized binary logistic regression trained with L-BFGS.
//!
//! The objective is `Σᵢ log(1 + exp(−yᵢ·(w·xᵢ + b))) + ‖w‖² / (2C)` with
//! labels `yᵢ ∈ {−1, +1}`; the bias is not penalized. Optimization is
//! full-batch and deterministic, stopping when the gradient's Euclidean norm
//! drops to the tolerance or the iteration cap is hit.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 10_000;
const HISTORY: usize = 10;
const ARMIJO: f64 = 1e-4;

/// A trained linear classifier; `predict_proba` is the positive-class probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorthinessModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
}

impl WorthinessModel {
    /// Zero model of a given feature dimension.
    pub fn zeros(dim: usize, c: f64) -> Self {
        WorthinessModel {
            weights: vec![0.0; dim],
            bias: 0.0,
            c,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Signed margin `w·x + b`.
    pub fn decision(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub c: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            c: DEFAULT_C,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Result of a training run, including the objective after every iteration.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: WorthinessModel,
    /// Objective value at the start and after each accepted step.
    pub loss_trace: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Problem<'a> {
    rows: &'a [&'a [f64]],
    signs: Vec<f64>,
    dim: usize,
    inv_c: f64,
}

impl Problem<'_> {
    /// Parameters are `[w..., b]`. Returns the objective and writes its gradient.
    fn eval(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let (w, b) = params.split_at(self.dim);
        let b = b[0];
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (x, &s) in self.rows.iter().zip(&self.signs) {
            let z = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            loss += softplus(-s * z);
            // d/dz log(1 + exp(-s z)) = -s * sigmoid(-s z)
            let coef = -s * sigmoid(-s * z);
            for (g, v) in grad[..self.dim].iter_mut().zip(x.iter()) {
                *g += coef * v;
            }
            grad[self.dim] += coef;
        }
        let mut reg = 0.0;
        for (g, wi) in grad[..self.dim].iter_mut().zip(w) {
            *g += wi * self.inv_c;
            reg += wi * wi;
        }
        loss + 0.5 * self.inv_c * reg
    }

    fn data_loss(&self, params: &[f64]) -> f64 {
        let (w, b) = params.split_at(self.dim);
        self.rows
            .iter()
            .zip(&self.signs)
            .map(|(x, &s)| softplus(-s * (x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b[0])))
            .sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Fits the model to `rows` with boolean labels (`true` = positive).
pub fn train_logistic(rows: &[&[f64]], labels: &[bool], opts: TrainOptions) -> Result<TrainReport> {
    if rows.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    if rows.len() < 2 {
        return Err(Error::DegenerateData(format!("{} training records", rows.len())));
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::DegenerateData("only one class present".into()));
    }
    if !(opts.c > 0.0 && opts.c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {}", opts.c)));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::FeatureSet("feature vectors differ in length".into()));
    }
    let problem = Problem {
        rows,
        signs: labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect(),
        dim,
        inv_c: 1.0 / opts.c,
    };

    let n = dim + 1;
    let mut x = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut f = problem.eval(&x, &mut g);
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut iterations = 0;
    let mut converged = norm(&g) <= opts.tolerance;

    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    while !converged && iterations < opts.max_iter {
        let mut dir = two_loop(&g, &history);
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // Not a descent direction; restart from steepest descent.
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = if history.is_empty() {
            (1.0 / norm(&g)).min(1.0)
        } else {
            1.0
        };
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            let f_new = problem.eval(&x_new, &mut g_new);
            if f_new <= f + ARMIJO * step * slope {
                let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-12 * norm(&s) * norm(&y) {
                    if history.len() == HISTORY {
                        history.pop_front();
                    }
                    history.push_back((s, y, 1.0 / sy));
                }
                std::mem::swap(&mut x, &mut x_new);
                std::mem::swap(&mut g, &mut g_new);
                f = f_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            // No further decrease representable in floating point.
            break;
        }
        trace.push(f);
        converged = norm(&g) <= opts.tolerance;
    }

    let bias = x[dim];
    x.truncate(dim);
    Ok(TrainReport {
        grad_norm: norm(&g),
        model: WorthinessModel {
            weights: x,
            bias,
            c: opts.c,
        },
        loss_trace: trace,
        iterations,
        converged,
    })
}

/// Unregularized log loss of a model on a data set.
pub fn data_loss(model: &WorthinessModel, rows: &[&[f64]], labels: &[bool]) -> f64 {
    let mut params = model.weights.clone();
    params.push(model.bias);
    Problem {
        rows,
        signs: labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect(),
        dim: model.dim(),
        inv_c: 1.0 / model.c,
    }
    .data_loss(&params)
}

/// L-BFGS two-loop recursion: returns `−H·g`.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn refs(rows: &[Vec<f64>]) -> Vec<&[f64]> {
        rows.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn separable_pair() {
        let rows = vec![vec![1.0], vec![-1.0]];
        let r = train_logistic(&refs(&rows), &[true, false], TrainOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.model.predict(&rows[0]) && !r.model.predict(&rows[1]));
    }

    #[test]
    fn single_class_is_degenerate() {
        let rows = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train_logistic(&refs(&rows), &[true, true], TrainOptions::default()),
            Err(Error::DegenerateData(_))
        ));
        assert!(train_logistic(&refs(&rows[..1]), &[true], TrainOptions::default()).is_err());
    }

    #[test]
    fn mirror_symmetric_data_has_zero_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..40 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let pos = rng.random_bool(0.5);
            rows.push(x.iter().map(|v| -v).collect());
            labels.push(!pos);
            rows.push(x);
            labels.push(pos);
        }
        let r = train_logistic(&refs(&rows), &labels, TrainOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.model.bias.abs() < 1e-6, "bias {}", r.model.bias);
    }

    #[test]
    fn uninformative_features_predict_base_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..600)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let labels: Vec<bool> = (0..600).map(|_| rng.random_bool(0.3)).collect();
        let rate = labels.iter().filter(|&&l| l).count() as f64 / 600.0;
        let r = train_logistic(&refs(&rows), &labels, TrainOptions::default()).unwrap();
        let mean = rows.iter().map(|x| r.model.predict_proba(x)).sum::<f64>() / 600.0;
        assert!((mean - rate).abs() < 0.05, "{mean} vs {rate}");
    }

    #[test]
    fn loss_trace_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..6).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let labels: Vec<bool> = rows.iter().map(|x| x[0] + 0.5 * x[1] + rng.random_range(-1.0..1.0) > 0.0).collect();
        let r = train_logistic(&refs(&rows), &labels, TrainOptions::default()).unwrap();
        assert!(r.converged && r.grad_norm <= 1e-6);
        assert!(r.loss_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn weaker_regularization_fits_at_least_as_well() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..150)
            .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let labels: Vec<bool> = rows.iter().map(|x| x[2] - x[4] + rng.random_range(-0.8..0.8) > 0.0).collect();
        let mut prev = f64::INFINITY;
        for c in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let opts = TrainOptions { c, ..TrainOptions::default() };
            let m = train_logistic(&refs(&rows), &labels, opts).unwrap().model;
            let loss = data_loss(&m, &refs(&rows), &labels);
            assert!(loss <= prev + 1e-9, "C={c}: {loss} > {prev}");
            prev = loss;
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rows = vec![vec![0.3, -1.2], vec![2.0, 0.1], vec![-0.7, 0.4]];
        let r = refs(&rows);
        let p = Problem {
            rows: &r,
            signs: vec![1.0, -1.0, 1.0],
            dim: 2,
            inv_c: 0.5,
        };
        let x = [0.2, -0.4, 0.1];
        let mut g = [0.0; 3];
        p.eval(&x, &mut g);
        let mut scratch = [0.0; 3];
        for i in 0..3 {
            let h = 1e-6;
            let (mut a, mut b) = (x, x);
            a[i] += h;
            b[i] -= h;
            let fd = (p.eval(&a, &mut scratch) - p.eval(&b, &mut scratch)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "component {i}: {fd} vs {}", g[i]);
        }
    }
}

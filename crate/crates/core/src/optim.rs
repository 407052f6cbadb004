//! Projected L-BFGS with backtracking (Armijo) line search.

use std::collections::VecDeque;

use crate::{Error, Result};

/// An objective with a projection onto its feasible set.
pub trait Objective {
    /// Objective value; `+inf` marks an infeasible point.
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64], g: &mut [f64]) -> Result<()>;
    /// In-place projection onto the feasible set.
    fn project(&self, _x: &mut [f64]) {}
}

#[derive(Clone, Copy, Debug)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop after `patience` consecutive relative decreases below this.
    pub rel_tol: f64,
    pub patience: usize,
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Largest coordinate change of the first (unscaled) step.
    pub first_step: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 8,
            max_iterations: 100_000,
            rel_tol: 1e-10,
            patience: 10,
            armijo: 1e-4,
            max_backtracks: 50,
            first_step: 1e-2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    crate::par::pairwise_sum(&prods)
}

fn nan_error(iteration: usize, x: &[f64]) -> Error {
    let head: Vec<String> = x.iter().take(8).map(|v| format!("{v:e}")).collect();
    Error::NanObjective {
        iteration,
        dump: format!("{} parameters, first: [{}]", x.len(), head.join(", ")),
    }
}

/// Minimizes `obj` from `x0`. `on_iter(iteration, x, value)` runs after each
/// accepted step.
pub fn minimize(
    obj: &dyn Objective,
    x0: &[f64],
    opts: &LbfgsOptions,
    mut on_iter: impl FnMut(usize, &[f64], f64),
) -> Result<Outcome> {
    let n = x0.len();
    let mut x = x0.to_vec();
    obj.project(&mut x);
    let mut f = obj.value(&x)?;
    if f.is_nan() {
        return Err(nan_error(0, &x));
    }
    if !f.is_finite() {
        return Err(Error::InvalidProblem("initial point is infeasible".into()));
    }
    let mut g = vec![0.0; n];
    obj.gradient(&x, &mut g)?;
    if g.iter().any(|v| v.is_nan()) {
        return Err(nan_error(0, &x));
    }
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut small = 0usize;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    for iter in 1..=opts.max_iterations {
        let mut d = direction(&g, &pairs);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        if slope == 0.0 {
            return Ok(Outcome { x, value: f, iterations: iter - 1, converged: true });
        }
        let mut alpha = if pairs.is_empty() {
            let gmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            (opts.first_step / gmax).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            for i in 0..n {
                x_new[i] = x[i] + alpha * d[i];
            }
            obj.project(&mut x_new);
            let f_new = obj.value(&x_new)?;
            if f_new.is_nan() {
                return Err(nan_error(iter, &x_new));
            }
            let step: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &step);
            if f_new.is_finite() && f_new <= f + opts.armijo * decrease.min(0.0) && decrease < 0.0 {
                accepted = Some(f_new);
                break;
            }
            alpha *= 0.5;
        }
        let Some(f_new) = accepted else {
            if pairs.is_empty() {
                // no descent along the projected gradient: stationary
                return Ok(Outcome { x, value: f, iterations: iter - 1, converged: true });
            }
            pairs.clear();
            continue;
        };
        obj.gradient(&x_new, &mut g_new)?;
        if g_new.iter().any(|v| v.is_nan()) {
            return Err(nan_error(iter, &x_new));
        }
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        let rel = (f - f_new) / f.abs().max(1e-300);
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        on_iter(iter, &x, f);
        if rel < opts.rel_tol {
            small += 1;
            if small >= opts.patience {
                return Ok(Outcome { x, value: f, iterations: iter, converged: true });
            }
        } else {
            small = 0;
        }
    }
    Ok(Outcome {
        x,
        value: f,
        iterations: opts.max_iterations,
        converged: false,
    })
}

/// Two-loop recursion: `-H g`.
fn direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

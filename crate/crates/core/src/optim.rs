//! Nonlinear conjugate gradient (Polak–Ribière with restarts) over plain
//! `f64` parameter vectors, with an Armijo backtracking line search.
//!
//! The objective closure fills the gradient buffer when one is supplied and
//! always returns the function value, so callers can share work between the
//! two evaluations.

/// Convergence and line-search knobs.
#[derive(Debug, Clone)]
pub struct NcgConfig {
    pub max_iters: usize,
    /// Stop when the relative improvement stays below this for
    /// `stall_window` consecutive iterations.
    pub rel_improvement_tol: f64,
    pub stall_window: usize,
    /// Stop when the gradient norm falls below this.
    pub grad_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    pub max_backtracks: usize,
}

impl Default for NcgConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            rel_improvement_tol: 1e-10,
            stall_window: 10,
            grad_tol: 1e-12,
            c1: 1e-4,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NcgResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub evaluations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `f` starting from `x0`. `f(x, Some(grad))` must fill `grad` with
/// the gradient at `x`; `f(x, None)` only needs the value.
pub fn minimize<F>(mut f: F, x0: &[f64], cfg: &NcgConfig) -> NcgResult
where
    F: FnMut(&[f64], Option<&mut [f64]>) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut evals = 0usize;

    let mut value = f(&x, Some(&mut grad));
    evals += 1;
    if n == 0 {
        return NcgResult {
            x,
            value,
            iterations: 0,
            converged: true,
            evaluations: evals,
        };
    }

    let mut direction: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut step = 1.0_f64;
    let mut stalled = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        let grad_norm = dot(&grad, &grad).sqrt();
        if grad_norm <= cfg.grad_tol * value.abs().max(1.0) {
            converged = true;
            break;
        }
        let mut slope = dot(&grad, &direction);
        if slope >= 0.0 {
            // Not a descent direction; restart on steepest descent.
            direction = grad.iter().map(|g| -g).collect();
            slope = -grad_norm * grad_norm;
        }

        // Armijo backtracking with a growing initial step.
        let mut alpha = step.max(1e-12);
        let mut trial = vec![0.0; n];
        let mut accepted = false;
        let mut trial_value = value;
        for _ in 0..cfg.max_backtracks {
            for i in 0..n {
                trial[i] = x[i] + alpha * direction[i];
            }
            trial_value = f(&trial, None);
            evals += 1;
            if trial_value <= value + cfg.c1 * alpha * slope {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Line search exhausted: treat as converged at the incumbent.
            converged = true;
            break;
        }

        let improvement = (value - trial_value) / trial_value.abs().max(f64::MIN_POSITIVE);
        x.copy_from_slice(&trial);
        let mut new_grad = vec![0.0; n];
        let new_value = f(&x, Some(&mut new_grad));
        evals += 1;
        value = new_value.min(trial_value);

        // Polak–Ribière+ with automatic reset.
        let gg_old = dot(&grad, &grad);
        let beta = if gg_old > 0.0 {
            let mut num = 0.0;
            for i in 0..n {
                num += new_grad[i] * (new_grad[i] - grad[i]);
            }
            (num / gg_old).max(0.0)
        } else {
            0.0
        };
        for i in 0..n {
            direction[i] = -new_grad[i] + beta * direction[i];
        }
        grad = new_grad;
        step = (alpha * 2.0).min(4.0);

        if improvement < cfg.rel_improvement_tol {
            stalled += 1;
            if stalled >= cfg.stall_window {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    NcgResult {
        x,
        value,
        iterations,
        converged,
        evaluations: evals,
    }
}

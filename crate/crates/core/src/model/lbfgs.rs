//! Limited-memory BFGS for maximizing a smooth concave objective, with a backtracking
//! Armijo line search so accepted iterates never decrease the objective.

use std::collections::VecDeque;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsSettings {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop once `|f_k - f_{k-1}| / max(|f_k|, 1)` falls below this.
    pub tolerance: f64,
}

impl Default for LbfgsSettings {
    fn default() -> Self {
        LbfgsSettings {
            memory: 10,
            max_iterations: 500,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step, starting with the initial point.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `f`, which returns the value and the gradient at a point.
pub fn maximize<F>(mut f: F, x0: Vec<f64>, settings: LbfgsSettings) -> Result<LbfgsResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    // Work on the negated objective internally.
    let mut x = x0;
    let (v, g) = f(&x)?;
    let (mut fx, mut gx) = (-v, g.into_iter().map(|g| -g).collect::<Vec<_>>());
    let mut trace = vec![-fx];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        let gnorm = dot(&gx, &gx).sqrt();
        if gnorm < 1e-12 {
            converged = true;
            break;
        }

        // Two-loop recursion for the descent direction.
        let mut q = gx.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = match history.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / gnorm,
        };
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&gx, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = gx.iter().map(|g| -g / gnorm).collect();
            slope = dot(&gx, &dir);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            if let Ok((v, g)) = f(&xn) {
                let fnew = -v;
                if fnew.is_finite() && fnew <= fx + 1e-4 * step * slope {
                    accepted = Some((xn, fnew, g.into_iter().map(|g| -g).collect::<Vec<_>>()));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            if history.is_empty() {
                converged = true;
                break;
            }
            history.clear();
            continue;
        };
        iterations += 1;

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let rel = (fx - fnew).abs() / fnew.abs().max(1.0);
        x = xn;
        fx = fnew;
        gx = gnew;
        trace.push(-fx);
        if rel < settings.tolerance {
            converged = true;
            break;
        }
    }

    Ok(LbfgsResult {
        x,
        value: -fx,
        iterations,
        converged,
        trace,
    })
}

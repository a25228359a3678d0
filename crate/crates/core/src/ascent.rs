//! Projected gradient ascent on the nonnegative orthant with Armijo backtracking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances;

/// A concave function to maximize over `x >= 0`.
pub trait ConcaveObjective {
    fn value(&self, x: &[f64]) -> f64;
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AscentParams {
    /// Trial step of the first iteration.
    pub initial_step: f64,
    /// Backtracking factor; a step accepted at once is divided by it for the next iteration.
    pub shrink: f64,
    /// Armijo constant.
    pub sufficient_increase: f64,
    /// Stop when the projected gradient norm falls to this value.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// Any multiplier above this aborts the ascent as unbounded.
    pub divergence_threshold: f64,
    /// Start each line search from the Barzilai-Borwein step of the last move
    /// instead of the previous accepted step.
    pub spectral_step: bool,
}

impl Default for AscentParams {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_increase: 1e-4,
            gradient_tolerance: 1e-9,
            max_iterations: 20_000,
            divergence_threshold: tolerances::DIVERGENCE,
            spectral_step: true,
        }
    }
}

impl AscentParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_step > 0.0
            && self.initial_step.is_finite()
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.sufficient_increase > 0.0
            && self.sufficient_increase < 1.0
            && self.gradient_tolerance >= 0.0
            && self.max_iterations >= 1
            && self.divergence_threshold > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSchedule("invalid ascent parameters".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AscentStatus {
    /// Projected gradient below tolerance.
    Stationary,
    /// Line search could not make floating-point progress.
    Stalled,
    IterationLimit,
    /// A coordinate exceeded the divergence threshold.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub status: AscentStatus,
}

fn project(x: &mut [f64]) {
    for v in x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Norm of the gradient with components pushing into an active bound removed.
pub fn projected_gradient_norm(x: &[f64], g: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| if xi <= 0.0 && gi < 0.0 { 0.0 } else { gi * gi })
        .sum::<f64>()
        .sqrt()
}

/// `|s|^2 / (-s . y)` with `s = x - x_prev`, `y = g - g_prev`; `None` without negative curvature.
fn spectral(x: &[f64], x_prev: &[f64], g: &[f64], g_prev: &[f64]) -> Option<f64> {
    let mut ss = 0.0;
    let mut sy = 0.0;
    for i in 0..x.len() {
        let s = x[i] - x_prev[i];
        ss += s * s;
        sy += s * (g[i] - g_prev[i]);
    }
    let step = ss / -sy;
    (sy < 0.0 && step.is_finite()).then(|| step.clamp(1e-12, 1e12))
}

/// Maximizes `f` over the nonnegative orthant starting from `start` (projected first).
pub fn projected_ascent<F: ConcaveObjective + ?Sized>(
    f: &F,
    start: &[f64],
    params: &AscentParams,
) -> AscentOutcome {
    let mut x = start.to_vec();
    project(&mut x);
    let (mut fx, mut g) = f.value_and_gradient(&x);
    let mut step = params.initial_step;
    let mut trial = vec![0.0; x.len()];

    for iter in 0..params.max_iterations {
        if projected_gradient_norm(&x, &g) <= params.gradient_tolerance {
            return AscentOutcome {
                x,
                value: fx,
                iterations: iter,
                status: AscentStatus::Stationary,
            };
        }
        let mut accepted = false;
        let mut first_try = true;
        loop {
            for i in 0..x.len() {
                trial[i] = (x[i] + step * g[i]).max(0.0);
            }
            let ascent: f64 = trial
                .iter()
                .zip(&x)
                .zip(&g)
                .map(|((t, xi), gi)| gi * (t - xi))
                .sum();
            let moved = trial.iter().zip(&x).any(|(t, xi)| t != xi);
            if !moved || ascent <= 0.0 {
                break;
            }
            let ft = f.value(&trial);
            if ft >= fx + params.sufficient_increase * ascent {
                accepted = true;
                break;
            }
            first_try = false;
            step *= params.shrink;
        }
        if !accepted {
            return AscentOutcome {
                x,
                value: fx,
                iterations: iter,
                status: AscentStatus::Stalled,
            };
        }
        std::mem::swap(&mut x, &mut trial);
        let (v, grad) = f.value_and_gradient(&x);
        fx = v;
        if x.iter().any(|&v| v > params.divergence_threshold) || !fx.is_finite() {
            return AscentOutcome {
                x,
                value: fx,
                iterations: iter + 1,
                status: AscentStatus::Diverged,
            };
        }
        // trial now holds the previous iterate
        let bb = if params.spectral_step {
            spectral(&x, &trial, &grad, &g)
        } else {
            None
        };
        g = grad;
        match bb {
            Some(s) => step = s,
            None if first_try => step /= params.shrink,
            None => {}
        }
    }
    let status = if projected_gradient_norm(&x, &g) <= params.gradient_tolerance {
        AscentStatus::Stationary
    } else {
        AscentStatus::IterationLimit
    };
    AscentOutcome {
        x,
        value: fx,
        iterations: params.max_iterations,
        status,
    }
}

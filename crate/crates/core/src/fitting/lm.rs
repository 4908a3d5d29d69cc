//! Levenberg–Marquardt with Marquardt diagonal scaling and Nielsen's damping
//! update.

use serde::{Deserialize, Serialize};

use super::residual::{Linearization, SpectrumResidual};
use crate::error::Result;
use crate::linalg::{cholesky_solve, Mat};

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Residuals reached round-off level.
    CostFloor,
    /// Relative cost decrease fell below the configured tolerance.
    SmallDecrease,
    /// Step size negligible relative to the parameters.
    SmallStep,
    /// Damping hit its ceiling without any decrease: stationary point.
    Stationary,
    /// Iteration budget exhausted.
    MaxIterations,
    /// Nothing to fit (all-zero data).
    Degenerate,
}

impl Termination {
    pub fn converged(self) -> bool {
        !matches!(self, Termination::MaxIterations)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LmSettings {
    pub max_iterations: usize,
    pub relative_tolerance: f64,
    pub finite_difference: bool,
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub cost_history: Vec<f64>,
    pub iterations: usize,
    pub accepted: usize,
    pub termination: Termination,
}

const COST_FLOOR_RMS: f64 = 1e-14;
const STEP_TOL: f64 = 1e-13;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

/// Normal equations JᵀJ and Jᵀr from a column-major Jacobian.
fn normal_equations(lin: &Linearization, np: usize) -> (Mat<f64>, Vec<f64>) {
    let m = lin.residuals.len();
    let col = |a: usize| &lin.jacobian[a * m..(a + 1) * m];
    let mut jtj = Mat::zeros(np, np);
    for a in 0..np {
        let ca = col(a);
        for b in a..np {
            let cb = col(b);
            let s: f64 = ca.iter().zip(cb).map(|(x, y)| x * y).sum();
            jtj[(a, b)] = s;
            jtj[(b, a)] = s;
        }
    }
    let grad = (0..np).map(|a| col(a).iter().zip(&lin.residuals).map(|(x, r)| x * r).sum()).collect();
    (jtj, grad)
}

pub fn minimize(problem: &SpectrumResidual<'_>, start: Vec<f64>, settings: LmSettings) -> Result<LmOutcome> {
    let np = start.len();
    let m = problem.n_residuals() as f64;
    let mut p = start;
    let mut r = problem.residuals(&p)?;
    let mut cost = cost_of(&r);
    let mut history = vec![cost];
    let mut iterations = 0;
    let mut accepted = 0;
    let mut lambda = LAMBDA_INIT;
    let mut nu = 2.0;
    let mut scale = vec![0.0f64; np];

    let floor = 0.5 * m * COST_FLOOR_RMS * COST_FLOOR_RMS;
    let termination = 'outer: loop {
        if cost <= floor {
            break Termination::CostFloor;
        }
        let lin = if settings.finite_difference { problem.linearize_fd(&p)? } else { problem.linearize(&p)? };
        let (jtj, grad) = normal_equations(&lin, np);
        let dmax = (0..np).map(|a| jtj[(a, a)]).fold(0.0, f64::max);
        for a in 0..np {
            scale[a] = scale[a].max(jtj[(a, a)]).max(1e-12 * dmax).max(f64::MIN_POSITIVE);
        }
        loop {
            if iterations >= settings.max_iterations {
                break 'outer Termination::MaxIterations;
            }
            iterations += 1;
            let mut a = jtj.clone();
            for i in 0..np {
                a[(i, i)] += lambda * scale[i];
            }
            let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Some(step) = cholesky_solve(&a, &neg_grad) else {
                lambda *= nu;
                nu *= 2.0;
                if lambda > LAMBDA_MAX {
                    break 'outer Termination::Stationary;
                }
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(&step).map(|(x, d)| x + d).collect();
            let trial_r = match problem.residuals(&trial) {
                Ok(v) if v.iter().all(|x| x.is_finite()) => Some(v),
                _ => None,
            };
            let trial_cost = trial_r.as_deref().map(cost_of).unwrap_or(f64::INFINITY);
            if trial_cost < cost {
                // predicted reduction of the quadratic model
                let predicted: f64 =
                    0.5 * step.iter().enumerate().map(|(i, d)| d * (lambda * scale[i] * d - grad[i])).sum::<f64>();
                let rho = if predicted > 0.0 { (cost - trial_cost) / predicted } else { 0.0 };
                let rel = (cost - trial_cost) / cost;
                let step_norm = step.iter().map(|d| d * d).sum::<f64>().sqrt();
                let p_norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                p = trial;
                r = trial_r.expect("finite trial residuals");
                cost = trial_cost;
                history.push(cost);
                accepted += 1;
                lambda *= (1.0 / 3.0f64).max(1.0 - (2.0 * rho - 1.0).powi(3));
                nu = 2.0;
                if rel < settings.relative_tolerance && predicted / (cost + predicted) < settings.relative_tolerance {
                    break 'outer Termination::SmallDecrease;
                }
                if step_norm <= STEP_TOL * (p_norm + STEP_TOL) {
                    break 'outer Termination::SmallStep;
                }
                continue 'outer;
            }
            lambda *= nu;
            nu *= 2.0;
            if lambda > LAMBDA_MAX {
                break 'outer Termination::Stationary;
            }
        }
    };
    debug_assert_eq!(cost, cost_of(&r));
    Ok(LmOutcome { params: p, cost_history: history, iterations, accepted, termination })
}

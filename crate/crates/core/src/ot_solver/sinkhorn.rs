//! Entropic transport by log-domain Sinkhorn iteration.
//!
//! The plan is `gamma_ij = a_i b_j exp((f_i + g_j - C_ij) / eps)`; alternately
//! updating `f` and `g` enforces the row and column marginals exactly.

use nalgebra::DMatrix;

use super::{DiscreteOTProblem, PotentialPair, TransportPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornParams {
    pub epsilon: f64,
    pub max_iter: usize,
    /// Stop when the row marginal defect after a column update falls below this.
    pub tol: f64,
}

impl Default for SinkhornParams {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            max_iter: 10_000,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornSolution {
    pub plan: TransportPlan,
    pub potentials: PotentialPair,
    pub iterations: usize,
    pub converged: bool,
    pub marginal_defect: f64,
    /// Marginal defect after each full sweep.
    pub defect_history: Vec<f64>,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn sinkhorn(problem: &DiscreteOTProblem, params: SinkhornParams) -> Result<SinkhornSolution> {
    let eps = params.epsilon;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    let c = problem.cost_matrix();
    let (n, m) = c.shape();
    let log_a: Vec<f64> = problem.source_weights().iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = problem.target_weights().iter().map(|w| w.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];

    let plan_of = |f: &[f64], g: &[f64]| {
        DMatrix::from_fn(n, m, |i, j| {
            (log_a[i] + log_b[j] + (f[i] + g[j] - c[(i, j)]) / eps).exp()
        })
    };

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        iterations += 1;
        for i in 0..n {
            f[i] = -eps * log_sum_exp((0..m).map(|j| log_b[j] + (g[j] - c[(i, j)]) / eps));
        }
        for j in 0..m {
            g[j] = -eps * log_sum_exp((0..n).map(|i| log_a[i] + (f[i] - c[(i, j)]) / eps));
        }
        if f.iter().chain(&g).any(|v| !v.is_finite()) {
            return Err(Error::Underflow { epsilon: eps });
        }
        // columns are exact after the g update; rows carry the remaining error
        let row_defect = (0..n)
            .map(|i| {
                let s: f64 = (0..m)
                    .map(|j| (log_a[i] + log_b[j] + (f[i] + g[j] - c[(i, j)]) / eps).exp())
                    .sum();
                (s - problem.source_weights()[i]).abs()
            })
            .fold(0.0, f64::max);
        history.push(row_defect);
        if row_defect <= params.tol {
            converged = true;
            break;
        }
    }

    let coupling = plan_of(&f, &g);
    if coupling.iter().any(|v| !v.is_finite()) {
        return Err(Error::Underflow { epsilon: eps });
    }
    let plan = TransportPlan { coupling };
    let marginal_defect = plan.marginal_defect(problem.source_weights(), problem.target_weights());
    Ok(SinkhornSolution {
        plan,
        potentials: PotentialPair::from_kantorovich(&f, &g),
        iterations,
        converged,
        marginal_defect,
        defect_history: history,
    })
}

//! Exact solver for uniform square problems via the Hungarian method.

use nalgebra::DMatrix;

use super::{DiscreteOTProblem, PotentialPair, TransportPlan};
use crate::error::{Error, Result};

/// Shortest-augmenting-path Hungarian algorithm, `O(n^3)`.
///
/// Returns the row-to-column assignment and dual potentials `(row, col)`
/// with `row[i] + col[j] <= cost[(i, j)]`, equality on assigned pairs.
pub fn hungarian(cost: &DMatrix<f64>) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment needs a square cost matrix");
    if n == 0 {
        return (Vec::new(), Vec::new(), Vec::new());
    }

    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    (assignment, u[1..].to_vec(), v[1..].to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentSolution {
    /// `assignment[i]` is the target matched with source `i`.
    pub assignment: Vec<usize>,
    pub plan: TransportPlan,
    pub potentials: PotentialPair,
}

pub fn solve_assignment(problem: &DiscreteOTProblem) -> Result<AssignmentSolution> {
    if !problem.is_uniform_square() {
        let (n, m) = problem.shape();
        return Err(Error::InvalidInput(format!(
            "assignment needs a square problem with uniform weights, got {n}x{m}"
        )));
    }
    let n = problem.shape().0;
    // with weights 1/n the LP duals coincide with the assignment duals
    let (assignment, phi, psi) = hungarian(problem.cost_matrix());
    let mut coupling = DMatrix::zeros(n, n);
    for (i, &j) in assignment.iter().enumerate() {
        coupling[(i, j)] = 1.0 / n as f64;
    }
    Ok(AssignmentSolution {
        assignment,
        plan: TransportPlan { coupling },
        potentials: PotentialPair::from_kantorovich(&phi, &psi),
    })
}

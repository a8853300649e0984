use serde::Serialize;

use super::{DiscreteOTProblem, PotentialPair, TransportPlan};

/// Primal and dual values with the optimality diagnostics of a candidate solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    /// `sum C_ij gamma_ij`.
    pub primal: f64,
    /// `-sum u_i rho_i - sum ubar_j rhobar_j`.
    pub dual: f64,
    pub gap: f64,
    pub marginal_defect: f64,
    /// `max(0, max_ij -(u_i + ubar_j + C_ij))`.
    pub feasibility_violation: f64,
    /// `max |u_i + ubar_j + C_ij|` over the support of the plan.
    pub support_defect: f64,
    pub support_threshold: f64,
}

/// Diagnostics for `(plan, potentials)`. The support is `gamma_ij > threshold`,
/// by default `1e-3 * max gamma`.
pub fn duality_report(
    problem: &DiscreteOTProblem,
    plan: &TransportPlan,
    potentials: &PotentialPair,
    support_threshold: Option<f64>,
) -> DualityReport {
    let c = problem.cost_matrix();
    let gamma = &plan.coupling;
    let primal = c.component_mul(gamma).sum();
    let dual = -potentials
        .u
        .iter()
        .zip(problem.source_weights())
        .map(|(u, w)| u * w)
        .sum::<f64>()
        - potentials
            .ubar
            .iter()
            .zip(problem.target_weights())
            .map(|(u, w)| u * w)
            .sum::<f64>();
    let threshold = support_threshold.unwrap_or_else(|| 1e-3 * gamma.max());

    let mut feasibility_violation: f64 = 0.0;
    let mut support_defect: f64 = 0.0;
    let (n, m) = c.shape();
    for i in 0..n {
        for j in 0..m {
            let slack = potentials.u[i] + potentials.ubar[j] + c[(i, j)];
            feasibility_violation = feasibility_violation.max(-slack);
            if gamma[(i, j)] > threshold {
                support_defect = support_defect.max(slack.abs());
            }
        }
    }
    DualityReport {
        primal,
        dual,
        gap: primal - dual,
        marginal_defect: plan.marginal_defect(problem.source_weights(), problem.target_weights()),
        feasibility_violation,
        support_defect,
        support_threshold: threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot_solver::solve_assignment;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn assignment_closes_the_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let p = DiscreteOTProblem::uniform(c).unwrap();
        let sol = solve_assignment(&p).unwrap();
        let r = duality_report(&p, &sol.plan, &sol.potentials, None);
        assert!(r.gap.abs() <= 1e-9);
        assert!(r.support_defect <= 1e-9);
        assert!(r.feasibility_violation <= 1e-9);
        assert!(r.marginal_defect <= 1e-15);
    }

    #[test]
    fn product_plan_with_zero_potentials() {
        let c = DMatrix::from_row_slice(2, 3, &[0.5, 1.0, 2.0, 0.0, 3.0, 1.5]);
        let p =
            DiscreteOTProblem::from_cost_matrix(vec![0.4, 0.6], vec![0.2, 0.3, 0.5], c).unwrap();
        let plan = TransportPlan::product(&p);
        let r = duality_report(&p, &plan, &PotentialPair::zero(2, 3), None);
        assert_eq!(r.dual, 0.0);
        assert_eq!(r.gap, r.primal);
        assert_eq!(r.feasibility_violation, 0.0);
    }

    #[test]
    fn weak_duality_for_feasible_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let c = DMatrix::from_fn(4, 5, |_, _| rng.random_range(-1.0..1.0));
            let p = DiscreteOTProblem::from_cost_matrix(vec![0.25; 4], vec![0.2; 5], c.clone())
                .unwrap();
            // feasible: u_i + ubar_j >= -C_ij by construction
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let ubar: Vec<f64> = (0..5)
                .map(|j| {
                    (0..4)
                        .map(|i| -c[(i, j)] - u[i])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            let r = duality_report(
                &p,
                &TransportPlan::product(&p),
                &PotentialPair { u, ubar },
                None,
            );
            assert!(r.feasibility_violation <= 1e-12);
            assert!(r.primal - r.dual >= -1e-10);
        }
    }
}

use std::io::Cursor;

use nalgebra::DMatrix;
use otgeom::fields::{CostFunction, Point};
use otgeom::fields::{Density, DomainBox};
use otgeom::ot_solver::{
    duality_report, read_weighted_points, sinkhorn, solve_assignment, DiscreteOTProblem,
    SinkhornParams,
};
use otgeom::semigeostrophic::{sg_assignment_demo, sg_energy, SGConfig};

#[test]
fn reading_points_then_solving_recovers_a_shift() {
    let src = "# x1 x2 x3 w\n0 0 0 1\n1 0 0 1\n0,2,0,1\n";
    let tgt = "0.5 2 0 1\n1.5 0 0 1\n0.5 0 0 1\n";
    let (xs, mut a) = read_weighted_points(Cursor::new(src)).unwrap();
    let (ys, mut b) = read_weighted_points(Cursor::new(tgt)).unwrap();
    a.iter_mut().for_each(|w| *w /= 3.0);
    b.iter_mut().for_each(|w| *w /= 3.0);
    let problem = DiscreteOTProblem::new(xs, a, ys, b, &CostFunction::quadratic()).unwrap();
    let sol = solve_assignment(&problem).unwrap();
    // quadratic cost pairs each point with its translate by (0.5, 0, 0)
    assert_eq!(sol.assignment, vec![2, 1, 0]);
    let d = duality_report(&problem, &sol.plan, &sol.potentials, None);
    assert!(d.gap.abs() < 1e-12 && d.feasibility_violation < 1e-12);
}

#[test]
fn malformed_rows_are_rejected() {
    assert!(read_weighted_points(Cursor::new("1 2 3\n")).is_err());
    assert!(read_weighted_points(Cursor::new("1 2 x 4\n")).is_err());
}

#[test]
fn sinkhorn_handles_unequal_marginals() {
    let c = DMatrix::from_fn(3, 4, |i, j| (i as f64 - j as f64).powi(2));
    let problem =
        DiscreteOTProblem::from_cost_matrix(vec![0.2, 0.5, 0.3], vec![0.1, 0.4, 0.3, 0.2], c)
            .unwrap();
    let sol = sinkhorn(
        &problem,
        SinkhornParams {
            epsilon: 0.2,
            max_iter: 50_000,
            tol: 1e-12,
        },
    )
    .unwrap();
    assert!(sol.converged);
    assert!(sol.marginal_defect < 1e-10);
    assert!(solve_assignment(&problem).is_err());
}

#[test]
fn sinkhorn_approaches_assignment_on_point_clouds() {
    let xs: Vec<Point> = (0..8)
        .map(|i| Point::new(i as f64 / 8.0, (i * i % 5) as f64 / 5.0, 0.0))
        .collect();
    let ys: Vec<Point> = (0..8)
        .map(|i| Point::new((i * 3 % 8) as f64 / 8.0, 0.1, (i % 3) as f64 / 3.0))
        .collect();
    let w = vec![0.125; 8];
    let half_sq =
        CostFunction::custom("half-squared-distance", |x, y| 0.5 * (x - y).norm_squared());
    let problem = DiscreteOTProblem::new(xs, w.clone(), ys, w, &half_sq).unwrap();
    let exact = solve_assignment(&problem).unwrap();
    let opt = duality_report(&problem, &exact.plan, &exact.potentials, None).primal;
    let sol = sinkhorn(
        &problem,
        SinkhornParams {
            epsilon: 1e-3,
            max_iter: 200_000,
            tol: 1e-11,
        },
    )
    .unwrap();
    let d = duality_report(&problem, &sol.plan, &sol.potentials, None);
    assert!(d.primal - opt < 1e-2 && d.primal - opt > -1e-9);
}

#[test]
fn semigeostrophic_demo_energy_is_minimal_among_pairings() {
    let src = Density::uniform(DomainBox::new([-1.0, -1.0, 0.0], [1.0, 1.0, 1.0]).unwrap());
    let tgt = Density::uniform(DomainBox::new([-1.0, -1.0, 0.5], [1.0, 1.0, 1.5]).unwrap());
    let cfg = SGConfig::new(1.0, src, tgt).unwrap();
    let demo = sg_assignment_demo(&cfg, 5, 11).unwrap();
    assert!((demo.energy - demo.duality.primal).abs() < 1e-12);
    let xs = demo.problem.source_points();
    let ys = demo.problem.target_points();
    let w = vec![0.2; 5];
    // identity pairing is one candidate; the optimum cannot exceed it
    let identity: Vec<_> = xs.iter().copied().zip(ys.iter().copied()).collect();
    assert!(demo.energy <= sg_energy(&identity, &w, 1.0).unwrap() + 1e-12);
    assert_eq!(
        demo.solution.assignment,
        sg_assignment_demo(&cfg, 5, 11).unwrap().solution.assignment
    );
}

//! The f-plane semigeostrophic example.
//!
//! A fluid particle at position `x = (x, y, z)` carries geostrophic
//! coordinates `X = (X, Y, Z)`. The energy density
//! `f^2 [ (x-X)^2/2 + (y-Y)^2/2 - zZ ]` is a transport cost whose
//! symplectic form is canonical when `f = 1`.

use nalgebra::Matrix6;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::canonical_symplectic;
use crate::fields::{CostFunction, Density, Point};
use crate::ma_structure::{block_swap, MAStructure};
use crate::ot_solver::{
    duality_report, solve_assignment, AssignmentSolution, DiscreteOTProblem, DualityReport,
};
use crate::sampling;
use crate::transport_geometry::conformal_defect_at;

/// Distance kept from the box faces when sampling verification points.
pub const SAMPLE_MARGIN: f64 = 1e-3;

pub fn sg_cost(x: &Point, big_x: &Point, f: f64) -> f64 {
    let dx = x[0] - big_x[0];
    let dy = x[1] - big_x[1];
    f * f * (0.5 * dx * dx + 0.5 * dy * dy - x[2] * big_x[2])
}

/// Weighted total energy of particles `(x, X)`.
pub fn sg_energy(particles: &[(Point, Point)], weights: &[f64], f: f64) -> Result<f64> {
    if particles.len() != weights.len() || particles.is_empty() {
        return Err(Error::InvalidInput(
            "particle and weight counts differ".into(),
        ));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidInput(
            "particle weights must be positive".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "particle weights sum to {total}, not 1"
        )));
    }
    Ok(particles
        .iter()
        .zip(weights)
        .map(|((x, big_x), w)| w * sg_cost(x, big_x, f))
        .sum())
}

#[derive(Debug, Clone)]
pub struct SGConfig {
    pub coriolis_f: f64,
    pub source: Density,
    pub target: Density,
}

impl SGConfig {
    pub fn new(coriolis_f: f64, source: Density, target: Density) -> Result<Self> {
        if !(coriolis_f > 0.0) || !coriolis_f.is_finite() {
            return Err(Error::InvalidInput(format!(
                "coriolis parameter must be positive, got {coriolis_f}"
            )));
        }
        for (name, d) in [("source", &source), ("target", &target)] {
            if !(d.min_on_sweep(8) > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} density is not positive on its box"
                )));
            }
        }
        Ok(Self {
            coriolis_f,
            source,
            target,
        })
    }

    pub fn cost(&self) -> CostFunction {
        CostFunction::semigeostrophic(self.coriolis_f)
    }

    pub fn structure(&self) -> MAStructure {
        MAStructure::new(self.cost(), self.source.clone(), self.target.clone())
    }
}

/// Maxima over the sample of the four checks in the semigeostrophic proposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop31Report {
    pub samples: usize,
    /// `max |omega_c - sum dx^i ^ dX^i|` over coefficients.
    pub canonical_defect: f64,
    pub conformal_defect: f64,
    /// Entrywise deviation of the LR metric from `rho rhobar (0 I; I 0)`.
    pub lr_closed_form_defect: f64,
    /// Entrywise deviation of the KMW metric from `(rho rhobar)^(1/3) (0 I; I 0)`.
    pub kmw_closed_form_defect: f64,
}

impl Prop31Report {
    pub fn max_defect(&self) -> f64 {
        self.canonical_defect
            .max(self.conformal_defect)
            .max(self.lr_closed_form_defect)
            .max(self.kmw_closed_form_defect)
    }
}

pub fn verify_prop31(config: &SGConfig, sample_count: usize, seed: u64) -> Result<Prop31Report> {
    verify_prop31_with_cost(config, &config.cost(), sample_count, seed)
}

/// Same checks with an arbitrary cost in place of the semigeostrophic one.
pub fn verify_prop31_with_cost(
    config: &SGConfig,
    cost: &CostFunction,
    sample_count: usize,
    seed: u64,
) -> Result<Prop31Report> {
    if config.coriolis_f != 1.0 {
        return Err(Error::CoriolisNormalization {
            f: config.coriolis_f,
        });
    }
    let s = MAStructure::new(cost.clone(), config.source.clone(), config.target.clone());
    let margin = SAMPLE_MARGIN + cost.stencil_margin();
    let pairs = sampling::interior_pairs(
        config.source.domain(),
        config.target.domain(),
        margin,
        sample_count,
        seed,
    )?;
    let canonical = canonical_symplectic();
    let swap = block_swap();
    let mut report = Prop31Report {
        samples: sample_count,
        canonical_defect: 0.0,
        conformal_defect: 0.0,
        lr_closed_form_defect: 0.0,
        kmw_closed_form_defect: 0.0,
    };
    for (x, big_x) in &pairs {
        let omega = s.symplectic_form_at(x, big_x)?;
        report.canonical_defect = report.canonical_defect.max((&omega - &canonical).max_abs());

        let c = conformal_defect_at(&s, x, big_x)?;
        report.conformal_defect = report.conformal_defect.max(c.relative_defect);

        let rr = config.source.eval(x) * config.target.eval(big_x);
        let lr_expected: Matrix6<f64> = rr * swap;
        let kmw_expected: Matrix6<f64> = rr.cbrt() * swap;
        report.lr_closed_form_defect = report
            .lr_closed_form_defect
            .max((c.lr.matrix() - lr_expected).amax());
        report.kmw_closed_form_defect = report
            .kmw_closed_form_defect
            .max((c.kmw.matrix() - kmw_expected).amax());
    }
    Ok(report)
}

/// Minimum-energy rearrangement of a small particle set by exact assignment.
#[derive(Debug, Clone)]
pub struct SgAssignmentDemo {
    pub problem: DiscreteOTProblem,
    pub solution: AssignmentSolution,
    pub duality: DualityReport,
    /// Energy of the optimal pairing; equals the primal value.
    pub energy: f64,
}

/// Draws `n` positions from the source density and `n` geostrophic
/// coordinates from the target density, then pairs them optimally.
pub fn sg_assignment_demo(config: &SGConfig, n: usize, seed: u64) -> Result<SgAssignmentDemo> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "particle count must be positive".into(),
        ));
    }
    let mut rng = sampling::rng(seed);
    let xs: Vec<Point> = (0..n).map(|_| config.source.sample(&mut rng)).collect();
    let big_xs: Vec<Point> = (0..n).map(|_| config.target.sample(&mut rng)).collect();
    let w = vec![1.0 / n as f64; n];
    let problem = DiscreteOTProblem::new(
        xs.clone(),
        w.clone(),
        big_xs.clone(),
        w.clone(),
        &config.cost(),
    )?;
    let solution = solve_assignment(&problem)?;
    let duality = duality_report(&problem, &solution.plan, &solution.potentials, None);
    let pairs: Vec<(Point, Point)> = solution
        .assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| (xs[i], big_xs[j]))
        .collect();
    let energy = sg_energy(&pairs, &w, config.coriolis_f)?;
    Ok(SgAssignmentDemo {
        problem,
        solution,
        duality,
        energy,
    })
}

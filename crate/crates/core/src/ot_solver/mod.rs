//! Desk-scale discrete Monge-Kantorovich solvers and duality diagnostics.
//!
//! Potentials are reported in the convention `u(x) + ubar(xbar) >= -c(x, xbar)`
//! with dual functional `J = -sum u rho - sum ubar rhobar`. Solvers work
//! internally with `phi + psi <= C` and convert once, via
//! [`PotentialPair::from_kantorovich`].

mod assignment;
mod duality;
mod monotone;
mod residual;
mod sinkhorn;

use std::io::BufRead;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fields::{CostFunction, Point};

pub use assignment::{hungarian, solve_assignment, AssignmentSolution};
pub use duality::{duality_report, DualityReport};
pub use monotone::{solve_monotone_1d, MonotoneMap};
pub use residual::{el_residual_grid, ResidualPoint, ResidualSummary};
pub use sinkhorn::{sinkhorn, SinkhornParams, SinkhornSolution};

/// Tolerance on the unit mass of each weight vector.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Weighted point clouds and their cost matrix `C_ij = c(x_i, xbar_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOTProblem {
    source_points: Vec<Point>,
    source_weights: Vec<f64>,
    target_points: Vec<Point>,
    target_weights: Vec<f64>,
    cost: DMatrix<f64>,
}

fn check_weights(name: &str, w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidInput(format!("{name} weights are empty")));
    }
    if let Some(bad) = w.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{name} weight {bad} is not positive"
        )));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "{name} weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

impl DiscreteOTProblem {
    pub fn new(
        source_points: Vec<Point>,
        source_weights: Vec<f64>,
        target_points: Vec<Point>,
        target_weights: Vec<f64>,
        cost: &CostFunction,
    ) -> Result<Self> {
        if source_points.len() != source_weights.len()
            || target_points.len() != target_weights.len()
        {
            return Err(Error::InvalidInput("point and weight counts differ".into()));
        }
        let matrix = DMatrix::from_fn(source_points.len(), target_points.len(), |i, j| {
            cost.value(&source_points[i], &target_points[j])
        });
        let mut problem = Self::from_cost_matrix(source_weights, target_weights, matrix)?;
        problem.source_points = source_points;
        problem.target_points = target_points;
        Ok(problem)
    }

    /// A problem given directly by its cost matrix; point lists stay empty.
    pub fn from_cost_matrix(
        source_weights: Vec<f64>,
        target_weights: Vec<f64>,
        cost: DMatrix<f64>,
    ) -> Result<Self> {
        check_weights("source", &source_weights)?;
        check_weights("target", &target_weights)?;
        if cost.nrows() != source_weights.len() || cost.ncols() != target_weights.len() {
            return Err(Error::InvalidInput(format!(
                "cost matrix is {}x{}, expected {}x{}",
                cost.nrows(),
                cost.ncols(),
                source_weights.len(),
                target_weights.len()
            )));
        }
        if cost.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(
                "cost matrix has non-finite entries".into(),
            ));
        }
        Ok(Self {
            source_points: Vec::new(),
            source_weights,
            target_points: Vec::new(),
            target_weights,
            cost,
        })
    }

    /// Uniform weights `1/n` on both sides.
    pub fn uniform(cost: DMatrix<f64>) -> Result<Self> {
        let (n, m) = cost.shape();
        Self::from_cost_matrix(vec![1.0 / n as f64; n], vec![1.0 / m as f64; m], cost)
    }

    pub fn source_points(&self) -> &[Point] {
        &self.source_points
    }

    pub fn target_points(&self) -> &[Point] {
        &self.target_points
    }

    pub fn source_weights(&self) -> &[f64] {
        &self.source_weights
    }

    pub fn target_weights(&self) -> &[f64] {
        &self.target_weights
    }

    pub fn cost_matrix(&self) -> &DMatrix<f64> {
        &self.cost
    }

    pub fn shape(&self) -> (usize, usize) {
        self.cost.shape()
    }

    /// Square with all weights equal to `1/N`.
    pub fn is_uniform_square(&self) -> bool {
        let (n, m) = self.shape();
        let w = 1.0 / n as f64;
        n == m
            && self
                .source_weights
                .iter()
                .chain(&self.target_weights)
                .all(|&v| (v - w).abs() <= MASS_TOLERANCE)
    }
}

/// Joint weights `gamma_ij >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub coupling: DMatrix<f64>,
}

impl TransportPlan {
    /// `rho_i rhobar_j`.
    pub fn product(problem: &DiscreteOTProblem) -> Self {
        let (n, m) = problem.shape();
        Self {
            coupling: DMatrix::from_fn(n, m, |i, j| {
                problem.source_weights[i] * problem.target_weights[j]
            }),
        }
    }

    /// Largest absolute row or column mass error.
    pub fn marginal_defect(&self, source_weights: &[f64], target_weights: &[f64]) -> f64 {
        let rows = self
            .coupling
            .row_iter()
            .zip(source_weights)
            .map(|(r, w)| (r.sum() - w).abs());
        let cols = self
            .coupling
            .column_iter()
            .zip(target_weights)
            .map(|(c, w)| (c.sum() - w).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }
}

/// Dual potentials `(u, ubar)` at source and target points.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    pub u: Vec<f64>,
    pub ubar: Vec<f64>,
}

impl PotentialPair {
    /// Converts `phi_i + psi_j <= C_ij` potentials and fixes `u[0] = 0`.
    pub fn from_kantorovich(phi: &[f64], psi: &[f64]) -> Self {
        let shift = phi.first().copied().unwrap_or(0.0);
        Self {
            u: phi.iter().map(|p| -(p - shift)).collect(),
            ubar: psi.iter().map(|p| -(p + shift)).collect(),
        }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            u: vec![0.0; n],
            ubar: vec![0.0; m],
        }
    }
}

/// Parses whitespace- or comma-separated rows `x1 x2 x3 weight`.
/// Blank lines and lines starting with `#` are skipped.
pub fn read_weighted_points(reader: impl BufRead) -> Result<(Vec<Point>, Vec<f64>)> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("line {}: {s:?}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if fields.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "line {}: expected 4 columns (x1 x2 x3 weight), found {}",
                lineno + 1,
                fields.len()
            )));
        }
        points.push(Point::new(fields[0], fields[1], fields[2]));
        weights.push(fields[3]);
    }
    Ok((points, weights))
}

use serde::Serialize;

use crate::fields::{Point, ScalarField};
use crate::ma_structure::MAStructure;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualPoint {
    pub x: [f64; 3],
    /// `None` when evaluation failed at this point.
    pub residual: Option<f64>,
    pub out_of_support: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSummary {
    pub points: Vec<ResidualPoint>,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub failed: usize,
    pub out_of_support: usize,
}

/// Monge-Ampère residual of `u` over a set of source points. Failures are
/// recorded per point and excluded from the aggregates.
pub fn el_residual_grid(s: &MAStructure, u: &ScalarField, grid: &[Point]) -> ResidualSummary {
    let points: Vec<ResidualPoint> = grid
        .iter()
        .map(|x| match s.ma_residual_at(u, x) {
            Ok(r) => ResidualPoint {
                x: [x[0], x[1], x[2]],
                residual: Some(r.residual),
                out_of_support: r.out_of_support,
                error: None,
            },
            Err(e) => ResidualPoint {
                x: [x[0], x[1], x[2]],
                residual: None,
                out_of_support: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let values: Vec<f64> = points
        .iter()
        .filter_map(|p| p.residual.map(f64::abs))
        .collect();
    let max_abs = values.iter().copied().fold(0.0, f64::max);
    let mean_abs = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    ResidualSummary {
        failed: points.len() - values.len(),
        out_of_support: points.iter().filter(|p| p.out_of_support).count(),
        points,
        max_abs,
        mean_abs,
    }
}

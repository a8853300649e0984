//! Command execution.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use nalgebra::{Matrix3, Matrix6, Vector3};
use rayon::prelude::*;
use serde_json::json;

use super::config::{Command, ConfigError, CostSpec, RunConfig, SolverKind};
use super::report::{Check, PointRecord, StructureReport};
use crate::error::Error;
use crate::fields::{Point, ScalarField};
use crate::ma_structure::{effectiveness_defect, MAStructure};
use crate::ot_solver::{
    duality_report, el_residual_grid, read_weighted_points, sinkhorn, solve_assignment,
    DiscreteOTProblem, SinkhornParams,
};
use crate::sampling;
use crate::semigeostrophic::{sg_assignment_demo, verify_prop31, SGConfig, SAMPLE_MARGIN};
use crate::transport_geometry::{conformal_defect_at, metric_signature, Signature};

/// Validates `config` and runs its command.
pub fn execute(config: &RunConfig) -> Result<StructureReport, ConfigError> {
    config.validate()?;
    match config.command {
        Command::VerifyConformal | Command::CheckStructure => sweep(config),
        Command::SolveOt => solve_ot(config),
        Command::SgDemo => sg_demo(config),
    }
}

fn structure(config: &RunConfig) -> Result<MAStructure, ConfigError> {
    Ok(MAStructure::new(
        config.cost_function()?,
        config.source_density()?,
        config.target_density()?,
    ))
}

fn signature_of(m: &Matrix6<f64>, rel_tol: f64) -> Signature {
    metric_signature(m, rel_tol * m.abs().max())
}

fn sig_array(s: Signature) -> [usize; 3] {
    [s.plus, s.minus, s.zero]
}

fn measure_point(
    s: &MAStructure,
    index: usize,
    x: &Point,
    xbar: &Point,
    sig_tol: f64,
) -> PointRecord {
    let mut rec = PointRecord {
        index,
        x: [x[0], x[1], x[2]],
        xbar: [xbar[0], xbar[1], xbar[2]],
        conformal_factor: None,
        conformal_defect: None,
        lr_signature: None,
        kmw_signature: None,
        effectiveness_defect: None,
        closed_form_defect: None,
        error: None,
    };
    let result = (|| -> crate::Result<()> {
        let omega = s.symplectic_form_at(x, xbar)?;
        let alpha = s.effective_form_at(x, xbar)?;
        rec.effectiveness_defect = Some(effectiveness_defect(&omega, &alpha)?);
        let conf = conformal_defect_at(s, x, xbar)?;
        rec.conformal_factor = Some(conf.conformal_factor);
        rec.conformal_defect = Some(conf.relative_defect);
        rec.lr_signature = Some(sig_array(signature_of(conf.lr.matrix(), sig_tol)));
        rec.kmw_signature = Some(sig_array(signature_of(conf.kmw.matrix(), sig_tol)));
        let closed = s.lr_metric_closed_form(x, xbar)?;
        let scale = closed.matrix().abs().max();
        rec.closed_form_defect = Some((conf.lr.matrix() - closed.matrix()).abs().max() / scale);
        Ok(())
    })();
    if let Err(e) = result {
        rec.error = Some(e.to_string());
    }
    rec
}

fn max_of(points: &[PointRecord], f: impl Fn(&PointRecord) -> Option<f64>) -> f64 {
    points.iter().filter_map(f).fold(0.0, f64::max)
}

fn mean_of(points: &[PointRecord], f: impl Fn(&PointRecord) -> Option<f64>) -> f64 {
    let vals: Vec<f64> = points.iter().filter_map(f).collect();
    if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

fn sweep(config: &RunConfig) -> Result<StructureReport, ConfigError> {
    let s = structure(config)?;
    let margin = s.cost().stencil_margin();
    let pairs = sampling::interior_pairs(
        s.source().domain(),
        s.target().domain(),
        margin,
        config.samples,
        config.seed,
    )?;
    let tol = &config.tolerances;
    let points: Vec<PointRecord> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (x, xbar))| measure_point(&s, i, x, xbar, tol.signature))
        .collect();

    let failed = points.iter().filter(|p| p.error.is_some()).count();
    let split = [3, 3, 0];
    let non_split_lr = points
        .iter()
        .filter(|p| p.lr_signature.is_some_and(|g| g != split))
        .count();
    let non_split_kmw = points
        .iter()
        .filter(|p| p.kmw_signature.is_some_and(|g| g != split))
        .count();
    let max_conf = max_of(&points, |p| p.conformal_defect);
    let max_eff = max_of(&points, |p| p.effectiveness_defect);
    let max_closed = max_of(&points, |p| p.closed_form_defect);

    let aggregates = json!({
        "samples": points.len(),
        "failed_points": failed,
        "max_conformal_defect": max_conf,
        "mean_conformal_defect": mean_of(&points, |p| p.conformal_defect),
        "max_effectiveness_defect": max_eff,
        "max_closed_form_defect": max_closed,
        "non_split_lr_signatures": non_split_lr,
        "non_split_kmw_signatures": non_split_kmw,
    });

    let mut checks = vec![Check::at_most("failed_points", failed as f64, 0.0)];
    match config.command {
        Command::VerifyConformal => {
            checks.push(Check::at_most(
                "max_conformal_defect",
                max_conf,
                tol.conformal,
            ));
            checks.push(Check::at_most(
                "non_split_lr_signatures",
                non_split_lr as f64,
                0.0,
            ));
            checks.push(Check::at_most(
                "non_split_kmw_signatures",
                non_split_kmw as f64,
                0.0,
            ));
        }
        _ => {
            checks.push(Check::at_most(
                "max_effectiveness_defect",
                max_eff,
                tol.effectiveness,
            ));
            checks.push(Check::at_most(
                "max_closed_form_defect",
                max_closed,
                tol.metric,
            ));
            checks.push(Check::at_most(
                "non_split_lr_signatures",
                non_split_lr as f64,
                0.0,
            ));
        }
    }
    Ok(StructureReport::new(config, points, aggregates, checks))
}

fn read_points(
    config: &RunConfig,
    path: &Path,
    field: &str,
) -> Result<(Vec<Point>, Vec<f64>), ConfigError> {
    let resolved = config.resolve(path);
    let file = File::open(&resolved).map_err(|source| ConfigError::Read {
        path: resolved.clone(),
        source,
    })?;
    let (points, mut weights) =
        read_weighted_points(BufReader::new(file)).map_err(|e| ConfigError::Invalid {
            field: field.to_string(),
            message: format!("{}: {e}", resolved.display()),
        })?;
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(ConfigError::Invalid {
            field: field.to_string(),
            message: format!("{}: weights must have a positive sum", resolved.display()),
        });
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((points, weights))
}

fn solve_ot(config: &RunConfig) -> Result<StructureReport, ConfigError> {
    let ot = config.ot.as_ref().expect("validated");
    let cost = config.cost_function()?;
    let ((xs, a), (ys, b)) = match (&ot.source_file, &ot.target_file) {
        (Some(src), Some(tgt)) => (
            read_points(config, src, "ot.source_file")?,
            read_points(config, tgt, "ot.target_file")?,
        ),
        _ => {
            let (src, tgt) = (config.source_density()?, config.target_density()?);
            let mut rng = sampling::rng(config.seed);
            let xs: Vec<Point> = (0..ot.count).map(|_| src.sample(&mut rng)).collect();
            let ys: Vec<Point> = (0..ot.count).map(|_| tgt.sample(&mut rng)).collect();
            let w = vec![1.0 / ot.count as f64; ot.count];
            ((xs, w.clone()), (ys, w))
        }
    };
    let problem = DiscreteOTProblem::new(xs, a, ys, b, &cost)?;
    let tol = &config.tolerances;
    let mut checks = Vec::new();
    let mut aggregates = json!({ "shape": problem.shape() });

    let (plan, potentials) = match ot.solver {
        SolverKind::Assignment => {
            if !problem.is_uniform_square() {
                return Err(ConfigError::Precondition(
                    "the assignment solver needs equal counts and uniform weights; use solver = \"sinkhorn\"".into(),
                ));
            }
            let sol = solve_assignment(&problem)?;
            aggregates["assignment"] = json!(sol.assignment);
            (sol.plan, sol.potentials)
        }
        SolverKind::Sinkhorn => {
            let sol = sinkhorn(
                &problem,
                SinkhornParams {
                    epsilon: ot.epsilon,
                    max_iter: ot.max_iter,
                    tol: ot.tol,
                },
            )?;
            aggregates["iterations"] = json!(sol.iterations);
            aggregates["converged"] = json!(sol.converged);
            checks.push(Check::at_most(
                "not_converged",
                if sol.converged { 0.0 } else { 1.0 },
                0.0,
            ));
            (sol.plan, sol.potentials)
        }
    };
    let duality = duality_report(&problem, &plan, &potentials, None);
    match ot.solver {
        SolverKind::Assignment => {
            checks.push(Check::at_most("duality_gap", duality.gap.abs(), tol.gap));
            checks.push(Check::at_most(
                "feasibility_violation",
                duality.feasibility_violation,
                tol.gap,
            ));
            checks.push(Check::at_most(
                "support_defect",
                duality.support_defect,
                tol.gap,
            ));
        }
        SolverKind::Sinkhorn => {
            checks.push(Check::at_most(
                "marginal_defect",
                duality.marginal_defect,
                tol.marginal,
            ));
        }
    }
    aggregates["duality"] = json!(duality);
    aggregates["potentials"] = json!({ "u": potentials.u, "ubar": potentials.ubar });

    if let Some(pot) = &ot.potential {
        let s = structure(config)?;
        let h = Matrix3::from_fn(|i, j| pot.hessian[i][j]);
        let u = ScalarField::quadratic(*s.source().domain(), h, Vector3::from(pot.linear));
        let margin = s.cost().stencil_margin() + SAMPLE_MARGIN;
        let grid = sampling::interior_points(s.source().domain(), margin, pot.points, config.seed)?;
        let summary = el_residual_grid(&s, &u, &grid);
        checks.push(Check::at_most(
            "residual_failed_points",
            summary.failed as f64,
            0.0,
        ));
        checks.push(Check::at_most(
            "max_abs_residual",
            summary.max_abs,
            tol.residual,
        ));
        aggregates["residual"] = json!(summary);
    }
    Ok(StructureReport::new(config, Vec::new(), aggregates, checks))
}

fn sg_demo(config: &RunConfig) -> Result<StructureReport, ConfigError> {
    let f = match config.cost {
        CostSpec::Semigeostrophic { f } => f,
        _ => unreachable!("validated"),
    };
    let particles = config.sg.clone().unwrap_or_default().particles;
    let sg = SGConfig::new(f, config.source_density()?, config.target_density()?)?;
    let prop = verify_prop31(&sg, config.samples, config.seed).map_err(|e| match e {
        Error::CoriolisNormalization { .. } => ConfigError::Precondition(e.to_string()),
        other => ConfigError::Toolkit(other),
    })?;
    let demo = sg_assignment_demo(&sg, particles, config.seed)?;
    let tol = &config.tolerances;
    let checks = vec![
        Check::at_most(
            "sg_structure_max_defect",
            prop.max_defect(),
            tol.sg_structure,
        ),
        Check::at_most("duality_gap", demo.duality.gap.abs(), tol.gap),
        Check::at_most(
            "energy_vs_primal",
            (demo.energy - demo.duality.primal).abs(),
            tol.gap.max(1e-12),
        ),
    ];
    let aggregates = json!({
        "structure": prop,
        "particles": particles,
        "assignment": demo.solution.assignment,
        "energy": demo.energy,
        "duality": demo.duality,
    });
    Ok(StructureReport::new(config, Vec::new(), aggregates, checks))
}

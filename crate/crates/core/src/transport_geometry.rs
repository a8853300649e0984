//! The cost metric `h_c` (KMW), its conformal comparison with the contraction
//! metric `g_alpha` (LR), signatures, and geometry of transport graphs.

use nalgebra::{Matrix3, Matrix6, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::exterior::GraphSection;
use crate::fields::{CostFunction, CostKind, Density, Point, ScalarField};
use crate::ma_structure::{MAStructure, MetricAtPoint, DEGENERACY_THRESHOLD};

/// Eigenvalue threshold separating space-like from degenerate restricted metrics.
pub const SPACELIKE_TOLERANCE: f64 = 1e-10;

pub const NEWTON_MAX_ITERATIONS: usize = 50;
pub const NEWTON_MAX_HALVINGS: usize = 30;
pub const NEWTON_TOLERANCE: f64 = 1e-10;

/// `(rho rhobar / |det B|)^(1/3) * (0 -B; -B^T 0)` for a mixed Hessian `B`.
pub fn kmw_matrix(mixed: &Matrix3<f64>, rho: f64, rhobar: f64) -> Matrix6<f64> {
    let prefactor = (rho * rhobar / mixed.determinant().abs()).cbrt();
    let mut h = Matrix6::zeros();
    h.fixed_view_mut::<3, 3>(0, 3)
        .copy_from(&(-prefactor * mixed));
    h.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&(-prefactor * mixed.transpose()));
    h
}

pub fn kmw_metric_at(
    cost: &CostFunction,
    rho: &Density,
    rhobar: &Density,
    x: &Point,
    xbar: &Point,
) -> Result<MetricAtPoint> {
    let mixed = cost.mixed_hessian(x, xbar);
    let det = mixed.determinant();
    if !(det.abs() > DEGENERACY_THRESHOLD) {
        return Err(Error::DegenerateStructure {
            x: [x[0], x[1], x[2]],
            xbar: [xbar[0], xbar[1], xbar[2]],
            det,
        });
    }
    let r = rho.eval_positive(x)?;
    let rb = rhobar.eval_positive(xbar)?;
    MetricAtPoint::new(kmw_matrix(&mixed, r, rb), *x, *xbar)
}

/// Pointwise comparison `g = (rho rhobar)^(2/3) h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalReport {
    pub x: Point,
    pub xbar: Point,
    pub conformal_factor: f64,
    pub relative_defect: f64,
    pub lr: MetricAtPoint,
    pub kmw: MetricAtPoint,
}

pub fn conformal_defect_at(s: &MAStructure, x: &Point, xbar: &Point) -> Result<ConformalReport> {
    let lr = s.lr_metric_at(x, xbar)?;
    let kmw = kmw_metric_at(s.cost(), s.source(), s.target(), x, xbar)?;
    let factor = (s.source().eval(x) * s.target().eval(xbar)).powf(2.0 / 3.0);
    let scaled = factor * kmw.matrix();
    let relative_defect = (lr.matrix() - scaled).amax() / scaled.amax();
    Ok(ConformalReport {
        x: *x,
        xbar: *xbar,
        conformal_factor: factor,
        relative_defect,
        lr,
        kmw,
    })
}

/// Eigenvalue counts `(n_plus, n_minus, n_zero)` of a symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Signature {
    pub fn from_eigenvalues(eigenvalues: impl IntoIterator<Item = f64>, tol: f64) -> Self {
        let mut sig = Signature {
            plus: 0,
            minus: 0,
            zero: 0,
        };
        for e in eigenvalues {
            if e > tol {
                sig.plus += 1;
            } else if e < -tol {
                sig.minus += 1;
            } else {
                sig.zero += 1;
            }
        }
        sig
    }

    /// Split signature `(3, 3, 0)`.
    pub fn is_split(&self) -> bool {
        self.plus == 3 && self.minus == 3 && self.zero == 0
    }
}

pub fn metric_signature(m: &Matrix6<f64>, tol: f64) -> Signature {
    Signature::from_eigenvalues(SymmetricEigen::new(*m).eigenvalues.iter().copied(), tol)
}

/// Recovers `T_u(x)` and `DT_u(x)` from `Du(x) = -D_x c(x, T_u(x))`.
pub fn transport_map_from_potential(
    cost: &CostFunction,
    u: &ScalarField,
    x: &Point,
) -> Result<GraphSection> {
    let grad = u.gradient(x)?;
    let hess = u.hessian(x)?;
    match *cost.kind() {
        CostKind::Quadratic => GraphSection::new(grad, hess),
        CostKind::Semigeostrophic { f } => {
            // Du = f^2 (X - x, Y - y, Z)
            let f2 = f * f;
            let t = Vector3::new(x[0], x[1], 0.0) + grad / f2;
            let dt = hess / f2 + Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0));
            GraphSection::new(t, dt)
        }
        CostKind::Custom { .. } => {
            let t = newton_map(cost, &grad, x)?;
            let mixed = cost.mixed_hessian(x, &t);
            let inv = mixed.try_inverse().ok_or(Error::DegenerateStructure {
                x: [x[0], x[1], x[2]],
                xbar: [t[0], t[1], t[2]],
                det: mixed.determinant(),
            })?;
            // differentiate Du(x) + D_x c(x, T(x)) = 0 in x
            let dt = -inv * (hess + cost.hessian_x(x, &t));
            GraphSection::new(t, dt)
        }
    }
}

/// Damped Newton iteration for `Du(x) + D_x c(x, xbar) = 0` in `xbar`.
fn newton_map(cost: &CostFunction, grad_u: &Vector3<f64>, x: &Point) -> Result<Point> {
    let residual = |xb: &Point| grad_u + cost.gradient_x(x, xb);
    let mut xb = *x;
    let mut r = residual(&xb);
    for _ in 0..NEWTON_MAX_ITERATIONS {
        if r.amax() <= NEWTON_TOLERANCE {
            return Ok(xb);
        }
        let jac = cost.mixed_hessian(x, &xb);
        let step = jac.lu().solve(&r).ok_or(Error::MapRecovery {
            iterations: 0,
            residual: r.amax(),
        })?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=NEWTON_MAX_HALVINGS {
            let trial = xb - scale * step;
            let rt = residual(&trial);
            if rt.norm() < r.norm() {
                xb = trial;
                r = rt;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r.amax() <= NEWTON_TOLERANCE {
        Ok(xb)
    } else {
        Err(Error::MapRecovery {
            iterations: NEWTON_MAX_ITERATIONS,
            residual: r.amax(),
        })
    }
}

/// Lagrangian and space-like diagnostics of a graph `x -> (x, T(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCheck {
    /// `max |omega_c(t_i, t_j)|` over graph tangent pairs.
    pub lagrangian_defect: f64,
    pub spacelike: bool,
    /// Some restricted eigenvalue lies within the space-like tolerance of zero.
    pub degenerate: bool,
    pub restricted_metric: Matrix3<f64>,
    pub restricted_eigenvalues: Vector3<f64>,
}

/// Checks the graph through `(x, T(x))`: tangents are `t_i = (e_i, DT e_i)`.
pub fn graph_geometry_check(
    s: &MAStructure,
    x: &Point,
    section: &GraphSection,
) -> Result<GraphCheck> {
    let t = section.map_value;
    let mixed = s.mixed_hessian_at(x, &t)?;
    let omega = crate::ma_structure::symplectic_form_from_mixed(&mixed);
    let rho = s.source().eval_positive(x)?;
    let (rhobar, _) = s.target().eval_extended(&t);
    let h = kmw_matrix(&mixed, rho, rhobar);

    let tangents = section.tangents();
    let mut lagrangian_defect: f64 = 0.0;
    let mut restricted = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            if i < j {
                let w = omega.evaluate(&[tangents[i], tangents[j]])?;
                lagrangian_defect = lagrangian_defect.max(w.abs());
            }
            restricted[(i, j)] = tangents[i].dot(&(h * tangents[j]));
        }
    }
    let restricted = 0.5 * (restricted + restricted.transpose());
    let eig = SymmetricEigen::new(restricted).eigenvalues;
    let spacelike = eig.iter().all(|&e| e > SPACELIKE_TOLERANCE);
    let degenerate = eig.iter().any(|&e| e.abs() <= SPACELIKE_TOLERANCE);
    Ok(GraphCheck {
        lagrangian_defect,
        spacelike,
        degenerate,
        restricted_metric: restricted,
        restricted_eigenvalues: eig,
    })
}

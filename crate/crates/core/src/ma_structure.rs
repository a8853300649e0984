//! Monge-Ampère structures `(omega, alpha)` on `R3 x R3`.
//!
//! `omega` is the symplectic form induced by the cost's mixed Hessian and
//! `alpha` is the effective 3-form `rhobar dxbar1^dxbar2^dxbar3 - rho dx1^dx2^dx3`.
//! The LR metric `g_alpha` is read off from the contraction identity
//! `g(X1, X2) omega^3 / 3! = i_X1 alpha ^ i_X2 alpha ^ omega`.

use nalgebra::{Matrix3, Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::exterior::{
    pullback_by_section, unit_vector, AltForm, GraphSection, DX1, DX2, DX3, DXBAR1, DXBAR2, DXBAR3,
};
use crate::fields::{CostFunction, Density, Point, ScalarField};
use crate::transport_geometry::transport_map_from_potential;

/// Smallest `|det D_x D_xbar c|` treated as non-degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Largest tolerated asymmetry of an assembled metric matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A symmetric 6x6 bilinear form at a base point `(x, xbar)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    matrix: Matrix6<f64>,
    x: Point,
    xbar: Point,
}

impl MetricAtPoint {
    pub fn new(matrix: Matrix6<f64>, x: Point, xbar: Point) -> Result<Self> {
        let asym = (matrix - matrix.transpose()).amax();
        if !(asym <= SYMMETRY_TOLERANCE) {
            return Err(Error::InvalidInput(format!(
                "metric is not symmetric (defect {asym:e})"
            )));
        }
        Ok(Self { matrix, x, xbar })
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.matrix
    }

    pub fn base_point(&self) -> (Point, Point) {
        (self.x, self.xbar)
    }

    /// `v^T M w`.
    pub fn pair(&self, v: &Vector6<f64>, w: &Vector6<f64>) -> f64 {
        v.dot(&(self.matrix * w))
    }
}

/// `(0 I; I 0)`, the split form underlying both closed-form metrics.
pub fn block_swap() -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for i in 0..3 {
        m[(i, i + 3)] = 1.0;
        m[(i + 3, i)] = 1.0;
    }
    m
}

/// Symplectic form with `omega(d/dx^i, d/dxbar^j) = -mixed[(i, j)]`.
pub fn symplectic_form_from_mixed(mixed: &Matrix3<f64>) -> AltForm {
    let mut omega = AltForm::zero(2);
    for i in 0..3 {
        for j in 0..3 {
            let c = -mixed[(i, j)];
            if c != 0.0 {
                omega = omega + AltForm::monomial(&[i, 3 + j], c);
            }
        }
    }
    omega
}

/// `rhobar dxbar1^dxbar2^dxbar3 - rho dx1^dx2^dx3`.
pub fn effective_form(rho: f64, rhobar: f64) -> AltForm {
    AltForm::monomial(&[DXBAR1, DXBAR2, DXBAR3], rhobar) - AltForm::monomial(&[DX1, DX2, DX3], rho)
}

/// Largest coefficient of `omega ^ alpha`; zero iff `alpha` is effective.
pub fn effectiveness_defect(omega: &AltForm, alpha: &AltForm) -> Result<f64> {
    if omega.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            found: omega.degree(),
        });
    }
    if alpha.degree() != 3 {
        return Err(Error::DegreeMismatch {
            expected: 3,
            found: alpha.degree(),
        });
    }
    Ok(omega.wedge(alpha)?.max_abs())
}

/// Coefficient of `omega^3 / 3!`, the normalizing volume in the contraction identity.
fn symplectic_volume(omega: &AltForm) -> Result<f64> {
    let cube = omega.wedge(omega)?.wedge(omega)?;
    Ok(cube.top_coeff()? / 6.0)
}

/// `g(v, w)` evaluated directly from the contraction identity.
pub fn lr_pairing(
    omega: &AltForm,
    alpha: &AltForm,
    v: &Vector6<f64>,
    w: &Vector6<f64>,
) -> Result<f64> {
    let volume = symplectic_volume(omega)?;
    if volume.abs() <= DEGENERACY_THRESHOLD {
        return Err(Error::InvalidInput("symplectic form is degenerate".into()));
    }
    let top = alpha
        .interior(v)?
        .wedge(&alpha.interior(w)?)?
        .wedge(omega)?;
    Ok(top.top_coeff()? / volume)
}

/// Full matrix of the LR metric over the standard basis.
pub fn lr_metric(omega: &AltForm, alpha: &AltForm) -> Result<Matrix6<f64>> {
    let volume = symplectic_volume(omega)?;
    if volume.abs() <= DEGENERACY_THRESHOLD {
        return Err(Error::InvalidInput("symplectic form is degenerate".into()));
    }
    let contractions: Vec<AltForm> = (0..6)
        .map(|i| alpha.interior(&unit_vector(i)))
        .collect::<Result<_>>()?;
    let mut g = Matrix6::zeros();
    for i in 0..6 {
        for j in i..6 {
            let top = contractions[i].wedge(&contractions[j])?.wedge(omega)?;
            let v = top.top_coeff()? / volume;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Pointwise value of a residual evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSample {
    pub x: Point,
    pub section: GraphSection,
    pub residual: f64,
    /// `T_u(x)` fell outside the target box; `rhobar` was extended from the boundary.
    pub out_of_support: bool,
}

/// A cost together with source and target densities.
#[derive(Debug, Clone)]
pub struct MAStructure {
    cost: CostFunction,
    source: Density,
    target: Density,
}

impl MAStructure {
    pub fn new(cost: CostFunction, source: Density, target: Density) -> Self {
        Self {
            cost,
            source,
            target,
        }
    }

    pub fn cost(&self) -> &CostFunction {
        &self.cost
    }

    pub fn source(&self) -> &Density {
        &self.source
    }

    pub fn target(&self) -> &Density {
        &self.target
    }

    fn check_source(&self, x: &Point) -> Result<()> {
        let margin = self.cost.stencil_margin();
        if self.source.domain().is_interior(x, margin) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: [x[0], x[1], x[2]],
                margin,
            })
        }
    }

    fn check_points(&self, x: &Point, xbar: &Point) -> Result<()> {
        self.check_source(x)?;
        let margin = self.cost.stencil_margin();
        if self.target.domain().is_interior(xbar, margin) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: [xbar[0], xbar[1], xbar[2]],
                margin,
            })
        }
    }

    /// Mixed Hessian, rejected when singular.
    pub fn mixed_hessian_at(&self, x: &Point, xbar: &Point) -> Result<Matrix3<f64>> {
        let mixed = self.cost.mixed_hessian(x, xbar);
        let det = mixed.determinant();
        if !(det.abs() > DEGENERACY_THRESHOLD) {
            return Err(Error::DegenerateStructure {
                x: [x[0], x[1], x[2]],
                xbar: [xbar[0], xbar[1], xbar[2]],
                det,
            });
        }
        Ok(mixed)
    }

    pub fn symplectic_form_at(&self, x: &Point, xbar: &Point) -> Result<AltForm> {
        self.check_points(x, xbar)?;
        Ok(symplectic_form_from_mixed(&self.mixed_hessian_at(x, xbar)?))
    }

    pub fn effective_form_at(&self, x: &Point, xbar: &Point) -> Result<AltForm> {
        self.check_points(x, xbar)?;
        Ok(effective_form(self.source.eval(x), self.target.eval(xbar)))
    }

    /// LR metric of `(omega_c, alpha)` at `(x, xbar)`.
    pub fn lr_metric_at(&self, x: &Point, xbar: &Point) -> Result<MetricAtPoint> {
        let omega = self.symplectic_form_at(x, xbar)?;
        let alpha = self.effective_form_at(x, xbar)?;
        let g = lr_metric(&omega, &alpha).map_err(|_| Error::DegenerateStructure {
            x: [x[0], x[1], x[2]],
            xbar: [xbar[0], xbar[1], xbar[2]],
            det: self.cost.mixed_hessian(x, xbar).determinant(),
        })?;
        MetricAtPoint::new(g, *x, *xbar)
    }

    /// Closed form of the same metric: with `W = -D_x D_xbar c`,
    /// `g = rho rhobar / det W * (0 W; W^T 0)`. Matrix algebra only, no forms.
    pub fn lr_metric_closed_form(&self, x: &Point, xbar: &Point) -> Result<MetricAtPoint> {
        self.check_points(x, xbar)?;
        let w = -self.mixed_hessian_at(x, xbar)?;
        let scale = self.source.eval(x) * self.target.eval(xbar) / w.determinant();
        let mut g = Matrix6::zeros();
        g.fixed_view_mut::<3, 3>(0, 3).copy_from(&(scale * w));
        g.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&(scale * w.transpose()));
        MetricAtPoint::new(g, *x, *xbar)
    }

    /// Coefficient of `dx1^dx2^dx3` in the pullback of `alpha` along `x -> (x, T_u(x))`.
    pub fn ma_residual_at(&self, u: &ScalarField, x: &Point) -> Result<ResidualSample> {
        self.check_source(x)?;
        let section = transport_map_from_potential(&self.cost, u, x)?;
        let (rhobar, inside) = self.target.eval_extended(&section.map_value);
        let alpha = effective_form(self.source.eval(x), rhobar);
        let residual = pullback_by_section(&alpha, &section)?;
        Ok(ResidualSample {
            x: *x,
            section,
            residual,
            out_of_support: !inside,
        })
    }

    /// `rhobar(T) det(D^2 u + D_x^2 c) - rho det(-D_x D_xbar c)`, assembled from matrices.
    pub fn ma_residual_direct(&self, u: &ScalarField, x: &Point) -> Result<f64> {
        self.check_source(x)?;
        let section = transport_map_from_potential(&self.cost, u, x)?;
        let t = section.map_value;
        let (rhobar, _) = self.target.eval_extended(&t);
        let lhs = (u.hessian(x)? + self.cost.hessian_x(x, &t)).determinant();
        let rhs = (-self.cost.mixed_hessian(x, &t)).determinant();
        Ok(rhobar * lhs - self.source.eval(x) * rhs)
    }
}

//! Scalar fields, probability densities and transport costs on `R3` and `R3 x R3`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use statrs::function::erf::erf;

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

/// Default central-difference step for first derivatives.
pub const GRADIENT_STEP: f64 = 1e-4;
/// Default central-difference step for second derivatives.
pub const HESSIAN_STEP: f64 = 1e-3;

/// Axis-aligned box `[lo, hi]` in `R3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl DomainBox {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        if (0..3).any(|i| !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return Err(Error::InvalidInput(format!(
                "empty or unbounded box {lo:?} .. {hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(half_width: f64) -> Self {
        Self {
            lo: [-half_width; 3],
            hi: [half_width; 3],
        }
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|i| self.hi[i] - self.lo[i]).product()
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.is_interior(x, 0.0)
    }

    /// True when the closed ball of radius `margin` (max-norm) around `x` lies in the box.
    pub fn is_interior(&self, x: &Point, margin: f64) -> bool {
        (0..3).all(|i| x[i] - margin >= self.lo[i] && x[i] + margin <= self.hi[i])
    }

    pub fn clamp(&self, x: &Point) -> Point {
        Point::from_fn(|i, _| x[i].clamp(self.lo[i], self.hi[i]))
    }

    /// The box shrunk by `margin` on every side, if it stays non-empty.
    pub fn shrink(&self, margin: f64) -> Result<Self> {
        Self::new(
            std::array::from_fn(|i| self.lo[i] + margin),
            std::array::from_fn(|i| self.hi[i] - margin),
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::from_fn(|i, _| self.lo[i] + (self.hi[i] - self.lo[i]) * rng.random::<f64>())
    }

    /// Midpoints of an `n^3` uniform grid together with the cell volume.
    pub fn midpoint_grid(&self, n: usize) -> (Vec<Point>, f64) {
        let h: [f64; 3] = std::array::from_fn(|i| (self.hi[i] - self.lo[i]) / n as f64);
        let mut pts = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    pts.push(Point::new(
                        self.lo[0] + (i as f64 + 0.5) * h[0],
                        self.lo[1] + (j as f64 + 0.5) * h[1],
                        self.lo[2] + (k as f64 + 0.5) * h[2],
                    ));
                }
            }
        }
        (pts, h[0] * h[1] * h[2])
    }
}

fn to_array(x: &Point) -> [f64; 3] {
    [x[0], x[1], x[2]]
}

type ValueFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&Point) -> Vector3<f64> + Send + Sync>;
type HessianFn = Arc<dyn Fn(&Point) -> Matrix3<f64> + Send + Sync>;

/// A scalar field on a box, with optional analytic derivatives.
#[derive(Clone)]
pub struct ScalarField {
    value: ValueFn,
    gradient: Option<GradientFn>,
    hessian: Option<HessianFn>,
    domain: DomainBox,
    gradient_step: f64,
    hessian_step: f64,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("domain", &self.domain)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(domain: DomainBox, value: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            gradient: None,
            hessian: None,
            domain,
            gradient_step: GRADIENT_STEP,
            hessian_step: HESSIAN_STEP,
        }
    }

    pub fn with_gradient(
        mut self,
        g: impl Fn(&Point) -> Vector3<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(
        mut self,
        h: impl Fn(&Point) -> Matrix3<f64> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn with_steps(mut self, gradient_step: f64, hessian_step: f64) -> Self {
        self.gradient_step = gradient_step;
        self.hessian_step = hessian_step;
        self
    }

    /// Drops analytic derivatives, forcing the finite-difference path.
    pub fn without_derivatives(mut self) -> Self {
        self.gradient = None;
        self.hessian = None;
        self
    }

    /// `u(x) = sum_i a_i (x^i)^2 / 2 + b . x` with analytic derivatives.
    pub fn quadratic(domain: DomainBox, hessian: Matrix3<f64>, linear: Vector3<f64>) -> Self {
        let sym = 0.5 * (hessian + hessian.transpose());
        Self::new(domain, move |x| 0.5 * x.dot(&(sym * x)) + linear.dot(x))
            .with_gradient(move |x| sym * x + linear)
            .with_hessian(move |_| sym)
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn value(&self, x: &Point) -> f64 {
        (self.value)(x)
    }

    fn check_stencil(&self, x: &Point, margin: f64) -> Result<()> {
        if self.domain.is_interior(x, margin) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: to_array(x),
                margin,
            })
        }
    }

    pub fn gradient(&self, x: &Point) -> Result<Vector3<f64>> {
        match &self.gradient {
            Some(g) => {
                self.check_stencil(x, 0.0)?;
                Ok(g(x))
            }
            None => {
                self.check_stencil(x, self.gradient_step)?;
                Ok(central_gradient(|p| self.value(p), x, self.gradient_step))
            }
        }
    }

    pub fn hessian(&self, x: &Point) -> Result<Matrix3<f64>> {
        match &self.hessian {
            Some(h) => {
                self.check_stencil(x, 0.0)?;
                Ok(h(x))
            }
            None => {
                self.check_stencil(x, self.hessian_step)?;
                Ok(central_hessian(|p| self.value(p), x, self.hessian_step))
            }
        }
    }
}

/// Second-order central differences of a scalar function.
pub fn central_gradient(f: impl Fn(&Point) -> f64, x: &Point, h: f64) -> Vector3<f64> {
    Vector3::from_fn(|i, _| {
        let mut plus = *x;
        let mut minus = *x;
        plus[i] += h;
        minus[i] -= h;
        (f(&plus) - f(&minus)) / (2.0 * h)
    })
}

/// Second-order central-difference Hessian, symmetrized.
pub fn central_hessian(f: impl Fn(&Point) -> f64, x: &Point, h: f64) -> Matrix3<f64> {
    let at = |di: [f64; 3]| f(&(x + Vector3::from(di)));
    let f0 = f(x);
    let mut hess = Matrix3::zeros();
    for i in 0..3 {
        let mut e = [0.0; 3];
        e[i] = h;
        let back = [-e[0], -e[1], -e[2]];
        hess[(i, i)] = (at(e) - 2.0 * f0 + at(back)) / (h * h);
        for j in (i + 1)..3 {
            let shifted = |si: f64, sj: f64| {
                let mut d = [0.0; 3];
                d[i] = si * h;
                d[j] = sj * h;
                at(d)
            };
            let v = (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0)
                + shifted(-1.0, -1.0))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    0.5 * (hess + hess.transpose())
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    Uniform,
    /// Gaussian restricted to the box and renormalized there.
    TruncatedGaussian {
        mean: Vector3<f64>,
        covariance: Matrix3<f64>,
        precision: Matrix3<f64>,
    },
}

/// Strictly positive probability density on an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    kind: DensityKind,
    domain: DomainBox,
    normalization: f64,
}

impl Density {
    pub fn uniform(domain: DomainBox) -> Self {
        Self {
            kind: DensityKind::Uniform,
            normalization: domain.volume(),
            domain,
        }
    }

    pub fn truncated_gaussian(
        mean: Vector3<f64>,
        covariance: Matrix3<f64>,
        domain: DomainBox,
    ) -> Result<Self> {
        if (covariance - covariance.transpose()).amax() > 1e-12 {
            return Err(Error::InvalidInput("covariance is not symmetric".into()));
        }
        let precision = covariance
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("covariance is not positive definite".into()))?
            .inverse();
        let kind = DensityKind::TruncatedGaussian {
            mean,
            covariance,
            precision,
        };
        let normalization = gaussian_box_mass(&mean, &covariance, &precision, &domain);
        if !(normalization > 0.0) || !normalization.is_finite() {
            return Err(Error::InvalidInput(
                "truncated Gaussian has no numerically representable mass on its box".into(),
            ));
        }
        Ok(Self {
            kind,
            domain,
            normalization,
        })
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn normalization_constant(&self) -> f64 {
        self.normalization
    }

    fn unnormalized(&self, x: &Point) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::TruncatedGaussian {
                mean, precision, ..
            } => {
                let d = x - mean;
                (-0.5 * d.dot(&(precision * d))).exp()
            }
        }
    }

    /// Density value; zero outside the box.
    pub fn eval(&self, x: &Point) -> f64 {
        if self.domain.contains(x) {
            self.unnormalized(x) / self.normalization
        } else {
            0.0
        }
    }

    /// Density extended outside its box by the value at the nearest boundary point.
    /// The flag is true when `x` lies inside the box.
    pub fn eval_extended(&self, x: &Point) -> (f64, bool) {
        let inside = self.domain.contains(x);
        let p = if inside { *x } else { self.domain.clamp(x) };
        (self.unnormalized(&p) / self.normalization, inside)
    }

    /// Value at a point required to lie in the support with a positive density.
    pub fn eval_positive(&self, x: &Point) -> Result<f64> {
        let v = self.eval(x);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonPositiveDensity {
                point: to_array(x),
                value: v,
            })
        }
    }

    /// Draws a point by rejection against the unnormalized peak value 1.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        loop {
            let p = self.domain.sample(rng);
            if rng.random::<f64>() <= self.unnormalized(&p) {
                return p;
            }
        }
    }

    /// Midpoint-rule mass on an `n^3` grid.
    pub fn quadrature_mass(&self, n: usize) -> f64 {
        let (pts, cell) = self.domain.midpoint_grid(n);
        pts.iter().map(|p| self.eval(p)).sum::<f64>() * cell
    }

    /// Minimum over an `(n+1)^3` vertex sweep of the box.
    pub fn min_on_sweep(&self, n: usize) -> f64 {
        let mut min = f64::INFINITY;
        let step: [f64; 3] =
            std::array::from_fn(|i| (self.domain.hi[i] - self.domain.lo[i]) / n as f64);
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let p = Point::new(
                        self.domain.lo[0] + i as f64 * step[0],
                        self.domain.lo[1] + j as f64 * step[1],
                        self.domain.lo[2] + k as f64 * step[2],
                    );
                    min = min.min(self.eval(&p));
                }
            }
        }
        min
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Mass of `exp(-(x-m)^T P (x-m)/2)` on the box.
fn gaussian_box_mass(
    mean: &Vector3<f64>,
    cov: &Matrix3<f64>,
    precision: &Matrix3<f64>,
    domain: &DomainBox,
) -> f64 {
    let off_diagonal = cov[(0, 1)].abs() + cov[(0, 2)].abs() + cov[(1, 2)].abs();
    if off_diagonal == 0.0 {
        (0..3)
            .map(|i| {
                let s = cov[(i, i)].sqrt();
                let p = normal_cdf((domain.hi[i] - mean[i]) / s)
                    - normal_cdf((domain.lo[i] - mean[i]) / s);
                p * s * (2.0 * std::f64::consts::PI).sqrt()
            })
            .product()
    } else {
        // composite Simpson, 96 panels per axis
        let n = 96usize;
        let h: [f64; 3] = std::array::from_fn(|i| (domain.hi[i] - domain.lo[i]) / n as f64);
        let w = |k: usize| -> f64 {
            if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let mut total = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let x = Point::new(
                        domain.lo[0] + i as f64 * h[0],
                        domain.lo[1] + j as f64 * h[1],
                        domain.lo[2] + k as f64 * h[2],
                    );
                    let d = x - mean;
                    total += w(i) * w(j) * w(k) * (-0.5 * d.dot(&(precision * d))).exp();
                }
            }
        }
        total * h[0] * h[1] * h[2] / 27.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostKind {
    /// `c(x, xbar) = -x . xbar`.
    Quadratic,
    /// `c = f^2 [ (x-X)^2/2 + (y-Y)^2/2 - zZ ]`.
    Semigeostrophic { f: f64 },
    /// User formula; derivatives by finite differences only.
    Custom { label: String },
}

type CostFn = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;

/// A transport cost `c(x, xbar)` with derivative access.
#[derive(Clone)]
pub struct CostFunction {
    kind: CostKind,
    formula: CostFn,
    gradient_step: f64,
    hessian_step: f64,
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction")
            .field("kind", &self.kind)
            .finish()
    }
}

impl CostFunction {
    pub fn quadratic() -> Self {
        Self {
            kind: CostKind::Quadratic,
            formula: Arc::new(|x, xb| -x.dot(xb)),
            gradient_step: GRADIENT_STEP,
            hessian_step: HESSIAN_STEP,
        }
    }

    pub fn semigeostrophic(f: f64) -> Self {
        Self {
            kind: CostKind::Semigeostrophic { f },
            formula: Arc::new(move |x, xb| {
                let dx = x[0] - xb[0];
                let dy = x[1] - xb[1];
                f * f * (0.5 * dx * dx + 0.5 * dy * dy - x[2] * xb[2])
            }),
            gradient_step: GRADIENT_STEP,
            hessian_step: HESSIAN_STEP,
        }
    }

    pub fn custom(
        label: impl Into<String>,
        formula: impl Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: CostKind::Custom {
                label: label.into(),
            },
            formula: Arc::new(formula),
            gradient_step: GRADIENT_STEP,
            hessian_step: HESSIAN_STEP,
        }
    }

    pub fn with_steps(mut self, gradient_step: f64, hessian_step: f64) -> Self {
        self.gradient_step = gradient_step;
        self.hessian_step = hessian_step;
        self
    }

    pub fn kind(&self) -> &CostKind {
        &self.kind
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.kind, CostKind::Custom { .. })
    }

    /// Half-width of the widest stencil used for derivatives (zero when analytic).
    pub fn stencil_margin(&self) -> f64 {
        if self.is_analytic() {
            0.0
        } else {
            self.gradient_step.max(self.hessian_step)
        }
    }

    pub fn value(&self, x: &Point, xbar: &Point) -> f64 {
        (self.formula)(x, xbar)
    }

    /// `D_x c(x, xbar)`.
    pub fn gradient_x(&self, x: &Point, xbar: &Point) -> Vector3<f64> {
        match self.kind {
            CostKind::Quadratic => -xbar,
            CostKind::Semigeostrophic { f } => {
                f * f * Vector3::new(x[0] - xbar[0], x[1] - xbar[1], -xbar[2])
            }
            CostKind::Custom { .. } => {
                central_gradient(|p| self.value(p, xbar), x, self.gradient_step)
            }
        }
    }

    /// `D_x^2 c(x, xbar)`.
    pub fn hessian_x(&self, x: &Point, xbar: &Point) -> Matrix3<f64> {
        match self.kind {
            CostKind::Quadratic => Matrix3::zeros(),
            CostKind::Semigeostrophic { f } => {
                f * f * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0))
            }
            CostKind::Custom { .. } => {
                central_hessian(|p| self.value(p, xbar), x, self.hessian_step)
            }
        }
    }

    /// `D_x D_xbar c`, entry `(i, j) = d^2 c / dx^i dxbar^j`.
    pub fn mixed_hessian(&self, x: &Point, xbar: &Point) -> Matrix3<f64> {
        match self.kind {
            CostKind::Quadratic => -Matrix3::identity(),
            CostKind::Semigeostrophic { f } => -(f * f) * Matrix3::identity(),
            CostKind::Custom { .. } => {
                let h = self.hessian_step;
                Matrix3::from_fn(|i, j| {
                    let shifted = |si: f64, sj: f64| {
                        let mut p = *x;
                        let mut q = *xbar;
                        p[i] += si * h;
                        q[j] += sj * h;
                        self.value(&p, &q)
                    };
                    (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0)
                        + shifted(-1.0, -1.0))
                        / (4.0 * h * h)
                })
            }
        }
    }
}

/// Positive density on an interval, for one-dimensional transport.
#[derive(Debug, Clone, PartialEq)]
pub enum IntervalDensity {
    Uniform {
        lo: f64,
        hi: f64,
    },
    TruncatedGaussian {
        mean: f64,
        sigma: f64,
        lo: f64,
        hi: f64,
    },
}

impl IntervalDensity {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn truncated_gaussian(mean: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !(sigma > 0.0) {
            return Err(Error::InvalidInput(format!(
                "invalid truncated Gaussian: sigma {sigma} on [{lo}, {hi}]"
            )));
        }
        Ok(Self::TruncatedGaussian {
            mean,
            sigma,
            lo,
            hi,
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { lo, hi } | Self::TruncatedGaussian { lo, hi, .. } => (lo, hi),
        }
    }

    /// Normalized density; zero outside the interval.
    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.interval();
        if t < lo || t > hi {
            return 0.0;
        }
        match *self {
            Self::Uniform { lo, hi } => 1.0 / (hi - lo),
            Self::TruncatedGaussian {
                mean,
                sigma,
                lo,
                hi,
            } => {
                let mass = normal_cdf((hi - mean) / sigma) - normal_cdf((lo - mean) / sigma);
                let z = (t - mean) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt() * mass)
            }
        }
    }

    /// Value clamped to the interval ends outside it.
    pub fn eval_extended(&self, t: f64) -> f64 {
        let (lo, hi) = self.interval();
        self.eval(t.clamp(lo, hi))
    }
}

//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::fields::{CostFunction, Density, DomainBox};

/// Configuration or validation failure; maps to exit status 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Toolkit(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyConformal,
    CheckStructure,
    SolveOt,
    SgDemo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CostSpec {
    Quadratic,
    Semigeostrophic {
        #[serde(default = "one")]
        f: f64,
    },
    /// A cost from the named-formula catalog, differentiated numerically.
    Custom {
        formula: CustomFormula,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<[[f64; 3]; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CustomFormula {
    /// `-x . xbar`.
    Quadratic,
    /// `scale * ((x-X)^2/2 + (y-Y)^2/2 - zZ)`.
    Semigeostrophic,
    /// `-exp(x1) xbar1 - x2 xbar2 - x3 xbar3`.
    ExpTwist,
    /// `-x . A xbar`.
    Bilinear,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    Uniform {
        lo: [f64; 3],
        hi: [f64; 3],
    },
    Gaussian {
        lo: [f64; 3],
        hi: [f64; 3],
        mean: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variance: Option<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        covariance: Option<[[f64; 3]; 3]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub conformal: f64,
    pub effectiveness: f64,
    pub metric: f64,
    /// Eigenvalue threshold used for signatures.
    pub signature: f64,
    pub gap: f64,
    pub marginal: f64,
    pub residual: f64,
    pub sg_structure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            conformal: 1e-8,
            effectiveness: 1e-12,
            metric: 1e-10,
            signature: 1e-12,
            gap: 1e-9,
            marginal: 1e-8,
            residual: 1e-6,
            sg_structure: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub points_csv: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            points_csv: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Assignment,
    Sinkhorn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// Quadratic potential `x^T H x / 2 + b . x`.
    pub hessian: [[f64; 3]; 3],
    #[serde(default)]
    pub linear: [f64; 3],
    #[serde(default = "default_residual_points")]
    pub points: usize,
}

fn default_residual_points() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtSpec {
    pub solver: SolverKind,
    /// Tabular files of `x1 x2 x3 weight` rows; relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_file: Option<PathBuf>,
    /// Points drawn from the densities when no files are given.
    #[serde(default = "default_ot_count")]
    pub count: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_sinkhorn_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
}

fn default_ot_count() -> usize {
    16
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_max_iter() -> usize {
    20_000
}
fn default_sinkhorn_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgSpec {
    pub particles: usize,
}

impl Default for SgSpec {
    fn default() -> Self {
        Self { particles: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    pub cost: CostSpec,
    pub source: DensitySpec,
    pub target: DensitySpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ot: Option<OtSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sg: Option<SgSpec>,
    /// Directory relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_samples() -> usize {
    1000
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.base_dir = origin.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    /// `--tol` replaces the tolerance of the command's headline check.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(samples) = o.samples {
            self.samples = samples;
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(tol) = o.tol {
            let t = &mut self.tolerances;
            match self.command {
                Command::VerifyConformal => t.conformal = tol,
                Command::CheckStructure => t.metric = tol,
                Command::SolveOt => match self.ot.as_ref().map(|o| o.solver) {
                    Some(SolverKind::Sinkhorn) => t.marginal = tol,
                    _ => t.gap = tol,
                },
                Command::SgDemo => t.sg_structure = tol,
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.samples < 1 {
            return Err(invalid("samples", "must be at least 1"));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.conformal", t.conformal),
            ("tolerances.effectiveness", t.effectiveness),
            ("tolerances.metric", t.metric),
            ("tolerances.signature", t.signature),
            ("tolerances.gap", t.gap),
            ("tolerances.marginal", t.marginal),
            ("tolerances.residual", t.residual),
            ("tolerances.sg_structure", t.sg_structure),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(
                    name,
                    format!("must be a finite non-negative number, got {v}"),
                ));
            }
        }
        self.cost_function()?;
        self.source_density()?;
        self.target_density()?;
        match self.command {
            Command::SolveOt => {
                let ot = self
                    .ot
                    .as_ref()
                    .ok_or_else(|| invalid("ot", "section required for solve-ot"))?;
                if ot.source_file.is_some() != ot.target_file.is_some() {
                    return Err(invalid(
                        "ot",
                        "give both source_file and target_file, or neither",
                    ));
                }
                if ot.count < 1 {
                    return Err(invalid("ot.count", "must be at least 1"));
                }
                if !(ot.epsilon > 0.0) {
                    return Err(invalid("ot.epsilon", "must be positive"));
                }
            }
            Command::SgDemo => {
                let sg = self.sg.clone().unwrap_or_default();
                if sg.particles < 1 {
                    return Err(invalid("sg.particles", "must be at least 1"));
                }
                if !matches!(self.cost, CostSpec::Semigeostrophic { .. }) {
                    return Err(invalid(
                        "cost.kind",
                        "sg-demo needs the semigeostrophic cost",
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn cost_function(&self) -> Result<CostFunction, ConfigError> {
        Ok(match &self.cost {
            CostSpec::Quadratic => CostFunction::quadratic(),
            CostSpec::Semigeostrophic { f } => {
                if !(*f > 0.0) {
                    return Err(invalid("cost.f", "must be positive"));
                }
                CostFunction::semigeostrophic(*f)
            }
            CostSpec::Custom {
                formula,
                matrix,
                scale,
            } => {
                let s = scale.unwrap_or(1.0);
                match formula {
                    CustomFormula::Quadratic => {
                        CostFunction::custom("quadratic", move |x, xb| -s * x.dot(xb))
                    }
                    CustomFormula::Semigeostrophic => {
                        CostFunction::custom("semigeostrophic", move |x, xb| {
                            s * (0.5 * (x[0] - xb[0]).powi(2) + 0.5 * (x[1] - xb[1]).powi(2)
                                - x[2] * xb[2])
                        })
                    }
                    CustomFormula::ExpTwist => CostFunction::custom("exp-twist", move |x, xb| {
                        -s * x[0].exp() * xb[0] - x[1] * xb[1] - x[2] * xb[2]
                    }),
                    CustomFormula::Bilinear => {
                        let m = matrix.ok_or_else(|| {
                            invalid("cost.matrix", "required for the bilinear formula")
                        })?;
                        let a = Matrix3::from_fn(|i, j| m[i][j]);
                        CostFunction::custom("bilinear", move |x, xb| -s * x.dot(&(a * xb)))
                    }
                }
            }
        })
    }

    pub fn source_density(&self) -> Result<Density, ConfigError> {
        build_density(&self.source, "source")
    }

    pub fn target_density(&self) -> Result<Density, ConfigError> {
        build_density(&self.target, "target")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

fn build_density(spec: &DensitySpec, field: &str) -> Result<Density, ConfigError> {
    let make_box = |lo: [f64; 3], hi: [f64; 3]| {
        DomainBox::new(lo, hi).map_err(|e| invalid(&format!("{field}.lo/hi"), e.to_string()))
    };
    match spec {
        DensitySpec::Uniform { lo, hi } => Ok(Density::uniform(make_box(*lo, *hi)?)),
        DensitySpec::Gaussian {
            lo,
            hi,
            mean,
            variance,
            covariance,
        } => {
            let cov = match (variance, covariance) {
                (Some(v), None) => Matrix3::from_diagonal(&Vector3::from(*v)),
                (None, Some(c)) => Matrix3::from_fn(|i, j| c[i][j]),
                _ => {
                    return Err(invalid(
                        &format!("{field}.variance"),
                        "give exactly one of `variance` or `covariance`",
                    ))
                }
            };
            Density::truncated_gaussian(Vector3::from(*mean), cov, make_box(*lo, *hi)?)
                .map_err(|e| invalid(&format!("{field}.covariance"), e.to_string()))
        }
    }
}

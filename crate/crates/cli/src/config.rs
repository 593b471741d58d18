//! Run configuration: one JSON document per run, unknown keys rejected.
//! Rationals are written as strings ("2/5", "3", "0.25") so indices stay
//! exact through the config layer.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use gngs_core::error::{Error, Result};
use gngs_core::exponents::DilationStructure;
use gngs_core::functionals::{ProblemSpec, Term};
use gngs_core::grid::GridSpec;
use gngs_core::io::load_field;
use gngs_core::rational::parse_rational;
use gngs_core::solver::{InitStrategy, SolverOptions};
use gngs_core::symbol::HomogeneousSymbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Exponents,
    Solve,
    Constants,
    Verify,
    Report,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    /// Input run directories for `report`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_dirs: Option<Vec<PathBuf>>,
    /// Source run directory for `constants` / `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    /// Per-axis symbol coefficients.
    pub coeffs: Vec<f64>,
    /// Sobolev order, exact rational.
    pub order: String,
    /// Extended-symbol override: arbitrary positive real axis orders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_orders: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Dilation weights, exact rationals.
    pub weights: Vec<String>,
    pub terms: Vec<TermConfig>,
    pub p: String,
    pub q: String,
    /// Per-axis point counts (powers of two).
    pub points: Vec<usize>,
    /// Per-axis half-lengths.
    pub half_lengths: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub armijo_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub armijo_shrink: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multistart: Option<usize>,
    /// "gaussian" or "random"; a snapshot restart uses `init_file`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus_clamp: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recenter_every: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub a1: String,
    pub a2: String,
    pub p: String,
    /// Homogeneous dimensions to tabulate.
    pub hom_dims: Vec<String>,
    /// Explicit q values; empty means critical exponents only.
    #[serde(default)]
    pub q: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    200
}

impl RunConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Format(format!("config parse: {e}")))
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let pc = self
            .problem
            .as_ref()
            .ok_or_else(|| Error::Format("config needs a `problem` section".into()))?;
        pc.build()
    }

    pub fn solver_options(&self, seed: u64) -> Result<SolverOptions> {
        let mut opts = SolverOptions {
            seed,
            ..Default::default()
        };
        let Some(sc) = &self.solver else {
            return Ok(opts);
        };
        if let Some(v) = sc.max_iters {
            opts.max_iters = v;
        }
        if let Some(v) = sc.step0 {
            opts.step0 = v;
        }
        if let Some(v) = sc.armijo_c {
            opts.armijo_c = v;
        }
        if let Some(v) = sc.armijo_shrink {
            opts.armijo_shrink = v;
        }
        if let Some(v) = sc.tol_residual {
            opts.tol_residual = v;
        }
        if let Some(v) = sc.tol_energy {
            opts.tol_energy = v;
        }
        if let Some(v) = sc.multistart {
            opts.multistart = v;
        }
        if let Some(v) = sc.modulus_clamp {
            opts.modulus_clamp = Some(v);
        }
        if let Some(v) = sc.recenter_every {
            opts.recenter_every = v;
        }
        opts.init = match (&sc.init_file, sc.init.as_deref()) {
            (Some(path), _) => {
                let (field, _) = load_field(path)?;
                InitStrategy::Field(field)
            }
            (None, Some("random")) => InitStrategy::Random,
            (None, Some("gaussian")) | (None, None) => InitStrategy::Gaussian,
            (None, Some(other)) => {
                return Err(Error::Format(format!(
                    "unknown init {other:?}; use \"gaussian\", \"random\" or init_file"
                )))
            }
        };
        Ok(opts)
    }

    pub fn verify_samples(&self) -> usize {
        self.verify.as_ref().map(|v| v.samples).unwrap_or(200)
    }
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemSpec> {
        let weights = DilationStructure::new(
            self.weights
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<_>>()?,
        )?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let symbol = match &t.axis_orders {
                    Some(orders) => {
                        HomogeneousSymbol::with_orders(t.coeffs.clone(), orders.clone(), &weights)?
                    }
                    None => HomogeneousSymbol::from_weights(t.coeffs.clone(), &weights)?,
                };
                Ok(Term {
                    symbol,
                    order: parse_rational(&t.order)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let grid = GridSpec::new(self.points.clone(), self.half_lengths.clone())?;
        ProblemSpec::new(
            terms,
            parse_rational(&self.p)?,
            parse_rational(&self.q)?,
            grid,
            weights,
        )
    }
}

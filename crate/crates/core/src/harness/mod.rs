//! Experiment driver behind the CLI: a JSON-configurable description of the
//! cases to run, the sweeps over them, and CSV/JSON output.
//!
//! Every output byte is a function of the configuration (seed included).
//! Wall time is only recorded when `timing` is switched on; otherwise the
//! `ms` column is written as zero so repeated runs compare byte-for-byte.

mod output;
mod sweep;

pub use output::{
    emit, parse_csv, parse_json, render, render_csv, render_json, render_trajectory, write_text,
    OutputFormat, ResultRow, CSV_HEADER,
};
pub use sweep::{
    build_case, run_convergence, run_criterion, run_solve, run_verify, slope, ConvergenceOutcome,
    RowFailure, SlopeSummary, SolveDump, VerifyOutcome, EVAL_FRACTIONS,
};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{CaseKind, NonlinearityKind, PicardControls};
use crate::kernel::BetaRule;
use crate::spectral::{BoxDomain, SpectralBasis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Edge lengths of the cross-section box.
    pub dims: Vec<f64>,
    /// Cylinder length.
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedCase {
    pub name: String,
    pub case: CaseKind,
}

impl NamedCase {
    pub fn new(name: impl Into<String>, case: CaseKind) -> Self {
        NamedCase {
            name: name.into(),
            case,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        let d = PicardControls::default();
        PicardConfig {
            max_iters: d.max_iters,
            tol: d.tol,
        }
    }
}

impl PicardConfig {
    pub fn controls(&self) -> PicardControls {
        PicardControls {
            max_iters: self.max_iters,
            tol: self.tol,
            y_grid: None,
        }
    }
}

/// Everything a run needs. Unset fields take the defaults below; CLI flags
/// are applied on top of the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    /// Largest index per cross-section direction.
    pub max_index: Vec<usize>,
    /// Cases to run; `None` picks the command's default suite.
    pub cases: Option<Vec<NamedCase>>,
    pub seed: u64,
    /// Kernel order for regularized runs and the `A` columns.
    pub k: u32,
    /// Orders checked by `verify`.
    pub ks: Vec<u32>,
    pub beta_rule: BetaRule,
    /// Strictly decreasing noise levels; `0` runs the unregularized oracle.
    pub epsilons: Vec<f64>,
    /// Number of x-cells; a multiple of 4 so the evaluation abscissae are nodes.
    pub nx: usize,
    pub gammas: Vec<f64>,
    pub truncation: Option<usize>,
    pub picard: PicardConfig,
    /// Record wall time in the `ms` column (breaks byte determinism).
    pub timing: bool,
    /// Multiply the reference `u_x` before verification. Debug aid used to
    /// show the checker rejects inconsistent trajectories.
    pub debug_ux_scale: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: DomainConfig {
                dims: vec![1.0, 1.0],
                a: 0.5,
            },
            max_index: vec![3, 3],
            cases: None,
            seed: 20_240_601,
            k: 1,
            ks: vec![1, 2, 3],
            beta_rule: BetaRule::Proportional,
            epsilons: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            nx: 128,
            gammas: vec![1.0, 2.0],
            truncation: None,
            picard: PicardConfig::default(),
            timing: false,
            debug_ux_scale: None,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

/// Default amplitude of the random Cauchy data.
pub const DEFAULT_AMPLITUDE: f64 = 1.0;
/// Smaller amplitude for the nonlinear cases, keeping Picard well inside its
/// contraction regime.
pub const NONLINEAR_AMPLITUDE: f64 = 0.5;

/// The f ≡ 0 three-mode case used by the convergence study.
pub fn convergence_suite() -> Vec<NamedCase> {
    vec![NamedCase::new(
        "linear3",
        CaseKind::FiniteMode {
            modes: 3,
            amplitude: DEFAULT_AMPLITUDE,
        },
    )]
}

/// Cases checked by `verify` unless the config lists its own.
pub fn verify_suite() -> Vec<NamedCase> {
    vec![
        NamedCase::new(
            "linear3",
            CaseKind::FiniteMode {
                modes: 3,
                amplitude: DEFAULT_AMPLITUDE,
            },
        ),
        NamedCase::new(
            "decaying",
            CaseKind::Decaying {
                modes: 3,
                amplitude: DEFAULT_AMPLITUDE,
            },
        ),
        NamedCase::new(
            "sine",
            CaseKind::Nonlinear {
                nonlinearity: NonlinearityKind::Sine,
                modes: 3,
                amplitude: NONLINEAR_AMPLITUDE,
            },
        ),
        NamedCase::new(
            "rational",
            CaseKind::Nonlinear {
                nonlinearity: NonlinearityKind::Rational,
                modes: 3,
                amplitude: NONLINEAR_AMPLITUDE,
            },
        ),
        NamedCase::new("zero", CaseKind::Zero),
    ]
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_index.len() != self.domain.dims.len() {
            return Err(Error::Config(format!(
                "max_index has {} entries for a {}-dimensional box",
                self.max_index.len(),
                self.domain.dims.len()
            )));
        }
        if self.nx == 0 || !self.nx.is_multiple_of(4) {
            return Err(Error::Config(format!(
                "nx = {} must be a positive multiple of 4",
                self.nx
            )));
        }
        if self.k == 0 || self.ks.contains(&0) {
            return Err(Error::Config("kernel orders must be >= 1".into()));
        }
        if self.gammas.iter().any(|g| !(g.is_finite() && *g >= 1.0)) {
            return Err(Error::Config("gamma values must be >= 1".into()));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Config("noise levels must be finite and >= 0".into()));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(
                "epsilon ladder must be strictly decreasing".into(),
            ));
        }
        if let Some(cases) = &self.cases {
            if cases.is_empty() {
                return Err(Error::Config("case list is empty".into()));
            }
            let mut names: Vec<&str> = cases.iter().map(|c| c.name.as_str()).collect();
            names.sort_unstable();
            if names.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Config("case names must be unique".into()));
            }
            for c in cases {
                if c.name.is_empty() || c.name.contains([',', '"', '\n']) {
                    return Err(Error::Config(format!(
                        "case name {:?} is not a plain label",
                        c.name
                    )));
                }
                c.case.nonlinearity().validate()?;
            }
        }
        if let Some(s) = self.debug_ux_scale {
            if !s.is_finite() {
                return Err(Error::Config("debug_ux_scale must be finite".into()));
            }
        }
        self.picard.controls().validate()?;
        Ok(())
    }

    pub fn basis(&self) -> Result<SpectralBasis> {
        let domain = BoxDomain::new(self.domain.dims.clone(), self.domain.a)?;
        SpectralBasis::build(domain, &self.max_index)
    }

    pub fn cases_or(&self, fallback: fn() -> Vec<NamedCase>) -> Vec<NamedCase> {
        self.cases.clone().unwrap_or_else(fallback)
    }
}

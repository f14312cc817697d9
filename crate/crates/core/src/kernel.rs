//! Kernel-based regularization.
//!
//! The unbounded propagators `cosh(√λ x)` and `sinh(√λ x)` are replaced by
//!
//! ```text
//! Ψ(x)      = e^{-√λ (a - x)} / (2 β λ^{k/2} + 2 e^{-√λ a})
//! cosh^ε(x) = Ψ(x) + e^{-√λ x}/2
//! sinh^ε(x) = Ψ(x) - e^{-√λ x}/2
//! ```
//!
//! which stay below `β^{-x/a} λ^{-kx/(2a)}/2 + 1/2`. `β = 0` recovers the
//! exact propagators and is accepted for oracle runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::picard::{self, Engine, MildSolution, Propagator};
use crate::forward::{CauchyData, Nonlinearity, PicardControls, Trajectory};
use crate::logspace::LogScalar;
use crate::spectral::{CoefficientVector, SpectralBasis};

/// Fraction of the noise budget actually spent by [`perturb`].
pub const NOISE_FILL: f64 = 0.99;

/// `ln Ψ` without argument checks.
pub(crate) fn psi_unchecked(lambda: f64, k: u32, beta: f64, x: f64, a: f64) -> LogScalar {
    let s = lambda.sqrt();
    let ln_reg = if beta > 0.0 {
        beta.ln() + 0.5 * f64::from(k) * lambda.ln()
    } else {
        f64::NEG_INFINITY
    };
    let ln_den = std::f64::consts::LN_2 + ln_add_exp(ln_reg, -s * a);
    LogScalar::exp(-s * (a - x) - ln_den)
}

fn ln_add_exp(p: f64, q: f64) -> f64 {
    let (hi, lo) = if p >= q { (p, q) } else { (q, p) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn check_args(lambda: f64, k: u32, beta: f64, x: f64, a: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must be > 0"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter(
            "kernel order k must be >= 1".into(),
        ));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} outside [0, 1)"
        )));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter(format!("a = {a} must be > 0")));
    }
    if !(0.0..=a).contains(&x) {
        return Err(Error::AbscissaOutOfRange { x, a });
    }
    Ok(())
}

/// `Ψ^β_{p,k}(x)` in log form; finite for any `√λ a`.
pub fn kernel_psi_log(lambda: f64, k: u32, beta: f64, x: f64, a: f64) -> Result<LogScalar> {
    check_args(lambda, k, beta, x, a)?;
    Ok(psi_unchecked(lambda, k, beta, x, a))
}

pub fn kernel_psi(lambda: f64, k: u32, beta: f64, x: f64, a: f64) -> Result<f64> {
    Ok(kernel_psi_log(lambda, k, beta, x, a)?.to_f64())
}

pub fn cosh_eps(lambda: f64, k: u32, beta: f64, x: f64, a: f64) -> Result<f64> {
    Ok(kernel_psi(lambda, k, beta, x, a)? + 0.5 * (-lambda.sqrt() * x).exp())
}

pub fn sinh_eps(lambda: f64, k: u32, beta: f64, x: f64, a: f64) -> Result<f64> {
    Ok(kernel_psi(lambda, k, beta, x, a)? - 0.5 * (-lambda.sqrt() * x).exp())
}

/// `β^{-x/a} λ^{-kx/(2a)} / 2`, the interpolation bound on `Ψ`.
pub fn kernel_upper_bound(lambda: f64, k: u32, beta: f64, x: f64, a: f64) -> f64 {
    let t = x / a;
    0.5 * (-t * (beta.ln() + 0.5 * f64::from(k) * lambda.ln())).exp()
}

/// `max_x max(cosh^ε, |sinh^ε|/√λ)` over the nodes `xs`.
pub fn amplification(lambda: f64, k: u32, beta: f64, a: f64, xs: &[f64]) -> Result<f64> {
    let s = lambda.sqrt();
    let mut worst: f64 = 0.0;
    for &x in xs {
        let c = cosh_eps(lambda, k, beta, x, a)?;
        let sh = sinh_eps(lambda, k, beta, x, a)?;
        worst = worst.max(c).max(sh.abs() / s);
    }
    Ok(worst)
}

/// Choice of `β` as a function of the noise level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BetaRule {
    Explicit {
        beta: f64,
    },
    /// `β = ε`
    #[default]
    Proportional,
    /// `β = ε^θ`, `θ ∈ (0, 1]`
    Power {
        theta: f64,
    },
}

impl std::str::FromStr for BetaRule {
    type Err = Error;

    /// `prop`, `pow:<θ>` or `explicit:<β>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "unrecognised beta rule '{s}' (prop | pow:<theta> | explicit:<beta>)"
            ))
        };
        if s == "prop" || s == "proportional" {
            return Ok(BetaRule::Proportional);
        }
        let (tag, value) = s.split_once(':').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        match tag {
            "pow" | "power" => Ok(BetaRule::Power { theta: value }),
            "explicit" => Ok(BetaRule::Explicit { beta: value }),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for BetaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BetaRule::Explicit { beta } => write!(f, "explicit:{beta}"),
            BetaRule::Proportional => write!(f, "prop"),
            BetaRule::Power { theta } => write!(f, "pow:{theta}"),
        }
    }
}

/// Resolve `β` from a rule; the result must lie in `(0, 1)`.
pub fn beta_from_rule(rule: BetaRule, epsilon: f64) -> Result<f64> {
    let beta = match rule {
        BetaRule::Explicit { beta } => beta,
        BetaRule::Proportional => {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "proportional beta rule needs epsilon in (0, 1), got {epsilon}"
                )));
            }
            epsilon
        }
        BetaRule::Power { theta } => {
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "theta = {theta} outside (0, 1]"
                )));
            }
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "power beta rule needs epsilon in (0, 1), got {epsilon}"
                )));
            }
            epsilon.powf(theta)
        }
    };
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} from rule {rule} falls outside (0, 1)"
        )));
    }
    Ok(beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegConfig {
    /// Kernel order `k >= 1`.
    pub k: u32,
    /// `β ∈ [0, 1)`; zero only for oracle runs.
    pub beta: f64,
    /// Keep only the lowest `truncation` modes; `None` keeps all.
    pub truncation: Option<usize>,
    pub picard: PicardControls,
}

impl RegConfig {
    pub fn new(k: u32, beta: f64) -> Self {
        RegConfig {
            k,
            beta,
            truncation: None,
            picard: PicardControls::default(),
        }
    }

    pub fn from_rule(k: u32, rule: BetaRule, epsilon: f64) -> Result<Self> {
        Ok(Self::new(k, beta_from_rule(rule, epsilon)?))
    }

    pub fn validate(&self, basis: &SpectralBasis) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter(
                "kernel order k must be >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!(
                "beta = {} outside [0, 1)",
                self.beta
            )));
        }
        if let Some(n) = self.truncation {
            if n == 0 || n > basis.len() {
                return Err(Error::InvalidParameter(format!(
                    "truncation {n} outside 1..={}",
                    basis.len()
                )));
            }
        }
        self.picard.validate()
    }
}

/// Measured Cauchy data with the noise level it was built for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyCauchyData {
    pub u0_eps: CoefficientVector,
    pub u1_eps: CoefficientVector,
    pub epsilon: f64,
    pub seed: u64,
}

impl NoisyCauchyData {
    pub fn data(&self) -> CauchyData {
        CauchyData::new(self.u0_eps.clone(), self.u1_eps.clone())
    }

    /// `‖u0^ε - u0‖ + ‖u1^ε - u1‖`
    pub fn noise_norm(&self, clean: &CauchyData) -> f64 {
        self.u0_eps.sub(&clean.u0).l2_norm() + self.u1_eps.sub(&clean.u1).l2_norm()
    }
}

/// Add noise along a seeded random direction so that
/// `‖u0^ε - u0‖ = ‖u1^ε - u1‖ = 0.495 ε`.
pub fn perturb(data: &CauchyData, epsilon: f64, seed: u64) -> Result<NoisyCauchyData> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must be >= 0"
        )));
    }
    if epsilon == 0.0 {
        return Ok(NoisyCauchyData {
            u0_eps: data.u0.clone(),
            u1_eps: data.u1.clone(),
            epsilon,
            seed,
        });
    }
    let half = 0.5 * NOISE_FILL * epsilon;
    let component = |base: &CoefficientVector, stream: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let dir: Vec<f64> = (0..base.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        CoefficientVector::new(
            base.coeffs
                .iter()
                .zip(&dir)
                .map(|(b, d)| b + half * d / norm)
                .collect(),
        )
    };
    Ok(NoisyCauchyData {
        u0_eps: component(&data.u0, 0),
        u1_eps: component(&data.u1, 1),
        epsilon,
        seed,
    })
}

/// Regularized mild solution from the given data (noisy or clean).
pub fn regularized_solve(
    data: &CauchyData,
    f: &Nonlinearity,
    cfg: &RegConfig,
    basis: &SpectralBasis,
    xs: &[f64],
) -> Result<MildSolution> {
    cfg.validate(basis)?;
    data.u0.check_len(basis)?;
    data.u1.check_len(basis)?;
    let propagator = Propagator::Regularized {
        k: cfg.k,
        beta: cfg.beta,
    };
    match cfg.truncation {
        Some(n) if n < basis.len() => {
            let cut = basis.truncated(n)?;
            let head = |v: &CoefficientVector| CoefficientVector::new(v.coeffs[..n].to_vec());
            let cut_data = CauchyData::new(head(&data.u0), head(&data.u1));
            let cut_f = Nonlinearity {
                kind: f.kind,
                source: f.source.as_ref().map(|s| Trajectory {
                    xs: s.xs.clone(),
                    values: s.values.iter().map(head).collect(),
                }),
            };
            let engine = Engine::new(&cut, xs, propagator)?;
            let sol = picard::solve(&engine, &cut_data, &cut_f, &cfg.picard)?;
            let pad = |t: Trajectory| Trajectory {
                xs: t.xs,
                values: t
                    .values
                    .into_iter()
                    .map(|mut v| {
                        v.coeffs.resize(basis.len(), 0.0);
                        v
                    })
                    .collect(),
            };
            Ok(MildSolution {
                data: data.clone(),
                u: pad(sol.u),
                forcing: pad(sol.forcing),
                stats: sol.stats,
            })
        }
        _ => {
            let engine = Engine::new(basis, xs, propagator)?;
            picard::solve(&engine, data, f, &cfg.picard)
        }
    }
}

/// [`regularized_solve`] on the measured data.
pub fn regularized_solve_noisy(
    data: &NoisyCauchyData,
    f: &Nonlinearity,
    cfg: &RegConfig,
    basis: &SpectralBasis,
    xs: &[f64],
) -> Result<MildSolution> {
    regularized_solve(&data.data(), f, cfg, basis, xs)
}

//! Mode-wise variation-of-constants solver shared by the exact and the
//! regularized propagators.
//!
//! Both propagators split the even/odd kernels as `G(x) ± e^{-√λ x}/2` where
//! `G` is the growing part: `e^{√λ x}/2` for the exact problem and the
//! kernel `Ψ` for the regularized one. The data terms are then
//! `G (u0 + u1/√λ) + e^{-√λ x}/2 (u0 - u1/√λ)`, which avoids forming
//! `cosh - sinh` differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{CauchyData, Nonlinearity, PicardControls, Trajectory};
use crate::kernel;
use crate::spectral::{SpectralBasis, SpectralTransform, TensorGrid};

/// Largest `√λ_P a` for which exact propagation is attempted; beyond this the
/// trajectory itself leaves the double range.
pub const MAX_EXACT_GROWTH: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagator {
    Exact,
    Regularized { k: u32, beta: f64 },
}

impl Propagator {
    /// Growing part `G(λ, x)`.
    pub fn growing(&self, lambda: f64, x: f64, a: f64) -> f64 {
        match *self {
            Propagator::Exact => 0.5 * (lambda.sqrt() * x).exp(),
            Propagator::Regularized { k, beta } => {
                kernel::psi_unchecked(lambda, k, beta, x, a).to_f64()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardStats {
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl PicardStats {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

/// Output of a mild-solution solve. `forcing` holds the coefficients
/// `f_p(x_i)` that produced `u` in the last sweep, so `u` and any derived
/// quantity are consistent with the same forcing samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MildSolution {
    pub data: CauchyData,
    pub u: Trajectory,
    pub forcing: Trajectory,
    pub stats: PicardStats,
}

pub(crate) struct Engine<'a> {
    basis: &'a SpectralBasis,
    xs: &'a [f64],
    h: f64,
    propagator: Propagator,
    sqrt_lambda: Vec<f64>,
    /// `growing[p][i] = G(λ_p, x_i)`
    growing: Vec<Vec<f64>>,
    /// `decaying[p][i] = e^{-√λ_p x_i} / 2`
    decaying: Vec<Vec<f64>>,
}

impl<'a> Engine<'a> {
    pub fn new(basis: &'a SpectralBasis, xs: &'a [f64], propagator: Propagator) -> Result<Self> {
        let a = basis.domain().a();
        let h = check_uniform_grid(xs, a)?;
        if propagator == Propagator::Exact {
            let growth = basis.lambda_max().sqrt() * a;
            if growth > MAX_EXACT_GROWTH {
                return Err(Error::OverflowGuard {
                    growth,
                    limit: MAX_EXACT_GROWTH,
                });
            }
        }
        let sqrt_lambda: Vec<f64> = basis.lambdas().iter().map(|l| l.sqrt()).collect();
        let nx = xs.len() - 1;
        // tables are indexed by node index, which doubles as lag index on the
        // uniform grid
        let lag = |i: usize| if i == nx { a } else { i as f64 * h };
        let growing = basis
            .lambdas()
            .iter()
            .map(|&l| (0..=nx).map(|i| propagator.growing(l, lag(i), a)).collect())
            .collect();
        let decaying = sqrt_lambda
            .iter()
            .map(|&s| (0..=nx).map(|i| 0.5 * (-s * lag(i)).exp()).collect())
            .collect();
        Ok(Engine {
            basis,
            xs,
            h,
            propagator,
            sqrt_lambda,
            growing,
            decaying,
        })
    }

    /// Data terms `even(x) u0 + odd(x)/√λ u1` at every node.
    pub fn homogeneous(&self, data: &CauchyData) -> Trajectory {
        let nx = self.xs.len() - 1;
        let mut values = vec![vec![0.0; self.basis.len()]; nx + 1];
        for p in 0..self.basis.len() {
            let u0 = data.u0.coeffs[p];
            let u1 = data.u1.coeffs[p] / self.sqrt_lambda[p];
            let plus = u0 + u1;
            let minus = u0 - u1;
            for (i, row) in values.iter_mut().enumerate() {
                row[p] = self.growing[p][i] * plus + self.decaying[p][i] * minus;
            }
        }
        if self.propagator == Propagator::Exact {
            values[0].copy_from_slice(&data.u0.coeffs);
        }
        Trajectory::from_rows(self.xs.to_vec(), values)
    }

    /// x-derivative of the data terms (exact propagator only).
    pub fn homogeneous_derivative(&self, data: &CauchyData) -> Trajectory {
        let nx = self.xs.len() - 1;
        let mut values = vec![vec![0.0; self.basis.len()]; nx + 1];
        for p in 0..self.basis.len() {
            let s = self.sqrt_lambda[p];
            let u0 = data.u0.coeffs[p];
            let u1 = data.u1.coeffs[p] / s;
            let plus = u0 + u1;
            let minus = u0 - u1;
            for (i, row) in values.iter_mut().enumerate() {
                row[p] = s * (self.growing[p][i] * plus - self.decaying[p][i] * minus);
            }
        }
        values[0].copy_from_slice(&data.u1.coeffs);
        Trajectory::from_rows(self.xs.to_vec(), values)
    }

    /// Trapezoid Volterra sums `∫_0^{x_i} K(x_i - ξ) f_p(ξ) dξ` with
    /// `K = (G - e^{-√λ·}/2)/√λ` (odd kernel) or `K = G + e^{-√λ·}/2`
    /// (even kernel, used for the x-derivative).
    pub fn volterra(&self, forcing: &Trajectory, even: bool, out: &mut Trajectory) {
        let nx = self.xs.len() - 1;
        for p in 0..self.basis.len() {
            let s = self.sqrt_lambda[p];
            let kern: Vec<f64> = (0..=nx)
                .map(|m| {
                    if even {
                        self.growing[p][m] + self.decaying[p][m]
                    } else {
                        (self.growing[p][m] - self.decaying[p][m]) / s
                    }
                })
                .collect();
            out.values[0].coeffs[p] = 0.0;
            for i in 1..=nx {
                let mut acc = 0.5 * kern[i] * forcing.values[0].coeffs[p];
                for j in 1..i {
                    acc += kern[i - j] * forcing.values[j].coeffs[p];
                }
                acc += 0.5 * kern[0] * forcing.values[i].coeffs[p];
                out.values[i].coeffs[p] = self.h * acc;
            }
        }
    }
}

/// Pseudo-spectral evaluation of `f_p(x_i) = ⟨f(u(x_i, ·)), φ_p⟩ + F_p(x_i)`.
pub(crate) struct ForcingEvaluator<'a> {
    f: &'a Nonlinearity,
    transform: Option<SpectralTransform>,
}

impl<'a> ForcingEvaluator<'a> {
    pub fn new(
        basis: &SpectralBasis,
        f: &'a Nonlinearity,
        grid: Option<&TensorGrid>,
    ) -> Result<Self> {
        f.kind.validate()?;
        let transform = if f.depends_on_u() {
            let owned;
            let grid = match grid {
                Some(g) => g,
                None => {
                    owned = TensorGrid::for_basis(basis)?;
                    &owned
                }
            };
            Some(SpectralTransform::new(basis, grid)?)
        } else {
            None
        };
        Ok(ForcingEvaluator { f, transform })
    }

    pub fn eval(&self, u: &Trajectory, out: &mut Trajectory) -> Result<()> {
        if let Some(src) = &self.f.source {
            if src.len() != u.len() {
                return Err(Error::LengthMismatch {
                    expected: u.len(),
                    got: src.len(),
                });
            }
        }
        let mut samples = Vec::new();
        let mut proj = Vec::new();
        for (i, row) in u.values.iter().enumerate() {
            let target = &mut out.values[i].coeffs;
            match &self.transform {
                Some(t) => {
                    t.synthesize_into(&row.coeffs, &mut samples);
                    for v in samples.iter_mut() {
                        *v = self.f.kind.apply(*v);
                    }
                    t.analyze_into(&samples, &mut proj);
                    target.copy_from_slice(&proj);
                }
                None => target.iter_mut().for_each(|c| *c = 0.0),
            }
            if let Some(src) = &self.f.source {
                for (c, s) in target.iter_mut().zip(&src.values[i].coeffs) {
                    *c += s;
                }
            }
        }
        if !out.is_finite() {
            return Err(Error::NonFinite("forcing evaluation"));
        }
        Ok(())
    }
}

/// Picard iteration `u ← homogeneous + V[f(u)]` from the `f ≡ 0` solution.
pub(crate) fn solve(
    engine: &Engine<'_>,
    data: &CauchyData,
    f: &Nonlinearity,
    controls: &PicardControls,
) -> Result<MildSolution> {
    controls.validate()?;
    let basis = engine.basis;
    data.u0.check_len(basis)?;
    data.u1.check_len(basis)?;
    if !(data.u0.is_finite() && data.u1.is_finite()) {
        return Err(Error::NonFinite("Cauchy data"));
    }

    let evaluator = ForcingEvaluator::new(basis, f, controls.y_grid.as_ref())?;
    let homogeneous = engine.homogeneous(data);
    let mut forcing = Trajectory::zeros(engine.xs.to_vec(), basis.len());

    if f.is_identically_zero() {
        return Ok(MildSolution {
            data: data.clone(),
            u: homogeneous,
            forcing,
            stats: PicardStats {
                iterations: 0,
                residuals: Vec::new(),
                converged: true,
            },
        });
    }

    let mut u = homogeneous.clone();
    let mut next = Trajectory::zeros(engine.xs.to_vec(), basis.len());
    let mut residuals = Vec::new();
    let sweeps = if f.depends_on_u() {
        controls.max_iters
    } else {
        1
    };
    for _ in 0..sweeps {
        evaluator.eval(&u, &mut forcing)?;
        engine.volterra(&forcing, false, &mut next);
        next.add_assign(&homogeneous);
        if !next.is_finite() {
            return Err(Error::NonFinite("Picard iterate"));
        }
        let residual = relative_change(&u, &next);
        std::mem::swap(&mut u, &mut next);
        residuals.push(residual);
        if !f.depends_on_u() || residual <= controls.tol {
            return Ok(MildSolution {
                data: data.clone(),
                u,
                forcing,
                stats: PicardStats {
                    iterations: residuals.len(),
                    residuals,
                    converged: true,
                },
            });
        }
    }
    Err(Error::PicardNotConverged {
        iterations: residuals.len(),
        residual: residuals.last().copied().unwrap_or(f64::NAN),
    })
}

/// `sup |new - old| / sup |new|` over all nodes and modes.
fn relative_change(old: &Trajectory, new: &Trajectory) -> f64 {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (ro, rn) in old.values.iter().zip(&new.values) {
        for (a, b) in ro.coeffs.iter().zip(&rn.coeffs) {
            diff = diff.max((a - b).abs());
            scale = scale.max(b.abs());
        }
    }
    if diff == 0.0 {
        0.0
    } else {
        diff / scale.max(f64::MIN_POSITIVE)
    }
}

pub(crate) fn check_uniform_grid(xs: &[f64], a: f64) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "x-grid needs at least two nodes".into(),
        ));
    }
    let nx = xs.len() - 1;
    let h = a / nx as f64;
    if xs[0] != 0.0 || (xs[nx] - a).abs() > 1e-12 * a {
        return Err(Error::InvalidParameter(format!(
            "x-grid must span [0, {a}]"
        )));
    }
    if xs
        .iter()
        .enumerate()
        .any(|(i, &x)| (x - i as f64 * h).abs() > 1e-9 * h)
    {
        return Err(Error::InvalidParameter("x-grid must be uniform".into()));
    }
    Ok(h)
}

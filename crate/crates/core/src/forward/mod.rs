//! Exact mild solution of the Cauchy problem `u_xx = -Δ_y u + f`, its
//! x-derivative, and the exponentially weighted combination
//! `w_p(x) = e^{√λ_p (a - x)} (u_p(x) + u_{x,p}(x)/√λ_p)` that enters the
//! Gevrey criterion.

mod manufacture;
mod nonlinearity;
pub(crate) mod picard;

pub use manufacture::{manufacture, CaseKind, ManufacturedCase};
pub use nonlinearity::{Nonlinearity, NonlinearityKind};
pub use picard::{MildSolution, PicardStats, Propagator, MAX_EXACT_GROWTH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::LogScalar;
use crate::spectral::{CoefficientVector, SpectralBasis, TensorGrid};

/// Coefficients `v_p(x_i)` of a function on `Ω` at the nodes of a uniform
/// x-grid spanning `[0, a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub values: Vec<CoefficientVector>,
}

impl Trajectory {
    pub fn new(xs: Vec<f64>, values: Vec<CoefficientVector>) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                got: values.len(),
            });
        }
        if let Some(first) = values.first() {
            if values.iter().any(|v| v.len() != first.len()) {
                return Err(Error::InvalidParameter("ragged trajectory".into()));
            }
        }
        let t = Trajectory { xs, values };
        if !t.is_finite() {
            return Err(Error::NonFinite("trajectory"));
        }
        Ok(t)
    }

    pub(crate) fn from_rows(xs: Vec<f64>, rows: Vec<Vec<f64>>) -> Self {
        Trajectory {
            xs,
            values: rows.into_iter().map(CoefficientVector::new).collect(),
        }
    }

    pub fn zeros(xs: Vec<f64>, modes: usize) -> Self {
        let values = vec![CoefficientVector::zeros(modes); xs.len()];
        Trajectory { xs, values }
    }

    /// Number of x-nodes.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn at(&self, i: usize) -> &CoefficientVector {
        &self.values[i]
    }

    pub fn last(&self) -> &CoefficientVector {
        &self.values[self.values.len() - 1]
    }

    /// Series `x ↦ v_p(x)` of one mode.
    pub fn mode_series(&self, p: usize) -> Vec<f64> {
        self.values.iter().map(|v| v.coeffs[p]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(CoefficientVector::is_finite)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.sup_norm()))
    }

    /// `sup_{i,p} |self - other|`.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max(a.sub(b).sup_norm()))
    }

    /// `sup_{i,p} |self - other| / sup_{i,p} |other|`.
    pub fn rel_sup_distance(&self, other: &Trajectory) -> f64 {
        let d = self.sup_distance(other);
        if d == 0.0 {
            0.0
        } else {
            d / other.sup_norm().max(f64::MIN_POSITIVE)
        }
    }

    /// Every `stride`-th node; used to compare a refined solve on a coarse grid.
    pub fn subsample(&self, stride: usize) -> Trajectory {
        Trajectory {
            xs: self.xs.iter().step_by(stride).copied().collect(),
            values: self.values.iter().step_by(stride).cloned().collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Trajectory {
        Trajectory {
            xs: self.xs.clone(),
            values: self.values.iter().map(|v| v.scaled(s)).collect(),
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Trajectory) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
                *x += y;
            }
        }
    }

    /// Node index whose abscissa is `x` to within rounding.
    pub fn node_of(&self, x: f64) -> Option<usize> {
        let a = *self.xs.last()?;
        let tol = 1e-9 * a.max(1.0);
        self.xs.iter().position(|&xi| (xi - x).abs() <= tol)
    }
}

/// `x_i = i a / N_x`, `i = 0..=N_x`, with the last node pinned to `a`.
pub fn uniform_xs(a: f64, nx: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=nx).map(|i| i as f64 * a / nx as f64).collect();
    xs[nx] = a;
    xs
}

/// Cauchy data `(u0, u1)` at `x = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    pub u0: CoefficientVector,
    pub u1: CoefficientVector,
}

impl CauchyData {
    pub fn new(u0: CoefficientVector, u1: CoefficientVector) -> Self {
        CauchyData { u0, u1 }
    }

    pub fn zeros(modes: usize) -> Self {
        CauchyData::new(
            CoefficientVector::zeros(modes),
            CoefficientVector::zeros(modes),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardControls {
    pub max_iters: usize,
    /// Relative sup-norm change below which the iteration stops.
    pub tol: f64,
    /// Grid for the pseudo-spectral evaluation of `f(u)`; defaults to
    /// [`TensorGrid::for_basis`].
    pub y_grid: Option<TensorGrid>,
}

impl Default for PicardControls {
    fn default() -> Self {
        PicardControls {
            max_iters: 50,
            tol: 1e-12,
            y_grid: None,
        }
    }
}

impl PicardControls {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tol = {} must be > 0",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Mild solution on the grid `xs` (uniform over `[0, a]`), Picard-iterated
/// when `f` depends on `u`.
pub fn propagate_exact(
    data: &CauchyData,
    f: &Nonlinearity,
    basis: &SpectralBasis,
    xs: &[f64],
    controls: &PicardControls,
) -> Result<MildSolution> {
    let engine = picard::Engine::new(basis, xs, Propagator::Exact)?;
    picard::solve(&engine, data, f, controls)
}

/// `u_{x,p}(x_i)` from the same data and forcing samples that produced `u`.
pub fn derivative_trajectory(
    data: &CauchyData,
    forcing: &Trajectory,
    basis: &SpectralBasis,
) -> Result<Trajectory> {
    data.u0.check_len(basis)?;
    data.u1.check_len(basis)?;
    let engine = picard::Engine::new(basis, &forcing.xs, Propagator::Exact)?;
    let mut out = engine.homogeneous_derivative(data);
    let mut integral = Trajectory::zeros(forcing.xs.clone(), basis.len());
    engine.volterra(forcing, true, &mut integral);
    out.add_assign(&integral);
    Ok(out)
}

impl MildSolution {
    pub fn derivative(&self, basis: &SpectralBasis) -> Result<Trajectory> {
        derivative_trajectory(&self.data, &self.forcing, basis)
    }
}

/// `w_p(x_i)` per node (outer) and mode (inner), kept in log form.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCombo {
    pub xs: Vec<f64>,
    pub values: Vec<Vec<LogScalar>>,
}

pub fn weighted_combo(
    u: &Trajectory,
    ux: &Trajectory,
    basis: &SpectralBasis,
) -> Result<WeightedCombo> {
    check_pair(u, ux, basis)?;
    let a = basis.domain().a();
    let sqrt_lambda: Vec<f64> = basis.lambdas().iter().map(|l| l.sqrt()).collect();
    let values =
        u.xs.iter()
            .zip(u.values.iter().zip(&ux.values))
            .map(|(&x, (uv, uxv))| {
                sqrt_lambda
                    .iter()
                    .enumerate()
                    .map(|(p, &s)| {
                        let combo = uv.coeffs[p] + uxv.coeffs[p] / s;
                        LogScalar::exp(s * (a - x)) * LogScalar::from_f64(combo)
                    })
                    .collect()
            })
            .collect();
    Ok(WeightedCombo {
        xs: u.xs.clone(),
        values,
    })
}

pub(crate) fn check_pair(u: &Trajectory, ux: &Trajectory, basis: &SpectralBasis) -> Result<()> {
    if u.len() != ux.len() || u.xs != ux.xs {
        return Err(Error::InvalidParameter(
            "u and u_x trajectories use different grids".into(),
        ));
    }
    if u.is_empty() {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    }
    if u.modes() != basis.len() || ux.modes() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: u.modes().min(ux.modes()),
        });
    }
    Ok(())
}

/// Trapezoid tail integrals `∫_{x_i}^a e^{√λ_p (a - ξ)}/√λ_p f_p(ξ) dξ`.
pub fn tail_integrals(forcing: &Trajectory, basis: &SpectralBasis) -> Result<Vec<Vec<LogScalar>>> {
    let a = basis.domain().a();
    let h = picard::check_uniform_grid(&forcing.xs, a)?;
    let nx = forcing.len() - 1;
    let mut out = vec![vec![LogScalar::ZERO; basis.len()]; nx + 1];
    for (p, &lambda) in basis.lambdas().iter().enumerate() {
        let s = lambda.sqrt();
        // integrand in log form, summed from the far end so each node reuses
        // the running total
        let term = |j: usize| {
            LogScalar::exp(s * (a - forcing.xs[j]))
                * LogScalar::from_f64(forcing.values[j].coeffs[p] / s)
        };
        let mut running = LogScalar::ZERO;
        for i in (0..nx).rev() {
            let panel = term(i).add(&term(i + 1)).scale(0.5 * h);
            running = running.add(&panel);
            out[i][p] = running;
        }
    }
    Ok(out)
}

/// Largest defect of `w_p(x) = w_p(a) - tail_p(x)` over nodes and modes,
/// divided by `max |w|`.
pub fn combo_identity_defect(
    u: &Trajectory,
    ux: &Trajectory,
    forcing: &Trajectory,
    basis: &SpectralBasis,
) -> Result<f64> {
    let w = weighted_combo(u, ux, basis)?;
    let tail = tail_integrals(forcing, basis)?;
    let end = &w.values[w.values.len() - 1];
    let mut scale = LogScalar::ZERO;
    let mut worst = LogScalar::ZERO;
    for (row, trow) in w.values.iter().zip(&tail) {
        for p in 0..basis.len() {
            let defect = row[p].sub(&end[p].sub(&trow[p])).abs();
            if defect.cmp_value(&worst).is_gt() {
                worst = defect;
            }
            if row[p].abs().cmp_value(&scale).is_gt() {
                scale = row[p].abs();
            }
        }
    }
    if worst.is_zero() {
        return Ok(0.0);
    }
    Ok((worst.ln_abs() - scale.ln_abs()).exp())
}

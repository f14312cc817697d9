use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{
    propagate_exact, uniform_xs, CauchyData, Nonlinearity, NonlinearityKind, PicardControls,
    PicardStats, Trajectory,
};
use crate::spectral::{CoefficientVector, SpectralBasis};

/// Refinement factor of the x-grid used for nonlinear reference solutions.
pub const REFERENCE_REFINEMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CaseKind {
    /// `f ≡ 0` with random data on the lowest `modes` modes.
    FiniteMode { modes: usize, amplitude: f64 },
    /// `f ≡ 0` with `u1 = -√λ u0`, so every mode decays like `e^{-√λ x}`.
    Decaying { modes: usize, amplitude: f64 },
    /// Random data with a semilinear term; reference by refined Picard.
    Nonlinear {
        nonlinearity: NonlinearityKind,
        modes: usize,
        amplitude: f64,
    },
    /// Zero data, `f ≡ 0`.
    Zero,
}

impl CaseKind {
    pub fn nonlinearity(&self) -> NonlinearityKind {
        match *self {
            CaseKind::Nonlinear { nonlinearity, .. } => nonlinearity,
            _ => NonlinearityKind::Zero,
        }
    }
}

/// Cauchy data plus reference trajectories on the requested grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    pub data: CauchyData,
    pub f: Nonlinearity,
    pub u: Trajectory,
    pub ux: Trajectory,
    /// Forcing coefficients `f_p(x_i)` consistent with `u`.
    pub forcing: Trajectory,
    pub stats: Option<PicardStats>,
}

pub fn manufacture(
    kind: CaseKind,
    basis: &SpectralBasis,
    xs: &[f64],
    seed: u64,
    controls: &PicardControls,
) -> Result<ManufacturedCase> {
    let p_count = basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |modes: usize, amplitude: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        if modes == 0 || modes > p_count {
            return Err(Error::InvalidParameter(format!(
                "case asks for {modes} modes, basis has {p_count}"
            )));
        }
        let mut u0 = vec![0.0; p_count];
        let mut u1 = vec![0.0; p_count];
        for p in 0..modes {
            u0[p] = amplitude * rng.random_range(-1.0..=1.0);
            u1[p] = amplitude * rng.random_range(-1.0..=1.0);
        }
        Ok((u0, u1))
    };

    match kind {
        CaseKind::Zero => {
            let data = CauchyData::zeros(p_count);
            let zero = Trajectory::zeros(xs.to_vec(), p_count);
            // still goes through the guard and grid checks
            propagate_exact(&data, &Nonlinearity::zero(), basis, xs, controls)?;
            Ok(ManufacturedCase {
                kind,
                data,
                f: Nonlinearity::zero(),
                u: zero.clone(),
                ux: zero.clone(),
                forcing: zero,
                stats: None,
            })
        }
        CaseKind::FiniteMode { modes, amplitude } => {
            let (u0, u1) = draw(modes, amplitude)?;
            let data = CauchyData::new(CoefficientVector::new(u0), CoefficientVector::new(u1));
            closed_form(kind, data, basis, xs, controls)
        }
        CaseKind::Decaying { modes, amplitude } => {
            let (u0, _) = draw(modes, amplitude)?;
            let u1 = u0
                .iter()
                .zip(basis.lambdas())
                .map(|(c, l)| -l.sqrt() * c)
                .collect();
            let data = CauchyData::new(CoefficientVector::new(u0), CoefficientVector::new(u1));
            closed_form(kind, data, basis, xs, controls)
        }
        CaseKind::Nonlinear {
            nonlinearity,
            modes,
            amplitude,
        } => {
            let (u0, u1) = draw(modes, amplitude)?;
            let data = CauchyData::new(CoefficientVector::new(u0), CoefficientVector::new(u1));
            let f = Nonlinearity::new(nonlinearity);
            let nx = xs.len().saturating_sub(1);
            let fine_xs = uniform_xs(basis.domain().a(), REFERENCE_REFINEMENT * nx.max(1));
            let fine = propagate_exact(&data, &f, basis, &fine_xs, controls)?;
            let fine_ux = fine.derivative(basis)?;
            let u = fine.u.subsample(REFERENCE_REFINEMENT);
            if u.len() != xs.len() {
                return Err(Error::InvalidParameter(
                    "x-grid must be uniform with at least one cell".into(),
                ));
            }
            Ok(ManufacturedCase {
                kind,
                data,
                f,
                u,
                ux: fine_ux.subsample(REFERENCE_REFINEMENT),
                forcing: fine.forcing.subsample(REFERENCE_REFINEMENT),
                stats: Some(fine.stats),
            })
        }
    }
}

/// `f ≡ 0` reference straight from the cosh/sinh formulas.
fn closed_form(
    kind: CaseKind,
    data: CauchyData,
    basis: &SpectralBasis,
    xs: &[f64],
    controls: &PicardControls,
) -> Result<ManufacturedCase> {
    // validates grid and guard
    propagate_exact(&data, &Nonlinearity::zero(), basis, xs, controls)?;
    let lambdas = basis.lambdas();
    let decaying = matches!(kind, CaseKind::Decaying { .. });
    let mut u_rows = Vec::with_capacity(xs.len());
    let mut ux_rows = Vec::with_capacity(xs.len());
    for &x in xs {
        let mut u = Vec::with_capacity(lambdas.len());
        let mut ux = Vec::with_capacity(lambdas.len());
        for (p, &l) in lambdas.iter().enumerate() {
            let s = l.sqrt();
            let (u0, u1) = (data.u0.coeffs[p], data.u1.coeffs[p]);
            if decaying {
                let e = (-s * x).exp();
                u.push(u0 * e);
                ux.push(-s * u0 * e);
            } else {
                let (c, sh) = ((s * x).cosh(), (s * x).sinh());
                u.push(c * u0 + sh / s * u1);
                ux.push(s * sh * u0 + c * u1);
            }
        }
        u_rows.push(u);
        ux_rows.push(ux);
    }
    Ok(ManufacturedCase {
        kind,
        data,
        f: Nonlinearity::zero(),
        u: Trajectory::from_rows(xs.to_vec(), u_rows),
        ux: Trajectory::from_rows(xs.to_vec(), ux_rows),
        forcing: Trajectory::zeros(xs.to_vec(), basis.len()),
        stats: None,
    })
}

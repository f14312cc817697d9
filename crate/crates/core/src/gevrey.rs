//! Gevrey and spectral Sobolev norms, the criterion
//!
//! ```text
//! A = sup_x Σ_p λ_p^k e^{2√λ_p (a - x)} (u_p(x) + u_{x,p}(x)/√λ_p)²
//! ```
//!
//! its power variant `A^γ`, and the right-hand sides that bound them in terms
//! of data at `x = a` and the forcing.
//!
//! Everything carrying `e^{√λ a}` factors is accumulated in log form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{check_pair, weighted_combo, ManufacturedCase, Trajectory};
use crate::logspace::{LogScalar, LogSum};
use crate::quadrature::trapezoid;
use crate::spectral::{CoefficientVector, SpectralBasis};

/// Relative slack allowed on every inequality check.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub nu: f64,
    pub s: f64,
}

impl GevreyParams {
    pub fn new(nu: f64, s: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::InvalidParameter(format!("nu = {nu} must be >= 0")));
        }
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidParameter(format!("s = {s} must be >= 0")));
        }
        Ok(GevreyParams { nu, s })
    }
}

/// `Σ_p λ_p^ν e^{2 s √λ_p} |v_p|²`
pub fn gevrey_norm_sq(
    v: &CoefficientVector,
    basis: &SpectralBasis,
    params: GevreyParams,
) -> Result<LogScalar> {
    v.check_len(basis)?;
    let mut sum = LogSum::new();
    for (c, l) in v.coeffs.iter().zip(basis.lambdas()) {
        if *c != 0.0 {
            sum.push_ln(params.nu * l.ln() + 2.0 * params.s * l.sqrt() + 2.0 * c.abs().ln());
        }
    }
    Ok(sum.total())
}

/// `Σ_p (1 + λ_p)^r |v_p|²`
pub fn sobolev_norm_sq(v: &CoefficientVector, basis: &SpectralBasis, r: u32) -> Result<f64> {
    v.check_len(basis)?;
    Ok(v.coeffs
        .iter()
        .zip(basis.lambdas())
        .map(|(c, l)| (1.0 + l).powi(r as i32) * c * c)
        .sum())
}

/// Sup over the grid of a per-node weighted spectral sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionValue {
    pub value: LogScalar,
    pub x_argmax: f64,
    pub node_argmax: usize,
    /// Share of the sum at the argmax carried by the last retained mode.
    pub per_mode_tail: f64,
    /// The per-node sums, in grid order.
    pub per_node: Vec<LogScalar>,
}

/// Criterion `A` for kernel order `k`.
pub fn criterion_a(
    u: &Trajectory,
    ux: &Trajectory,
    k: u32,
    basis: &SpectralBasis,
) -> Result<CriterionValue> {
    criterion_a_gamma(u, ux, k, 1.0, basis)
}

/// `A^γ = sup_x Σ_p λ_p^k (w_p(x)²)^γ` for `γ >= 1`.
pub fn criterion_a_gamma(
    u: &Trajectory,
    ux: &Trajectory,
    k: u32,
    gamma: f64,
    basis: &SpectralBasis,
) -> Result<CriterionValue> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(gamma.is_finite() && gamma >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must be >= 1"
        )));
    }
    check_pair(u, ux, basis)?;
    let w = weighted_combo(u, ux, basis)?;
    let ln_weight: Vec<f64> = basis
        .lambdas()
        .iter()
        .map(|l| f64::from(k) * l.ln())
        .collect();
    let last = basis.len() - 1;

    let mut per_node = Vec::with_capacity(w.values.len());
    let mut best = (LogScalar::ZERO, 0usize, 0.0);
    for (i, row) in w.values.iter().enumerate() {
        let mut sum = LogSum::new();
        let mut tail = LogScalar::ZERO;
        for (p, wp) in row.iter().enumerate() {
            if wp.is_zero() {
                continue;
            }
            let term = ln_weight[p] + gamma * (2.0 * wp.ln_abs());
            sum.push_ln(term);
            if p == last {
                tail = LogScalar::exp(term);
            }
        }
        let total = sum.total();
        if i == 0 || total.cmp_value(&best.0).is_gt() {
            let share = if total.is_zero() {
                0.0
            } else {
                (tail.ln_abs() - total.ln_abs()).exp()
            };
            best = (total, i, share);
        }
        per_node.push(total);
    }
    Ok(CriterionValue {
        value: best.0,
        x_argmax: u.xs[best.1],
        node_argmax: best.1,
        per_mode_tail: best.2,
        per_node,
    })
}

/// `A` evaluated in plain doubles; overflows once `√λ_P a` is large.
pub fn criterion_a_direct(
    u: &Trajectory,
    ux: &Trajectory,
    k: u32,
    basis: &SpectralBasis,
) -> Result<f64> {
    check_pair(u, ux, basis)?;
    let a = basis.domain().a();
    let lambdas = basis.lambdas();
    let mut best: f64 = 0.0;
    for ((&x, uv), uxv) in u.xs.iter().zip(&u.values).zip(&ux.values) {
        let mut sum = 0.0;
        for (p, &l) in lambdas.iter().enumerate() {
            let s = l.sqrt();
            let combo = uv.coeffs[p] + uxv.coeffs[p] / s;
            sum += l.powi(k as i32) * (2.0 * s * (a - x)).exp() * combo * combo;
        }
        best = best.max(sum);
    }
    Ok(best)
}

/// Right-hand sides bounding `A`: the headline form with `e^{2√λ a}` and the tighter form with
/// `e^{2√λ a} - 1` that precedes it in the derivation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremBound {
    pub rhs_theorem: LogScalar,
    pub rhs_line25: LogScalar,
    /// `3 ‖u(a)‖²_{H^k} + 3 ‖u_x(a)‖²_{H^{k-1}}`
    pub data_part: f64,
}

/// `∫_0^a |f_p(ξ)|² dξ` per mode by the trapezoid rule.
pub fn forcing_energy(forcing: &Trajectory, basis: &SpectralBasis) -> Result<Vec<f64>> {
    if forcing.modes() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: forcing.modes(),
        });
    }
    if forcing.len() < 2 {
        return Err(Error::InvalidParameter(
            "forcing trajectory needs two nodes".into(),
        ));
    }
    let h = basis.domain().a() / (forcing.len() - 1) as f64;
    Ok((0..basis.len())
        .map(|p| {
            let sq: Vec<f64> = forcing
                .values
                .iter()
                .map(|v| v.coeffs[p] * v.coeffs[p])
                .collect();
            trapezoid(h, &sq)
        })
        .collect())
}

pub fn theorem_bound(
    u_at_a: &CoefficientVector,
    ux_at_a: &CoefficientVector,
    forcing: &Trajectory,
    k: u32,
    basis: &SpectralBasis,
) -> Result<TheoremBound> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let data_part =
        3.0 * sobolev_norm_sq(u_at_a, basis, k)? + 3.0 * sobolev_norm_sq(ux_at_a, basis, k - 1)?;
    let energy = forcing_energy(forcing, basis)?;
    let a = basis.domain().a();
    let kf = f64::from(k);
    let ln_lambda1 = basis.lambda_min().ln();

    let mut theorem = LogSum::new();
    let mut line25 = LogSum::new();
    for (&l, &e) in basis.lambdas().iter().zip(&energy) {
        if e == 0.0 {
            continue;
        }
        let growth = 2.0 * l.sqrt() * a;
        let ln_e = e.ln();
        let ln_poly = (kf - 1.5) * l.ln();
        let ln_poly_theorem = if k == 1 { -0.5 * ln_lambda1 } else { ln_poly };
        theorem.push_ln(ln_poly_theorem + growth + ln_e);
        // e^{g} - 1 = e^{g} (1 - e^{-g})
        line25.push_ln(ln_poly + growth + (-(-growth).exp_m1()).ln() + ln_e);
    }
    let base = LogScalar::from_f64(data_part);
    Ok(TheoremBound {
        rhs_theorem: base.add(&theorem.total().scale(1.5)),
        rhs_line25: base.add(&line25.total().scale(1.5)),
        data_part,
    })
}

/// The bound with `f` replaced by `L |u|` inside the weighted forcing sum.
pub fn lipschitz_line25(
    u_at_a: &CoefficientVector,
    ux_at_a: &CoefficientVector,
    u: &Trajectory,
    lipschitz: f64,
    k: u32,
    basis: &SpectralBasis,
) -> Result<LogScalar> {
    Ok(theorem_bound(u_at_a, ux_at_a, &u.scaled(lipschitz), k, basis)?.rhs_line25)
}

/// Bounds on `A^γ` for `f ≡ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaBound {
    /// `2^γ (Σ λ^{k/γ} |u_p(a)|² + Σ λ^{k/γ-1} |u_{x,p}(a)|²)^γ`
    pub aggregated: LogScalar,
    /// `2^γ max{2^{γ-1}, 1} (S_1^γ + S_2^γ)`
    pub split: LogScalar,
    /// `2^{2γ} (‖u(a)‖^{2γ}_{H^{k/γ}} + ‖u_x(a)‖^{2γ}_{H^{k/γ-1}})` when `γ | k`.
    pub sobolev_reduced: Option<LogScalar>,
    /// `2^{2γ} (S_1^γ + λ_1^{k-γ} ‖u_x(a)‖^{2γ})` when `k <= γ`.
    pub low_order: Option<LogScalar>,
}

impl GammaBound {
    /// The tightest of the reported forms.
    pub fn tightest(&self) -> LogScalar {
        self.aggregated
    }
}

pub fn gamma_bound(
    u_at_a: &CoefficientVector,
    ux_at_a: &CoefficientVector,
    k: u32,
    gamma: f64,
    basis: &SpectralBasis,
) -> Result<GammaBound> {
    if !(gamma.is_finite() && gamma >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must be >= 1"
        )));
    }
    u_at_a.check_len(basis)?;
    ux_at_a.check_len(basis)?;
    let kf = f64::from(k);
    let r = kf / gamma;
    let lambdas = basis.lambdas();

    let weighted = |v: &CoefficientVector, exponent: f64| -> f64 {
        v.coeffs
            .iter()
            .zip(&lambdas)
            .map(|(c, l)| l.powf(exponent) * c * c)
            .sum()
    };
    let s1 = weighted(u_at_a, r);
    let s2 = weighted(ux_at_a, r - 1.0);
    let pow = |v: f64| LogScalar::from_f64(v).abs_powf(gamma);
    let two_g = 2f64.powf(gamma);

    let aggregated = pow(s1 + s2).scale(two_g);
    let split = pow(s1)
        .add(&pow(s2))
        .scale(two_g * 2f64.powf(gamma - 1.0).max(1.0));

    let sobolev_reduced = if (r - r.round()).abs() < 1e-12 && r.round() >= 1.0 {
        let ri = r.round() as u32;
        let h1 = sobolev_norm_sq(u_at_a, basis, ri)?;
        let h0 = sobolev_norm_sq(ux_at_a, basis, ri - 1)?;
        Some(pow(h1).add(&pow(h0)).scale(4f64.powf(gamma)))
    } else {
        None
    };
    let low_order = if kf <= gamma {
        let ux_sq: f64 = ux_at_a.coeffs.iter().map(|c| c * c).sum();
        let tail = LogScalar::exp((kf - gamma) * basis.lambda_min().ln()) * pow(ux_sq);
        Some(pow(s1).add(&tail).scale(4f64.powf(gamma)))
    } else {
        None
    };
    Ok(GammaBound {
        aggregated,
        split,
        sobolev_reduced,
        low_order,
    })
}

/// One inequality `lhs <= rhs (1 + slack)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: LogScalar,
    pub rhs: LogScalar,
    pub pass: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: LogScalar, rhs: LogScalar) -> Self {
        let pass = lhs.le_with_slack(&rhs, BOUND_SLACK);
        BoundCheck {
            name: name.into(),
            lhs,
            rhs,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCheck {
    pub gamma: f64,
    pub a_gamma: LogScalar,
    /// Present only when the forcing vanishes identically.
    pub bound: Option<GammaBound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub k: u32,
    pub a: LogScalar,
    pub rhs_line25: LogScalar,
    pub rhs_theorem: LogScalar,
    /// `rhs_theorem - A`
    pub margin: LogScalar,
    pub x_argmax: f64,
    pub per_mode_tail: f64,
    pub gammas: Vec<GammaCheck>,
    pub checks: Vec<BoundCheck>,
}

impl CriterionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Evaluate `A`, both bounds and the requested `A^γ` pairs on a case with
/// reference trajectories. Violations are flagged, not raised.
pub fn verify_bounds(
    case: &ManufacturedCase,
    k: u32,
    gammas: &[f64],
    basis: &SpectralBasis,
) -> Result<CriterionReport> {
    verify_trajectories(&case.u, &case.ux, &case.forcing, k, gammas, basis)
}

pub fn verify_trajectories(
    u: &Trajectory,
    ux: &Trajectory,
    forcing: &Trajectory,
    k: u32,
    gammas: &[f64],
    basis: &SpectralBasis,
) -> Result<CriterionReport> {
    let crit = criterion_a(u, ux, k, basis)?;
    let bound = theorem_bound(u.last(), ux.last(), forcing, k, basis)?;
    let forcing_vanishes = forcing
        .values
        .iter()
        .all(|v| v.coeffs.iter().all(|c| *c == 0.0));

    let mut checks = vec![
        BoundCheck::new("A<=rhs_line25", crit.value, bound.rhs_line25),
        BoundCheck::new(
            "rhs_line25<=rhs_theorem",
            bound.rhs_line25,
            bound.rhs_theorem,
        ),
        BoundCheck::new("A<=rhs_theorem", crit.value, bound.rhs_theorem),
    ];
    let mut gamma_checks = Vec::with_capacity(gammas.len());
    for &g in gammas {
        let a_gamma = criterion_a_gamma(u, ux, k, g, basis)?.value;
        let gb = if forcing_vanishes {
            let gb = gamma_bound(u.last(), ux.last(), k, g, basis)?;
            checks.push(BoundCheck::new(
                format!("A^{g}<=aggregated"),
                a_gamma,
                gb.aggregated,
            ));
            checks.push(BoundCheck::new(format!("A^{g}<=split"), a_gamma, gb.split));
            if let Some(r) = gb.sobolev_reduced {
                checks.push(BoundCheck::new(
                    format!("A^{g}<=sobolev_reduced"),
                    a_gamma,
                    r,
                ));
            }
            if let Some(r) = gb.low_order {
                checks.push(BoundCheck::new(format!("A^{g}<=low_order"), a_gamma, r));
            }
            Some(gb)
        } else {
            None
        };
        gamma_checks.push(GammaCheck {
            gamma: g,
            a_gamma,
            bound: gb,
        });
    }

    Ok(CriterionReport {
        k,
        a: crit.value,
        rhs_line25: bound.rhs_line25,
        rhs_theorem: bound.rhs_theorem,
        margin: bound.rhs_theorem.sub(&crit.value),
        x_argmax: crit.x_argmax,
        per_mode_tail: crit.per_mode_tail,
        gammas: gamma_checks,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::uniform_xs;
    use crate::spectral::BoxDomain;
    use std::f64::consts::PI;

    fn square() -> SpectralBasis {
        SpectralBasis::build(BoxDomain::new(vec![1.0, 1.0], 0.5).unwrap(), &[2, 2]).unwrap()
    }

    #[test]
    fn gevrey_degenerates_to_l2() {
        let b = square();
        let v = CoefficientVector::new(vec![0.5, -1.0, 0.25, 2.0]);
        let g = gevrey_norm_sq(&v, &b, GevreyParams::new(0.0, 0.0).unwrap()).unwrap();
        assert!((g.to_f64() - v.l2_norm().powi(2)).abs() < 1e-14);
        assert!((sobolev_norm_sq(&v, &b, 0).unwrap() - v.l2_norm().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn single_mode_gevrey() {
        let b = square();
        let v = b.unit(2).scaled(0.3);
        let l = b.lambda(2);
        let g = gevrey_norm_sq(&v, &b, GevreyParams::new(1.5, 0.7).unwrap()).unwrap();
        let e = l.powf(1.5) * (2.0 * 0.7 * l.sqrt()).exp() * 0.09;
        assert!((g.to_f64() - e).abs() < 1e-12 * e);
    }

    #[test]
    fn sobolev_of_first_mode() {
        let b =
            SpectralBasis::build(BoxDomain::new(vec![1.0, 1.0], 1.0).unwrap(), &[2, 2]).unwrap();
        let s = sobolev_norm_sq(&b.unit(0), &b, 1).unwrap();
        assert!((s - (1.0 + 2.0 * PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn gevrey_handles_huge_weights() {
        let b = SpectralBasis::build(BoxDomain::new(vec![1.0], 1.0).unwrap(), &[200]).unwrap();
        let v = b.unit(199);
        let g = gevrey_norm_sq(&v, &b, GevreyParams::new(0.0, 1.0).unwrap()).unwrap();
        assert!((g.ln_abs() - 2.0 * 200.0 * PI).abs() < 1e-10);
        assert!(g.to_f64().is_infinite());
    }

    #[test]
    fn gamma_below_one_is_rejected() {
        let b = square();
        let xs = uniform_xs(0.5, 4);
        let t = Trajectory::zeros(xs, b.len());
        assert!(criterion_a_gamma(&t, &t, 1, 0.5, &b).is_err());
        assert!(gamma_bound(&b.zeros(), &b.zeros(), 1, 0.9, &b).is_err());
        assert!(criterion_a(&t, &t, 0, &b).is_err());
    }

    #[test]
    fn gamma_two_single_mode_bound() {
        let b = SpectralBasis::build(BoxDomain::new(vec![1.0], 1.0).unwrap(), &[1]).unwrap();
        let l = b.lambda(0);
        let (ua, uxa) = (0.3, -1.2);
        let gb = gamma_bound(
            &CoefficientVector::new(vec![ua]),
            &CoefficientVector::new(vec![uxa]),
            2,
            2.0,
            &b,
        )
        .unwrap();
        let e = 4.0 * (l * ua * ua + uxa * uxa).powi(2);
        assert!((gb.aggregated.to_f64() - e).abs() < 1e-12 * e);
        let split = 8.0 * ((l * ua * ua).powi(2) + (uxa * uxa).powi(2));
        assert!((gb.split.to_f64() - split).abs() < 1e-12 * split);
        assert!(gb.sobolev_reduced.is_some());
        assert!(gb.low_order.is_some());
    }

    #[test]
    fn zero_forcing_collapses_both_bounds() {
        let b = square();
        let xs = uniform_xs(0.5, 8);
        let ua = CoefficientVector::new(vec![1.0, 0.5, -0.2, 0.1]);
        let uxa = CoefficientVector::new(vec![-3.0, 0.0, 1.0, 0.4]);
        for k in 1..=3 {
            let tb = theorem_bound(&ua, &uxa, &Trajectory::zeros(xs.clone(), 4), k, &b).unwrap();
            let e = 3.0
                * (sobolev_norm_sq(&ua, &b, k).unwrap()
                    + sobolev_norm_sq(&uxa, &b, k - 1).unwrap());
            assert!((tb.rhs_theorem.to_f64() - e).abs() < 1e-12 * e);
            assert_eq!(tb.rhs_theorem, tb.rhs_line25);
        }
    }
}

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forward::{manufacture, propagate_exact, uniform_xs, ManufacturedCase, Trajectory};
use crate::gevrey::{
    criterion_a, criterion_a_gamma, gamma_bound, theorem_bound, verify_bounds, CriterionReport,
};
use crate::harness::output::ResultRow;
use crate::harness::{convergence_suite, verify_suite, ExperimentConfig, NamedCase};
use crate::kernel::{beta_from_rule, perturb, regularized_solve, RegConfig};
use crate::spectral::SpectralBasis;

/// Evaluation abscissae as fractions of `a`.
pub const EVAL_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Offset separating the noise stream from the stream that draws the data.
const NOISE_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    pub case: String,
    pub epsilon: f64,
    pub message: String,
}

/// Least-squares slope of `ln error` against `ln ε` for one abscissa, or
/// for the sup over all tested abscissae when `x` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeSummary {
    pub case: String,
    pub x: Option<f64>,
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceOutcome {
    pub rows: Vec<ResultRow>,
    pub slopes: Vec<SlopeSummary>,
    pub failures: Vec<RowFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub reports: Vec<(String, CriterionReport)>,
    pub rows: Vec<ResultRow>,
    pub failures: Vec<RowFailure>,
}

impl VerifyOutcome {
    /// True iff every inequality passed and every case could be built.
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty() && self.reports.iter().all(|(_, r)| r.all_pass())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveDump {
    pub case: String,
    pub u: Trajectory,
    pub ux: Trajectory,
}

pub fn build_case(
    cfg: &ExperimentConfig,
    case: &NamedCase,
    basis: &SpectralBasis,
    xs: &[f64],
) -> Result<ManufacturedCase> {
    manufacture(case.case, basis, xs, cfg.seed, &cfg.picard.controls())
}

fn elapsed_ms(cfg: &ExperimentConfig, start: Instant) -> f64 {
    if cfg.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

/// Least-squares slope through `(ln x, ln y)`; pairs with a non-positive or
/// non-finite coordinate are skipped. `None` with fewer than two points.
pub fn slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// ε-ladder sweep: perturb, regularize, and measure `‖u^ε(x) - u(x)‖` at
/// the evaluation abscissae. A failing ε leaves `NaN` rows behind and is
/// listed in `failures`; the other rows are unaffected.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceOutcome> {
    cfg.validate()?;
    let basis = cfg.basis()?;
    let a = basis.domain().a();
    let xs = uniform_xs(a, cfg.nx);
    let nodes: Vec<usize> = EVAL_FRACTIONS
        .iter()
        .map(|f| (f * cfg.nx as f64).round() as usize)
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut slopes = Vec::new();
    for named in cfg.cases_or(convergence_suite) {
        let case = build_case(cfg, &named, &basis, &xs)?;
        let crit = criterion_a(&case.u, &case.ux, cfg.k, &basis)?;
        let bound = theorem_bound(case.u.last(), case.ux.last(), &case.forcing, cfg.k, &basis)?;
        let (a_val, rhs) = (crit.value.to_f64(), bound.rhs_theorem.to_f64());
        let margin = bound.rhs_theorem.sub(&crit.value).to_f64();
        let noise_seed = cfg.seed.wrapping_add(NOISE_SEED_OFFSET);

        let mut case_rows = Vec::new();
        for &eps in &cfg.epsilons {
            let start = Instant::now();
            let attempt = (|| {
                let noisy = perturb(&case.data, eps, noise_seed)?;
                let beta = if eps == 0.0 {
                    0.0
                } else {
                    beta_from_rule(cfg.beta_rule, eps)?
                };
                let reg = RegConfig {
                    k: cfg.k,
                    beta,
                    truncation: cfg.truncation,
                    picard: cfg.picard.controls(),
                };
                let sol = regularized_solve(&noisy.data(), &case.f, &reg, &basis, &xs)?;
                Ok::<_, crate::Error>((beta, sol))
            })();
            let ms = elapsed_ms(cfg, start);
            match attempt {
                Ok((beta, sol)) => {
                    for &i in &nodes {
                        case_rows.push(ResultRow {
                            case: named.name.clone(),
                            epsilon: eps,
                            beta,
                            k: cfg.k,
                            x: xs[i],
                            error: sol.u.at(i).sub(case.u.at(i)).l2_norm(),
                            a: a_val,
                            rhs,
                            margin,
                            iters: sol.stats.iterations,
                            ms,
                        });
                    }
                }
                Err(e) => {
                    failures.push(RowFailure {
                        case: named.name.clone(),
                        epsilon: eps,
                        message: e.to_string(),
                    });
                    for &i in &nodes {
                        case_rows.push(ResultRow {
                            case: named.name.clone(),
                            epsilon: eps,
                            beta: f64::NAN,
                            k: cfg.k,
                            x: xs[i],
                            error: f64::NAN,
                            a: a_val,
                            rhs,
                            margin,
                            iters: 0,
                            ms,
                        });
                    }
                }
            }
        }

        for &i in &nodes {
            let pts: Vec<(f64, f64)> = case_rows
                .iter()
                .filter(|r| r.x == xs[i])
                .map(|r| (r.epsilon, r.error))
                .collect();
            slopes.push(summary(&named.name, Some(xs[i]), &pts));
        }
        let sup: Vec<(f64, f64)> = cfg
            .epsilons
            .iter()
            .map(|&e| {
                let worst = case_rows
                    .iter()
                    .filter(|r| r.epsilon == e)
                    .map(|r| r.error)
                    .fold(0.0, f64::max);
                (e, worst)
            })
            .collect();
        slopes.push(summary(&named.name, None, &sup));
        rows.extend(case_rows);
    }

    rows.sort_by(|l, r| {
        l.case
            .cmp(&r.case)
            .then(l.epsilon.total_cmp(&r.epsilon))
            .then(l.x.total_cmp(&r.x))
    });
    Ok(ConvergenceOutcome {
        rows,
        slopes,
        failures,
    })
}

fn summary(case: &str, x: Option<f64>, pts: &[(f64, f64)]) -> SlopeSummary {
    SlopeSummary {
        case: case.to_string(),
        x,
        slope: slope(pts),
        points: pts
            .iter()
            .filter(|(e, v)| *e > 0.0 && *v > 0.0 && v.is_finite())
            .count(),
    }
}

/// Bound suite: one row per inequality, labelled `case:check:pass|FAIL`.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyOutcome> {
    cfg.validate()?;
    let basis = cfg.basis()?;
    let xs = uniform_xs(basis.domain().a(), cfg.nx);
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut failures = Vec::new();

    for named in cfg.cases_or(verify_suite) {
        let start = Instant::now();
        let mut case = match build_case(cfg, &named, &basis, &xs) {
            Ok(c) => c,
            Err(e) => {
                failures.push(RowFailure {
                    case: named.name.clone(),
                    epsilon: 0.0,
                    message: e.to_string(),
                });
                rows.push(ResultRow {
                    case: format!("{}:build:FAIL", named.name),
                    epsilon: 0.0,
                    beta: 0.0,
                    k: 0,
                    x: f64::NAN,
                    error: f64::NAN,
                    a: f64::NAN,
                    rhs: f64::NAN,
                    margin: f64::NAN,
                    iters: 0,
                    ms: elapsed_ms(cfg, start),
                });
                continue;
            }
        };
        if let Some(s) = cfg.debug_ux_scale {
            case.ux = case.ux.scaled(s);
        }
        let iters = case.stats.as_ref().map_or(0, |s| s.iterations);
        for &k in &cfg.ks {
            let report = verify_bounds(&case, k, &cfg.gammas, &basis)?;
            let ms = elapsed_ms(cfg, start);
            for check in &report.checks {
                rows.push(ResultRow {
                    case: format!(
                        "{}:{}:{}",
                        named.name,
                        check.name,
                        if check.pass { "pass" } else { "FAIL" }
                    ),
                    epsilon: 0.0,
                    beta: 0.0,
                    k,
                    x: report.x_argmax,
                    error: 0.0,
                    a: check.lhs.to_f64(),
                    rhs: check.rhs.to_f64(),
                    margin: check.rhs.sub(&check.lhs).to_f64(),
                    iters,
                    ms,
                });
            }
            reports.push((named.name.clone(), report));
        }
    }
    Ok(VerifyOutcome {
        reports,
        rows,
        failures,
    })
}

/// `A` and `A^γ` per case at the configured `k`, each with its bound
/// (`NaN` for `A^γ` when the forcing does not vanish).
pub fn run_criterion(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let basis = cfg.basis()?;
    let xs = uniform_xs(basis.domain().a(), cfg.nx);
    let mut rows = Vec::new();
    for named in cfg.cases_or(verify_suite) {
        let start = Instant::now();
        let case = build_case(cfg, &named, &basis, &xs)?;
        let iters = case.stats.as_ref().map_or(0, |s| s.iterations);
        let crit = criterion_a(&case.u, &case.ux, cfg.k, &basis)?;
        let bound = theorem_bound(case.u.last(), case.ux.last(), &case.forcing, cfg.k, &basis)?;
        let unforced = case
            .forcing
            .values
            .iter()
            .all(|v| v.coeffs.iter().all(|c| *c == 0.0));
        rows.push(ResultRow {
            case: format!("{}:A", named.name),
            epsilon: 0.0,
            beta: 0.0,
            k: cfg.k,
            x: crit.x_argmax,
            error: 0.0,
            a: crit.value.to_f64(),
            rhs: bound.rhs_theorem.to_f64(),
            margin: bound.rhs_theorem.sub(&crit.value).to_f64(),
            iters,
            ms: elapsed_ms(cfg, start),
        });
        for &g in &cfg.gammas {
            let ag = criterion_a_gamma(&case.u, &case.ux, cfg.k, g, &basis)?;
            let (rhs, margin) = if unforced {
                let gb = gamma_bound(case.u.last(), case.ux.last(), cfg.k, g, &basis)?;
                (
                    gb.aggregated.to_f64(),
                    gb.aggregated.sub(&ag.value).to_f64(),
                )
            } else {
                (f64::NAN, f64::NAN)
            };
            rows.push(ResultRow {
                case: format!("{}:A^{g}", named.name),
                epsilon: 0.0,
                beta: 0.0,
                k: cfg.k,
                x: ag.x_argmax,
                error: 0.0,
                a: ag.value.to_f64(),
                rhs,
                margin,
                iters,
                ms: elapsed_ms(cfg, start),
            });
        }
    }
    Ok(rows)
}

/// Exact mild solution and its x-derivative on the configured grid.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<Vec<SolveDump>> {
    cfg.validate()?;
    let basis = cfg.basis()?;
    let xs = uniform_xs(basis.domain().a(), cfg.nx);
    let mut out = Vec::new();
    for named in cfg.cases_or(convergence_suite) {
        let case = build_case(cfg, &named, &basis, &xs)?;
        let sol = propagate_exact(&case.data, &case.f, &basis, &xs, &cfg.picard.controls())?;
        let ux = sol.derivative(&basis)?;
        out.push(SolveDump {
            case: named.name.clone(),
            u: sol.u,
            ux,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::render_csv;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            nx: 32,
            epsilons: vec![1e-1, 1e-3, 0.0],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&e: &f64| (e, 3.0 * e.powf(0.75)))
            .collect();
        assert!((slope(&pts).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(slope(&[(1.0, 1.0)]), None);
    }

    #[test]
    fn convergence_rows_are_sorted_and_complete() {
        let out = run_convergence(&small()).unwrap();
        assert_eq!(out.rows.len(), 3 * EVAL_FRACTIONS.len());
        assert!(out.failures.is_empty());
        assert_eq!(out.rows[0].epsilon, 0.0);
        assert!(out
            .rows
            .iter()
            .filter(|r| r.epsilon == 0.0)
            .all(|r| r.error <= 1e-9));
        assert!(out
            .rows
            .windows(2)
            .all(|w| (w[0].epsilon, w[0].x) < (w[1].epsilon, w[1].x)));
    }

    #[test]
    fn failing_epsilon_does_not_abort_sweep() {
        let cfg = ExperimentConfig {
            beta_rule: crate::kernel::BetaRule::Explicit { beta: 2.0 },
            ..small()
        };
        let out = run_convergence(&cfg).unwrap();
        assert_eq!(out.failures.len(), 2);
        assert!(out
            .rows
            .iter()
            .filter(|r| r.epsilon == 0.0)
            .all(|r| r.error.is_finite()));
        assert!(out
            .rows
            .iter()
            .filter(|r| r.epsilon > 0.0)
            .all(|r| r.error.is_nan()));
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let a = render_csv(&run_convergence(&small()).unwrap().rows).unwrap();
        let b = render_csv(&run_convergence(&small()).unwrap().rows).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_case_verifies_with_zero_a() {
        let cfg = ExperimentConfig {
            cases: Some(vec![NamedCase::new("zero", crate::forward::CaseKind::Zero)]),
            nx: 16,
            ..ExperimentConfig::default()
        };
        let out = run_verify(&cfg).unwrap();
        assert!(out.all_pass());
        assert!(out
            .reports
            .iter()
            .all(|(_, r)| r.a.is_zero() && r.margin.is_zero()));
    }
}

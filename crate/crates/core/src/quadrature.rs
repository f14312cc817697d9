//! One-dimensional quadrature rules used for the y-projections and the
//! x-integrals.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Newton iteration on the three-term Legendre recurrence, seeded with the
/// Tricomi approximation.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule mapped to `(0, length)`.
pub fn gauss_legendre_on(order: usize, length: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let half = 0.5 * length;
    (
        x.iter().map(|t| half * (t + 1.0)).collect(),
        w.iter().map(|wi| half * wi).collect(),
    )
}

/// Composite midpoint rule with `count` cells on `(0, length)`.
pub fn midpoint_on(count: usize, length: f64) -> (Vec<f64>, Vec<f64>) {
    let h = length / count as f64;
    (
        (0..count).map(|i| (i as f64 + 0.5) * h).collect(),
        vec![h; count],
    )
}

/// Composite trapezoid of uniformly spaced samples.
pub fn trapezoid(h: f64, samples: &[f64]) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = samples[1..n - 1].iter().sum();
            h * (0.5 * samples[0] + inner + 0.5 * samples[n - 1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in 1..=24 {
            let (x, w) = gauss_legendre(order);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for deg in 0..(2 * order) {
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!(
                    (approx - exact).abs() < 1e-13,
                    "order {order} degree {deg}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn mapped_rule_stays_interior() {
        let (x, w) = gauss_legendre_on(7, 2.5);
        assert!(x.iter().all(|&t| t > 0.0 && t < 2.5));
        assert!((w.iter().sum::<f64>() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_is_exact_on_lines() {
        let h = 0.25;
        let s: Vec<f64> = (0..5).map(|i| 3.0 * i as f64 * h + 1.0).collect();
        assert!((trapezoid(h, &s) - 2.5).abs() < 1e-15);
        assert_eq!(trapezoid(h, &[4.0]), 0.0);
    }
}

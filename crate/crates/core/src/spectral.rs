//! Dirichlet eigenbasis of `-Δ` on an n-dimensional box and the transforms
//! between point samples and spectral coefficients.
//!
//! Eigenfunctions are the normalised sine products
//! `φ(y) = Π_j sqrt(2/a_j) sin(π n_j y_j / a_j)` with eigenvalue
//! `λ = Σ_j (π n_j / a_j)²`. Modes are sorted by eigenvalue, ties broken
//! lexicographically on the index tuple.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// `Ω = (0, a) × (0, a_1) × … × (0, a_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    dims: Vec<f64>,
    a: f64,
}

impl BoxDomain {
    pub fn new(dims: Vec<f64>, a: f64) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDomain(
                "at least one y-dimension is required".into(),
            ));
        }
        if let Some(bad) = dims.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::InvalidDomain(format!(
                "edge length {bad} is not positive"
            )));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "x-extent a = {a} is not positive"
            )));
        }
        Ok(BoxDomain { dims, a })
    }

    pub fn unit_cube(n: usize, a: f64) -> Result<Self> {
        Self::new(vec![1.0; n], a)
    }

    pub fn dims(&self) -> &[f64] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Extent of `Ω_x = (0, a)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub index: Vec<usize>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBasis {
    domain: BoxDomain,
    max_index: Vec<usize>,
    modes: Vec<Mode>,
}

impl SpectralBasis {
    /// All index tuples with `1 <= n_j <= max_index[j]`, sorted by eigenvalue.
    pub fn build(domain: BoxDomain, max_index: &[usize]) -> Result<Self> {
        if max_index.len() != domain.ndim() {
            return Err(Error::InvalidBasis(format!(
                "{} max indices for a {}-dimensional box",
                max_index.len(),
                domain.ndim()
            )));
        }
        if max_index.contains(&0) {
            return Err(Error::InvalidBasis(
                "max_index must be >= 1 in every dimension".into(),
            ));
        }

        let count: usize = max_index.iter().product();
        let mut modes = Vec::with_capacity(count);
        for flat in 0..count {
            let mut rest = flat;
            let mut index = vec![0usize; max_index.len()];
            for (d, &m) in max_index.iter().enumerate().rev() {
                index[d] = rest % m + 1;
                rest /= m;
            }
            let lambda = eigenvalue(domain.dims(), &index);
            modes.push(Mode { index, lambda });
        }
        modes.sort_by(|p, q| {
            p.lambda
                .total_cmp(&q.lambda)
                .then_with(|| p.index.cmp(&q.index))
        });

        Ok(SpectralBasis {
            domain,
            max_index: max_index.to_vec(),
            modes,
        })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// The lowest `count` modes; the max-index table is kept so grids sized
    /// for the full basis still fit.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.len() {
            return Err(Error::InvalidBasis(format!(
                "truncation {count} outside 1..={}",
                self.len()
            )));
        }
        Ok(SpectralBasis {
            domain: self.domain.clone(),
            max_index: self.max_index.clone(),
            modes: self.modes[..count].to_vec(),
        })
    }

    pub fn max_index(&self) -> &[usize] {
        &self.max_index
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Number of retained modes `P`.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn lambda(&self, p: usize) -> f64 {
        self.modes[p].lambda
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn lambda_min(&self) -> f64 {
        self.modes[0].lambda
    }

    pub fn lambda_max(&self) -> f64 {
        self.modes[self.modes.len() - 1].lambda
    }

    /// Position of an index tuple in the sorted list.
    pub fn position(&self, index: &[usize]) -> Option<usize> {
        self.modes.iter().position(|m| m.index == index)
    }

    /// `φ_p(y)` for the zero-based mode position `p`.
    pub fn eval_eigenfunction(&self, p: usize, y: &[f64]) -> Result<f64> {
        let mode = self.modes.get(p).ok_or(Error::ModeOutOfRange {
            index: p,
            count: self.len(),
        })?;
        if y.len() != self.domain.ndim()
            || y.iter()
                .zip(self.domain.dims())
                .any(|(yj, aj)| !(*yj > 0.0 && yj < aj))
        {
            return Err(Error::PointOutsideDomain(y.to_vec()));
        }
        Ok(mode
            .index
            .iter()
            .zip(self.domain.dims())
            .zip(y)
            .map(|((&n, &aj), &yj)| sine_mode(n, aj, yj))
            .product())
    }

    pub fn zeros(&self) -> CoefficientVector {
        CoefficientVector::zeros(self.len())
    }

    /// Unit vector on the zero-based mode position `p`.
    pub fn unit(&self, p: usize) -> CoefficientVector {
        let mut v = self.zeros();
        v.coeffs[p] = 1.0;
        v
    }
}

fn eigenvalue(dims: &[f64], index: &[usize]) -> f64 {
    index
        .iter()
        .zip(dims)
        .map(|(&n, &aj)| {
            let k = PI * n as f64 / aj;
            k * k
        })
        .sum()
}

#[inline]
fn sine_mode(n: usize, aj: f64, yj: f64) -> f64 {
    (2.0 / aj).sqrt() * (PI * n as f64 * yj / aj).sin()
}

/// Spectral coefficients `⟨v, φ_p⟩` of a function of `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientVector {
    pub coeffs: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(coeffs: Vec<f64>) -> Self {
        CoefficientVector { coeffs }
    }

    pub fn zeros(len: usize) -> Self {
        CoefficientVector {
            coeffs: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// `ℓ²` norm, equal to the `L²(Ω_y)` norm of the synthesised function.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn sub(&self, other: &CoefficientVector) -> CoefficientVector {
        CoefficientVector::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn add(&self, other: &CoefficientVector) -> CoefficientVector {
        CoefficientVector::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn scaled(&self, s: f64) -> CoefficientVector {
        CoefficientVector::new(self.coeffs.iter().map(|c| s * c).collect())
    }

    pub(crate) fn check_len(&self, basis: &SpectralBasis) -> Result<()> {
        if self.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Tensor-product quadrature grid over `Ω_y`. Samples on it are laid out
/// row-major, first dimension slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorGrid {
    axes: Vec<GridAxis>,
}

impl TensorGrid {
    pub fn from_axes(domain: &BoxDomain, axes: Vec<GridAxis>) -> Result<Self> {
        if axes.len() != domain.ndim() {
            return Err(Error::GridMismatch(format!(
                "{} axes for a {}-dimensional box",
                axes.len(),
                domain.ndim()
            )));
        }
        for (j, (axis, &aj)) in axes.iter().zip(domain.dims()).enumerate() {
            if axis.nodes.is_empty() || axis.nodes.len() != axis.weights.len() {
                return Err(Error::GridMismatch(format!(
                    "axis {j} has inconsistent nodes/weights"
                )));
            }
            let interior = axis.nodes.iter().all(|&t| t > 0.0 && t < aj);
            let increasing = axis.nodes.windows(2).all(|w| w[0] < w[1]);
            if !(interior && increasing) {
                return Err(Error::GridMismatch(format!(
                    "axis {j} nodes must be strictly interior and increasing"
                )));
            }
        }
        Ok(TensorGrid { axes })
    }

    /// Gauss–Legendre grid with the given order per dimension.
    pub fn gauss_legendre(domain: &BoxDomain, orders: &[usize]) -> Result<Self> {
        if orders.len() != domain.ndim() || orders.contains(&0) {
            return Err(Error::GridMismatch(
                "one positive order per dimension required".into(),
            ));
        }
        let axes = orders
            .iter()
            .zip(domain.dims())
            .map(|(&g, &aj)| {
                let (nodes, weights) = quadrature::gauss_legendre_on(g, aj);
                GridAxis { nodes, weights }
            })
            .collect();
        Self::from_axes(domain, axes)
    }

    /// Composite midpoint grid with the given cell count per dimension.
    pub fn midpoint(domain: &BoxDomain, counts: &[usize]) -> Result<Self> {
        if counts.len() != domain.ndim() || counts.contains(&0) {
            return Err(Error::GridMismatch(
                "one positive count per dimension required".into(),
            ));
        }
        let axes = counts
            .iter()
            .zip(domain.dims())
            .map(|(&g, &aj)| {
                let (nodes, weights) = quadrature::midpoint_on(g, aj);
                GridAxis { nodes, weights }
            })
            .collect();
        Self::from_axes(domain, axes)
    }

    /// Gauss–Legendre grid sized for the basis: order `2 n_max + 12` per
    /// dimension, which resolves products of retained sines to ~1e-13.
    pub fn for_basis(basis: &SpectralBasis) -> Result<Self> {
        let orders: Vec<usize> = basis
            .max_index()
            .iter()
            .map(|&m| default_order(m))
            .collect();
        Self::gauss_legendre(basis.domain(), &orders)
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|ax| ax.nodes.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of every node, in sample order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.len());
        for flat in 0..self.len() {
            let idx = self.unflatten(flat);
            out.push(
                idx.iter()
                    .zip(&self.axes)
                    .map(|(&i, ax)| ax.nodes[i])
                    .collect(),
            );
        }
        out
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (d, ax) in self.axes.iter().enumerate().rev() {
            let g = ax.nodes.len();
            idx[d] = flat % g;
            flat /= g;
        }
        idx
    }
}

pub(crate) fn default_order(max_index: usize) -> usize {
    2 * max_index + 12
}

/// Precomputed eigenfunction tables for one `(basis, grid)` pair.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    modes: usize,
    nodes: usize,
    /// `phi[p * nodes + g] = φ_p(y_g)`
    phi: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralTransform {
    pub fn new(basis: &SpectralBasis, grid: &TensorGrid) -> Result<Self> {
        if grid.ndim() != basis.domain().ndim() {
            return Err(Error::GridMismatch(format!(
                "{}-dimensional grid for a {}-dimensional basis",
                grid.ndim(),
                basis.domain().ndim()
            )));
        }
        for (j, (ax, &m)) in grid.axes().iter().zip(basis.max_index()).enumerate() {
            if ax.nodes.len() < 2 * m {
                return Err(Error::GridMismatch(format!(
                    "axis {j} has {} nodes, need at least {} for sine index {m}",
                    ax.nodes.len(),
                    2 * m
                )));
            }
            if let Some(&last) = ax.nodes.last() {
                if last >= basis.domain().dims()[j] {
                    return Err(Error::GridMismatch(format!(
                        "axis {j} extends past the box"
                    )));
                }
            }
        }

        // per-axis sine tables: table[j][(n - 1) * g_j + i]
        let tables: Vec<Vec<f64>> = grid
            .axes()
            .iter()
            .zip(basis.domain().dims())
            .zip(basis.max_index())
            .map(|((ax, &aj), &m)| {
                let mut t = Vec::with_capacity(m * ax.nodes.len());
                for n in 1..=m {
                    t.extend(ax.nodes.iter().map(|&y| sine_mode(n, aj, y)));
                }
                t
            })
            .collect();

        let nodes = grid.len();
        let multi: Vec<Vec<usize>> = (0..nodes).map(|g| grid.unflatten(g)).collect();
        let weights: Vec<f64> = multi
            .iter()
            .map(|idx| {
                idx.iter()
                    .zip(grid.axes())
                    .map(|(&i, ax)| ax.weights[i])
                    .product()
            })
            .collect();

        let mut phi = Vec::with_capacity(basis.len() * nodes);
        for mode in basis.modes() {
            for idx in &multi {
                let mut v = 1.0;
                for (j, (&i, &n)) in idx.iter().zip(&mode.index).enumerate() {
                    let g = grid.axes()[j].nodes.len();
                    v *= tables[j][(n - 1) * g + i];
                }
                phi.push(v);
            }
        }

        Ok(SpectralTransform {
            modes: basis.len(),
            nodes,
            phi,
            weights,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    /// Quadrature projection `⟨v, φ_p⟩` of grid samples.
    pub fn analyze(&self, samples: &[f64]) -> Result<CoefficientVector> {
        if samples.len() != self.nodes {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                self.nodes
            )));
        }
        let mut out = Vec::with_capacity(self.modes);
        self.analyze_into(samples, &mut out);
        Ok(CoefficientVector::new(out))
    }

    pub(crate) fn analyze_into(&self, samples: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for p in 0..self.modes {
            let row = &self.phi[p * self.nodes..(p + 1) * self.nodes];
            let mut acc = 0.0;
            for ((phi, w), v) in row.iter().zip(&self.weights).zip(samples) {
                acc += w * phi * v;
            }
            out.push(acc);
        }
    }

    /// Pointwise `Σ_p c_p φ_p(y_g)` on the grid.
    pub fn synthesize(&self, coeffs: &CoefficientVector) -> Result<Vec<f64>> {
        if coeffs.len() != self.modes {
            return Err(Error::LengthMismatch {
                expected: self.modes,
                got: coeffs.len(),
            });
        }
        let mut out = Vec::with_capacity(self.nodes);
        self.synthesize_into(&coeffs.coeffs, &mut out);
        Ok(out)
    }

    pub(crate) fn synthesize_into(&self, coeffs: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.nodes, 0.0);
        for (p, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.phi[p * self.nodes..(p + 1) * self.nodes];
            for (o, phi) in out.iter_mut().zip(row) {
                *o += c * phi;
            }
        }
    }

    /// Quadrature of `v²` over the box.
    pub fn l2_norm_sq(&self, samples: &[f64]) -> f64 {
        samples
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v * v)
            .sum()
    }

    /// Quadrature Gram matrix `∫ φ_p φ_q`, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.modes * self.modes];
        for p in 0..self.modes {
            let rp = &self.phi[p * self.nodes..(p + 1) * self.nodes];
            for q in 0..self.modes {
                let rq = &self.phi[q * self.nodes..(q + 1) * self.nodes];
                g[p * self.modes + q] = rp
                    .iter()
                    .zip(rq)
                    .zip(&self.weights)
                    .map(|((a, b), w)| w * a * b)
                    .sum();
            }
        }
        g
    }
}

/// Convenience wrapper around [`SpectralTransform::analyze`].
pub fn analyze(
    basis: &SpectralBasis,
    grid: &TensorGrid,
    samples: &[f64],
) -> Result<CoefficientVector> {
    SpectralTransform::new(basis, grid)?.analyze(samples)
}

/// Convenience wrapper around [`SpectralTransform::synthesize`].
pub fn synthesize(
    basis: &SpectralBasis,
    coeffs: &CoefficientVector,
    grid: &TensorGrid,
) -> Result<Vec<f64>> {
    SpectralTransform::new(basis, grid)?.synthesize(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> BoxDomain {
        BoxDomain::new(vec![1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn square_eigenvalues_and_tie_break() {
        let b = SpectralBasis::build(unit_square(), &[2, 2]).unwrap();
        let pi2 = PI * PI;
        let expected = [2.0 * pi2, 5.0 * pi2, 5.0 * pi2, 8.0 * pi2];
        for (m, e) in b.modes().iter().zip(expected) {
            assert!((m.lambda - e).abs() < 1e-12);
        }
        assert!((b.lambda(0) - 19.7392).abs() < 1e-4);
        assert!((b.lambda(3) - 78.9568).abs() < 1e-4);
        assert_eq!(b.modes()[1].index, vec![1, 2]);
        assert_eq!(b.modes()[2].index, vec![2, 1]);
    }

    #[test]
    fn interval_eigenvalues() {
        let d = BoxDomain::new(vec![1.0], 1.0).unwrap();
        let b = SpectralBasis::build(d, &[3]).unwrap();
        let l = b.lambdas();
        for (n, v) in l.iter().enumerate() {
            let k = (n + 1) as f64 * PI;
            assert!((v - k * k).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_basis() {
        let b = SpectralBasis::build(unit_square(), &[1, 1]).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b.lambda(0) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(SpectralBasis::build(unit_square(), &[0, 2]).is_err());
        assert!(SpectralBasis::build(unit_square(), &[2]).is_err());
        assert!(BoxDomain::new(vec![1.0, -1.0], 1.0).is_err());
        assert!(BoxDomain::new(vec![], 1.0).is_err());
        assert!(BoxDomain::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn eigenfunction_values() {
        let line = SpectralBasis::build(BoxDomain::new(vec![1.0], 1.0).unwrap(), &[2]).unwrap();
        assert!((line.eval_eigenfunction(0, &[0.5]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(line.eval_eigenfunction(1, &[0.5]).unwrap().abs() < 1e-15);
        let sq = SpectralBasis::build(unit_square(), &[1, 1]).unwrap();
        assert!((sq.eval_eigenfunction(0, &[0.5, 0.5]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eigenfunction_rejects_boundary_and_range() {
        let sq = SpectralBasis::build(unit_square(), &[2, 2]).unwrap();
        assert!(matches!(
            sq.eval_eigenfunction(4, &[0.5, 0.5]),
            Err(Error::ModeOutOfRange { .. })
        ));
        assert!(sq.eval_eigenfunction(0, &[0.0, 0.5]).is_err());
        assert!(sq.eval_eigenfunction(0, &[0.5, 1.0]).is_err());
        assert!(sq.eval_eigenfunction(0, &[0.5]).is_err());
    }

    #[test]
    fn analyze_recovers_unit_and_combination() {
        let b =
            SpectralBasis::build(BoxDomain::new(vec![1.0, 2.0], 1.0).unwrap(), &[3, 2]).unwrap();
        let grid = TensorGrid::for_basis(&b).unwrap();
        let t = SpectralTransform::new(&b, &grid).unwrap();
        let pts = grid.points();

        let s1: Vec<f64> = pts
            .iter()
            .map(|y| b.eval_eigenfunction(0, y).unwrap())
            .collect();
        let c1 = t.analyze(&s1).unwrap();
        for (p, c) in c1.coeffs.iter().enumerate() {
            let e = if p == 0 { 1.0 } else { 0.0 };
            assert!((c - e).abs() < 1e-10, "slot {p}: {c}");
        }

        let s2: Vec<f64> = pts
            .iter()
            .map(|y| {
                3.0 * b.eval_eigenfunction(1, y).unwrap() - b.eval_eigenfunction(0, y).unwrap()
            })
            .collect();
        let c2 = t.analyze(&s2).unwrap();
        let mut expected = vec![0.0; b.len()];
        expected[0] = -1.0;
        expected[1] = 3.0;
        for (c, e) in c2.coeffs.iter().zip(expected) {
            assert!((c - e).abs() < 1e-10);
        }
    }

    #[test]
    fn orthonormality_of_gram() {
        let b = SpectralBasis::build(
            BoxDomain::new(vec![1.0, 0.5, 2.0], 1.0).unwrap(),
            &[3, 2, 2],
        )
        .unwrap();
        let grid = TensorGrid::for_basis(&b).unwrap();
        let t = SpectralTransform::new(&b, &grid).unwrap();
        let g = t.gram();
        let n = b.len();
        for p in 0..n {
            for q in 0..n {
                let e = if p == q { 1.0 } else { 0.0 };
                assert!((g[p * n + q] - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn synthesize_zero_and_unit() {
        let b = SpectralBasis::build(unit_square(), &[2, 2]).unwrap();
        let grid = TensorGrid::for_basis(&b).unwrap();
        let t = SpectralTransform::new(&b, &grid).unwrap();
        assert!(t.synthesize(&b.zeros()).unwrap().iter().all(|&v| v == 0.0));
        let s = t.synthesize(&b.unit(0)).unwrap();
        for (v, y) in s.iter().zip(grid.points()) {
            assert!((v - b.eval_eigenfunction(0, &y).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_resolution_is_checked() {
        let b = SpectralBasis::build(unit_square(), &[4, 2]).unwrap();
        let coarse = TensorGrid::gauss_legendre(b.domain(), &[7, 8]).unwrap();
        assert!(matches!(
            SpectralTransform::new(&b, &coarse),
            Err(Error::GridMismatch(_))
        ));
        let line = BoxDomain::new(vec![1.0], 1.0).unwrap();
        let g1 = TensorGrid::gauss_legendre(&line, &[20]).unwrap();
        assert!(SpectralTransform::new(&b, &g1).is_err());
        let t = SpectralTransform::new(&b, &TensorGrid::for_basis(&b).unwrap()).unwrap();
        assert!(t.analyze(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn midpoint_grid_is_exact_on_sines() {
        let b = SpectralBasis::build(unit_square(), &[3, 3]).unwrap();
        let grid = TensorGrid::midpoint(b.domain(), &[6, 6]).unwrap();
        let t = SpectralTransform::new(&b, &grid).unwrap();
        let g = t.gram();
        let n = b.len();
        for p in 0..n {
            for q in 0..n {
                let e = if p == q { 1.0 } else { 0.0 };
                assert!((g[p * n + q] - e).abs() < 1e-12);
            }
        }
    }
}

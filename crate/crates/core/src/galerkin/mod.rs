//! Fourier–Galerkin discretization of the half-period problem with `L₀`
//! boundary conditions, in normal time `s ∈ [0, j]`.
//!
//! A coefficient vector holds `y_l ∈ ℝⁿ` for `l = −m..m`, flattened as
//! `(l+m)·n + i`, and represents `z(s) = Σ_l e^{(lπ/j)Js}(0; y_l)`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};

pub mod dimension;
pub mod functional;
pub mod solver;

pub use dimension::{galerkin_dimension_check, DimensionOptions, DimensionReport, DimensionRow};
pub use functional::{FdReport, Functional};
pub use solver::{find_critical_points, CriticalPoint, SeedFailure, SolveReport, SolverOptions};

/// Gauss–Legendre points per panel.
pub const PANEL_POINTS: usize = 10;

/// A point of `X_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierVector {
    pub n: usize,
    pub m: usize,
    pub j: usize,
    pub coeffs: Vec<f64>,
}

impl FourierVector {
    pub fn zeros(n: usize, m: usize, j: usize) -> Self {
        Self { n, m, j, coeffs: vec![0.0; (2 * m + 1) * n] }
    }

    pub fn from_vector(n: usize, m: usize, j: usize, c: &Vector) -> Result<Self> {
        if c.len() != (2 * m + 1) * n {
            return Err(Error::InvalidDimension(format!(
                "expected {} coefficients, got {}",
                (2 * m + 1) * n,
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure("non-finite Fourier coefficient".into()));
        }
        Ok(Self { n, m, j, coeffs: c.iter().copied().collect() })
    }

    pub fn as_vector(&self) -> Vector {
        Vector::from_column_slice(&self.coeffs)
    }

    pub fn mode(&self, l: i64) -> &[f64] {
        let start = (l + self.m as i64) as usize * self.n;
        &self.coeffs[start..start + self.n]
    }

    /// `‖z‖² = j|y₀|² + jΣ|l||y_l|²`.
    pub fn norm(&self) -> f64 {
        let m = self.m as i64;
        (-m..=m)
            .map(|l| self.j as f64 * (l.unsigned_abs().max(1)) as f64 * self.mode(l).iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// `z(s)`, valid for every real `s`; the series is `2j`-periodic and
    /// satisfies `z(−s) = Nz(s)`.
    pub fn eval(&self, s: f64) -> Vector {
        let n = self.n;
        let mut z = Vector::zeros(2 * n);
        let m = self.m as i64;
        for l in -m..=m {
            let a = l as f64 * PI * s / self.j as f64;
            let (sn, cs) = a.sin_cos();
            for (i, &y) in self.mode(l).iter().enumerate() {
                z[i] -= sn * y;
                z[n + i] += cs * y;
            }
        }
        z
    }

    /// `ż(s)`.
    pub fn derivative(&self, s: f64) -> Vector {
        let n = self.n;
        let mut z = Vector::zeros(2 * n);
        let m = self.m as i64;
        for l in -m..=m {
            let w = l as f64 * PI / self.j as f64;
            let (sn, cs) = (w * s).sin_cos();
            for (i, &y) in self.mode(l).iter().enumerate() {
                z[i] -= w * cs * y;
                z[n + i] -= w * sn * y;
            }
        }
        z
    }

    /// Samples the trajectory on `grid ⊂ [0, j]`.
    pub fn trajectory(&self, grid: &[f64]) -> Result<Vec<Vector>> {
        let j = self.j as f64;
        if let Some(&s) = grid.iter().find(|&&s| !(-1e-12..=j + 1e-12).contains(&s)) {
            return Err(Error::DomainMismatch(format!("grid point {s} outside [0, {j}]")));
        }
        Ok(grid.iter().map(|&s| self.eval(s)).collect())
    }

    /// `max_s |z(s)|` over `samples` uniform points of `[0, j]`.
    pub fn sup_norm(&self, samples: usize) -> f64 {
        let j = self.j as f64;
        (0..=samples)
            .map(|k| self.eval(j * k as f64 / samples as f64).norm())
            .fold(0.0, f64::max)
    }
}

/// Basis tables and composite Gauss–Legendre quadrature for `X_m` on `[0, j]`.
#[derive(Debug, Clone)]
pub struct GalerkinSpace {
    n: usize,
    m: usize,
    j: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `cos(pπs_q/j)` for `p = 0..=2m`, row-major by `p`.
    cos_tab: Vec<f64>,
    sin_tab: Vec<f64>,
}

impl GalerkinSpace {
    /// Uses `4m+4` panels per unit of normal time.
    pub fn new(n: usize, m: usize, j: usize) -> Result<Self> {
        Self::with_panels(n, m, j, 4 * m + 4)
    }

    /// `panels_per_unit` must be at least `4m+4`.
    pub fn with_panels(n: usize, m: usize, j: usize, panels_per_unit: usize) -> Result<Self> {
        if n == 0 || m == 0 || j == 0 {
            return Err(Error::InvalidDimension(format!("need n, m, j ≥ 1, got n={n} m={m} j={j}")));
        }
        if panels_per_unit < 4 * m + 4 {
            return Err(Error::Config(format!(
                "{panels_per_unit} quadrature panels per unit time cannot resolve m = {m} (need {})",
                4 * m + 4
            )));
        }
        let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_POINTS).expect("nonzero"));
        let panels = panels_per_unit * j;
        let h = j as f64 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * PANEL_POINTS);
        let mut weights = Vec::with_capacity(panels * PANEL_POINTS);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for &(x, w) in rule.as_node_weight_pairs() {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        let nq = nodes.len();
        let mut cos_tab = vec![0.0; (2 * m + 1) * nq];
        let mut sin_tab = vec![0.0; (2 * m + 1) * nq];
        for p in 0..=2 * m {
            for (q, &s) in nodes.iter().enumerate() {
                let (sn, cs) = (p as f64 * PI * s / j as f64).sin_cos();
                cos_tab[p * nq + q] = cs;
                sin_tab[p * nq + q] = sn;
            }
        }
        Ok(Self { n, m, j, nodes, weights, cos_tab, sin_tab })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn dim(&self) -> usize {
        (2 * self.m + 1) * self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index(&self, l: i64, i: usize) -> usize {
        (l + self.m as i64) as usize * self.n + i
    }

    fn modes(&self) -> impl Iterator<Item = i64> {
        let m = self.m as i64;
        -m..=m
    }

    #[inline]
    fn cos_at(&self, l: i64, q: usize) -> f64 {
        self.cos_tab[l.unsigned_abs() as usize * self.nodes.len() + q]
    }

    #[inline]
    fn sin_at(&self, l: i64, q: usize) -> f64 {
        l.signum() as f64 * self.sin_tab[l.unsigned_abs() as usize * self.nodes.len() + q]
    }

    /// Diagonal of the `X`-inner product, `j·max(|l|, 1)`.
    pub fn gram(&self) -> Vector {
        let mut g = Vector::zeros(self.dim());
        for l in self.modes() {
            for i in 0..self.n {
                g[self.index(l, i)] = self.j as f64 * l.unsigned_abs().max(1) as f64;
            }
        }
        g
    }

    /// `⟨Au, v⟩ = ∫₀ʲ (−Ju̇, v) ds`, diagonal with entries `lπ`.
    pub fn assemble_a(&self) -> Mat {
        let mut a = Mat::zeros(self.dim(), self.dim());
        for l in self.modes() {
            for i in 0..self.n {
                let k = self.index(l, i);
                a[(k, k)] = l as f64 * PI;
            }
        }
        a
    }

    /// `∫₀ʲ ΦᵀM(s)Φ ds` for symmetric `2n×2n` values `M_q` given at the
    /// quadrature nodes, assembled from cosine and sine moments of order
    /// up to `2m`.
    pub fn assemble_field(&self, values: &[Mat]) -> Result<Mat> {
        let nq = self.nodes.len();
        if values.len() != nq {
            return Err(Error::InvalidDimension(format!(
                "{} field values for {nq} quadrature nodes",
                values.len()
            )));
        }
        let n = self.n;
        let d2 = 2 * n;
        let orders = 2 * self.m + 1;
        // moments[(a·2n + b)·orders + p]
        let mut cm = vec![0.0; d2 * d2 * orders];
        let mut sm = vec![0.0; d2 * d2 * orders];
        for (q, mq) in values.iter().enumerate() {
            if mq.nrows() != d2 || mq.ncols() != d2 {
                return Err(Error::InvalidDimension("field value has wrong size".into()));
            }
            let w = self.weights[q];
            for a in 0..d2 {
                for b in 0..d2 {
                    let v = w * mq[(a, b)];
                    if !v.is_finite() {
                        return Err(Error::NumericalFailure(format!("non-finite field at s = {}", self.nodes[q])));
                    }
                    let base = (a * d2 + b) * orders;
                    for p in 0..orders {
                        cm[base + p] += v * self.cos_tab[p * nq + q];
                        sm[base + p] += v * self.sin_tab[p * nq + q];
                    }
                }
            }
        }
        let c = |a: usize, b: usize, p: i64| cm[(a * d2 + b) * orders + p.unsigned_abs() as usize];
        let s = |a: usize, b: usize, p: i64| p.signum() as f64 * sm[(a * d2 + b) * orders + p.unsigned_abs() as usize];
        let dim = self.dim();
        let mut out = Mat::zeros(dim, dim);
        for l in self.modes() {
            for k in self.modes() {
                let (dm, sp) = (l - k, l + k);
                for i in 0..n {
                    for ii in 0..n {
                        let (xi, yi, xii, yii) = (i, n + i, ii, n + ii);
                        let e = 0.5 * (c(xi, xii, dm) - c(xi, xii, sp))
                            - 0.5 * (s(xi, yii, sp) + s(xi, yii, dm))
                            - 0.5 * (s(yi, xii, sp) - s(yi, xii, dm))
                            + 0.5 * (c(yi, yii, dm) + c(yi, yii, sp));
                        out[(self.index(l, i), self.index(k, ii))] = e;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `⟨B̂u, v⟩ = ∫₀ʲ (B̂(s)u, v) ds` for a coefficient given in normal time.
    pub fn assemble_bhat<F>(&self, bhat: F) -> Result<Mat>
    where
        F: Fn(f64) -> Mat,
    {
        let values: Vec<Mat> = self.nodes.iter().map(|&s| bhat(s)).collect();
        self.assemble_field(&values)
    }

    /// `z(s_q)` at every quadrature node.
    pub fn synthesize(&self, c: &Vector) -> Vec<Vector> {
        let n = self.n;
        (0..self.nodes.len())
            .map(|q| {
                let mut z = Vector::zeros(2 * n);
                for l in self.modes() {
                    let (sn, cs) = (self.sin_at(l, q), self.cos_at(l, q));
                    for i in 0..n {
                        let y = c[self.index(l, i)];
                        z[i] -= sn * y;
                        z[n + i] += cs * y;
                    }
                }
                z
            })
            .collect()
    }

    /// `∫₀ʲ Φᵀv(s) ds` for values `v_q` at the quadrature nodes.
    pub fn project_field(&self, values: &[Vector]) -> Vector {
        let n = self.n;
        let mut out = Vector::zeros(self.dim());
        for (q, v) in values.iter().enumerate() {
            let w = self.weights[q];
            for l in self.modes() {
                let (sn, cs) = (self.sin_at(l, q), self.cos_at(l, q));
                for i in 0..n {
                    out[self.index(l, i)] += w * (cs * v[n + i] - sn * v[i]);
                }
            }
        }
        out
    }

    /// Orthogonal projection of a trajectory onto `X_m`:
    /// `y_l = (1/j)∫₀ʲ (e^{(lπ/j)Js}(0; e_i), z(s)) ds`.
    pub fn project_trajectory<F>(&self, z: F) -> Result<FourierVector>
    where
        F: Fn(f64) -> Vector,
    {
        let values: Vec<Vector> = self.nodes.iter().map(|&s| z(s)).collect();
        let c = self.project_field(&values) / self.j as f64;
        FourierVector::from_vector(self.n, self.m, self.j, &c)
    }

    pub fn vector(&self, c: &Vector) -> Result<FourierVector> {
        FourierVector::from_vector(self.n, self.m, self.j, c)
    }

    /// Integral of a scalar function of the node index.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(usize) -> f64,
    {
        self.weights.iter().enumerate().map(|(q, w)| w * f(q)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn a_signs_on_positive_and_negative_modes() {
        for j in [1, 3] {
            let sp = GalerkinSpace::new(1, 4, j).unwrap();
            let a = sp.assemble_a();
            let g = sp.gram();
            assert_eq!(linalg::symmetry_defect(&a), 0.0);
            for l in [-3i64, -1, 1, 2] {
                let mut c = Vector::zeros(sp.dim());
                c[sp.index(l, 0)] = 0.7;
                let z = sp.vector(&c).unwrap();
                let quad = c.dot(&(&a * &c));
                let expect = l.signum() as f64 * PI / j as f64 * z.norm().powi(2);
                assert!((quad - expect).abs() < 1e-12);
                assert!((z.norm().powi(2) - c.dot(&c.component_mul(&g))).abs() < 1e-12);
            }
            let mut c0 = Vector::zeros(sp.dim());
            c0[sp.index(0, 0)] = 1.0;
            assert_eq!((&a * c0).norm(), 0.0);
        }
    }

    #[test]
    fn scalar_bhat_is_diagonal() {
        let sp = GalerkinSpace::new(2, 5, 2).unwrap();
        let c = 1.7;
        let b = sp.assemble_bhat(|_| Mat::identity(4, 4) * c).unwrap();
        let expect = Mat::identity(sp.dim(), sp.dim()) * (c * 2.0);
        assert!(linalg::max_abs(&(b - expect)) < 1e-12);
        let zero = sp.assemble_bhat(|_| Mat::zeros(4, 4)).unwrap();
        assert_eq!(linalg::max_abs(&zero), 0.0);
    }

    #[test]
    fn moment_assembly_matches_direct_quadrature() {
        let sp = GalerkinSpace::new(2, 3, 2).unwrap();
        let field = |s: f64| {
            let mut m = Mat::from_fn(4, 4, |a, b| ((a + 2 * b) as f64 * 0.3 + s).sin() + ((b + 2 * a) as f64 * 0.3 + s).sin());
            m[(0, 0)] += (PI * s).cos();
            m
        };
        let fast = sp.assemble_bhat(field).unwrap();
        assert!(linalg::symmetry_defect(&fast) < 1e-12);
        let dim = sp.dim();
        let mut direct = Mat::zeros(dim, dim);
        for (q, &s) in sp.nodes().iter().enumerate() {
            let mq = field(s);
            let mut phi = Mat::zeros(4, dim);
            for l in -3i64..=3 {
                let a = l as f64 * PI * s / 2.0;
                for i in 0..2 {
                    phi[(i, sp.index(l, i))] = -a.sin();
                    phi[(2 + i, sp.index(l, i))] = a.cos();
                }
            }
            direct += phi.transpose() * mq * &phi * sp.weights()[q];
        }
        assert!(linalg::max_abs(&(fast - direct)) < 1e-12);
    }

    #[test]
    fn rejects_coarse_quadrature() {
        assert!(matches!(GalerkinSpace::with_panels(1, 8, 1, 20), Err(Error::Config(_))));
    }

    #[test]
    fn trajectory_examples() {
        let mut z = FourierVector::zeros(1, 3, 1);
        z.coeffs[3] = 0.4;
        for s in [0.0, 0.3, 1.0] {
            let v = z.eval(s);
            assert_eq!(v[0], 0.0);
            assert!((v[1] - 0.4).abs() < 1e-15);
        }
        let mut z = FourierVector::zeros(1, 3, 1);
        z.coeffs[4] = 1.0;
        for s in [0.0, 0.25, 0.5, 1.0] {
            let v = z.eval(s);
            assert!((v[0] + (PI * s).sin()).abs() < 1e-15);
            assert!((v[1] - (PI * s).cos()).abs() < 1e-15);
        }
        assert!(z.eval(0.0)[0].abs() < 1e-15 && z.eval(1.0)[0].abs() < 1e-14);
        assert!(z.trajectory(&[0.5, 1.5]).is_err());
    }

    #[test]
    fn projection_round_trip() {
        let sp = GalerkinSpace::new(2, 6, 3).unwrap();
        let c = Vector::from_fn(sp.dim(), |k, _| ((k * 7 % 11) as f64 - 5.0) / 9.0);
        let z = sp.vector(&c).unwrap();
        let back = sp.project_trajectory(|s| z.eval(s)).unwrap();
        assert!((back.as_vector() - &c).amax() < 1e-10);
        // synthesis at nodes agrees with pointwise evaluation
        let nodes = sp.synthesize(&c);
        for q in [0, 17, sp.nodes().len() - 1] {
            assert!((&nodes[q] - z.eval(sp.nodes()[q])).amax() < 1e-13);
        }
    }

    #[test]
    fn series_is_brake_symmetric() {
        let sp = GalerkinSpace::new(1, 4, 2).unwrap();
        let c = Vector::from_fn(sp.dim(), |k, _| (k as f64 * 0.37).sin());
        let z = sp.vector(&c).unwrap();
        for s in [0.1, 0.9, 1.7] {
            let a = z.eval(-s);
            let b = z.eval(s);
            assert!((a[0] + b[0]).abs() < 1e-13 && (a[1] - b[1]).abs() < 1e-13);
            let fd = (z.eval(s + 1e-6) - z.eval(s - 1e-6)) / 2e-6;
            assert!((fd - z.derivative(s)).amax() < 1e-7);
        }
    }
}

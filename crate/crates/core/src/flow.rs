//! Linear Hamiltonian systems `ẏ = J·B(t)·y`: coefficient paths, their
//! fundamental solutions, and the iteration paths of a brake-symmetric flow.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::symplectic::{self, brake_n, standard_j, symplectic_inverse};

/// Tolerance used when checking symmetry of coefficient samples.
pub const COEFFICIENT_SYMMETRY_TOL: f64 = 1e-10;

/// Default number of integration steps per unit time.
pub const DEFAULT_STEPS_PER_UNIT: usize = 1024;

/// `B(t) = Σ_p cos(p·ω·t)·C_p + sin(p·ω·t)·S_p` with symmetric `C_p, S_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    pub frequency: f64,
    pub cos: Vec<Mat>,
    pub sin: Vec<Mat>,
}

impl TrigPolynomial {
    pub fn eval(&self, t: f64) -> Mat {
        let dim = self
            .cos
            .first()
            .or(self.sin.first())
            .map(|m| m.nrows())
            .unwrap_or(0);
        let mut out = Mat::zeros(dim, dim);
        for (p, c) in self.cos.iter().enumerate() {
            out += c * (p as f64 * self.frequency * t).cos();
        }
        for (p, s) in self.sin.iter().enumerate() {
            out += s * (p as f64 * self.frequency * t).sin();
        }
        out
    }
}

/// Structural properties claimed for, or verified on, a coefficient path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientFlags {
    /// `B(t + 2) = B(t)`.
    pub two_periodic: bool,
    /// `B(1 + t)·N = N·B(1 − t)`.
    pub brake_symmetric: bool,
    /// `B(t) > 0` for all `t`, when known.
    pub positive_definite: Option<bool>,
}

type Evaluator = Arc<dyn Fn(f64) -> Mat + Send + Sync>;

/// A continuous symmetric `2n×2n` coefficient `t ↦ B(t)`.
#[derive(Clone)]
pub struct CoefficientPath {
    n: usize,
    eval: Evaluator,
    label: String,
    flags: CoefficientFlags,
}

impl fmt::Debug for CoefficientPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientPath")
            .field("n", &self.n)
            .field("label", &self.label)
            .field("flags", &self.flags)
            .finish()
    }
}

fn check_square_even(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "coefficient must be 2n×2n, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

fn check_symmetric(m: &Mat) -> Result<()> {
    if !linalg::is_finite(m) {
        return Err(Error::NumericalFailure("non-finite coefficient".into()));
    }
    let d = linalg::symmetry_defect(m);
    if d > COEFFICIENT_SYMMETRY_TOL * linalg::max_abs(m).max(1.0) {
        return Err(Error::InvalidCoefficient(format!(
            "coefficient is not symmetric (defect {d:.3e})"
        )));
    }
    Ok(())
}

impl CoefficientPath {
    /// Wraps an arbitrary evaluator. Flags start out unset.
    pub fn from_fn<F>(n: usize, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Mat + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        let probe = f(0.0);
        if check_square_even(&probe)? != n {
            return Err(Error::InvalidDimension(format!(
                "evaluator returns {}×{}, expected {}×{}",
                probe.nrows(),
                probe.ncols(),
                2 * n,
                2 * n
            )));
        }
        Ok(Self {
            n,
            eval: Arc::new(f),
            label: label.into(),
            flags: CoefficientFlags::default(),
        })
    }

    pub fn constant(b: Mat) -> Result<Self> {
        let n = check_square_even(&b)?;
        check_symmetric(&b)?;
        // a constant symmetric B commutes with N iff its off-diagonal blocks vanish
        let nn = brake_n(n)?;
        let commutes = linalg::max_abs(&(&b * &nn - &nn * &b)) <= COEFFICIENT_SYMMETRY_TOL;
        let pd = linalg::sym_eigenvalues(&b)[0] > 0.0;
        let mut path = Self::from_fn(n, "constant", move |_| b.clone())?;
        path.flags = CoefficientFlags {
            two_periodic: true,
            brake_symmetric: commutes,
            positive_definite: Some(pd),
        };
        Ok(path)
    }

    /// `B ≡ c·I_{2n}`.
    pub fn scalar(n: usize, c: f64) -> Result<Self> {
        let mut p = Self::constant(Mat::identity(2 * n, 2 * n) * c)?;
        p.label = format!("{c}·I");
        Ok(p)
    }

    pub fn trig(poly: TrigPolynomial) -> Result<Self> {
        let first = poly
            .cos
            .first()
            .or(poly.sin.first())
            .ok_or_else(|| Error::InvalidCoefficient("empty trigonometric polynomial".into()))?;
        let n = check_square_even(first)?;
        for m in poly.cos.iter().chain(poly.sin.iter()) {
            if m.nrows() != 2 * n || m.ncols() != 2 * n {
                return Err(Error::InvalidDimension(
                    "trigonometric coefficients differ in size".into(),
                ));
            }
            check_symmetric(m)?;
        }
        Self::from_fn(n, "trigonometric", move |t| poly.eval(t))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn flags(&self) -> CoefficientFlags {
        self.flags
    }

    /// Declares structural flags without checking them; use
    /// [`check_brake_symmetry`] to verify.
    pub fn with_flags(mut self, flags: CoefficientFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn eval(&self, t: f64) -> Mat {
        (self.eval)(t)
    }

    /// Checked evaluation: symmetric and finite.
    pub fn eval_checked(&self, t: f64) -> Result<Mat> {
        let b = self.eval(t);
        if b.nrows() != 2 * self.n || b.ncols() != 2 * self.n {
            return Err(Error::InvalidDimension("coefficient changed size".into()));
        }
        check_symmetric(&b)?;
        Ok(b)
    }

    /// `B + ε·I`. Brake symmetry and periodicity are preserved.
    pub fn shifted(&self, eps: f64) -> Self {
        let inner = self.eval.clone();
        let dim = 2 * self.n;
        let mut flags = self.flags;
        flags.positive_definite = None;
        Self {
            n: self.n,
            eval: Arc::new(move |t| inner(t) + Mat::identity(dim, dim) * eps),
            label: format!("{}{:+e}·I", self.label, eps),
            flags,
        }
    }

    /// `c·B`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        let mut flags = self.flags;
        if c <= 0.0 {
            flags.positive_definite = None;
        }
        Self {
            n: self.n,
            eval: Arc::new(move |t| inner(t) * c),
            label: format!("{c}·({})", self.label),
            flags,
        }
    }
}

/// Result of sampling the two brake-symmetry identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub period_defect: f64,
    pub brake_defect: f64,
    pub tol: f64,
    pub two_periodic: bool,
    pub brake_symmetric: bool,
}

/// Samples `B(t+2) = B(t)` and `B(1+t)N = NB(1−t)` on a uniform grid of
/// `[0, 2]` and updates the path's flags to match.
pub fn check_brake_symmetry(b: &mut CoefficientPath, samples: usize) -> Result<SymmetryReport> {
    let samples = samples.max(8);
    let nn = brake_n(b.n())?;
    let tol = 1e-10;
    let mut period_defect = 0.0_f64;
    let mut brake_defect = 0.0_f64;
    for i in 0..samples {
        let t = 2.0 * i as f64 / samples as f64;
        let bt = b.eval(t);
        let scale = linalg::max_abs(&bt).max(1.0);
        period_defect = period_defect.max(linalg::max_abs(&(b.eval(t + 2.0) - &bt)) / scale);
        let lhs = b.eval(1.0 + t) * &nn;
        let rhs = &nn * b.eval(1.0 - t);
        brake_defect = brake_defect.max(linalg::max_abs(&(lhs - rhs)) / scale);
    }
    let report = SymmetryReport {
        period_defect,
        brake_defect,
        tol,
        two_periodic: period_defect <= tol,
        brake_symmetric: brake_defect <= tol,
    };
    b.flags.two_periodic = report.two_periodic;
    b.flags.brake_symmetric = report.brake_symmetric;
    Ok(report)
}

/// A sampled symplectic path `t ↦ γ(t)` with `γ(t₀) = I`.
#[derive(Debug, Clone)]
pub struct SymplecticPath {
    n: usize,
    grid: Vec<f64>,
    values: Vec<Mat>,
}

impl SymplecticPath {
    pub fn new(grid: Vec<f64>, values: Vec<Mat>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidDimension(
                "a path needs at least two nodes and one value per node".into(),
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidDimension("grid must be strictly increasing".into()));
        }
        let dim = values[0].nrows();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidDimension("path values must be 2n×2n".into()));
        }
        if linalg::max_abs(&(&values[0] - Mat::identity(dim, dim))) > 1e-12 {
            return Err(Error::InvalidDimension("path must start at the identity".into()));
        }
        for v in &values {
            if v.nrows() != dim || v.ncols() != dim {
                return Err(Error::InvalidDimension("path values change size".into()));
            }
            let scale = linalg::max_abs(v).max(1.0).powi(2);
            if symplectic::symplectic_defect(v)? > 1e-8 * scale {
                return Err(Error::NumericalFailure("path value is not symplectic".into()));
            }
        }
        Ok(Self {
            n: dim / 2,
            grid,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Mat] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.grid[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.grid.last().expect("nonempty")
    }

    pub fn endpoint(&self) -> &Mat {
        self.values.last().expect("nonempty")
    }

    /// Value at a node whose time equals `t` up to `1e-9`, if any.
    pub fn node_value(&self, t: f64) -> Option<&Mat> {
        let i = self.grid.partition_point(|&s| s < t - 1e-9);
        (i < self.grid.len() && (self.grid[i] - t).abs() <= 1e-9).then(|| &self.values[i])
    }

    /// Value at arbitrary `t`, interpolating between nodes along the
    /// one-parameter subgroup `exp(s·log(γ_{i+1}γ_i⁻¹))·γ_i`, which stays
    /// on `Sp(2n)`.
    pub fn at(&self, t: f64) -> Result<Mat> {
        let t0 = self.start_time();
        let t1 = self.end_time();
        if t < t0 - 1e-12 || t > t1 + 1e-12 {
            return Err(Error::DomainMismatch(format!(
                "t = {t} outside [{t0}, {t1}]"
            )));
        }
        let i = self.grid.partition_point(|&s| s <= t).clamp(1, self.grid.len() - 1) - 1;
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let s = ((t - a) / (b - a)).clamp(0.0, 1.0);
        if s == 0.0 {
            return Ok(self.values[i].clone());
        }
        if s == 1.0 {
            return Ok(self.values[i + 1].clone());
        }
        let step = &self.values[i + 1] * symplectic_inverse(&self.values[i]);
        let log = linalg::logm(&step)?;
        Ok((log * s).exp() * &self.values[i])
    }

    /// `P⁻¹·γ(t)·P` at every node, for orthogonal symplectic `P`.
    pub fn conjugated(&self, p: &Mat) -> Self {
        let pt = p.transpose();
        Self {
            n: self.n,
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| &pt * v * p).collect(),
        }
    }

    /// The sub-path on the nodes with `t ≤ t_end`; `t_end` must be a node.
    pub fn truncated(&self, t_end: f64) -> Result<Self> {
        let count = self.grid.partition_point(|&s| s <= t_end + 1e-9);
        if count < 2 || (self.grid[count - 1] - t_end).abs() > 1e-9 {
            return Err(Error::DomainMismatch(format!("{t_end} is not a grid node")));
        }
        Ok(Self {
            n: self.n,
            grid: self.grid[..count].to_vec(),
            values: self.values[..count].to_vec(),
        })
    }
}

/// Gauss nodes of the two-stage fourth-order Magnus step.
const MAGNUS_C1: f64 = 0.5 - 0.288_675_134_594_812_9;
const MAGNUS_C2: f64 = 0.5 + 0.288_675_134_594_812_9;
const SQRT3_OVER_12: f64 = 0.144_337_567_297_406_44;

/// Transfer matrix of one fourth-order Magnus step from `t` to `t + h`.
fn magnus_step(b: &CoefficientPath, j: &Mat, t: f64, h: f64) -> Result<Mat> {
    let a1 = j * b.eval_checked(t + MAGNUS_C1 * h)?;
    let a2 = j * b.eval_checked(t + MAGNUS_C2 * h)?;
    let comm = &a1 * &a2 - &a2 * &a1;
    let omega = (&a1 + &a2) * (0.5 * h) - comm * (SQRT3_OVER_12 * h * h);
    let e = omega.exp();
    if !linalg::is_finite(&e) {
        return Err(Error::NumericalFailure("non-finite transfer matrix".into()));
    }
    Ok(e)
}

/// Fundamental solution of `ẏ = J·B(t)·y` on `[0, τ]` with `steps` uniform
/// Magnus steps. Each step is the exponential of a Hamiltonian matrix, so
/// nodes are symplectic to rounding without projection.
pub fn fundamental_solution(b: &CoefficientPath, tau: f64, steps: usize) -> Result<SymplecticPath> {
    if steps < 16 {
        return Err(Error::InvalidDimension("at least 16 steps are required".into()));
    }
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::DomainMismatch(format!("invalid interval length {tau}")));
    }
    let n = b.n();
    let j = standard_j(n)?;
    let h = tau / steps as f64;
    let mut grid = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut current = Mat::identity(2 * n, 2 * n);
    grid.push(0.0);
    values.push(current.clone());
    for k in 0..steps {
        let t = k as f64 * h;
        current = magnus_step(b, &j, t, h)? * &current;
        grid.push(if k + 1 == steps { tau } else { (k + 1) as f64 * h });
        values.push(current.clone());
    }
    Ok(SymplecticPath { n, grid, values })
}

/// Fundamental solution on `[0, τ]` at the default resolution of
/// [`DEFAULT_STEPS_PER_UNIT`] steps per unit time.
pub fn fundamental_solution_default(b: &CoefficientPath, tau: f64) -> Result<SymplecticPath> {
    let steps = ((tau * DEFAULT_STEPS_PER_UNIT as f64).ceil() as usize).max(16);
    fundamental_solution(b, tau, steps)
}

/// The `k`-th iteration path of `γ|_{[0,1]}` on `[0, k]`.
///
/// With `γ(2) = N·γ(1)⁻¹·N·γ(1)`, the path is `γ(t − 2i)·γ(2)^i` on
/// `[2i, 2i+1]` and `N·γ(2i+2−t)·γ(1)⁻¹·N·γ(1)·γ(2)^i` on `[2i+1, 2i+2]`.
/// For a brake-symmetric coefficient it coincides with the fundamental
/// solution on `[0, k]`. Odd segments reuse the nodes of `γ` in reverse.
pub fn iterate_path(gamma1: &SymplecticPath, k: usize) -> Result<SymplecticPath> {
    if k == 0 {
        return Err(Error::DomainMismatch("iteration count must be positive".into()));
    }
    if gamma1.start_time().abs() > 1e-12 || (gamma1.end_time() - 1.0).abs() > 1e-12 {
        return Err(Error::DomainMismatch(format!(
            "base path must live on [0, 1], got [{}, {}]",
            gamma1.start_time(),
            gamma1.end_time()
        )));
    }
    if k == 1 {
        return Ok(gamma1.clone());
    }
    let n = gamma1.n();
    let nn = brake_n(n)?;
    let g1 = gamma1.endpoint().clone();
    let g1_inv = symplectic_inverse(&g1);
    // γ(1)⁻¹·N·γ(1)
    let reflect_tail = &g1_inv * &nn * &g1;
    let g2 = &nn * &reflect_tail;
    let mut grid = vec![0.0];
    let mut values = vec![Mat::identity(2 * n, 2 * n)];
    let mut power = Mat::identity(2 * n, 2 * n);
    for seg in 0..k {
        let base = seg as f64;
        if seg % 2 == 0 {
            for (t, v) in gamma1.grid.iter().zip(&gamma1.values).skip(1) {
                grid.push(base + t);
                values.push(v * &power);
            }
        } else {
            let tail = &reflect_tail * &power;
            let count = gamma1.grid.len();
            for idx in (0..count - 1).rev() {
                let s = gamma1.grid[idx];
                grid.push(base + 1.0 - s);
                values.push(&nn * &gamma1.values[idx] * &tail);
            }
            power = &g2 * &power;
            // pin the junction to the exact power of γ(2)
            *values.last_mut().expect("nonempty") = power.clone();
        }
    }
    Ok(SymplecticPath { n, grid, values })
}

/// `γ(2) = N·γ(1)⁻¹·N·γ(1)` from the endpoint `γ(1)` of a brake-symmetric
/// flow.
pub fn doubled_endpoint(gamma1_end: &Mat) -> Result<Mat> {
    let nn = brake_n(gamma1_end.nrows() / 2)?;
    Ok(&nn * symplectic_inverse(gamma1_end) * &nn * gamma1_end)
}

/// `exp(θ·J)`.
pub fn rotation(n: usize, theta: f64) -> Result<Mat> {
    Ok((standard_j(n)? * theta).exp())
}

/// Closed-form fundamental solution of `B ≡ c·I`: `γ(t) = exp(c·t·J)`.
pub fn scalar_flow(n: usize, c: f64, t: f64) -> Result<Mat> {
    rotation(n, c * t)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use super::*;
    use approx::assert_abs_diff_eq;

    fn brake_example() -> CoefficientPath {
        // diagonal blocks commute with N; off-diagonal blocks multiply sin(πt)
        CoefficientPath::from_fn(1, "example", |t| {
            let d = Mat::from_row_slice(2, 2, &[1.0 + 0.5 * (PI * t).cos(), 0.0, 0.0, 0.7]);
            let o = Mat::from_row_slice(2, 2, &[0.0, 0.6, 0.6, 0.0]);
            d + o * (PI * t).sin()
        })
        .unwrap()
    }

    #[test]
    fn zero_field_is_identity() {
        let b = CoefficientPath::scalar(2, 0.0).unwrap();
        let g = fundamental_solution(&b, 1.0, 64).unwrap();
        for v in g.values() {
            assert_abs_diff_eq!(v.clone(), Mat::identity(4, 4), epsilon = 1e-15);
        }
    }

    #[test]
    fn identity_field_is_rotation() {
        for n in [1, 2] {
            let b = CoefficientPath::scalar(n, 1.0).unwrap();
            let g = fundamental_solution(&b, 1.0, 256).unwrap();
            for (t, v) in g.grid().iter().zip(g.values()) {
                let exact = scalar_flow(n, 1.0, *t).unwrap();
                assert!(linalg::max_abs(&(v - exact)) <= 1e-10);
            }
            assert_eq!(g.len(), 257);
        }
    }

    #[test]
    fn too_few_steps_rejected() {
        let b = CoefficientPath::scalar(1, 1.0).unwrap();
        assert!(fundamental_solution(&b, 1.0, 8).is_err());
    }

    #[test]
    fn asymmetric_coefficient_rejected() {
        let b = CoefficientPath::from_fn(1, "bad", |_| {
            Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])
        })
        .unwrap();
        assert!(matches!(
            fundamental_solution(&b, 1.0, 16),
            Err(Error::InvalidCoefficient(_))
        ));
    }

    #[test]
    fn fourth_order_convergence() {
        let b = brake_example();
        let reference = fundamental_solution(&b, 1.0, 4096).unwrap();
        let err = |steps| {
            let g = fundamental_solution(&b, 1.0, steps).unwrap();
            linalg::max_abs(&(g.endpoint() - reference.endpoint()))
        };
        let ratio = err(16) / err(32);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn symmetry_checks() {
        let mut c = CoefficientPath::scalar(1, 3.0).unwrap();
        let r = check_brake_symmetry(&mut c, 16).unwrap();
        assert_eq!((r.period_defect, r.brake_defect), (0.0, 0.0));

        let mut cosine = CoefficientPath::from_fn(1, "cos", |t| {
            Mat::identity(2, 2) * (2.0 + (PI * t).cos())
        })
        .unwrap();
        let r = check_brake_symmetry(&mut cosine, 64).unwrap();
        assert!(r.period_defect <= 1e-14 && r.brake_defect <= 1e-14);
        assert!(cosine.flags().brake_symmetric);

        let mut mixing = CoefficientPath::constant(Mat::from_row_slice(
            2,
            2,
            &[1.0, 0.5, 0.5, 1.0],
        ))
        .unwrap();
        let r = check_brake_symmetry(&mut mixing, 16).unwrap();
        assert!(r.brake_defect > 0.1);
        assert!(!mixing.flags().brake_symmetric);

        let mut ex = brake_example();
        assert!(check_brake_symmetry(&mut ex, 32).unwrap().brake_symmetric);
    }

    #[test]
    fn flow_reflection_identities() {
        let b = brake_example();
        let g = fundamental_solution(&b, 4.0, 4096).unwrap();
        let nn = brake_n(1).unwrap();
        let g1 = g.node_value(1.0).unwrap().clone();
        let g2 = g.node_value(2.0).unwrap().clone();
        let tail = symplectic_inverse(&g1) * &nn * &g1;
        for i in 0..=8 {
            let t = i as f64 / 8.0;
            let lhs = g.node_value(1.0 + t).unwrap();
            let rhs = &nn * g.node_value(1.0 - t).unwrap() * &tail;
            assert!(linalg::max_abs(&(lhs - rhs)) <= 1e-8);
            let lhs = g.node_value(2.0 + t).unwrap();
            let rhs = g.node_value(t).unwrap() * &g2;
            assert!(linalg::max_abs(&(lhs - rhs)) <= 1e-8);
        }
    }

    #[test]
    fn iterate_matches_direct_integration() {
        let b = brake_example();
        let g1 = fundamental_solution(&b, 1.0, 1024).unwrap();
        for k in [2, 5] {
            let it = iterate_path(&g1, k).unwrap();
            let direct = fundamental_solution(&b, k as f64, 1024 * k).unwrap();
            assert_eq!(it.len(), direct.len());
            for ((ta, a), (tb, bv)) in it
                .grid()
                .iter()
                .zip(it.values())
                .zip(direct.grid().iter().zip(direct.values()))
            {
                assert!((ta - tb).abs() < 1e-9);
                assert!(linalg::max_abs(&(a - bv)) <= 1e-7);
            }
        }
        assert_eq!(iterate_path(&g1, 1).unwrap().len(), g1.len());
    }

    #[test]
    fn iterate_rejects_wrong_domain() {
        let b = brake_example();
        let g = fundamental_solution(&b, 2.0, 64).unwrap();
        assert!(matches!(iterate_path(&g, 2), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn interpolation_between_nodes() {
        let b = CoefficientPath::scalar(1, 1.3).unwrap();
        let g = fundamental_solution(&b, 1.0, 16).unwrap();
        let mid = g.at(0.53).unwrap();
        assert_abs_diff_eq!(mid, scalar_flow(1, 1.3, 0.53).unwrap(), epsilon = 1e-10);
        assert!(g.at(1.5).is_err());
    }
}

//! Constant matrices of the symplectic group and the factorizations used to
//! close a symplectic path inside the stratum `det V ≠ 0`.
//!
//! Coordinates are `z = (x; y)` with `x, y ∈ ℝⁿ`, so `L₀ = {0} ⊕ ℝⁿ` is the
//! span of the last `n` basis vectors and `L₁ = ℝⁿ ⊕ {0}` the span of the
//! first `n`.

use nalgebra::linalg::Schur;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Default tolerance on `‖MᵀJM − J‖_max`.
pub const DEFAULT_SYMPLECTIC_TOL: f64 = 1e-10;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    Ok(())
}

fn half_dim(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidDimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "expected an even dimension, got {}",
            m.nrows()
        )));
    }
    Ok(m.nrows() / 2)
}

/// `J = [[0, −Iₙ], [Iₙ, 0]]`.
pub fn standard_j(n: usize) -> Result<Mat> {
    check_n(n)?;
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    Ok(j)
}

/// The brake reflection `N = diag(−Iₙ, Iₙ)`.
pub fn brake_n(n: usize) -> Result<Mat> {
    check_n(n)?;
    let mut d = Mat::identity(2 * n, 2 * n);
    for i in 0..n {
        d[(i, i)] = -1.0;
    }
    Ok(d)
}

/// `Jₙ = diag(−1, 1, …, 1)`.
pub fn j_n(n: usize) -> Result<Mat> {
    check_n(n)?;
    let mut d = Mat::identity(n, n);
    d[(0, 0)] = -1.0;
    Ok(d)
}

fn middle_block(v: &Mat) -> Result<Mat> {
    let n = v.nrows();
    let vinv_t = v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NearSingular("V block is not invertible".into()))?
        .transpose();
    Ok(linalg::from_blocks(
        &Mat::zeros(n, n),
        v,
        &(-vinv_t),
        &Mat::zeros(n, n),
    ))
}

/// `M₊ = [[0, Iₙ], [−Iₙ, 0]]`.
pub fn endpoint_m_plus(n: usize) -> Result<SymplecticMatrix> {
    check_n(n)?;
    SymplecticMatrix::new(middle_block(&Mat::identity(n, n))?)
}

/// `M₋ = [[0, Jₙ], [−Jₙ, 0]]`.
pub fn endpoint_m_minus(n: usize) -> Result<SymplecticMatrix> {
    SymplecticMatrix::new(middle_block(&j_n(n)?)?)
}

/// `‖MᵀJM − J‖_max`.
pub fn symplectic_defect(m: &Mat) -> Result<f64> {
    let n = half_dim(m)?;
    let j = standard_j(n)?;
    Ok(linalg::max_abs(&(m.transpose() * &j * m - j)))
}

pub fn is_symplectic(m: &Mat, tol: f64) -> Result<bool> {
    Ok(symplectic_defect(m)? <= tol)
}

/// Pulls a nearly symplectic matrix back onto `Sp(2n)`.
///
/// Each pass maps `M ↦ ½·M·(3I − J⁻¹MᵀJM)`, which squares the defect.
pub fn resymplectify(m: &Mat) -> Mat {
    let n = m.nrows() / 2;
    let j = standard_j(n.max(1)).expect("n >= 1");
    let jinv = -&j;
    let id = Mat::identity(2 * n, 2 * n);
    let mut out = m.clone();
    for _ in 0..2 {
        let s = &jinv * out.transpose() * &j * &out;
        out = &out * (&id * 3.0 - s) * 0.5;
    }
    out
}

/// Inverse of a symplectic matrix, `M⁻¹ = J⁻¹MᵀJ`.
pub fn symplectic_inverse(m: &Mat) -> Mat {
    let n = m.nrows() / 2;
    let j = standard_j(n.max(1)).expect("n >= 1");
    -(&j * m.transpose() * &j)
}

/// A `2n×2n` matrix checked to lie on `Sp(2n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    m: Mat,
    n: usize,
}

impl SymplecticMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        Self::with_tolerance(m, DEFAULT_SYMPLECTIC_TOL)
    }

    pub fn with_tolerance(m: Mat, tol: f64) -> Result<Self> {
        let n = half_dim(&m)?;
        if !linalg::is_finite(&m) {
            return Err(Error::NumericalFailure("non-finite matrix entries".into()));
        }
        let defect = symplectic_defect(&m)?;
        // scale the tolerance with the size of the entries
        let scale = linalg::max_abs(&m).max(1.0).powi(2);
        if defect > tol * scale {
            return Err(Error::NumericalFailure(format!(
                "matrix is not symplectic (defect {defect:.3e})"
            )));
        }
        Ok(Self { m, n })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self {
            m: Mat::identity(2 * n, 2 * n),
            n,
        })
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn into_inner(self) -> Mat {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(S, V, T, U)` with `M = [[S, V], [T, U]]`.
    pub fn blocks(&self) -> (Mat, Mat, Mat, Mat) {
        linalg::blocks(&self.m)
    }

    pub fn v(&self) -> Mat {
        linalg::v_block(&self.m)
    }

    pub fn inverse(&self) -> Self {
        Self {
            m: symplectic_inverse(&self.m),
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameLabel {
    L0,
    L1,
    General,
}

/// An orthogonal symplectic `P` with `P·L₀ = L`.
#[derive(Debug, Clone)]
pub struct LagrangianFrame {
    p: SymplecticMatrix,
    label: FrameLabel,
}

impl LagrangianFrame {
    pub fn l0(n: usize) -> Result<Self> {
        Ok(Self {
            p: SymplecticMatrix::identity(n)?,
            label: FrameLabel::L0,
        })
    }

    /// `P = M₊`, which sends `(0; y)` to `(y; 0)`.
    pub fn l1(n: usize) -> Result<Self> {
        Ok(Self {
            p: endpoint_m_plus(n)?,
            label: FrameLabel::L1,
        })
    }

    pub fn general(p: Mat) -> Result<Self> {
        let p = SymplecticMatrix::new(p)?;
        let dim = 2 * p.n();
        let orth = linalg::max_abs(&(p.matrix().transpose() * p.matrix() - Mat::identity(dim, dim)));
        if orth > 1e-10 {
            return Err(Error::InvalidDimension(format!(
                "frame matrix is not orthogonal (defect {orth:.3e})"
            )));
        }
        Ok(Self {
            p,
            label: FrameLabel::General,
        })
    }

    pub fn p(&self) -> &SymplecticMatrix {
        &self.p
    }

    pub fn label(&self) -> FrameLabel {
        self.label
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    /// `P⁻¹ M P`.
    pub fn conjugate(&self, m: &Mat) -> Mat {
        self.p.matrix().transpose() * m * self.p.matrix()
    }
}

/// `Lower(X) = [[I, 0], [X, I]]`.
pub fn lower_unipotent(x: &Mat) -> Mat {
    let n = x.nrows();
    linalg::from_blocks(
        &Mat::identity(n, n),
        &Mat::zeros(n, n),
        x,
        &Mat::identity(n, n),
    )
}

/// The factors of `M = Lower(W) · [[0, V], [−V⁻ᵀ, 0]] · Lower(W')`.
#[derive(Debug, Clone)]
pub struct UnipotentFactors {
    pub w: Mat,
    pub v: Mat,
    pub w_prime: Mat,
}

impl UnipotentFactors {
    pub fn reconstruct(&self) -> Result<Mat> {
        Ok(lower_unipotent(&self.w) * middle_block(&self.v)? * lower_unipotent(&self.w_prime))
    }

    /// The same product with the unipotent factors scaled by `scale` and the
    /// middle block built from `v`.
    pub fn reassemble(&self, scale: f64, v: &Mat) -> Result<Mat> {
        Ok(lower_unipotent(&(&self.w * scale))
            * middle_block(v)?
            * lower_unipotent(&(&self.w_prime * scale)))
    }
}

fn singular_extremes(v: &Mat) -> (f64, f64) {
    let sv = v.clone().singular_values();
    let lo = sv.iter().fold(f64::INFINITY, |a, s| a.min(*s));
    let hi = sv.iter().fold(0.0_f64, |a, s| a.max(*s));
    (lo, hi)
}

/// Splits `M ∈ Sp(2n)` with invertible `V` block into two symmetric
/// unipotent factors around the middle block; `W = U V⁻¹`, `W' = V⁻¹ S`.
pub fn unipotent_factorization(m: &SymplecticMatrix) -> Result<UnipotentFactors> {
    let (s, v, _t, u) = m.blocks();
    let (lo, _) = singular_extremes(&v);
    if lo <= 1e-10 * linalg::max_abs(m.matrix()).max(1.0) {
        return Err(Error::DegenerateEndpoint(format!(
            "V block is singular (smallest singular value {lo:.3e})"
        )));
    }
    let vinv = v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateEndpoint("V block is not invertible".into()))?;
    let w = linalg::symmetrize(&(&u * &vinv));
    let w_prime = linalg::symmetrize(&(&vinv * &s));
    Ok(UnipotentFactors { w, v, w_prime })
}

/// Real logarithm of a special orthogonal matrix as a skew matrix `L`, with
/// `R = Z·exp(L)·Zᵀ` returned as `(Z, L)`.
fn rotation_log(r: &Mat) -> Result<(Mat, Mat)> {
    let dim = r.nrows();
    let (z, t) = Schur::new(r.clone()).unpack();
    let mut l = Mat::zeros(dim, dim);
    let mut minus_ones = Vec::new();
    let mut i = 0;
    while i < dim {
        if i + 1 < dim && t[(i + 1, i)].abs() > 1e-12 {
            let theta = t[(i + 1, i)].atan2(t[(i, i)]);
            l[(i, i + 1)] = -theta;
            l[(i + 1, i)] = theta;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                minus_ones.push(i);
            }
            i += 1;
        }
    }
    if minus_ones.len() % 2 != 0 {
        return Err(Error::NumericalFailure(
            "rotation has an odd number of -1 eigenvalues".into(),
        ));
    }
    for pair in minus_ones.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        l[(a, b)] = -std::f64::consts::PI;
        l[(b, a)] = std::f64::consts::PI;
    }
    let back = &z * l.clone().exp() * z.transpose();
    if linalg::max_abs(&(back - r)) > 1e-9 {
        return Err(Error::NumericalFailure(
            "real Schur form of the rotation is not block diagonal".into(),
        ));
    }
    Ok((z, l))
}

/// A path in `GL(n)` from `V` to `Iₙ` (if `det V > 0`) or to `Jₙ` (if
/// `det V < 0`) along which `det` keeps its sign.
///
/// With the polar decomposition `V = O·P`, the positive factor moves along
/// `P^{1−s}` and the orthogonal factor along a one-parameter subgroup within
/// its component of `O(n)`.
#[derive(Debug, Clone)]
pub struct GlPath {
    schur_basis: Mat,
    rotation_log: Mat,
    sym_basis: Mat,
    sym_values: Vec<f64>,
    reflect: Option<Mat>,
}

impl GlPath {
    pub fn new(v: &Mat) -> Result<Self> {
        let n = v.nrows();
        if n == 0 || v.ncols() != n {
            return Err(Error::InvalidDimension("V must be square and nonempty".into()));
        }
        let (lo, hi) = singular_extremes(v);
        if lo <= 1e-12 * hi.max(1.0) {
            return Err(Error::NearSingular(format!(
                "V is numerically singular (smallest singular value {lo:.3e})"
            )));
        }
        let svd = v.clone().svd(true, true);
        let u = svd.u.expect("requested");
        let vt = svd.v_t.expect("requested");
        let orth = &u * &vt;
        let sym_basis = vt.transpose();
        let sym_values: Vec<f64> = svd.singular_values.iter().copied().collect();
        let det_positive = v.determinant() > 0.0;
        let (reflect, rot) = if det_positive {
            (None, orth)
        } else {
            let jn = j_n(n)?;
            let rot = &orth * &jn;
            (Some(jn), rot)
        };
        let (schur_basis, rotation_log) = rotation_log(&rot)?;
        Ok(Self {
            schur_basis,
            rotation_log,
            sym_basis,
            sym_values,
            reflect,
        })
    }

    pub fn det_positive(&self) -> bool {
        self.reflect.is_none()
    }

    /// Endpoint at `s = 1`: `Iₙ` or `Jₙ`.
    pub fn target(&self) -> Mat {
        match &self.reflect {
            Some(jn) => jn.clone(),
            None => Mat::identity(self.sym_values.len(), self.sym_values.len()),
        }
    }

    /// The path at parameter `s ∈ [0, 1]`.
    pub fn at(&self, s: f64) -> Mat {
        let s = s.clamp(0.0, 1.0);
        let z = &self.schur_basis;
        let mut orth = z * (&self.rotation_log * (1.0 - s)).exp() * z.transpose();
        if let Some(jn) = &self.reflect {
            orth *= jn;
        }
        let w = &self.sym_basis;
        let diag = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
            self.sym_values.len(),
            self.sym_values.iter().map(|x| x.powf(1.0 - s)),
        ));
        let pos = w * diag * w.transpose();
        orth * pos
    }
}

/// Uniform samples `s = 0, 1/steps, …, 1` of [`GlPath`].
pub fn gl_path(v: &Mat, steps: usize) -> Result<Vec<Mat>> {
    let path = GlPath::new(v)?;
    let steps = steps.max(1);
    Ok((0..=steps)
        .map(|k| path.at(k as f64 / steps as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rot(theta: f64, n: usize) -> Mat {
        let j = standard_j(n).unwrap();
        (j * theta).exp()
    }

    #[test]
    fn j_blocks() {
        let j1 = standard_j(1).unwrap();
        assert_eq!(j1, Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        let j2 = standard_j(2).unwrap();
        assert_eq!(j2[(0, 2)], -1.0);
        assert_eq!(j2[(1, 3)], -1.0);
        assert_eq!(j2[(2, 0)], 1.0);
        assert_eq!(j2[(3, 1)], 1.0);
        assert_eq!(j2[(0, 3)], 0.0);
        let j3 = standard_j(3).unwrap();
        assert_eq!(&j3 * &j3, -Mat::identity(6, 6));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(standard_j(0), Err(Error::InvalidDimension(_))));
        assert!(brake_n(0).is_err());
        assert!(endpoint_m_plus(0).is_err());
    }

    #[test]
    fn brake_constants() {
        assert_eq!(brake_n(1).unwrap(), Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
        assert_eq!(
            endpoint_m_minus(1).unwrap().into_inner(),
            Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
        );
        let n2 = brake_n(2).unwrap();
        assert_eq!(&n2 * &n2, Mat::identity(4, 4));
        for n in 1..4 {
            let nn = brake_n(n).unwrap();
            let j = standard_j(n).unwrap();
            assert_eq!(&nn * &j, -(&j * &nn));
            assert!(is_symplectic(endpoint_m_plus(n).unwrap().matrix(), 1e-14).unwrap());
            assert!(is_symplectic(endpoint_m_minus(n).unwrap().matrix(), 1e-14).unwrap());
        }
    }

    #[test]
    fn symplectic_check() {
        assert!(is_symplectic(&Mat::identity(4, 4), 1e-12).unwrap());
        assert!(is_symplectic(endpoint_m_plus(2).unwrap().matrix(), 1e-12).unwrap());
        let d = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(!is_symplectic(&d, 1e-12).unwrap());
        assert!(matches!(
            is_symplectic(&Mat::identity(3, 3), 1e-12),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn factorization_of_m_plus_is_trivial() {
        let f = unipotent_factorization(&endpoint_m_plus(2).unwrap()).unwrap();
        assert_abs_diff_eq!(f.w, Mat::zeros(2, 2), epsilon = 1e-15);
        assert_abs_diff_eq!(f.w_prime, Mat::zeros(2, 2), epsilon = 1e-15);
        assert_abs_diff_eq!(f.v, Mat::identity(2, 2), epsilon = 1e-15);
    }

    #[test]
    fn factorization_of_quarter_rotation() {
        let m = SymplecticMatrix::new(rot(std::f64::consts::FRAC_PI_4, 1)).unwrap();
        let f = unipotent_factorization(&m).unwrap();
        assert_abs_diff_eq!(f.w[(0, 0)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.reconstruct().unwrap(), m.matrix().clone(), epsilon = 1e-12);
    }

    #[test]
    fn singular_v_is_degenerate() {
        let m = SymplecticMatrix::identity(2).unwrap();
        assert!(matches!(
            unipotent_factorization(&m),
            Err(Error::DegenerateEndpoint(_))
        ));
    }

    pub(crate) fn random_symplectic(rng: &mut ChaCha8Rng, n: usize) -> Mat {
        // product of exponentials of random Hamiltonian matrices
        let j = standard_j(n).unwrap();
        let mut m = Mat::identity(2 * n, 2 * n);
        for _ in 0..3 {
            let s = Mat::from_fn(2 * n, 2 * n, |_, _| rng.gen_range(-1.0..1.0));
            let s = linalg::symmetrize(&s);
            m = (&j * s).exp() * m;
        }
        m
    }

    #[test]
    fn factorization_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 50 {
            let n = 1 + done % 3;
            let m = random_symplectic(&mut rng, n);
            if linalg::v_block(&m).determinant().abs() < 1e-3 {
                continue;
            }
            let m = SymplecticMatrix::new(m).unwrap();
            let f = unipotent_factorization(&m).unwrap();
            assert!(linalg::symmetry_defect(&f.w) < 1e-9);
            let err = linalg::max_abs(&(f.reconstruct().unwrap() - m.matrix()));
            assert!(err <= 1e-9, "reconstruction error {err}");
            done += 1;
        }
    }

    #[test]
    fn gl_path_identity_is_constant() {
        let path = gl_path(&Mat::identity(3, 3), 10).unwrap();
        for p in path {
            assert_abs_diff_eq!(p, Mat::identity(3, 3), epsilon = 1e-12);
        }
    }

    #[test]
    fn gl_path_negative_determinant_ends_at_jn() {
        let v = Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let path = gl_path(&v, 32).unwrap();
        assert_abs_diff_eq!(path[0], v, epsilon = 1e-12);
        assert_abs_diff_eq!(path[32], j_n(2).unwrap(), epsilon = 1e-12);
        assert!(path.iter().all(|p| p.determinant() < 0.0));
    }

    #[test]
    fn gl_path_scalar_shrink() {
        let v = Mat::from_row_slice(1, 1, &[2.0]);
        let path = gl_path(&v, 16).unwrap();
        assert_abs_diff_eq!(path[16][(0, 0)], 1.0, epsilon = 1e-12);
        for w in path.windows(2) {
            assert!(w[0][(0, 0)] > 0.0);
            assert!(w[1][(0, 0)] <= w[0][(0, 0)] + 1e-15);
        }
    }

    #[test]
    fn gl_path_random_keeps_sign_and_is_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..40 {
            let n = 1 + trial % 3;
            let v = Mat::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
            if v.determinant().abs() < 1e-3 {
                continue;
            }
            let sign = v.determinant().signum();
            let coarse = gl_path(&v, 64).unwrap();
            let fine = gl_path(&v, 128).unwrap();
            assert_abs_diff_eq!(coarse[0], v, epsilon = 1e-10);
            let step = |p: &Vec<Mat>| {
                p.windows(2)
                    .map(|w| linalg::max_abs(&(&w[1] - &w[0])))
                    .fold(0.0, f64::max)
            };
            for p in coarse.iter().chain(fine.iter()) {
                assert_eq!(p.determinant().signum(), sign);
            }
            // step size halves with the step count
            assert!(step(&fine) <= 0.6 * step(&coarse) + 1e-12);
        }
    }

    #[test]
    fn gl_path_rejects_singular() {
        let v = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(gl_path(&v, 4), Err(Error::NearSingular(_))));
    }

    #[test]
    fn resymplectify_squares_defect() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_symplectic(&mut rng, 2);
        let noisy = &m + Mat::from_fn(4, 4, |_, _| rng.gen_range(-1e-6..1e-6));
        let before = symplectic_defect(&noisy).unwrap();
        let after = symplectic_defect(&resymplectify(&noisy)).unwrap();
        assert!(after < 1e-12 && after < before * 1e-3, "{before} -> {after}");
    }

    #[test]
    fn frames_map_l0() {
        let f = LagrangianFrame::l1(2).unwrap();
        let y = nalgebra::DVector::from_vec(vec![0.0, 0.0, 1.5, -2.0]);
        let img = f.p().matrix() * y;
        assert_eq!(img.as_slice(), &[1.5, -2.0, 0.0, 0.0]);
        assert!(LagrangianFrame::general(Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).is_err());
    }
}

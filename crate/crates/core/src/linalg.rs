//! Small dense linear-algebra helpers shared by the index and Galerkin code.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type CMat = DMatrix<Complex<f64>>;

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Spectral norm (largest singular value).
pub fn norm2(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s))
}

pub fn symmetry_defect(m: &Mat) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub fn is_finite(m: &Mat) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Symmetric part `(m + mᵀ)/2`.
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// The four `n×n` blocks `(S, V, T, U)` of a `2n×2n` matrix laid out as
/// `[[S, V], [T, U]]`.
pub fn blocks(m: &Mat) -> (Mat, Mat, Mat, Mat) {
    let n = m.nrows() / 2;
    (
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    )
}

pub fn from_blocks(s: &Mat, v: &Mat, t: &Mat, u: &Mat) -> Mat {
    let n = s.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(s);
    m.view_mut((0, n), (n, n)).copy_from(v);
    m.view_mut((n, 0), (n, n)).copy_from(t);
    m.view_mut((n, n), (n, n)).copy_from(u);
    m
}

/// Upper-right block `V` of a `2n×2n` matrix.
pub fn v_block(m: &Mat) -> Mat {
    let n = m.nrows() / 2;
    m.view((0, n), (n, n)).into_owned()
}

/// Lower-right block `U` of a `2n×2n` matrix.
pub fn u_block(m: &Mat) -> Mat {
    let n = m.nrows() / 2;
    m.view((n, n), (n, n)).into_owned()
}

/// `det(U + iV)` for the right column blocks of `m`.
pub fn det_u_plus_iv(m: &Mat) -> Complex<f64> {
    let n = m.nrows() / 2;
    let c = CMat::from_fn(n, n, |i, k| Complex::new(m[(n + i, n + k)], m[(i, n + k)]));
    c.determinant()
}

/// Singular values of the `V` block of the orthonormalised Lagrangian frame
/// `(V; U)`. These are scale free: a value near zero means the plane
/// `m·L₀` meets `L₀` nontrivially.
pub fn frame_v_singular_values(m: &Mat) -> Vec<f64> {
    let n = m.nrows() / 2;
    let frame = m.view((0, n), (2 * n, n)).into_owned();
    let qr = frame.qr();
    let q = qr.q();
    let qv = q.view((0, 0), (n, n)).into_owned();
    let mut sv: Vec<f64> = qv.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sv
}

/// Principal square root by the Denman–Beavers iteration.
fn sqrtm(a: &Mat) -> Result<Mat> {
    let dim = a.nrows();
    let mut y = a.clone();
    let mut z = Mat::identity(dim, dim);
    for _ in 0..60 {
        let yi = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("singular iterate in sqrtm".into()))?;
        let zi = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("singular iterate in sqrtm".into()))?;
        let y_next = (&y + zi) * 0.5;
        let z_next = (&z + yi) * 0.5;
        let delta = max_abs(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * max_abs(&y).max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::NumericalFailure("sqrtm did not converge".into()))
}

/// Matrix logarithm for matrices whose spectrum stays away from the closed
/// negative real axis. Inverse scaling and squaring followed by the Mercator
/// series.
pub fn logm(a: &Mat) -> Result<Mat> {
    let dim = a.nrows();
    let id = Mat::identity(dim, dim);
    let mut x = a.clone();
    let mut squarings = 0;
    while max_abs(&(&x - &id)) > 0.25 {
        if squarings >= 40 {
            return Err(Error::NumericalFailure(
                "logm: too many square roots".into(),
            ));
        }
        x = sqrtm(&x)?;
        squarings += 1;
    }
    let e = &x - &id;
    let mut term = e.clone();
    let mut sum = e.clone();
    for k in 2..200 {
        term = &term * &e;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let add = &term * (sign / k as f64);
        sum += &add;
        if max_abs(&add) < 1e-18 {
            break;
        }
    }
    Ok(sum * 2f64.powi(squarings))
}

/// Real symmetric eigenvalues in ascending order.
pub fn sym_eigenvalues(m: &Mat) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(symmetrize(m));
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let herm = (h + h.adjoint()).map(|z| z * 0.5);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Number of singular values of a complex matrix at or below `tol`.
pub fn complex_kernel_dim(m: &CMat, tol: f64) -> usize {
    m.clone()
        .singular_values()
        .iter()
        .filter(|s| **s <= tol)
        .count()
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn log_of_exp_round_trips() {
        let a = Mat::from_row_slice(3, 3, &[0.1, -0.4, 0.2, 0.3, 0.0, -0.7, 0.05, 0.2, -0.1]);
        let back = logm(&a.clone().exp()).unwrap();
        assert_abs_diff_eq!(back, a, epsilon = 1e-11);
    }

    #[test]
    fn log_handles_large_rotation() {
        let th = 2.5_f64;
        let r = Mat::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let l = logm(&r).unwrap();
        assert_abs_diff_eq!(l[(1, 0)], th, epsilon = 1e-10);
        assert_abs_diff_eq!(l[(0, 0)], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn hermitian_eigenvalues_of_2x2() {
        let mut h = CMat::zeros(2, 2);
        h[(0, 0)] = Complex::new(3.0, 0.0);
        h[(1, 1)] = Complex::new(-1.0, 0.0);
        h[(0, 1)] = Complex::new(0.0, 1.0);
        h[(1, 0)] = Complex::new(0.0, -1.0);
        let ev = hermitian_eigenvalues(&h);
        // eigenvalues of [[3, i], [-i, -1]]: 1 ± sqrt(5)
        assert_abs_diff_eq!(ev[0], 1.0 - 5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 1.0 + 5f64.sqrt(), epsilon = 1e-12);
    }
}

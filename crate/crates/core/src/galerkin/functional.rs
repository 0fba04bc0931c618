//! The action functional `φ(z) = ½⟨(A−B̂)z,z⟩ − ∫₀ʲ Ĥ_K(s,z(s)) ds` on `X_m`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GalerkinSpace;
use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianSpec, TruncationSpec};
use crate::linalg::{self, Mat, Vector};

/// Worst relative disagreement between analytic and central-difference
/// derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub points: usize,
    pub step: f64,
    pub max_gradient_error: f64,
    pub max_hessian_error: f64,
    pub tol: f64,
    pub pass: bool,
}

pub struct Functional<'a> {
    space: &'a GalerkinSpace,
    spec: &'a HamiltonianSpec,
    trunc: TruncationSpec,
    quadratic: Mat,
    gram: Vector,
}

impl<'a> Functional<'a> {
    pub fn new(space: &'a GalerkinSpace, spec: &'a HamiltonianSpec, trunc: TruncationSpec) -> Result<Self> {
        if spec.n != space.n() {
            return Err(Error::InvalidDimension(format!(
                "Hamiltonian on ℝ^{} but space on ℝ^{}",
                2 * spec.n,
                2 * space.n()
            )));
        }
        let bhat = space.assemble_bhat(|s| spec.normal_bhat(s))?;
        let quadratic = linalg::symmetrize(&(space.assemble_a() - bhat));
        Ok(Self { space, spec, trunc, quadratic, gram: space.gram() })
    }

    pub fn space(&self) -> &GalerkinSpace {
        self.space
    }

    pub fn truncation(&self) -> &TruncationSpec {
        &self.trunc
    }

    /// `A − B̂` in the coefficient basis.
    pub fn quadratic_part(&self) -> &Mat {
        &self.quadratic
    }

    pub fn gram(&self) -> &Vector {
        &self.gram
    }

    fn check(values: impl Iterator<Item = f64>) -> Result<()> {
        if values.into_iter().all(f64::is_finite) {
            Ok(())
        } else {
            Err(Error::NumericalFailure("non-finite Hamiltonian evaluation".into()))
        }
    }

    pub fn value(&self, c: &Vector) -> Result<f64> {
        let zs = self.space.synthesize(c);
        let nodes = self.space.nodes();
        let h = self.space.integrate(|q| self.trunc.value(self.spec, nodes[q], &zs[q]));
        let v = 0.5 * c.dot(&(&self.quadratic * c)) - h;
        Self::check(std::iter::once(v))?;
        Ok(v)
    }

    /// Coefficient gradient `(A−B̂)c − ∫Φᵀ∇Ĥ_K`.
    pub fn gradient(&self, c: &Vector) -> Result<Vector> {
        let zs = self.space.synthesize(c);
        let nodes = self.space.nodes();
        let grads: Vec<Vector> = zs
            .iter()
            .zip(nodes)
            .map(|(z, &s)| self.trunc.gradient(self.spec, s, z))
            .collect();
        let g = &self.quadratic * c - self.space.project_field(&grads);
        Self::check(g.iter().copied())?;
        Ok(g)
    }

    /// Coefficient Hessian `(A−B̂) − ∫ΦᵀĤ_K''Φ`.
    pub fn hessian(&self, c: &Vector) -> Result<Mat> {
        let zs = self.space.synthesize(c);
        let nodes = self.space.nodes();
        let hs: Vec<Mat> = zs
            .iter()
            .zip(nodes)
            .map(|(z, &s)| self.trunc.hessian(self.spec, s, z))
            .collect();
        let h = &self.quadratic - self.space.assemble_field(&hs)?;
        Self::check(h.iter().copied())?;
        Ok(linalg::symmetrize(&h))
    }

    /// Norm of a coefficient gradient in the dual of `X`.
    pub fn dual_norm(&self, g: &Vector) -> f64 {
        g.iter().zip(self.gram.iter()).map(|(x, w)| x * x / w).sum::<f64>().sqrt()
    }

    /// `X`-norm of a coefficient vector.
    pub fn norm(&self, c: &Vector) -> f64 {
        c.iter().zip(self.gram.iter()).map(|(x, w)| x * x * w).sum::<f64>().sqrt()
    }

    /// Eigenvalues of `G^{-1/2}HG^{-1/2}`, the Hessian as an operator on `X`.
    pub fn operator_spectrum(&self, h: &Mat) -> Vec<f64> {
        let d = h.nrows();
        let scale = Vector::from_fn(d, |k, _| 1.0 / self.gram[k].sqrt());
        let op = Mat::from_fn(d, d, |a, b| h[(a, b)] * scale[a] * scale[b]);
        linalg::sym_eigenvalues(&op)
    }

    /// Central-difference checks of the gradient and Hessian along random
    /// directions at `points` random low-amplitude states.
    pub fn fd_check<R: Rng>(&self, rng: &mut R, points: usize, h: f64, tol: f64) -> Result<FdReport> {
        let d = self.space.dim();
        let n = self.space.n();
        let mut max_g = 0.0_f64;
        let mut max_h = 0.0_f64;
        for _ in 0..points {
            let c = Vector::from_fn(d, |k, _| {
                let l = (k / n) as f64 - self.space.m() as f64;
                rng.gen_range(-0.3..0.3) / (1.0 + l.abs())
            });
            let dir = Vector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let dir = &dir / dir.norm();
            let g = self.gradient(&c)?;
            let hess = self.hessian(&c)?;
            let cp = &c + &dir * h;
            let cm = &c - &dir * h;
            let fd = (self.value(&cp)? - self.value(&cm)?) / (2.0 * h);
            let an = g.dot(&dir);
            let denom = an.abs().max(fd.abs()).max(1e-3 * g.norm()).max(1e-300);
            max_g = max_g.max((fd - an).abs() / denom);
            let fd_h = (self.gradient(&cp)? - self.gradient(&cm)?) / (2.0 * h);
            let an_h = &hess * &dir;
            let denom = an_h.norm().max(fd_h.norm()).max(1e-300);
            max_h = max_h.max((fd_h - an_h).norm() / denom);
        }
        Ok(FdReport {
            points,
            step: h,
            max_gradient_error: max_g,
            max_hessian_error: max_h,
            tol,
            pass: max_g <= tol && max_h <= tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::CoefficientPath;
    use crate::hamiltonian::{linear, quartic, truncate_hamiltonian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn origin_is_critical() {
        let spec = quartic(1, 2.0).unwrap();
        let tr = truncate_hamiltonian(&spec, 4.0, 1).unwrap();
        let sp = GalerkinSpace::new(1, 8, 1).unwrap();
        let f = Functional::new(&sp, &spec, tr).unwrap();
        let z = Vector::zeros(sp.dim());
        assert_eq!(f.value(&z).unwrap(), 0.0);
        assert_eq!(f.gradient(&z).unwrap().norm(), 0.0);
    }

    #[test]
    fn quadratic_case_is_exact() {
        let b = CoefficientPath::scalar(1, 0.4).unwrap();
        let spec = linear(b, 0.4, 2.0).unwrap();
        let tr = truncate_hamiltonian(&spec, 4.0, 2).unwrap();
        let sp = GalerkinSpace::new(1, 8, 2).unwrap();
        let f = Functional::new(&sp, &spec, tr).unwrap();
        let c = Vector::from_fn(sp.dim(), |k, _| (k as f64).cos());
        let q = f.quadratic_part();
        assert!((f.value(&c).unwrap() - 0.5 * c.dot(&(q * &c))).abs() < 1e-12);
        assert!(linalg::max_abs(&(f.hessian(&c).unwrap() - q)) < 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let spec = quartic(1, 2.0).unwrap();
        let tr = truncate_hamiltonian(&spec, 4.0, 1).unwrap();
        let sp = GalerkinSpace::new(1, 8, 1).unwrap();
        let f = Functional::new(&sp, &spec, tr).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rep = f.fd_check(&mut rng, 20, 1e-5, 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

//! The `ω`-index pair of a 2-periodic linear system as a relative Morse
//! index over twisted Fourier modes, and the `L₀`-index at `ω = √−1`
//! obtained from the doubled path.
//!
//! Functions with `z(t + 2) = ω·z(t)`, `ω = e^{iθ}`, are expanded in
//! `e^{iλ_k t}`, `λ_k = πk + θ/2`, `|k| ≤ m`. The Hermitian form
//! `∫₀² z*(−J ż) − z*B z dt` has the block matrix
//! `H[l, k] = 2λ_k(−iJ)δ_{lk} − b_{k−l}` with `b_p = ∫₀² e^{iπpt} B(t) dt`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, CoefficientPath, SymplecticPath};
use crate::index::{self, Boundary, IndexOptions, IndexPair};
use crate::linalg::{self, CMat, Mat};
use crate::symplectic::{standard_j, LagrangianFrame};

/// Default number of Fourier modes on each side of zero.
pub const DEFAULT_MODES: usize = 16;

/// Relative cutoff below which an eigenvalue counts as negative.
const NEGATIVE_TOL: f64 = 1e-7;

/// Size of the `εI` perturbation used to calibrate `ω ≠ 1`.
const CALIBRATION_EPS: f64 = 1e-3;

/// Unit-modulus multiplier `ω = e^{iθ}`, `θ ∈ (−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Omega {
    theta: f64,
}

impl Omega {
    pub fn from_angle(theta: f64) -> Self {
        let mut t = theta % (2.0 * PI);
        if t > PI {
            t -= 2.0 * PI;
        } else if t <= -PI {
            t += 2.0 * PI;
        }
        // snap roundoff near the branch points
        if (t - PI).abs() < 1e-14 || (t + PI).abs() < 1e-14 {
            t = PI;
        }
        if t.abs() < 1e-14 {
            t = 0.0;
        }
        Self { theta: t }
    }

    pub fn from_complex(z: Complex<f64>) -> Result<Self> {
        if (z.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDimension(format!(
                "|ω| must be 1, got {}",
                z.norm()
            )));
        }
        Ok(Self::from_angle(z.im.atan2(z.re)))
    }

    pub fn one() -> Self {
        Self { theta: 0.0 }
    }

    pub fn minus_one() -> Self {
        Self { theta: PI }
    }

    pub fn sqrt_minus_one() -> Self {
        Self { theta: PI / 2.0 }
    }

    /// `e^{2πi·p/q}`.
    pub fn root_of_unity(p: i64, q: i64) -> Self {
        Self::from_angle(2.0 * PI * p as f64 / q as f64)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_one(&self) -> bool {
        self.theta == 0.0
    }

    pub fn conj(&self) -> Self {
        Self::from_angle(-self.theta)
    }

    pub fn value(&self) -> Complex<f64> {
        Complex::new(self.theta.cos(), self.theta.sin())
    }

    pub fn boundary(&self) -> Boundary {
        let z = self.value();
        Boundary::Periodic { re: z.re, im: z.im }
    }
}

/// `dim_ℂ ker(γ(2) − ωI)`.
pub fn omega_nullity(gamma: &SymplecticPath, omega: Omega) -> Result<usize> {
    let m = gamma.node_value(2.0).ok_or_else(|| {
        Error::DomainMismatch(format!(
            "path must reach t = 2, ends at {}",
            gamma.end_time()
        ))
    })?;
    Ok(monodromy_nullity(m, omega))
}

/// `dim_ℂ ker(M − ωI)`.
pub fn monodromy_nullity(m: &Mat, omega: Omega) -> usize {
    let dim = m.nrows();
    let shifted = linalg::to_complex(m) - CMat::identity(dim, dim) * omega.value();
    let tol = 1e-8 * linalg::max_abs(m).max(1.0);
    linalg::complex_kernel_dim(&shifted, tol)
}

/// Fourier coefficients `b_p = ∫₀² e^{iπpt} B(t) dt` for `|p| ≤ p_max`.
struct FourierCoefficients {
    p_max: usize,
    coeffs: Vec<CMat>,
}

impl FourierCoefficients {
    fn new(b: &CoefficientPath, p_max: usize) -> Result<Self> {
        let dim = 2 * b.n();
        let samples = (4 * p_max + 64).max(256);
        let h = 2.0 / samples as f64;
        let values: Vec<Mat> = (0..samples)
            .map(|i| b.eval_checked(i as f64 * h))
            .collect::<Result<_>>()?;
        let mut coeffs = Vec::with_capacity(2 * p_max + 1);
        for p in -(p_max as i64)..=(p_max as i64) {
            let mut acc = CMat::zeros(dim, dim);
            for (i, v) in values.iter().enumerate() {
                let arg = PI * p as f64 * i as f64 * h;
                let w = Complex::new(arg.cos(), arg.sin()) * h;
                acc += v.map(|x| w * x);
            }
            coeffs.push(acc);
        }
        Ok(Self { p_max, coeffs })
    }

    fn get(&self, p: i64) -> &CMat {
        &self.coeffs[(p + self.p_max as i64) as usize]
    }
}

fn hermitian_form(
    n: usize,
    omega: Omega,
    m: usize,
    fourier: Option<&FourierCoefficients>,
) -> Result<CMat> {
    let dim = 2 * n;
    let modes = 2 * m + 1;
    let minus_i_j = linalg::to_complex(&standard_j(n)?).map(|z| z * Complex::new(0.0, -1.0));
    let mut h = CMat::zeros(dim * modes, dim * modes);
    for (row, l) in (-(m as i64)..=(m as i64)).enumerate() {
        for (col, k) in (-(m as i64)..=(m as i64)).enumerate() {
            let mut block = CMat::zeros(dim, dim);
            if row == col {
                let lambda = PI * k as f64 + omega.theta / 2.0;
                block += &minus_i_j * Complex::new(2.0 * lambda, 0.0);
            }
            if let Some(f) = fourier {
                block -= f.get(k - l);
            }
            h.view_mut((row * dim, col * dim), (dim, dim)).copy_from(&block);
        }
    }
    Ok(h)
}

fn negative_count(h: &CMat, scale: f64) -> usize {
    let tol = NEGATIVE_TOL * scale.max(1.0);
    linalg::hermitian_eigenvalues(h)
        .iter()
        .filter(|e| **e < -tol)
        .count()
}

/// Negative counts of the truncated form for `B` and for the zero
/// coefficient.
fn relative_counts(b: &CoefficientPath, omega: Omega, m: usize) -> Result<(usize, usize)> {
    let n = b.n();
    let fourier = FourierCoefficients::new(b, 2 * m)?;
    let scale = (0..16)
        .map(|i| linalg::max_abs(&b.eval(i as f64 / 8.0)))
        .fold(1.0_f64, f64::max);
    let with_b = negative_count(&hermitian_form(n, omega, m, Some(&fourier))?, scale);
    let reference = negative_count(&hermitian_form(n, omega, m, None)?, 1.0);
    Ok((with_b, reference))
}

/// Intermediate counts of a relative Morse index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelativeMorseData {
    pub negdim_b: usize,
    pub negdim_ref: usize,
    pub calibration_offset: i64,
    pub resolved_index: i64,
}

/// How the offset for `ω = 1` was pinned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitCalibration {
    pub anchor: String,
    pub l0: IndexPair,
    pub l1: IndexPair,
    pub negdim_b: usize,
    pub negdim_ref: usize,
    pub offset: i64,
}

/// Computes `ω`-indices with a fixed truncation and calibrated offsets.
#[derive(Debug, Clone)]
pub struct OmegaIndexer {
    n: usize,
    modes: usize,
    offset_one: i64,
    calibration: UnitCalibration,
}

impl OmegaIndexer {
    /// Pins `offset(1)` so that the anchor satisfies
    /// `i₁(γ²) = i_{L₀}(γ¹) + i_{L₁}(γ¹) + n`.
    pub fn calibrated(anchor: &CoefficientPath, modes: usize, opts: &IndexOptions) -> Result<Self> {
        if modes < 8 {
            return Err(Error::InvalidDimension("at least 8 Fourier modes are required".into()));
        }
        let n = anchor.n();
        let l0 = index::l0_index_with(anchor, 1.0, opts)?;
        let l1 = index::l_index_with(anchor, &LagrangianFrame::l1(n)?, 1.0, opts)?;
        let (negdim_b, negdim_ref) = stable_counts_at(anchor, Omega::one(), modes)?;
        let target = l0.index + l1.index + n as i64;
        let offset = target - (negdim_b as i64 - negdim_ref as i64);
        Ok(Self {
            n,
            modes,
            offset_one: offset,
            calibration: UnitCalibration {
                anchor: anchor.label().to_string(),
                l0,
                l1,
                negdim_b,
                negdim_ref,
                offset,
            },
        })
    }

    /// Indexer for dimension `n` calibrated once per process on a fixed
    /// brake-symmetric anchor.
    pub fn shared(n: usize) -> Result<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, OmegaIndexer>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(found) = cache.lock().expect("poisoned").get(&n) {
            return Ok(found.clone());
        }
        let made = Self::calibrated(&default_anchor(n)?, DEFAULT_MODES, &IndexOptions::default())?;
        cache
            .lock()
            .expect("poisoned")
            .entry(n)
            .or_insert(made.clone());
        Ok(made)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn unit_offset(&self) -> i64 {
        self.offset_one
    }

    pub fn calibration(&self) -> &UnitCalibration {
        &self.calibration
    }

    /// Offset for `ω ≠ 1`, fixed by `i_ω(εI) = 0` for small `ε > 0`.
    fn offset(&self, omega: Omega) -> Result<i64> {
        if omega.is_one() {
            return Ok(self.offset_one);
        }
        let eps = CoefficientPath::scalar(self.n, CALIBRATION_EPS)?;
        let (b, r) = relative_counts(&eps, omega, 8)?;
        Ok(-(b as i64 - r as i64))
    }

    pub fn omega_index(&self, b: &CoefficientPath, omega: Omega) -> Result<RelativeMorseData> {
        if b.n() != self.n {
            return Err(Error::InvalidDimension(format!(
                "indexer is for n = {}, coefficient has n = {}",
                self.n,
                b.n()
            )));
        }
        let (negdim_b, negdim_ref) = stable_counts_at(b, omega, self.modes)?;
        let offset = self.offset(omega)?;
        Ok(RelativeMorseData {
            negdim_b,
            negdim_ref,
            calibration_offset: offset,
            resolved_index: negdim_b as i64 - negdim_ref as i64 + offset,
        })
    }

    /// `(i_ω, ν_ω)` of the flow of `B` on `[0, 2]`; `gamma2` is that flow.
    pub fn omega_pair(
        &self,
        b: &CoefficientPath,
        gamma2: &SymplecticPath,
        omega: Omega,
    ) -> Result<IndexPair> {
        Ok(IndexPair {
            index: self.omega_index(b, omega)?.resolved_index,
            nullity: omega_nullity(gamma2, omega)?,
            boundary: omega.boundary(),
        })
    }
}

/// Relative counts at `m` and `2m`; they must agree.
fn stable_counts_at(b: &CoefficientPath, omega: Omega, modes: usize) -> Result<(usize, usize)> {
    let (b1, r1) = relative_counts(b, omega, modes)?;
    let (b2, r2) = relative_counts(b, omega, 2 * modes)?;
    let at_m = b1 as i64 - r1 as i64;
    let at_2m = b2 as i64 - r2 as i64;
    if at_m != at_2m {
        return Err(Error::UnstableTruncation {
            m: modes,
            at_m,
            at_2m,
        });
    }
    Ok((b1, r1))
}

/// The relative Morse index `negdim(A − B) − negdim(A) + offset(ω)` using
/// the shared calibration.
pub fn omega_index(b: &CoefficientPath, omega: Omega, modes: usize) -> Result<i64> {
    let shared = OmegaIndexer::shared(b.n())?;
    let indexer = if shared.modes == modes {
        shared
    } else {
        OmegaIndexer {
            modes,
            ..shared
        }
    };
    Ok(indexer.omega_index(b, omega)?.resolved_index)
}

/// A fixed brake-symmetric coefficient used to pin `offset(1)`.
pub fn default_anchor(n: usize) -> Result<CoefficientPath> {
    let dim = 2 * n;
    let path = CoefficientPath::from_fn(n, "anchor", move |t| {
        let mut b = Mat::zeros(dim, dim);
        for i in 0..dim {
            b[(i, i)] = 0.9 + 0.35 * i as f64 + 0.4 * (PI * t).cos();
        }
        // off-diagonal x/y coupling odd about t = 1
        for i in 0..n {
            b[(i, n + i)] = 0.3 * (PI * t).sin();
            b[(n + i, i)] = 0.3 * (PI * t).sin();
        }
        b
    })?;
    Ok(path.with_flags(flow::CoefficientFlags {
        two_periodic: true,
        brake_symmetric: true,
        positive_definite: None,
    }))
}

/// `i^{L₀}_{√−1}(γ¹) = i_{L₀}(γ²) − i_{L₀}(γ¹)` and likewise for the
/// nullity, with `γ²` the doubled path of `B` on `[0, 1]`.
pub fn l0_omega_index_sqrtminus1(b: &CoefficientPath, opts: &IndexOptions) -> Result<IndexPair> {
    let steps = opts.steps_for(1.0);
    let base = index::index_from_family(
        |eps| flow::fundamental_solution(&b.shifted(-eps), 1.0, steps),
        opts,
        Boundary::L0,
    )?;
    let doubled = index::index_from_family(
        |eps| flow::iterate_path(&flow::fundamental_solution(&b.shifted(-eps), 1.0, steps)?, 2),
        opts,
        Boundary::L0,
    )?;
    Ok(IndexPair {
        index: doubled.index - base.index,
        nullity: doubled.nullity - base.nullity,
        boundary: Omega::sqrt_minus_one().boundary(),
    })
}

//! Nonlinear Hamiltonians `H(t,z) = ½(B̂(t)z,z) + Ĥ(t,z)`, their structural
//! conditions, and the quartic truncation used by the variational search.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::CoefficientPath;
use crate::linalg::{self, Mat, Vector};
use crate::symplectic::brake_n;

/// The superquadratic part `Ĥ` with its first two derivatives in `z`.
pub trait Nonlinearity: Send + Sync + fmt::Debug {
    fn n(&self) -> usize;
    fn label(&self) -> String;
    fn value(&self, t: f64, z: &Vector) -> f64;
    fn gradient(&self, t: f64, z: &Vector) -> Vector;
    fn hessian(&self, t: f64, z: &Vector) -> Mat;
}

/// `Ĥ(t,z) = (a₀ + a₁cos(2πt/T))·|z|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPower {
    pub n: usize,
    pub a0: f64,
    pub a1: f64,
    pub period: f64,
    pub power: f64,
}

impl RadialPower {
    fn weight(&self, t: f64) -> f64 {
        self.a0 + self.a1 * (2.0 * PI * t / self.period).cos()
    }
}

impl Nonlinearity for RadialPower {
    fn n(&self) -> usize {
        self.n
    }

    fn label(&self) -> String {
        format!("({}+{}cos(2πt/{}))|z|^{}", self.a0, self.a1, self.period, self.power)
    }

    fn value(&self, t: f64, z: &Vector) -> f64 {
        self.weight(t) * z.norm_squared().powf(self.power / 2.0)
    }

    fn gradient(&self, t: f64, z: &Vector) -> Vector {
        let r2 = z.norm_squared();
        if r2 == 0.0 {
            return Vector::zeros(z.len());
        }
        z * (self.weight(t) * self.power * r2.powf(self.power / 2.0 - 1.0))
    }

    fn hessian(&self, t: f64, z: &Vector) -> Mat {
        let d = z.len();
        let p = self.power;
        let r2 = z.norm_squared();
        let w = self.weight(t);
        if r2 == 0.0 {
            return if p == 2.0 { Mat::identity(d, d) * (2.0 * w) } else { Mat::zeros(d, d) };
        }
        let mut h = Mat::identity(d, d) * (w * p * r2.powf(p / 2.0 - 1.0));
        if p != 2.0 {
            h += z * z.transpose() * (w * p * (p - 2.0) * r2.powf(p / 2.0 - 2.0));
        }
        h
    }
}

/// Verdict of one sampled structural condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Undecidable,
}

/// Worst sample of a condition audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub z: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub condition: String,
    pub verdict: Verdict,
    pub samples: usize,
    pub worst: Option<Witness>,
    pub note: String,
}

/// A Hamiltonian in physical time together with the constants of its
/// growth conditions.
#[derive(Clone)]
pub struct HamiltonianSpec {
    pub label: String,
    pub n: usize,
    pub period: f64,
    pub bhat: CoefficientPath,
    pub beta0: f64,
    pub hhat: Arc<dyn Nonlinearity>,
    pub theta: f64,
    pub r_bar: f64,
    pub condition_flags: Vec<ConditionVerdict>,
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSpec")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("period", &self.period)
            .field("bhat", &self.bhat.label())
            .field("beta0", &self.beta0)
            .field("hhat", &self.hhat)
            .field("theta", &self.theta)
            .field("r_bar", &self.r_bar)
            .finish()
    }
}

impl HamiltonianSpec {
    pub fn new(
        label: impl Into<String>,
        bhat: CoefficientPath,
        beta0: f64,
        hhat: Arc<dyn Nonlinearity>,
        theta: f64,
        r_bar: f64,
        period: f64,
    ) -> Result<Self> {
        let n = bhat.n();
        if hhat.n() != n {
            return Err(Error::InvalidDimension(format!(
                "B̂ acts on ℝ^{} but Ĥ on ℝ^{}",
                2 * n,
                2 * hhat.n()
            )));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::Config(format!("period must be positive, got {period}")));
        }
        if !(beta0 >= 0.0) {
            return Err(Error::Config(format!("β₀ must be nonnegative, got {beta0}")));
        }
        Ok(Self {
            label: label.into(),
            n,
            period,
            bhat,
            beta0,
            hhat,
            theta,
            r_bar,
            condition_flags: Vec::new(),
        })
    }

    /// Runs [`audit_conditions`] and stores the verdicts.
    pub fn audited(mut self, samples: usize) -> Self {
        self.condition_flags = audit_conditions(&self, samples);
        self
    }

    /// Half-period multipliers `j` allowed by `1 ≤ j < 2π/(β₀T)`; `β₀ = 0`
    /// places no upper bound.
    pub fn admits(&self, j: usize) -> bool {
        j >= 1 && (self.beta0 == 0.0 || (j as f64) * self.beta0 * self.period < 2.0 * PI)
    }

    fn half(&self) -> f64 {
        self.period / 2.0
    }

    /// Normal-form time `s ∈ [0, j]` to physical time.
    pub fn physical_time(&self, s: f64) -> f64 {
        self.half() * s
    }

    /// `(T/2)·B̂(Ts/2)`.
    pub fn normal_bhat(&self, s: f64) -> Mat {
        self.bhat.eval(self.physical_time(s)) * self.half()
    }

    /// `(T/2)·Ĥ(Ts/2, w)`.
    pub fn normal_value(&self, s: f64, w: &Vector) -> f64 {
        self.hhat.value(self.physical_time(s), w) * self.half()
    }

    pub fn normal_gradient(&self, s: f64, w: &Vector) -> Vector {
        self.hhat.gradient(self.physical_time(s), w) * self.half()
    }

    pub fn normal_hessian(&self, s: f64, w: &Vector) -> Mat {
        self.hhat.hessian(self.physical_time(s), w) * self.half()
    }

    /// `∇H = B̂z + ∇Ĥ` in physical time.
    pub fn full_gradient(&self, t: f64, z: &Vector) -> Vector {
        self.bhat.eval(t) * z + self.hhat.gradient(t, z)
    }

    /// `H'' = B̂ + Ĥ''` in physical time.
    pub fn full_hessian(&self, t: f64, z: &Vector) -> Mat {
        self.bhat.eval(t) + self.hhat.hessian(t, z)
    }
}

/// `Ĥ = (2+cos(2πt/T))|z|⁴`, `B̂ ≡ 0`.
pub fn quartic(n: usize, period: f64) -> Result<HamiltonianSpec> {
    let hhat = RadialPower { n, a0: 2.0, a1: 1.0, period, power: 4.0 };
    HamiltonianSpec::new(
        "QUARTIC",
        CoefficientPath::scalar(n, 0.0)?,
        0.0,
        Arc::new(hhat),
        0.25,
        1.0,
        period,
    )
}

/// The quartic `Ĥ` with `B̂(t) = (β₀/2)(1+cos(2πt/T))·I`.
pub fn quartic_b(n: usize, period: f64, beta0: f64) -> Result<HamiltonianSpec> {
    let hhat = RadialPower { n, a0: 2.0, a1: 1.0, period, power: 4.0 };
    let dim = 2 * n;
    let bhat = CoefficientPath::from_fn(n, format!("({beta0}/2)(1+cos(2πt/{period}))·I"), move |t| {
        Mat::identity(dim, dim) * (0.5 * beta0 * (1.0 + (2.0 * PI * t / period).cos()))
    })?;
    HamiltonianSpec::new("QUARTIC-B", bhat, beta0, Arc::new(hhat), 0.25, 1.0, period)
}

/// Linear system `H = ½(B̂z,z)` with `Ĥ ≡ 0`.
pub fn linear(bhat: CoefficientPath, beta0: f64, period: f64) -> Result<HamiltonianSpec> {
    let n = bhat.n();
    let hhat = RadialPower { n, a0: 0.0, a1: 0.0, period, power: 4.0 };
    HamiltonianSpec::new("LINEAR", bhat, beta0, Arc::new(hhat), 0.25, 1.0, period)
}

/// Smooth cutoff `χ` with its first two derivatives: `1` below `K`, `0`
/// above `K+1`, reversed quintic smoothstep in between.
pub fn cutoff(k: f64, rho: f64) -> (f64, f64, f64) {
    if rho <= k {
        return (1.0, 0.0, 0.0);
    }
    if rho >= k + 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = rho - k;
    let chi = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    let d1 = -30.0 * s * s * (1.0 - s) * (1.0 - s);
    let d2 = -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    (chi, d1, d2)
}

const SHELL_RADII: usize = 64;
const SHELL_DIRECTIONS: usize = 256;
const SHELL_TIMES: usize = 33;

/// Deterministic unit directions in `ℝ^{2n}`: an angle grid for `n = 1`,
/// coordinate axes plus seeded Gaussian samples otherwise.
pub fn sphere_directions(n: usize, count: usize, seed: u64) -> Vec<Vector> {
    let d = 2 * n;
    if n == 1 {
        return (0..count)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / count as f64;
                Vector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect();
    }
    let mut out = Vec::with_capacity(count + 2 * d);
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = Vector::zeros(d);
            e[i] = s;
            out.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count + 2 * d {
        let v = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let nv = v.norm();
        if nv > 1e-8 {
            out.push(v / nv);
        }
    }
    out
}

/// Truncation data for the normal-form Hamiltonian on `[0, j]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub k: f64,
    pub r_k: f64,
    pub theta_hat: f64,
}

impl TruncationSpec {
    pub fn chi(&self, rho: f64) -> f64 {
        cutoff(self.k, rho).0
    }

    /// `Ĥ_K = r|z|⁴ + χ(|z|)(Ĥ − r|z|⁴)` in normal time.
    pub fn value(&self, spec: &HamiltonianSpec, s: f64, w: &Vector) -> f64 {
        let rho = w.norm();
        let (chi, _, _) = cutoff(self.k, rho);
        if chi == 1.0 {
            return spec.normal_value(s, w);
        }
        let quartic = self.r_k * rho.powi(4);
        if chi == 0.0 {
            return quartic;
        }
        quartic + chi * (spec.normal_value(s, w) - quartic)
    }

    pub fn gradient(&self, spec: &HamiltonianSpec, s: f64, w: &Vector) -> Vector {
        let rho = w.norm();
        let (chi, d1, _) = cutoff(self.k, rho);
        if chi == 1.0 {
            return spec.normal_gradient(s, w);
        }
        let r2 = rho * rho;
        let grad_q = w * (4.0 * self.r_k * r2);
        if chi == 0.0 {
            return grad_q;
        }
        let g = spec.normal_value(s, w) - self.r_k * r2 * r2;
        let grad_g = spec.normal_gradient(s, w) - &grad_q;
        let u = w / rho;
        grad_q + u * (d1 * g) + grad_g * chi
    }

    pub fn hessian(&self, spec: &HamiltonianSpec, s: f64, w: &Vector) -> Mat {
        let rho = w.norm();
        let (chi, d1, d2) = cutoff(self.k, rho);
        if chi == 1.0 {
            return spec.normal_hessian(s, w);
        }
        let d = w.len();
        let r2 = rho * rho;
        let hess_q = (Mat::identity(d, d) * (4.0 * r2) + w * w.transpose() * 8.0) * self.r_k;
        if chi == 0.0 {
            return hess_q;
        }
        let g = spec.normal_value(s, w) - self.r_k * r2 * r2;
        let grad_g = spec.normal_gradient(s, w) - w * (4.0 * self.r_k * r2);
        let hess_g = spec.normal_hessian(s, w) - &hess_q;
        let u = w / rho;
        let uut = &u * u.transpose();
        let mixed = &u * grad_g.transpose() + &grad_g * u.transpose();
        let proj = Mat::identity(d, d) - &uut;
        hess_q + uut * (d2 * g) + mixed * d1 + proj * (d1 * g / rho) + hess_g * chi
    }
}

/// Builds the truncation at radius `K` for the normal form on `[0, j]`, with
/// `r_K` maximized over a deterministic shell grid.
pub fn truncate_hamiltonian(spec: &HamiltonianSpec, k: f64, j: usize) -> Result<TruncationSpec> {
    if !(k > 0.0) {
        return Err(Error::Config(format!("truncation radius must be positive, got {k}")));
    }
    let dirs = sphere_directions(spec.n, SHELL_DIRECTIONS * 4usize.pow(spec.n as u32 - 1), 0x5eed);
    // Ĥ is 2-periodic in normal time, so one period suffices
    let span = (j as f64).min(2.0);
    let mut r_k = 0.0_f64;
    for it in 0..SHELL_TIMES {
        let s = span * it as f64 / (SHELL_TIMES - 1) as f64;
        for ir in 0..SHELL_RADII {
            let rho = k + ir as f64 / (SHELL_RADII - 1) as f64;
            let rho4 = rho.powi(4);
            for u in &dirs {
                let v = spec.normal_value(s, &(u * rho));
                if !v.is_finite() {
                    return Err(Error::NumericalFailure(format!("Ĥ not finite at |z| = {rho}")));
                }
                r_k = r_k.max(v / rho4);
            }
        }
    }
    Ok(TruncationSpec { k, r_k, theta_hat: spec.theta.max(0.25) })
}

const AUDIT_TIMES: usize = 16;
const AUDIT_RADII: [f64; 7] = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0];
const AUDIT_TOL: f64 = 1e-10;

struct Worst {
    score: f64,
    witness: Option<Witness>,
}

impl Worst {
    fn new() -> Self {
        Self { score: f64::INFINITY, witness: None }
    }

    fn offer(&mut self, score: f64, t: f64, z: &Vector, value: f64) {
        if score < self.score {
            self.score = score;
            self.witness = Some(Witness { t, z: z.iter().copied().collect(), value });
        }
    }
}

fn verdict(condition: &str, pass: bool, samples: usize, worst: Worst, note: impl Into<String>) -> ConditionVerdict {
    ConditionVerdict {
        condition: condition.into(),
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        samples,
        worst: worst.witness,
        note: note.into(),
    }
}

/// Samples (H1)–(H8) on a deterministic time × ball grid with at least
/// `samples` points per condition. Each verdict carries the sample closest
/// to violating the condition.
pub fn audit_conditions(spec: &HamiltonianSpec, samples: usize) -> Vec<ConditionVerdict> {
    let samples = samples.max(1000);
    let n = spec.n;
    let per_time = samples.div_ceil(AUDIT_TIMES);
    let dirs = sphere_directions(n, per_time.div_ceil(AUDIT_RADII.len()), 0xa0d1);
    let nn = brake_n(n).expect("n ≥ 1");
    let tp = spec.period;
    let times: Vec<f64> = (0..AUDIT_TIMES).map(|i| tp * i as f64 / AUDIT_TIMES as f64).collect();
    let points: Vec<Vector> = AUDIT_RADII
        .iter()
        .flat_map(|&r| dirs.iter().map(move |u| u * r))
        .collect();
    let count = times.len() * points.len();
    let h = &spec.hhat;
    let mut out = Vec::with_capacity(8);

    let mut w1 = Worst::new();
    let mut w2 = Worst::new();
    let mut w3 = Worst::new();
    let mut w4 = Worst::new();
    for &t in &times {
        for z in &points {
            let v = h.value(t, z);
            let scale = v.abs().max(1.0);
            let d1 = (h.value(t + tp, z) - v).abs() / scale;
            w1.offer(-d1, t, z, d1);
            let d2 = (h.value(-t, &(&nn * z)) - v).abs() / scale;
            w2.offer(-d2, t, z, d2);
            let lmin = linalg::sym_eigenvalues(&h.hessian(t, z))[0];
            w3.offer(lmin / z.norm_squared(), t, z, lmin);
            w4.offer(v, t, z, v);
        }
    }
    let s1 = -w1.score;
    out.push(verdict("H1", s1 <= AUDIT_TOL, count, w1, format!("max relative defect {s1:.3e}")));
    let s2 = -w2.score;
    out.push(verdict("H2", s2 <= AUDIT_TOL, count, w2, format!("max relative defect {s2:.3e}")));
    let s3 = w3.score;
    out.push(verdict("H3", s3 > 0.0, count, w3, format!("min λ_min(Ĥ'')/|z|² = {s3:.3e}")));
    let s4 = w4.score;
    out.push(verdict("H4", s4 >= -AUDIT_TOL, count, w4, format!("min Ĥ = {s4:.3e}")));

    // (H5): sup Ĥ/|z|² along a shrinking sequence of radii
    let radii = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut ratios = Vec::with_capacity(radii.len());
    let mut w5 = Worst::new();
    for &r in &radii {
        let mut q = 0.0_f64;
        for &t in &times {
            for u in &dirs {
                let z = u * r;
                let v = h.value(t, &z) / (r * r);
                q = q.max(v.abs());
                w5.offer(-v.abs(), t, &z, v);
            }
        }
        ratios.push(q);
    }
    let first = ratios[0];
    let last = *ratios.last().unwrap();
    let monotone = ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300);
    let h5 = if first == 0.0 || (monotone && last <= 0.1 * first) {
        Verdict::Pass
    } else if last >= 0.5 * first {
        Verdict::Fail
    } else {
        Verdict::Undecidable
    };
    out.push(ConditionVerdict {
        condition: "H5".into(),
        verdict: h5,
        samples: radii.len() * times.len() * dirs.len(),
        worst: w5.witness,
        note: format!("sup Ĥ/|z|² at radii {radii:?}: {ratios:?}"),
    });

    // (H6): 0 < Ĥ/θ ≤ (z, ∇Ĥ) for |z| ≥ r̄
    let mut w6 = Worst::new();
    let theta_ok = spec.theta > 0.0 && spec.theta < 0.5;
    let mut h6_count = 0;
    for &t in &times {
        for factor in [1.0, 1.5, 2.0, 4.0, 8.0] {
            for u in &dirs {
                let z = u * (spec.r_bar * factor);
                let v = h.value(t, &z);
                let euler = z.dot(&h.gradient(t, &z));
                let slack = (euler - v / spec.theta) / euler.abs().max(1.0);
                let score = if v > 0.0 { slack } else { v.min(-f64::MIN_POSITIVE) };
                w6.offer(score, t, &z, score);
                h6_count += 1;
            }
        }
    }
    let s6 = w6.score;
    out.push(verdict(
        "H6",
        theta_ok && s6 >= -AUDIT_TOL,
        h6_count,
        w6,
        format!("θ = {}, r̄ = {}, min relative slack {s6:.3e}", spec.theta, spec.r_bar),
    ));

    // (H7), (H8) on B̂
    let mut w7 = Worst::new();
    let mut w8 = Worst::new();
    let zero = Vector::zeros(2 * n);
    let mut sym_ok = true;
    let b_times: Vec<f64> = (0..samples).map(|i| tp * i as f64 / samples as f64).collect();
    for &t in &b_times {
        let b = spec.bhat.eval(t);
        sym_ok &= linalg::symmetry_defect(&b) <= AUDIT_TOL * linalg::max_abs(&b).max(1.0);
        let lmin = linalg::sym_eigenvalues(&linalg::symmetrize(&b))[0];
        let bound_slack = spec.beta0 - linalg::norm2(&b);
        let score7 = lmin.min(bound_slack);
        w7.offer(score7, t, &zero, score7);
        let scale = linalg::max_abs(&b).max(1.0);
        let d = linalg::max_abs(&(spec.bhat.eval(t + tp) - &b))
            .max(linalg::max_abs(&(spec.bhat.eval(-t) - &b)))
            .max(linalg::max_abs(&(&b * &nn - &nn * &b)))
            / scale;
        w8.offer(-d, t, &zero, d);
    }
    let s7 = w7.score;
    out.push(verdict(
        "H7",
        sym_ok && s7 >= -AUDIT_TOL,
        b_times.len(),
        w7,
        format!("min(λ_min(B̂), β₀ − ‖B̂‖) = {s7:.3e}"),
    ));
    let s8 = -w8.score;
    out.push(verdict("H8", s8 <= AUDIT_TOL, b_times.len(), w8, format!("max relative defect {s8:.3e}")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec(v: &[f64]) -> Vector {
        Vector::from_vec(v.to_vec())
    }

    #[test]
    fn radial_power_derivatives_match_finite_differences() {
        let h = RadialPower { n: 2, a0: 2.0, a1: 1.0, period: 2.0, power: 4.0 };
        let z = vec(&[0.3, -0.2, 0.5, 0.1]);
        let t = 0.37;
        let g = h.gradient(t, &z);
        let hs = h.hessian(t, &z);
        let eps = 1e-6;
        for i in 0..4 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += eps;
            zm[i] -= eps;
            let fd = (h.value(t, &zp) - h.value(t, &zm)) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-8);
            let col = (h.gradient(t, &zp) - h.gradient(t, &zm)) / (2.0 * eps);
            for r in 0..4 {
                assert!((col[r] - hs[(r, i)]).abs() < 1e-7);
            }
        }
        // Euler identity for degree-4 homogeneity
        assert!((z.dot(&g) - 4.0 * h.value(t, &z)).abs() < 1e-14);
    }

    #[test]
    fn cutoff_shape() {
        let k = 4.0;
        assert_eq!(cutoff(k, 3.0), (1.0, 0.0, 0.0));
        assert_eq!(cutoff(k, 5.5), (0.0, 0.0, 0.0));
        let mut prev = 1.0;
        for i in 1..100 {
            let (c, d1, _) = cutoff(k, k + i as f64 / 100.0);
            assert!(c < prev && d1 < 0.0);
            prev = c;
        }
        let (c, _, _) = cutoff(k, k + 0.5);
        assert!((c - 0.5).abs() < 1e-15);
    }

    #[test]
    fn truncation_regions() {
        let spec = quartic(1, 2.0).unwrap();
        let tr = truncate_hamiltonian(&spec, 4.0, 1).unwrap();
        // (2 + cos)·|z|⁴ peaks at 3 on the shell
        assert!((tr.r_k - 3.0).abs() < 1e-12);
        assert_eq!(tr.theta_hat, 0.25);
        let inner = vec(&[1.2, -1.0]);
        assert_eq!(tr.value(&spec, 0.3, &inner), spec.normal_value(0.3, &inner));
        let outer = vec(&[0.0, 6.0]);
        assert!((tr.value(&spec, 0.3, &outer) - 3.0 * 6f64.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn pure_quartic_shell_ratio_is_one() {
        let spec = HamiltonianSpec::new(
            "|z|^4",
            CoefficientPath::scalar(1, 0.0).unwrap(),
            0.0,
            Arc::new(RadialPower { n: 1, a0: 1.0, a1: 0.0, period: 2.0, power: 4.0 }),
            0.25,
            1.0,
            2.0,
        )
        .unwrap();
        let tr = truncate_hamiltonian(&spec, 2.0, 1).unwrap();
        assert!((tr.r_k - 1.0).abs() < 1e-12);
        for rho in [1.0, 2.3, 2.7, 3.5] {
            let z = vec(&[0.6 * rho, 0.8 * rho]);
            assert!((tr.value(&spec, 0.1, &z) - rho.powi(4)).abs() < 1e-10 * rho.powi(4));
        }
    }

    #[test]
    fn truncated_derivatives_in_transition_shell() {
        let spec = quartic(1, 2.0).unwrap();
        let tr = truncate_hamiltonian(&spec, 1.0, 1).unwrap();
        let z = vec(&[1.1, 0.9]);
        let s = 0.7;
        let g = tr.gradient(&spec, s, &z);
        let hs = tr.hessian(&spec, s, &z);
        let eps = 1e-6;
        for i in 0..2 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += eps;
            zm[i] -= eps;
            let fd = (tr.value(&spec, s, &zp) - tr.value(&spec, s, &zm)) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-7 * g.norm());
            let col = (tr.gradient(&spec, s, &zp) - tr.gradient(&spec, s, &zm)) / (2.0 * eps);
            for r in 0..2 {
                assert!((col[r] - hs[(r, i)]).abs() < 1e-6 * hs.norm());
            }
        }
    }

    #[test]
    fn quartic_passes_audit() {
        let spec = quartic(1, 2.0).unwrap().audited(1000);
        for v in &spec.condition_flags {
            assert_eq!(v.verdict, Verdict::Pass, "{v:?}");
        }
        let spec = quartic_b(2, 3.0, 0.5).unwrap().audited(1000);
        for v in &spec.condition_flags {
            assert_eq!(v.verdict, Verdict::Pass, "{v:?}");
        }
    }

    #[test]
    fn audit_detects_violations() {
        let square = HamiltonianSpec::new(
            "|z|^2",
            CoefficientPath::scalar(1, 0.0).unwrap(),
            0.0,
            Arc::new(RadialPower { n: 1, a0: 1.0, a1: 0.0, period: 2.0, power: 2.0 }),
            0.25,
            1.0,
            2.0,
        )
        .unwrap();
        let report = audit_conditions(&square, 1000);
        assert_eq!(report[4].condition, "H5");
        assert_eq!(report[4].verdict, Verdict::Fail);

        let signed = HamiltonianSpec::new(
            "cos|z|^4",
            CoefficientPath::scalar(1, 0.0).unwrap(),
            0.0,
            Arc::new(RadialPower { n: 1, a0: 0.0, a1: 1.0, period: 2.0, power: 4.0 }),
            0.25,
            1.0,
            2.0,
        )
        .unwrap();
        let report = audit_conditions(&signed, 1000);
        assert_eq!(report[3].condition, "H4");
        assert_eq!(report[3].verdict, Verdict::Fail);
        let w = report[3].worst.as_ref().unwrap();
        assert!(w.value < 0.0);
    }

    #[test]
    fn admissibility_gate() {
        let spec = quartic_b(1, 2.0, 1.0).unwrap();
        assert!(spec.admits(1) && spec.admits(3));
        assert!(!spec.admits(4));
        assert!(quartic(1, 2.0).unwrap().admits(100));
    }
}

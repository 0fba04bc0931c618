//! Brake solutions from half-period critical points: reflection extension,
//! residual audits, linearized index pairs, distinctness of subharmonics,
//! and the index certificates that rule out iterated solutions.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, CoefficientFlags, CoefficientPath, SymmetryReport};
use crate::galerkin::{find_critical_points, CriticalPoint, FdReport, FourierVector, SolverOptions};
use crate::hamiltonian::HamiltonianSpec;
use crate::index::{self, IndexOptions, IndexPair};
use crate::linalg::{self, Vector};
use crate::periodic;
use crate::symplectic::{brake_n, standard_j, LagrangianFrame};

/// Time samples of a trajectory in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<Vector>,
}

impl SampledTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `sup |ż − J∇H(t,z)|` over the full grid.
    pub ode: f64,
    /// `sup |z̃(h+t) − Nz̃(h−t)|`, and the gap between the extension and the
    /// series continuation.
    pub brake_sym: f64,
    /// Largest first-`n` component of `z(0)` and `z(h)`.
    pub boundary: f64,
    /// `|z̃(2h) − z̃(0)|`.
    pub closure: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.ode.max(self.brake_sym).max(self.boundary).max(self.closure)
    }
}

fn l0_defect(z: &Vector, n: usize) -> f64 {
    z.rows(0, n).amax()
}

/// Extends a trajectory on `[0, h]` with endpoints in `L₀` to `[0, 2h]` by
/// `z̃(t) = Nz(2h − t)` on `(h, 2h]`. Returns the extension and the closure
/// gap `|z̃(2h) − z̃(0)|`.
pub fn extend_brake(half: &SampledTrajectory, tol: f64) -> Result<(SampledTrajectory, f64)> {
    let (Some(first), Some(last)) = (half.values.first(), half.values.last()) else {
        return Err(Error::InvalidDimension("empty trajectory".into()));
    };
    if half.times.len() != half.values.len() || half.times[0] != 0.0 {
        return Err(Error::DomainMismatch("half trajectory must start at t = 0".into()));
    }
    let n = first.len() / 2;
    let defect = l0_defect(first, n).max(l0_defect(last, n));
    if defect > tol {
        return Err(Error::BoundaryViolation(format!(
            "endpoint leaves L₀ by {defect:.3e} (tolerance {tol:.1e})"
        )));
    }
    let nn = brake_n(n)?;
    let h = *half.times.last().expect("nonempty");
    let mut times = half.times.clone();
    let mut values = half.values.clone();
    for k in (0..half.len() - 1).rev() {
        times.push(2.0 * h - half.times[k]);
        values.push(&nn * &half.values[k]);
    }
    let closure = (values.last().expect("nonempty") - &values[0]).norm();
    Ok((SampledTrajectory { times, values }, closure))
}

/// A `jT`-periodic brake solution built from a Galerkin critical point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BrakeSolution {
    pub label: String,
    pub j: usize,
    pub period: f64,
    pub series: FourierVector,
    pub critical_value: f64,
    pub grad_norm: f64,
    pub morse_index: usize,
    pub morse_nullity: usize,
    pub morse_window: bool,
    pub residuals: Residuals,
    pub index_pair: Option<IndexPair>,
    pub index_window: Option<bool>,
    #[serde(skip)]
    pub half: Option<SampledTrajectory>,
    #[serde(skip)]
    pub full: Option<SampledTrajectory>,
}

impl BrakeSolution {
    /// Samples the half trajectory on `[0, jT/2]` with `samples` intervals,
    /// extends it, and audits the residuals.
    pub fn from_critical_point(spec: &HamiltonianSpec, cp: &CriticalPoint, samples: usize, tol: f64) -> Result<Self> {
        let series = cp.z.clone();
        let j = series.j;
        let tp = spec.period;
        let h = j as f64 * tp / 2.0;
        let samples = samples.max(8);
        let times: Vec<f64> = (0..=samples).map(|k| h * k as f64 / samples as f64).collect();
        let values: Vec<Vector> = times.iter().map(|&t| series.eval(2.0 * t / tp)).collect();
        let half = SampledTrajectory { times, values };
        let (full, closure) = extend_brake(&half, tol)?;

        let n = spec.n;
        let nn = brake_n(n)?;
        let jm = standard_j(n)?;
        let mut ode = 0.0_f64;
        for (t, z) in full.times.iter().zip(&full.values) {
            let zdot = if *t <= h {
                series.derivative(2.0 * t / tp) * (2.0 / tp)
            } else {
                -(&nn * series.derivative(2.0 * (2.0 * h - t) / tp)) * (2.0 / tp)
            };
            ode = ode.max((zdot - &jm * spec.full_gradient(*t, z)).amax());
        }
        let mut brake_sym = 0.0_f64;
        for k in 0..=samples {
            let (a, b) = (&full.values[samples + k], &full.values[samples - k]);
            brake_sym = brake_sym.max((a - &nn * b).amax());
            brake_sym = brake_sym.max((a - series.eval(2.0 * full.times[samples + k] / tp)).amax());
        }
        let boundary = l0_defect(&full.values[0], n).max(l0_defect(&full.values[samples], n));
        Ok(Self {
            label: spec.label.clone(),
            j,
            period: tp,
            critical_value: cp.value,
            grad_norm: cp.grad_norm,
            morse_index: cp.morse_index,
            morse_nullity: cp.morse_nullity,
            morse_window: cp.window,
            residuals: Residuals { ode, brake_sym, boundary, closure },
            index_pair: None,
            index_window: None,
            half: Some(half),
            full: Some(full),
            series,
        })
    }

    /// `z̃(t)` for any physical time.
    pub fn eval(&self, t: f64) -> Vector {
        self.series.eval(2.0 * t / self.period)
    }

    /// `sup_t |z(t) − z(0)|` on the half period.
    pub fn oscillation(&self, samples: usize) -> f64 {
        let z0 = self.series.eval(0.0);
        let j = self.j as f64;
        (0..=samples)
            .map(|k| (self.series.eval(j * k as f64 / samples as f64) - &z0).norm())
            .fold(0.0, f64::max)
    }
}

/// `B(s) = (T/2)·H''(Ts/2, z(Ts/2))` in normal time, `2j`-periodic.
pub fn linearized_system(spec: &HamiltonianSpec, sol: &BrakeSolution) -> Result<CoefficientPath> {
    let spec_c = spec.clone();
    let series = sol.series.clone();
    let half = spec.period / 2.0;
    let path = CoefficientPath::from_fn(spec.n, format!("H''({}, j={})", sol.label, sol.j), move |s| {
        linalg::symmetrize(&(spec_c.full_hessian(half * s, &series.eval(s)) * half))
    })?;
    Ok(path.with_flags(CoefficientFlags { two_periodic: sol.j == 1, brake_symmetric: true, positive_definite: None }))
}

/// The linearized system reparametrized to `[0, 1]`: `u ↦ j·B(ju)`. It is
/// 2-periodic and brake-symmetric, with the same index pairs.
pub fn unit_linearization(spec: &HamiltonianSpec, sol: &BrakeSolution) -> Result<(CoefficientPath, SymmetryReport)> {
    let b = linearized_system(spec, sol)?;
    let j = sol.j as f64;
    let mut unit = CoefficientPath::from_fn(spec.n, format!("{} on [0,1]", b.label()), move |u| b.eval(j * u) * j)?;
    let report = flow::check_brake_symmetry(&mut unit, 256)?;
    Ok((unit, report))
}

/// `(i_{L₀}, ν_{L₀})` of the linearized system on `[0, j]` and whether
/// `i ≤ 1 ≤ i + ν`.
pub fn solution_index_pair(spec: &HamiltonianSpec, sol: &BrakeSolution, opts: &IndexOptions) -> Result<(IndexPair, bool)> {
    let b = linearized_system(spec, sol)?;
    let pair = index::l0_index_with(&b, sol.j as f64, opts)?;
    let window = pair.index <= 1 && 1 <= pair.index + pair.nullity as i64;
    Ok((pair, window))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistinctnessReport {
    pub pair: (usize, usize),
    /// Distance for each shift by `l·T/2`, `l = 0..2kj−1`.
    pub shift_distances: Vec<f64>,
    pub min_distance: f64,
    pub distinct: bool,
    pub tol: f64,
}

/// Compares `z_b` (multiplier `kj`) with every half-period shift of `z_a`
/// (multiplier `j`) in the sup norm over `[0, kjT]`.
pub fn distinctness(a: &BrakeSolution, b: &BrakeSolution, tol: f64, samples_per_half: usize) -> Result<DistinctnessReport> {
    if (a.period - b.period).abs() > 1e-12 * a.period {
        return Err(Error::DomainMismatch("solutions have different base periods".into()));
    }
    if !b.j.is_multiple_of(a.j) {
        return Err(Error::DomainMismatch(format!("multiplier {} is not a multiple of {}", b.j, a.j)));
    }
    let tp = a.period;
    let span = b.j as f64 * tp;
    let a_period = a.j as f64 * tp;
    let points = samples_per_half.max(8) * 2 * b.j;
    let grid: Vec<f64> = (0..=points).map(|k| span * k as f64 / points as f64).collect();
    let zb: Vec<Vector> = grid.iter().map(|&t| b.eval(t)).collect();
    let shifts = 2 * b.j;
    let shift_distances: Vec<f64> = (0..shifts)
        .into_par_iter()
        .map(|l| {
            let shift = l as f64 * tp / 2.0;
            grid.iter()
                .zip(&zb)
                .map(|(&t, z)| (z - a.eval((t + shift).rem_euclid(a_period))).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let min_distance = shift_distances.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DistinctnessReport { pair: (a.j, b.j), shift_distances, min_distance, distinct: min_distance > tol, tol })
}

/// Index terms of the iteration argument for a pair `(j, kj)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub i_l0: i64,
    pub nu_l0: usize,
    pub i_l1: i64,
    pub nu_l1: usize,
    /// `i^{L₀}_{√−1}` and its nullity; used for even `k`.
    pub i_sqrt_minus_one: i64,
    pub nu_sqrt_minus_one: usize,
    /// `i₁(z̃, 2) = i_{L₀} + i_{L₁} + n`.
    pub i_one_doubled: i64,
    /// Full chain right-hand side.
    pub chain_rhs: f64,
    /// Reduced right-hand side `i_{L₀} + (k−1)/2` or `i_{L₀} + (k/2 − 1)`.
    pub reduced_rhs: f64,
    /// Whether the reduced bound exceeds 1, so that an iterate of the base
    /// solution could not satisfy the index window.
    pub binds: bool,
    /// `i_{L₀}` of the base solution followed over `k` of its half periods.
    pub iterate_index: i64,
    pub iterate_nullity: usize,
    /// The index window of the `kj` solution.
    pub measured_index: Option<IndexPair>,
    /// Distinctness is guaranteed for this `k` (`k ≥ 5`).
    pub guaranteed: bool,
}

/// Evaluates the chains for `k` from the base solution's index data.
pub fn certificate(
    spec: &HamiltonianSpec,
    base: &BrakeSolution,
    k: usize,
    measured: Option<IndexPair>,
    opts: &IndexOptions,
) -> Result<Certificate> {
    let (unit, _) = unit_linearization(spec, base)?;
    let n = spec.n as i64;
    let p0 = index::l0_index_with(&unit, 1.0, opts)?;
    let p1 = index::l_index_with(&unit, &LagrangianFrame::l1(spec.n)?, 1.0, opts)?;
    let ps = periodic::l0_omega_index_sqrtminus1(&unit, opts)?;
    let iterate = index::l0_index_with(&unit, k as f64, opts)?;
    let sum = (p0.index + p1.index) as f64 + (p0.nullity + p1.nullity) as f64;
    let kf = k as f64;
    let (chain_rhs, reduced_rhs) = if k % 2 == 1 {
        (p0.index as f64 + (kf - 1.0) / 2.0 * sum, p0.index as f64 + (kf - 1.0) / 2.0)
    } else {
        (
            (p0.index + ps.index) as f64 + (kf / 2.0 - 1.0) * sum,
            p0.index as f64 + (kf / 2.0 - 1.0),
        )
    };
    Ok(Certificate {
        k,
        i_l0: p0.index,
        nu_l0: p0.nullity,
        i_l1: p1.index,
        nu_l1: p1.nullity,
        i_sqrt_minus_one: ps.index,
        nu_sqrt_minus_one: ps.nullity,
        i_one_doubled: p0.index + p1.index + n,
        chain_rhs,
        reduced_rhs,
        binds: reduced_rhs > 1.0,
        iterate_index: iterate.index,
        iterate_nullity: iterate.nullity,
        measured_index: measured,
        guaranteed: k >= 5,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub m: usize,
    pub solver: SolverOptions,
    pub index: IndexOptions,
    pub samples_per_half: usize,
    pub distinct_tol: f64,
    pub residual_tol: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            m: 32,
            solver: SolverOptions::default(),
            index: IndexOptions::default(),
            samples_per_half: 512,
            distinct_tol: 1e-4,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub j: usize,
    pub fd: FdReport,
    pub critical_points: usize,
    pub solution: Option<BrakeSolution>,
    pub symmetry: Option<SymmetryReport>,
    /// The index pair along the solution shifted by its period `jT` agrees.
    pub shift_invariant: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyRow {
    pub j: usize,
    pub k: usize,
    pub distinctness: Option<DistinctnessReport>,
    pub certificate: Option<Certificate>,
    /// `false` only when distinctness is guaranteed (`k ≥ 5`) and failed.
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyReport {
    pub label: String,
    pub m: usize,
    pub solutions: Vec<SolutionRecord>,
    pub rows: Vec<FamilyRow>,
    pub pass: bool,
}

fn solve_one(spec: &HamiltonianSpec, j: usize, opts: &PipelineOptions) -> SolutionRecord {
    let mut record = SolutionRecord {
        j,
        fd: FdReport { points: 0, step: 0.0, max_gradient_error: 0.0, max_hessian_error: 0.0, tol: 0.0, pass: false },
        critical_points: 0,
        solution: None,
        symmetry: None,
        shift_invariant: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        let rep = find_critical_points(spec, opts.m, j, &opts.solver)?;
        record.fd = rep.fd;
        record.critical_points = rep.points.len();
        let cp = rep
            .witness()
            .ok_or_else(|| Error::NoConvergence(format!("no nonconstant window point for j = {j}")))?;
        let mut sol = BrakeSolution::from_critical_point(spec, cp, opts.samples_per_half * j, opts.residual_tol)?;
        let (pair, window) = solution_index_pair(spec, &sol, &opts.index)?;
        sol.index_pair = Some(pair);
        sol.index_window = Some(window);
        let (_, sym) = unit_linearization(spec, &sol)?;
        record.symmetry = Some(sym);
        // the same solution read one full period later
        let b = linearized_system(spec, &sol)?;
        let shifted = shift_coefficient(&b, 2.0 * j as f64)?;
        let other = index::l0_index_with(&shifted, j as f64, &opts.index)?;
        record.shift_invariant = Some(other.index == pair.index && other.nullity == pair.nullity);
        record.solution = Some(sol);
        Ok(())
    })();
    if let Err(e) = result {
        record.error = Some(e.to_string());
    }
    record
}

/// Solves for every `j` and `kj`, then reports distinctness and the index
/// certificate for each pair. Requests outside `1 ≤ kj < 2π/(β₀T)` are
/// rejected before any work is done.
pub fn subharmonic_pipeline(
    spec: &HamiltonianSpec,
    j_list: &[usize],
    k_list: &[usize],
    opts: &PipelineOptions,
) -> Result<FamilyReport> {
    let mut needed: Vec<usize> = j_list
        .iter()
        .flat_map(|&j| std::iter::once(j).chain(k_list.iter().map(move |&k| k * j)))
        .collect();
    needed.sort_unstable();
    needed.dedup();
    if let Some(&bad) = needed.iter().find(|&&j| !spec.admits(j)) {
        return Err(Error::HypothesisViolation(format!(
            "multiplier {bad} violates 1 ≤ j < 2π/(β₀T) = {:.4}",
            2.0 * PI / (spec.beta0 * spec.period)
        )));
    }
    let solutions: Vec<SolutionRecord> = needed.par_iter().map(|&j| solve_one(spec, j, opts)).collect();
    let find = |j: usize| solutions.iter().find(|r| r.j == j).and_then(|r| r.solution.as_ref());
    let mut rows = Vec::new();
    for &j in j_list {
        for &k in k_list {
            let mut row = FamilyRow { j, k, distinctness: None, certificate: None, pass: true, note: String::new() };
            match (find(j), find(k * j)) {
                (Some(a), Some(b)) => {
                    let guaranteed = k >= 5;
                    match distinctness(a, b, opts.distinct_tol, opts.samples_per_half) {
                        Ok(d) => {
                            row.pass = !guaranteed || d.distinct;
                            row.distinctness = Some(d);
                        }
                        Err(e) => {
                            row.pass = !guaranteed;
                            row.note = e.to_string();
                        }
                    }
                    match certificate(spec, a, k, b.index_pair, &opts.index) {
                        Ok(c) => row.certificate = Some(c),
                        Err(e) => row.note = format!("certificate: {e}"),
                    }
                    if !guaranteed {
                        row.note = "no guarantee for k < 5; result informational".into();
                    }
                }
                _ => {
                    row.pass = k < 5;
                    row.note = "a solution is missing".into();
                }
            }
            rows.push(row);
        }
    }
    let pass = rows.iter().all(|r| r.pass)
        && solutions.iter().all(|r| r.shift_invariant != Some(false))
        && solutions.iter().all(|r| {
            r.solution.as_ref().is_some_and(|s| {
                s.residuals.max() <= opts.residual_tol && s.index_window == Some(true) && s.morse_window
            })
        });
    Ok(FamilyReport { label: spec.label.clone(), m: opts.m, solutions, rows, pass })
}

/// `s ↦ B(s + shift)`.
pub fn shift_coefficient(b: &CoefficientPath, shift: f64) -> Result<CoefficientPath> {
    let inner = b.clone();
    CoefficientPath::from_fn(b.n(), format!("{}(·+{shift})", b.label()), move |s| inner.eval(s + shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::quartic;

    fn constant_half(y: f64, h: f64) -> SampledTrajectory {
        let times: Vec<f64> = (0..=10).map(|k| h * k as f64 / 10.0).collect();
        let values = times.iter().map(|_| Vector::from_vec(vec![0.0, y])).collect();
        SampledTrajectory { times, values }
    }

    #[test]
    fn constant_extension() {
        let (full, closure) = extend_brake(&constant_half(0.7, 1.0), 1e-12).unwrap();
        assert_eq!(full.len(), 21);
        assert!((full.times[20] - 2.0).abs() < 1e-15);
        assert!(full.values.iter().all(|v| v[0] == 0.0 && v[1] == 0.7));
        assert_eq!(closure, 0.0);
    }

    #[test]
    fn extension_rejects_off_boundary_endpoint() {
        let mut half = constant_half(0.7, 1.0);
        half.values[10][0] = 1e-3;
        assert!(matches!(extend_brake(&half, 1e-6), Err(Error::BoundaryViolation(_))));
    }

    #[test]
    fn extension_round_trip() {
        let half = SampledTrajectory {
            times: (0..=8).map(|k| k as f64 / 8.0).collect(),
            values: (0..=8)
                .map(|k| {
                    let t = k as f64 / 8.0;
                    Vector::from_vec(vec![(PI * t).sin(), (PI * t).cos() + t])
                })
                .collect(),
        };
        let (full, _) = extend_brake(&half, 1e-12).unwrap();
        let again = SampledTrajectory { times: full.times[..9].to_vec(), values: full.values[..9].to_vec() };
        let (full2, _) = extend_brake(&again, 1e-12).unwrap();
        assert_eq!(full, full2);
    }

    #[test]
    fn zero_solution_linearizes_to_bhat() {
        let spec = quartic(1, 2.0).unwrap();
        let cp = CriticalPoint {
            z: FourierVector::zeros(1, 4, 1),
            value: 0.0,
            grad_norm: 0.0,
            morse_index: 0,
            morse_nullity: 0,
            window: false,
            sup_norm: 0.0,
            oscillation: 0.0,
            seed: 0,
            index_pair: None,
        };
        let sol = BrakeSolution::from_critical_point(&spec, &cp, 16, 1e-12).unwrap();
        let b = linearized_system(&spec, &sol).unwrap();
        assert_eq!(linalg::max_abs(&b.eval(0.3)), 0.0);
        let (pair, window) = solution_index_pair(&spec, &sol, &IndexOptions::default()).unwrap();
        assert_eq!((pair.index, pair.nullity), (-1, 1));
        assert!(!window);
    }

    #[test]
    fn distinctness_detects_shifted_copies() {
        let spec = quartic(1, 2.0).unwrap();
        let mut z = FourierVector::zeros(1, 3, 1);
        z.coeffs[4] = 0.5;
        z.coeffs[5] = 0.1;
        let cp = CriticalPoint {
            z,
            value: 0.0,
            grad_norm: 0.0,
            morse_index: 0,
            morse_nullity: 0,
            window: false,
            sup_norm: 0.0,
            oscillation: 0.0,
            seed: 0,
            index_pair: None,
        };
        let a = BrakeSolution::from_critical_point(&spec, &cp, 64, 1e-12).unwrap();
        let same = distinctness(&a, &a, 1e-4, 64).unwrap();
        assert!(!same.distinct);
        assert!(same.shift_distances[0] < 1e-14);
        // z(t) ↦ z(t + T/2) is another member of the same orbit
        let shifted_series = {
            let sp = crate::galerkin::GalerkinSpace::new(1, 3, 1).unwrap();
            let w = a.series.clone();
            sp.project_trajectory(|s| w.eval(s + 1.0)).unwrap()
        };
        let mut b = a.clone();
        b.series = shifted_series;
        let rep = distinctness(&a, &b, 1e-4, 64).unwrap();
        assert!(!rep.distinct, "{rep:?}");
    }
}

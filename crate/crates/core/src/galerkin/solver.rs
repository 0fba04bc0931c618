//! Critical points of `φ_m` by damped Newton iteration with deflation of
//! roots already found.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FdReport, FourierVector, Functional, GalerkinSpace};
use crate::error::{Error, Result};
use crate::hamiltonian::{truncate_hamiltonian, HamiltonianSpec, TruncationSpec};
use crate::index::IndexPair;
use crate::linalg::{Mat, Vector};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_newton: usize,
    /// Amplitudes of the single-mode seeds on modes `1..=seed_modes`.
    pub amplitudes: Vec<f64>,
    pub seed_modes: usize,
    pub random_seeds: usize,
    pub seed: u64,
    pub truncation_radius: f64,
    pub max_radius_doublings: usize,
    pub zero_cutoff: f64,
    pub fd_points: usize,
    pub fd_step: f64,
    pub fd_tol: f64,
    /// Samples of `[0, j]` for the sup-norm monitor.
    pub sup_samples: usize,
    /// Quadrature panels per unit normal time; `None` takes `4m+4`.
    pub quadrature: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_newton: 80,
            amplitudes: vec![0.3, 0.6, 1.0],
            seed_modes: 3,
            random_seeds: 4,
            seed: 0,
            truncation_radius: 4.0,
            max_radius_doublings: 3,
            zero_cutoff: 1e-7,
            fd_points: 20,
            fd_step: 1e-5,
            fd_tol: 1e-6,
            sup_samples: 2000,
            quadrature: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub z: FourierVector,
    pub value: f64,
    pub grad_norm: f64,
    pub morse_index: usize,
    pub morse_nullity: usize,
    /// `m⁻ ≤ mn+n+1 ≤ m⁻+m⁰`.
    pub window: bool,
    pub sup_norm: f64,
    /// `max_s |z(s) − z(0)|`.
    pub oscillation: f64,
    pub seed: usize,
    pub index_pair: Option<IndexPair>,
}

impl CriticalPoint {
    pub fn is_nonconstant(&self, tol: f64) -> bool {
        self.oscillation > tol
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub label: String,
    pub m: usize,
    pub j: usize,
    pub truncation: TruncationSpec,
    pub radius_doublings: usize,
    pub fd: FdReport,
    pub seeds: usize,
    /// Nonzero critical points, sorted by critical value.
    pub points: Vec<CriticalPoint>,
    pub failures: Vec<SeedFailure>,
}

impl SolveReport {
    /// The lowest-valued nonconstant window point with positive value.
    pub fn witness(&self) -> Option<&CriticalPoint> {
        self.points
            .iter()
            .filter(|p| p.window && p.value > 0.0 && p.is_nonconstant(1e-6))
            .min_by(|a, b| a.value.total_cmp(&b.value))
    }
}

fn seeds(space: &GalerkinSpace, opts: &SolverOptions) -> Vec<Vector> {
    let n = space.n();
    let d = space.dim();
    let modes = opts.seed_modes.min(space.m()).max(1) as i64;
    let mut out = Vec::new();
    for l in 1..=modes {
        for i in 0..n {
            for &amp in &opts.amplitudes {
                for sign in [1.0, -1.0] {
                    let mut c = Vector::zeros(d);
                    c[space.index(l, i)] = sign * amp;
                    out.push(c);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_seeds {
        let mut c = Vector::zeros(d);
        for l in -modes..=modes {
            for i in 0..n {
                c[space.index(l, i)] = rng.gen_range(-0.5..0.5);
            }
        }
        out.push(c);
    }
    out
}

fn newton_direction(h: &Mat, g: &Vector) -> Option<Vector> {
    if let Some(x) = h.clone().lu().solve(g) {
        if x.iter().all(|v| v.is_finite()) {
            return Some(-x);
        }
    }
    let x = h.clone().svd(true, true).solve(g, 1e-12).ok()?;
    x.iter().all(|v| v.is_finite()).then(|| -x)
}

/// Deflation factor `M(c) = Π(1/‖c−r‖²_X + 1)` and `∇log M`.
fn deflation(f: &Functional, roots: &[Vector], c: &Vector) -> (f64, Vector) {
    let mut m = 1.0;
    let mut grad = Vector::zeros(c.len());
    for r in roots {
        let diff = c - r;
        let d2 = f.norm(&diff).powi(2).max(1e-300);
        m *= 1.0 / d2 + 1.0;
        let gd = diff.component_mul(f.gram());
        grad -= gd * (2.0 / (d2 * (1.0 + d2)));
    }
    (m, grad)
}

/// Iterations without a 1% merit decrease before a seed is abandoned.
const STALL_LIMIT: usize = 12;
const MIN_DAMPING: f64 = 1.0 / 64.0;
/// Plain Newton steps tried on a seed whose deflated iteration failed.
const FALLBACK_STEPS: usize = 20;

enum Outcome {
    Root(Vector),
    Failed(String),
}

fn deflated_newton(f: &Functional, roots: &[Vector], c0: &Vector, opts: &SolverOptions) -> Result<Outcome> {
    let mut c = c0.clone();
    let mut g = f.gradient(&c)?;
    let mut res = f.dual_norm(&g);
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..opts.max_newton {
        if res <= opts.tol {
            return Ok(Outcome::Root(c));
        }
        let h = f.hessian(&c)?;
        let Some(delta) = newton_direction(&h, &g) else {
            return Ok(Outcome::Failed("singular Hessian".into()));
        };
        let (m, glog) = deflation(f, roots, &c);
        let denom = 1.0 - glog.dot(&delta);
        let step = if denom.abs() > 1e-12 { delta / denom } else { delta };
        let merit = m * res;
        if merit < 0.99 * best {
            best = merit;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                return Ok(Outcome::Failed(format!("stalled at residual {res:.3e}")));
            }
        }
        let mut alpha = 1.0;
        loop {
            let trial = &c + &step * alpha;
            let gt = f.gradient(&trial)?;
            let rt = f.dual_norm(&gt);
            let (mt, _) = deflation(f, roots, &trial);
            if mt * rt < merit * (1.0 - 1e-4 * alpha) || alpha < MIN_DAMPING {
                c = trial;
                g = gt;
                res = rt;
                break;
            }
            alpha *= 0.5;
        }
        if !res.is_finite() || f.norm(&c) > 1e6 {
            return Ok(Outcome::Failed("iterate diverged".into()));
        }
    }
    if res <= opts.tol {
        Ok(Outcome::Root(c))
    } else {
        Ok(Outcome::Failed(format!("residual {res:.3e} after {} steps", opts.max_newton)))
    }
}

/// Plain Newton refinement; returns the refined point and its residual.
fn polish(f: &Functional, c0: &Vector, steps: usize) -> Result<(Vector, f64)> {
    let mut c = c0.clone();
    let mut g = f.gradient(&c)?;
    let mut res = f.dual_norm(&g);
    for _ in 0..steps {
        let h = f.hessian(&c)?;
        let Some(delta) = newton_direction(&h, &g) else { break };
        let trial = &c + delta;
        let gt = f.gradient(&trial)?;
        let rt = f.dual_norm(&gt);
        if !(rt < res) {
            break;
        }
        c = trial;
        g = gt;
        res = rt;
    }
    Ok((c, res))
}

/// Degenerate roots such as the origin attract Newton only linearly, so a
/// converged iterate may stop well short of them.
const SAME_ROOT: f64 = 1e-3;

fn is_known(f: &Functional, roots: &[Vector], c: &Vector) -> bool {
    let scale = f.norm(c).max(1.0);
    roots.iter().any(|r| f.norm(&(c - r)) <= SAME_ROOT * scale)
}

/// Morse index and nullity of `φ_m` at `c` as an operator on `X_m`.
pub fn morse_counts(f: &Functional, c: &Vector, zero_cutoff: f64) -> Result<(usize, usize)> {
    let spec = f.operator_spectrum(&f.hessian(c)?);
    let scale = spec.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
    let cut = zero_cutoff * scale;
    let minus = spec.iter().filter(|&&v| v < -cut).count();
    let zero = spec.iter().filter(|&&v| v.abs() <= cut).count();
    Ok((minus, zero))
}

fn solve_with(
    spec: &HamiltonianSpec,
    space: &GalerkinSpace,
    trunc: TruncationSpec,
    opts: &SolverOptions,
) -> Result<(FdReport, Vec<CriticalPoint>, Vec<SeedFailure>, usize)> {
    let f = Functional::new(space, spec, trunc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xfd);
    let fd = f.fd_check(&mut rng, opts.fd_points, opts.fd_step, opts.fd_tol)?;
    if !fd.pass {
        return Err(Error::VerificationFailed(format!(
            "finite-difference check failed: gradient {:.3e}, Hessian {:.3e}",
            fd.max_gradient_error, fd.max_hessian_error
        )));
    }
    let seeds = seeds(space, opts);
    let mut roots = vec![Vector::zeros(space.dim())];
    let mut found = Vec::new();
    let mut failures = Vec::new();
    for (k, seed) in seeds.iter().enumerate() {
        let outcome = deflated_newton(&f, &roots, seed, opts)?;
        let candidate = match outcome {
            Outcome::Root(c) => Some(c),
            Outcome::Failed(reason) => {
                // a seed that plain Newton takes to a known root has converged
                let (c, res) = polish(&f, seed, FALLBACK_STEPS)?;
                if res <= opts.tol && is_known(&f, &roots, &c) {
                    None
                } else if res <= opts.tol {
                    Some(c)
                } else {
                    failures.push(SeedFailure { seed: k, reason });
                    None
                }
            }
        };
        let Some(c) = candidate else { continue };
        let (c, res) = polish(&f, &c, 5)?;
        if res > opts.tol {
            failures.push(SeedFailure { seed: k, reason: format!("polished residual {res:.3e}") });
            continue;
        }
        if is_known(&f, &roots, &c) {
            continue;
        }
        roots.push(c.clone());
        found.push((k, c, res));
    }
    if failures.len() == seeds.len() {
        return Err(Error::AllSeedsFailed);
    }
    let mn = space.m() * space.n();
    let target = mn + space.n() + 1;
    let mut points = Vec::with_capacity(found.len());
    for (k, c, res) in found {
        let (minus, zero) = morse_counts(&f, &c, opts.zero_cutoff)?;
        let z = space.vector(&c)?;
        let z0 = z.eval(0.0);
        let samples = opts.sup_samples.max(16);
        let jf = space.j() as f64;
        let (mut sup, mut osc) = (0.0_f64, 0.0_f64);
        for q in 0..=samples {
            let v = z.eval(jf * q as f64 / samples as f64);
            sup = sup.max(v.norm());
            osc = osc.max((&v - &z0).norm());
        }
        points.push(CriticalPoint {
            value: f.value(&c)?,
            grad_norm: res,
            morse_index: minus,
            morse_nullity: zero,
            window: minus <= target && target <= minus + zero,
            sup_norm: sup,
            oscillation: osc,
            seed: k,
            index_pair: None,
            z,
        });
    }
    points.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok((fd, points, failures, seeds.len()))
}

/// Searches `X_m` on `[0, j]` for nonzero critical points of the truncated
/// functional. If a point reaches the truncation radius, the search is
/// repeated with the radius doubled.
pub fn find_critical_points(spec: &HamiltonianSpec, m: usize, j: usize, opts: &SolverOptions) -> Result<SolveReport> {
    if m < 1 {
        return Err(Error::Config("m must be at least 1".into()));
    }
    if opts.amplitudes.is_empty() && opts.random_seeds == 0 {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let space = GalerkinSpace::with_panels(spec.n, m, j, opts.quadrature.unwrap_or(4 * m + 4))?;
    let mut radius = opts.truncation_radius;
    for doublings in 0..=opts.max_radius_doublings {
        let trunc = truncate_hamiltonian(spec, radius, j)?;
        let (fd, points, failures, seeds) = solve_with(spec, &space, trunc, opts)?;
        if points.iter().all(|p| p.sup_norm < radius) || doublings == opts.max_radius_doublings {
            return Ok(SolveReport {
                label: spec.label.clone(),
                m,
                j,
                truncation: trunc,
                radius_doublings: doublings,
                fd,
                seeds,
                points,
                failures,
            });
        }
        radius *= 2.0;
    }
    unreachable!("loop returns on its last iteration")
}

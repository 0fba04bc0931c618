//! The `L₀`-index pair of a symplectic path and its conjugated version for
//! other Lagrangian boundary conditions.
//!
//! The index of a nondegenerate path `γ` is the winding of
//! `det Q(t) = e^{2iΔ̄(t)}`, `Q = (U − iV)(U + iV)⁻¹`, along the completed
//! path: an arc from `J` to `I`, then `γ`, then a closing path `β` that
//! stays in `{det V ≠ 0}` and ends at `M₊` or `M₋`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, CoefficientPath, SymplecticPath};
use crate::linalg::{self, CMat, Mat};
use crate::symplectic::{
    endpoint_m_minus, endpoint_m_plus, standard_j, unipotent_factorization, FrameLabel, GlPath,
    LagrangianFrame, SymplecticMatrix, UnipotentFactors,
};

/// Singular values of the orthonormalised `V` block at or below this count
/// towards the nullity.
pub const NULLITY_TOL: f64 = 1e-8;

/// Allowed distance of the winding number from an integer.
pub const INTEGRALITY_TOL: f64 = 1e-3;

/// Perturbation sizes tried, in order, for degenerate paths.
pub const EPS_SCHEDULE: [f64; 3] = [1e-2, 1e-3, 1e-4];

const ARC_NODES: usize = 64;
const BETA_NODES: usize = 64;
const MAX_BISECTIONS: usize = 24;
/// Largest phase step accepted between consecutive samples of `arg det(U+iV)`.
const MAX_PHASE_STEP: f64 = FRAC_PI_4;

/// The boundary condition an index pair refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    L0,
    L1,
    General,
    Periodic { re: f64, im: f64 },
}

impl From<FrameLabel> for Boundary {
    fn from(l: FrameLabel) -> Self {
        match l {
            FrameLabel::L0 => Boundary::L0,
            FrameLabel::L1 => Boundary::L1,
            FrameLabel::General => Boundary::General,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub index: i64,
    pub nullity: usize,
    pub boundary: Boundary,
}

/// Numerical parameters shared by all index computations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Integration steps per unit time.
    pub steps_per_unit: usize,
    /// Initial samples of the closing path before adaptive refinement.
    pub beta_nodes: usize,
    pub eps_schedule: Vec<f64>,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            steps_per_unit: flow::DEFAULT_STEPS_PER_UNIT,
            beta_nodes: BETA_NODES,
            eps_schedule: EPS_SCHEDULE.to_vec(),
        }
    }
}

impl IndexOptions {
    pub fn steps_for(&self, tau: f64) -> usize {
        ((tau * self.steps_per_unit as f64).round() as usize).max(16)
    }
}

/// `dim(M·L₀ ∩ L₀)` for a symplectic `M`.
pub fn endpoint_nullity(m: &Mat) -> usize {
    linalg::frame_v_singular_values(m)
        .iter()
        .filter(|s| **s <= NULLITY_TOL)
        .count()
}

/// `ν_{L₀}(γ) = dim ker V(τ)`.
pub fn l0_nullity(gamma: &SymplecticPath) -> usize {
    endpoint_nullity(gamma.endpoint())
}

type Evaluator = Arc<dyn Fn(f64) -> Result<Mat> + Send + Sync>;

/// A sampled curve in `Sp(2n)` on a parameter interval, with an evaluator
/// used to refine between samples.
#[derive(Clone)]
pub struct SampledCurve {
    grid: Vec<f64>,
    values: Vec<Mat>,
    eval: Evaluator,
}

impl std::fmt::Debug for SampledCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledCurve")
            .field("nodes", &self.grid.len())
            .finish()
    }
}

impl SampledCurve {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Mat] {
        &self.values
    }

    pub fn at(&self, s: f64) -> Result<Mat> {
        (self.eval)(s)
    }

    pub fn start(&self) -> &Mat {
        &self.values[0]
    }

    pub fn end(&self) -> &Mat {
        self.values.last().expect("nonempty")
    }

    /// Runs `self` on `[0, ½]` and `other` on `[½, 1]`.
    pub fn concat(&self, other: &SampledCurve) -> SampledCurve {
        let (a0, a1) = (self.grid[0], *self.grid.last().expect("nonempty"));
        let (b0, b1) = (other.grid[0], *other.grid.last().expect("nonempty"));
        let mut grid: Vec<f64> = self.grid.iter().map(|s| 0.5 * (s - a0) / (a1 - a0)).collect();
        let mut values = self.values.clone();
        for (s, v) in other.grid.iter().zip(&other.values).skip(1) {
            grid.push(0.5 + 0.5 * (s - b0) / (b1 - b0));
            values.push(v.clone());
        }
        *grid.last_mut().expect("nonempty") = 1.0;
        let first = self.eval.clone();
        let second = other.eval.clone();
        let eval: Evaluator = Arc::new(move |s| {
            if s <= 0.5 {
                first(a0 + 2.0 * s * (a1 - a0))
            } else {
                second(b0 + (2.0 * s - 1.0) * (b1 - b0))
            }
        });
        SampledCurve { grid, values, eval }
    }
}

/// The arc `e^{θJ}`, `θ = (1−2s)π/2`, from `J` to `I` on `s ∈ [0, ½]`,
/// followed by `γ(2s − 1)` on `[½, 1]`.
pub fn prepend_arc(gamma: &SymplecticPath) -> Result<SampledCurve> {
    let n = gamma.n();
    let j = standard_j(n)?;
    let arc_eval = {
        let j = j.clone();
        move |s: f64| -> Mat { (&j * ((1.0 - 2.0 * s) * FRAC_PI_2)).exp() }
    };
    let arc_grid: Vec<f64> = (0..=ARC_NODES)
        .map(|k| 0.5 * k as f64 / ARC_NODES as f64)
        .collect();
    let mut values: Vec<Mat> = arc_grid.iter().map(|s| arc_eval(*s)).collect();
    values[0] = j.clone();
    values[ARC_NODES] = Mat::identity(2 * n, 2 * n);
    let mut grid = arc_grid;
    let (t0, t1) = (gamma.start_time(), gamma.end_time());
    for (t, v) in gamma.grid().iter().zip(gamma.values()).skip(1) {
        grid.push(0.5 + 0.5 * (t - t0) / (t1 - t0));
        values.push(v.clone());
    }
    *grid.last_mut().expect("nonempty") = 1.0;
    let path = gamma.clone();
    let eval: Evaluator = Arc::new(move |s| {
        if s <= 0.5 {
            Ok(arc_eval(s))
        } else {
            path.at(t0 + (2.0 * s - 1.0) * (t1 - t0))
        }
    });
    Ok(SampledCurve { grid, values, eval })
}

/// The closing path from a nondegenerate endpoint to `M₊` or `M₋`:
/// `β(s) = Lower((1−s)W) · Mid(V(s)) · Lower((1−s)W')` with `V(s)` moving
/// along [`GlPath`]. Its `V` block is exactly `V(s)`.
#[derive(Debug, Clone)]
pub struct ClosingPath {
    factors: UnipotentFactors,
    gl: GlPath,
}

impl ClosingPath {
    pub fn at(&self, s: f64) -> Result<Mat> {
        let s = s.clamp(0.0, 1.0);
        self.factors.reassemble(1.0 - s, &self.gl.at(s))
    }

    /// `true` if the path ends at `M₊`.
    pub fn ends_at_m_plus(&self) -> bool {
        self.gl.det_positive()
    }

    pub fn target(&self, n: usize) -> Result<SymplecticMatrix> {
        if self.ends_at_m_plus() {
            endpoint_m_plus(n)
        } else {
            endpoint_m_minus(n)
        }
    }

    pub fn sample(&self, nodes: usize) -> Result<SampledCurve> {
        let nodes = nodes.max(2);
        let n = self.factors.v.nrows();
        let grid: Vec<f64> = (0..=nodes).map(|k| k as f64 / nodes as f64).collect();
        let mut values = grid
            .iter()
            .map(|s| self.at(*s))
            .collect::<Result<Vec<_>>>()?;
        values[nodes] = self.target(n)?.into_inner();
        let me = self.clone();
        let eval: Evaluator = Arc::new(move |s| me.at(s));
        Ok(SampledCurve { grid, values, eval })
    }
}

pub fn closing_path_beta(endpoint: &SymplecticMatrix) -> Result<ClosingPath> {
    let factors = unipotent_factorization(endpoint)?;
    let gl = GlPath::new(&factors.v)?;
    Ok(ClosingPath { factors, gl })
}

/// Samples of `Q(s)` along a curve with the continuous phase `Δ̄(s)`,
/// `det Q(s) = e^{2iΔ̄(s)}`.
#[derive(Debug, Clone)]
pub struct UnitaryTrace {
    pub grid: Vec<f64>,
    pub q_values: Vec<CMat>,
    pub delta: Vec<f64>,
}

impl UnitaryTrace {
    /// `(Δ̄(end) − Δ̄(start)) / π`.
    pub fn winding(&self) -> f64 {
        (self.delta.last().expect("nonempty") - self.delta[0]) / PI
    }
}

/// `Q = (U − iV)(U + iV)⁻¹`.
pub fn q_matrix(m: &Mat) -> Result<CMat> {
    let n = m.nrows() / 2;
    let plus = CMat::from_fn(n, n, |i, k| Complex::new(m[(n + i, n + k)], m[(i, n + k)]));
    let minus = plus.map(|z| z.conj());
    let inv = plus
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("U + iV is singular".into()))?;
    Ok(minus * inv)
}

/// Phase of `det(U + iV)`; `Δ̄` is its negative.
fn phase(m: &Mat) -> f64 {
    let d = linalg::det_u_plus_iv(m);
    d.im.atan2(d.re)
}

fn principal(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    } else if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Phase increment from `a` to `b`, bisecting through the curve evaluator
/// wherever a single step exceeds [`MAX_PHASE_STEP`].
fn refined_increment(
    curve: &SampledCurve,
    sa: f64,
    ma: &Mat,
    sb: f64,
    mb: &Mat,
    depth: usize,
    out: &mut Vec<(f64, Mat)>,
) -> Result<f64> {
    let step = principal(phase(mb) - phase(ma));
    if step.abs() <= MAX_PHASE_STEP {
        out.push((sb, mb.clone()));
        return Ok(step);
    }
    if depth >= MAX_BISECTIONS {
        return Err(Error::NumericalFailure(format!(
            "phase of det(U+iV) not resolved near s = {sa:.6}"
        )));
    }
    let sm = 0.5 * (sa + sb);
    let mm = curve.at(sm)?;
    let left = refined_increment(curve, sa, ma, sm, &mm, depth + 1, out)?;
    let right = refined_increment(curve, sm, &mm, sb, mb, depth + 1, out)?;
    Ok(left + right)
}

/// Unitary trace of a curve with adaptive refinement so that `Δ̄` is
/// resolved continuously.
pub fn q_trace(curve: &SampledCurve) -> Result<UnitaryTrace> {
    let mut samples: Vec<(f64, Mat)> = vec![(curve.grid[0], curve.values[0].clone())];
    let mut psi = vec![phase(&curve.values[0])];
    for w in 0..curve.grid.len() - 1 {
        let mut local = Vec::new();
        let (sa, sb) = (curve.grid[w], curve.grid[w + 1]);
        let (ma, mb) = (&curve.values[w], &curve.values[w + 1]);
        refined_increment(curve, sa, ma, sb, mb, 0, &mut local)?;
        let mut prev = samples.last().expect("nonempty").1.clone();
        for (s, m) in local {
            let inc = principal(phase(&m) - phase(&prev));
            psi.push(psi.last().expect("nonempty") + inc);
            prev = m.clone();
            samples.push((s, m));
        }
    }
    let mut grid = Vec::with_capacity(samples.len());
    let mut q_values = Vec::with_capacity(samples.len());
    for (s, m) in &samples {
        grid.push(*s);
        q_values.push(q_matrix(m)?);
    }
    let delta = psi.iter().map(|p| -p).collect();
    Ok(UnitaryTrace {
        grid,
        q_values,
        delta,
    })
}

/// Unitary trace of a path itself, without completion.
pub fn q_curve(gamma: &SymplecticPath) -> Result<UnitaryTrace> {
    let path = gamma.clone();
    let curve = SampledCurve {
        grid: gamma.grid().to_vec(),
        values: gamma.values().to_vec(),
        eval: Arc::new(move |t| path.at(t)),
    };
    q_trace(&curve)
}

/// The completed path: arc, then `γ`, then the closing path.
pub fn completed_path(gamma: &SymplecticPath, beta_nodes: usize) -> Result<SampledCurve> {
    let tilde = prepend_arc(gamma)?;
    let beta = closing_path_beta(&SymplecticMatrix::with_tolerance(
        gamma.endpoint().clone(),
        1e-8,
    )?)?;
    Ok(tilde.concat(&beta.sample(beta_nodes)?))
}

fn rounded_winding(trace: &UnitaryTrace) -> Result<i64> {
    let w = trace.winding();
    let r = w.round();
    if (w - r).abs() > INTEGRALITY_TOL {
        return Err(Error::IntegralityDefect {
            value: w,
            defect: (w - r).abs(),
        });
    }
    Ok(r as i64)
}

/// `i_{L₀}(γ)` for a path with `ν_{L₀}(γ) = 0`.
pub fn l0_index_nondegenerate(gamma: &SymplecticPath) -> Result<i64> {
    l0_index_nondegenerate_with(gamma, BETA_NODES)
}

pub fn l0_index_nondegenerate_with(gamma: &SymplecticPath, beta_nodes: usize) -> Result<i64> {
    if l0_nullity(gamma) != 0 {
        return Err(Error::DegenerateEndpoint(
            "path endpoint meets L0 nontrivially".into(),
        ));
    }
    rounded_winding(&q_trace(&completed_path(gamma, beta_nodes)?)?)
}

/// Index pair of a family of paths `ε ↦ γ_ε` where `γ_0` is the path of
/// interest and `γ_ε` comes from the coefficient `B − εI`.
///
/// A degenerate `γ_0` takes the index of `γ_ε` once two consecutive
/// entries of the schedule agree on nondegenerate perturbed paths.
pub fn index_from_family<F>(family: F, opts: &IndexOptions, boundary: Boundary) -> Result<IndexPair>
where
    F: Fn(f64) -> Result<SymplecticPath>,
{
    let base = family(0.0)?;
    let nullity = l0_nullity(&base);
    if nullity == 0 {
        return Ok(IndexPair {
            index: l0_index_nondegenerate_with(&base, opts.beta_nodes)?,
            nullity,
            boundary,
        });
    }
    let mut previous: Option<i64> = None;
    for &eps in &opts.eps_schedule {
        let perturbed = family(eps)?;
        if l0_nullity(&perturbed) != 0 {
            previous = None;
            continue;
        }
        let value = l0_index_nondegenerate_with(&perturbed, opts.beta_nodes)?;
        if previous == Some(value) {
            return Ok(IndexPair {
                index: value,
                nullity,
                boundary,
            });
        }
        previous = Some(value);
    }
    Err(Error::PerturbationFailure)
}

/// `(i_{L₀}, ν_{L₀})` of the fundamental solution of `B` on `[0, τ]`.
pub fn l0_index(b: &CoefficientPath, tau: f64) -> Result<IndexPair> {
    l0_index_with(b, tau, &IndexOptions::default())
}

pub fn l0_index_with(b: &CoefficientPath, tau: f64, opts: &IndexOptions) -> Result<IndexPair> {
    let steps = opts.steps_for(tau);
    index_from_family(
        |eps| flow::fundamental_solution(&b.shifted(-eps), tau, steps),
        opts,
        Boundary::L0,
    )
}

/// `(i_L, ν_L)` with `L = P·L₀`: the `L₀` pair of `t ↦ P⁻¹γ(t)P`.
pub fn l_index(b: &CoefficientPath, frame: &LagrangianFrame, tau: f64) -> Result<IndexPair> {
    l_index_with(b, frame, tau, &IndexOptions::default())
}

pub fn l_index_with(
    b: &CoefficientPath,
    frame: &LagrangianFrame,
    tau: f64,
    opts: &IndexOptions,
) -> Result<IndexPair> {
    let steps = opts.steps_for(tau);
    let p = frame.p().matrix().clone();
    index_from_family(
        |eps| Ok(flow::fundamental_solution(&b.shifted(-eps), tau, steps)?.conjugated(&p)),
        opts,
        frame.label().into(),
    )
}

/// `(i_L, ν_L)` of a given path family under a Lagrangian frame.
pub fn l_index_of_family<F>(
    family: F,
    frame: &LagrangianFrame,
    opts: &IndexOptions,
) -> Result<IndexPair>
where
    F: Fn(f64) -> Result<SymplecticPath>,
{
    let p = frame.p().matrix().clone();
    index_from_family(
        |eps| Ok(family(eps)?.conjugated(&p)),
        opts,
        frame.label().into(),
    )
}

//! Verifiers for the iteration formulas of brake-symmetric linear systems
//! and generators of random test systems.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, CoefficientFlags, CoefficientPath, SymplecticPath, TrigPolynomial};
use crate::index::{self, Boundary, IndexOptions, IndexPair};
use crate::linalg::{self, Mat};
use crate::periodic::{self, Omega, OmegaIndexer};
use crate::symplectic::LagrangianFrame;

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Mat {
    linalg::symmetrize(&Mat::from_fn(n, n, |_, _| rng.gen_range(-amp..amp)))
}

/// Block-diagonal symmetric matrix; commutes with `N`.
fn block_diagonal(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Mat {
    let x = random_symmetric(rng, n, amp);
    let y = random_symmetric(rng, n, amp);
    linalg::from_blocks(&x, &Mat::zeros(n, n), &Mat::zeros(n, n), &y)
}

/// `[[0, C], [Cᵀ, 0]]`; anticommutes with `N`.
fn block_off_diagonal(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Mat {
    let c = Mat::from_fn(n, n, |_, _| rng.gen_range(-amp..amp));
    linalg::from_blocks(&Mat::zeros(n, n), &c, &c.transpose(), &Mat::zeros(n, n))
}

/// Amplitudes of the random brake-symmetric family.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SystemAmplitudes {
    pub constant: f64,
    pub cosine: f64,
    pub sine: f64,
}

impl Default for SystemAmplitudes {
    fn default() -> Self {
        Self {
            constant: 2.5,
            cosine: 1.0,
            sine: 0.8,
        }
    }
}

fn brake_flags() -> CoefficientFlags {
    CoefficientFlags {
        two_periodic: true,
        brake_symmetric: true,
        positive_definite: None,
    }
}

/// `B(t) = Σ_{p≤2} cos(pπt)·D_p + sin(pπt)·O_p` with `D_p` commuting and
/// `O_p` anticommuting with `N`, which makes `B(1+t)N = NB(1−t)` hold
/// identically.
pub fn random_brake_system(
    rng: &mut ChaCha8Rng,
    n: usize,
    amps: SystemAmplitudes,
) -> Result<CoefficientPath> {
    let cos = vec![
        block_diagonal(rng, n, amps.constant),
        block_diagonal(rng, n, amps.cosine),
        block_diagonal(rng, n, amps.cosine * 0.5),
    ];
    let sin = vec![
        Mat::zeros(2 * n, 2 * n),
        block_off_diagonal(rng, n, amps.sine),
        block_off_diagonal(rng, n, amps.sine * 0.5),
    ];
    Ok(CoefficientPath::trig(TrigPolynomial {
        frequency: PI,
        cos,
        sin,
    })?
    .with_flags(brake_flags()))
}

/// A brake-symmetric system with `B(t) ≥ λ_min(D₀)/5 > 0` for all `t`.
pub fn random_positive_system(rng: &mut ChaCha8Rng, n: usize) -> Result<CoefficientPath> {
    let dim = 2 * n;
    let mut d0 = block_diagonal(rng, n, 1.0);
    let shift = -linalg::sym_eigenvalues(&d0)[0] + rng.gen_range(0.05..4.0);
    d0 += Mat::identity(dim, dim) * shift;
    let floor = linalg::sym_eigenvalues(&d0)[0];
    let raw = [
        block_diagonal(rng, n, 1.0),
        block_off_diagonal(rng, n, 1.0),
        block_diagonal(rng, n, 1.0),
        block_off_diagonal(rng, n, 1.0),
    ];
    let total: f64 = raw.iter().map(linalg::norm2).sum::<f64>().max(1e-12);
    let scale = 0.8 * floor / total;
    let [c1, s1, c2, s2] = raw.map(|m| m * scale);
    let path = CoefficientPath::trig(TrigPolynomial {
        frequency: PI,
        cos: vec![d0, c1, c2],
        sin: vec![Mat::zeros(dim, dim), s1, s2],
    })?;
    Ok(path.with_flags(CoefficientFlags {
        two_periodic: true,
        brake_symmetric: true,
        positive_definite: Some(true),
    }))
}

/// Deterministic system number `index` of the suite seeded by `seed`.
pub fn seeded_system(seed: u64, index: usize, n: usize) -> Result<CoefficientPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    Ok(random_brake_system(&mut rng, n, SystemAmplitudes::default())?
        .with_label(format!("brake:seed={seed}:index={index}:n={n}")))
}

/// Deterministic positive-definite system number `index`.
pub fn seeded_positive_system(seed: u64, index: usize, n: usize) -> Result<CoefficientPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    Ok(random_positive_system(&mut rng, n)?
        .with_label(format!("positive:seed={seed}:index={index}:n={n}")))
}

/// One checked relation `lower ≤ value ≤ upper`; equalities have both
/// bounds equal. When `doubled` is set every entry is twice the quantity
/// in the relation, so half-integer terms stay integral.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub label: String,
    pub lower: Option<i64>,
    pub value: i64,
    pub upper: Option<i64>,
    pub doubled: bool,
    pub pass: bool,
}

impl Relation {
    pub fn equality(label: impl Into<String>, lhs: i64, rhs: i64) -> Self {
        Self {
            label: label.into(),
            lower: Some(rhs),
            value: lhs,
            upper: Some(rhs),
            doubled: false,
            pass: lhs == rhs,
        }
    }

    pub fn bounds(
        label: impl Into<String>,
        lower: Option<i64>,
        value: i64,
        upper: Option<i64>,
        doubled: bool,
    ) -> Self {
        let pass = lower.is_none_or(|l| l <= value) && upper.is_none_or(|u| value <= u);
        Self {
            label: label.into(),
            lower,
            value,
            upper,
            doubled,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    BottOdd,
    BottEven,
    PeriodDoubling,
    IterationInequalities,
    IndexBounds,
    Positivity,
    EpsJump,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub system_id: String,
    pub claim: Claim,
    pub k: Option<usize>,
    pub relations: Vec<Relation>,
    /// Every index quantity that entered the relations.
    pub terms: BTreeMap<String, i64>,
    pub pass: bool,
}

impl VerificationReport {
    fn new(
        system_id: &str,
        claim: Claim,
        k: Option<usize>,
        relations: Vec<Relation>,
        terms: BTreeMap<String, i64>,
    ) -> Self {
        let pass = relations.iter().all(|r| r.pass);
        Self {
            system_id: system_id.to_string(),
            claim,
            k,
            relations,
            terms,
            pass,
        }
    }
}

/// Memoised index quantities of one brake-symmetric system.
pub struct IterationAnalysis<'a> {
    b: CoefficientPath,
    opts: IndexOptions,
    indexer: &'a OmegaIndexer,
    gamma1: SymplecticPath,
    gamma2_end: Mat,
    l0: HashMap<usize, IndexPair>,
    l1: Option<IndexPair>,
    omega: HashMap<u64, IndexPair>,
    l0_sqrt: Option<IndexPair>,
}

impl<'a> IterationAnalysis<'a> {
    pub fn new(b: &CoefficientPath, indexer: &'a OmegaIndexer, opts: &IndexOptions) -> Result<Self> {
        if b.n() != indexer.n() {
            return Err(Error::InvalidDimension("indexer dimension differs from system".into()));
        }
        let gamma1 = flow::fundamental_solution(b, 1.0, opts.steps_for(1.0))?;
        let gamma2_end = flow::doubled_endpoint(gamma1.endpoint())?;
        Ok(Self {
            b: b.clone(),
            opts: opts.clone(),
            indexer,
            gamma1,
            gamma2_end,
            l0: HashMap::new(),
            l1: None,
            omega: HashMap::new(),
            l0_sqrt: None,
        })
    }

    pub fn n(&self) -> usize {
        self.b.n()
    }

    pub fn system_id(&self) -> &str {
        self.b.label()
    }

    /// `(i_{L₀}(γ^k), ν_{L₀}(γ^k))` on the iteration path.
    pub fn l0_iterate(&mut self, k: usize) -> Result<IndexPair> {
        if let Some(p) = self.l0.get(&k) {
            return Ok(*p);
        }
        let steps = self.opts.steps_for(1.0);
        let b = &self.b;
        let base = &self.gamma1;
        let pair = index::index_from_family(
            |eps| {
                if eps == 0.0 {
                    flow::iterate_path(base, k)
                } else {
                    flow::iterate_path(&flow::fundamental_solution(&b.shifted(-eps), 1.0, steps)?, k)
                }
            },
            &self.opts,
            Boundary::L0,
        )?;
        self.l0.insert(k, pair);
        Ok(pair)
    }

    /// `(i_{L₁}(γ¹), ν_{L₁}(γ¹))`.
    pub fn l1(&mut self) -> Result<IndexPair> {
        if let Some(p) = self.l1 {
            return Ok(p);
        }
        let frame = LagrangianFrame::l1(self.n())?;
        let pair = index::l_index_with(&self.b, &frame, 1.0, &self.opts)?;
        self.l1 = Some(pair);
        Ok(pair)
    }

    /// `(i_ω(γ²), ν_ω(γ²))`.
    pub fn omega(&mut self, w: Omega) -> Result<IndexPair> {
        let key = w.theta().to_bits();
        if let Some(p) = self.omega.get(&key) {
            return Ok(*p);
        }
        let pair = IndexPair {
            index: self.indexer.omega_index(&self.b, w)?.resolved_index,
            nullity: periodic::monodromy_nullity(&self.gamma2_end, w),
            boundary: w.boundary(),
        };
        self.omega.insert(key, pair);
        Ok(pair)
    }

    /// `(i^{L₀}_{√−1}(γ¹), ν^{L₀}_{√−1}(γ¹))`.
    pub fn l0_sqrt_minus_one(&mut self) -> Result<IndexPair> {
        if let Some(p) = self.l0_sqrt {
            return Ok(p);
        }
        let one = self.l0_iterate(1)?;
        let two = self.l0_iterate(2)?;
        let pair = IndexPair {
            index: two.index - one.index,
            nullity: two.nullity - one.nullity,
            boundary: Omega::sqrt_minus_one().boundary(),
        };
        self.l0_sqrt = Some(pair);
        Ok(pair)
    }

    /// `ν₁(γ^{2k}) = dim ker(γ(2)^k − I)`.
    pub fn nu_one_of_power(&self, k: usize) -> usize {
        let dim = self.gamma2_end.nrows();
        let mut power = Mat::identity(dim, dim);
        for _ in 0..k {
            power = &power * &self.gamma2_end;
        }
        periodic::monodromy_nullity(&power, Omega::one())
    }
}

fn omega_term_key(i: usize, k: usize) -> String {
    format!("omega_{}_{}", 2 * i, k)
}

/// Bott-type identity for odd `k ≥ 3`:
/// `i_{L₀}(γ^k) = i_{L₀}(γ¹) + Σ_{i=1}^{(k−1)/2} i_{ω_k^{2i}}(γ²)`, and the
/// same for nullities, with `ω_k = e^{πi/k}`.
pub fn verify_bott_odd(a: &mut IterationAnalysis<'_>, k: usize) -> Result<VerificationReport> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::DomainMismatch(format!("odd k ≥ 3 required, got {k}")));
    }
    let lhs = a.l0_iterate(k)?;
    let base = a.l0_iterate(1)?;
    let mut terms = BTreeMap::new();
    terms.insert(format!("i_L0(gamma^{k})"), lhs.index);
    terms.insert(format!("nu_L0(gamma^{k})"), lhs.nullity as i64);
    terms.insert("i_L0(gamma^1)".into(), base.index);
    terms.insert("nu_L0(gamma^1)".into(), base.nullity as i64);
    let (mut i_rhs, mut nu_rhs) = (base.index, base.nullity as i64);
    for i in 1..=(k - 1) / 2 {
        let p = a.omega(Omega::root_of_unity(i as i64, k as i64))?;
        terms.insert(format!("i_{}", omega_term_key(i, k)), p.index);
        terms.insert(format!("nu_{}", omega_term_key(i, k)), p.nullity as i64);
        i_rhs += p.index;
        nu_rhs += p.nullity as i64;
    }
    let relations = vec![
        Relation::equality("index", lhs.index, i_rhs),
        Relation::equality("nullity", lhs.nullity as i64, nu_rhs),
    ];
    Ok(VerificationReport::new(a.system_id(), Claim::BottOdd, Some(k), relations, terms))
}

/// Even `k ≥ 4`: the middle term is `i^{L₀}_{√−1}(γ¹)`.
pub fn verify_bott_even(a: &mut IterationAnalysis<'_>, k: usize) -> Result<VerificationReport> {
    if k < 4 || !k.is_multiple_of(2) {
        return Err(Error::DomainMismatch(format!("even k ≥ 4 required, got {k}")));
    }
    let lhs = a.l0_iterate(k)?;
    let base = a.l0_iterate(1)?;
    let mid = a.l0_sqrt_minus_one()?;
    let mut terms = BTreeMap::new();
    terms.insert(format!("i_L0(gamma^{k})"), lhs.index);
    terms.insert(format!("nu_L0(gamma^{k})"), lhs.nullity as i64);
    terms.insert("i_L0(gamma^1)".into(), base.index);
    terms.insert("nu_L0(gamma^1)".into(), base.nullity as i64);
    terms.insert("i_L0_sqrt(-1)(gamma^1)".into(), mid.index);
    terms.insert("nu_L0_sqrt(-1)(gamma^1)".into(), mid.nullity as i64);
    let mut i_rhs = base.index + mid.index;
    let mut nu_rhs = (base.nullity + mid.nullity) as i64;
    for i in 1..k / 2 {
        let p = a.omega(Omega::root_of_unity(i as i64, k as i64))?;
        terms.insert(format!("i_{}", omega_term_key(i, k)), p.index);
        terms.insert(format!("nu_{}", omega_term_key(i, k)), p.nullity as i64);
        i_rhs += p.index;
        nu_rhs += p.nullity as i64;
    }
    let relations = vec![
        Relation::equality("index", lhs.index, i_rhs),
        Relation::equality("nullity", lhs.nullity as i64, nu_rhs),
    ];
    Ok(VerificationReport::new(a.system_id(), Claim::BottEven, Some(k), relations, terms))
}

/// `i₁(γ²) = i_{L₀}(γ¹) + i_{L₁}(γ¹) + n` and
/// `ν₁(γ²) = ν_{L₀}(γ¹) + ν_{L₁}(γ¹)`.
pub fn verify_period_doubling(a: &mut IterationAnalysis<'_>) -> Result<VerificationReport> {
    let n = a.n() as i64;
    let l0 = a.l0_iterate(1)?;
    let l1 = a.l1()?;
    let one = a.omega(Omega::one())?;
    let mut terms = BTreeMap::new();
    terms.insert("i_1(gamma^2)".into(), one.index);
    terms.insert("nu_1(gamma^2)".into(), one.nullity as i64);
    terms.insert("i_L0(gamma^1)".into(), l0.index);
    terms.insert("nu_L0(gamma^1)".into(), l0.nullity as i64);
    terms.insert("i_L1(gamma^1)".into(), l1.index);
    terms.insert("nu_L1(gamma^1)".into(), l1.nullity as i64);
    let relations = vec![
        Relation::equality("index", one.index, l0.index + l1.index + n),
        Relation::equality("nullity", one.nullity as i64, (l0.nullity + l1.nullity) as i64),
    ];
    Ok(VerificationReport::new(a.system_id(), Claim::PeriodDoubling, None, relations, terms))
}

/// The two-sided iteration inequalities for `i_{L₀}(γ^k)`. Entries are
/// doubled so the half-integer terms stay integral.
pub fn verify_iteration_inequalities(
    a: &mut IterationAnalysis<'_>,
    k: usize,
) -> Result<VerificationReport> {
    if k == 0 {
        return Err(Error::DomainMismatch("k must be positive".into()));
    }
    let n = a.n() as i64;
    let base = a.l0_iterate(1)?.index;
    let value = a.l0_iterate(k)?.index;
    let one = a.omega(Omega::one())?;
    let (i1, nu1) = (one.index, one.nullity as i64);
    let nu1_2k = a.nu_one_of_power(k) as i64;
    let k_i = k as i64;
    let mut terms = BTreeMap::new();
    terms.insert("i_L0(gamma^1)".into(), base);
    terms.insert(format!("i_L0(gamma^{k})"), value);
    terms.insert("i_1(gamma^2)".into(), i1);
    terms.insert("nu_1(gamma^2)".into(), nu1);
    terms.insert(format!("nu_1(gamma^{})", 2 * k), nu1_2k);
    let (lower, upper) = if k % 2 == 1 {
        let lower = 2 * base + (k_i - 1) * (i1 + nu1 - n);
        let upper = 2 * base + (k_i - 1) * (i1 + n) - nu1_2k + nu1;
        (lower, upper)
    } else {
        let mid = a.l0_sqrt_minus_one()?.index;
        let minus = a.omega(Omega::minus_one())?.nullity as i64;
        terms.insert("i_L0_sqrt(-1)(gamma^1)".into(), mid);
        terms.insert("nu_-1(gamma^2)".into(), minus);
        let half = k_i / 2 - 1;
        let lower = 2 * (base + mid) + 2 * half * (i1 + nu1 - n);
        let upper = 2 * (base + mid) + 2 * half * (i1 + n) - nu1_2k + nu1 + minus;
        (lower, upper)
    };
    let relations = vec![Relation::bounds(
        "chain",
        Some(lower),
        2 * value,
        Some(upper),
        true,
    )];
    Ok(VerificationReport::new(
        a.system_id(),
        Claim::IterationInequalities,
        Some(k),
        relations,
        terms,
    ))
}

/// `i_{L₀} ≤ i^{L₀}_{√−1} ≤ i_{L₀} + n` and `|i_{L₀} − i_{L₁}| ≤ n`.
pub fn verify_index_bounds(a: &mut IterationAnalysis<'_>) -> Result<VerificationReport> {
    let n = a.n() as i64;
    let l0 = a.l0_iterate(1)?.index;
    let l1 = a.l1()?.index;
    let w = a.l0_sqrt_minus_one()?;
    let mut terms = BTreeMap::new();
    terms.insert("i_L0".into(), l0);
    terms.insert("i_L1".into(), l1);
    terms.insert("i_L0_sqrt(-1)".into(), w.index);
    terms.insert("nu_L0_sqrt(-1)".into(), w.nullity as i64);
    let relations = vec![
        Relation::bounds("sqrt(-1) index", Some(l0), w.index, Some(l0 + n), false),
        Relation::bounds("L0 vs L1", Some(-n), l0 - l1, Some(n), false),
        Relation::bounds("sqrt(-1) nullity", Some(0), w.nullity as i64, Some(n), false),
    ];
    Ok(VerificationReport::new(a.system_id(), Claim::IndexBounds, None, relations, terms))
}

/// `B > 0 ⇒ i_{L₀}(B) ≥ 0` and `i_{L₁}(B) ≥ 0`.
pub fn verify_positivity(b: &CoefficientPath, opts: &IndexOptions) -> Result<VerificationReport> {
    let min_eig = (0..=64)
        .map(|i| linalg::sym_eigenvalues(&b.eval(i as f64 / 64.0))[0])
        .fold(f64::INFINITY, f64::min);
    if min_eig <= 0.0 {
        return Err(Error::InvalidCoefficient(format!(
            "coefficient is not positive definite (min eigenvalue {min_eig:.3e})"
        )));
    }
    let l0 = index::l0_index_with(b, 1.0, opts)?;
    let l1 = index::l_index_with(b, &LagrangianFrame::l1(b.n())?, 1.0, opts)?;
    let mut terms = BTreeMap::new();
    terms.insert("i_L0".into(), l0.index);
    terms.insert("i_L1".into(), l1.index);
    let relations = vec![
        Relation::bounds("L0 nonnegative", Some(0), l0.index, None, false),
        Relation::bounds("L1 nonnegative", Some(0), l1.index, None, false),
    ];
    Ok(VerificationReport::new(b.label(), Claim::Positivity, None, relations, terms))
}

/// `i_{L₀}(B + εI) − i_{L₀}(B − εI) = ν_{L₀}(B)`.
pub fn verify_eps_jump(b: &CoefficientPath, eps: f64, opts: &IndexOptions) -> Result<VerificationReport> {
    let nu = index::l0_index_with(b, 1.0, opts)?.nullity as i64;
    let up = index::l0_index_with(&b.shifted(eps), 1.0, opts)?;
    let down = index::l0_index_with(&b.shifted(-eps), 1.0, opts)?;
    let mut terms = BTreeMap::new();
    terms.insert("nu_L0(B)".into(), nu);
    terms.insert("i_L0(B+eps)".into(), up.index);
    terms.insert("i_L0(B-eps)".into(), down.index);
    let relations = vec![Relation::equality("jump", up.index - down.index, nu)];
    Ok(VerificationReport::new(b.label(), Claim::EpsJump, None, relations, terms))
}

/// Largest node-wise distance between the iteration path and direct
/// integration on `[0, k]`, relative to `max(1, ‖γ(t)‖)`.
pub fn iterate_fidelity(b: &CoefficientPath, k: usize, steps_per_unit: usize) -> Result<f64> {
    let g1 = flow::fundamental_solution(b, 1.0, steps_per_unit)?;
    let it = flow::iterate_path(&g1, k)?;
    let direct = flow::fundamental_solution(b, k as f64, steps_per_unit * k)?;
    if it.len() != direct.len() {
        return Err(Error::DomainMismatch("iteration and direct grids differ".into()));
    }
    let mut worst = 0.0_f64;
    for (a, d) in it.values().iter().zip(direct.values()) {
        let scale = linalg::max_abs(d).max(1.0);
        worst = worst.max(linalg::max_abs(&(a - d)) / scale);
    }
    Ok(worst)
}

/// All reports for one system: Bott identities for `k ∈ bott_ks`, period
/// doubling, iteration inequalities for `k ∈ 1..=chain_max`, and bounds.
pub fn verify_system(
    b: &CoefficientPath,
    indexer: &OmegaIndexer,
    opts: &IndexOptions,
    bott_ks: &[usize],
    chain_max: usize,
) -> Result<Vec<VerificationReport>> {
    let mut a = IterationAnalysis::new(b, indexer, opts)?;
    let mut out = Vec::new();
    for &k in bott_ks {
        out.push(if k % 2 == 1 {
            verify_bott_odd(&mut a, k)?
        } else {
            verify_bott_even(&mut a, k)?
        });
    }
    out.push(verify_period_doubling(&mut a)?);
    for k in 1..=chain_max {
        out.push(verify_iteration_inequalities(&mut a, k)?);
    }
    out.push(verify_index_bounds(&mut a)?);
    Ok(out)
}

/// Runs [`verify_system`] over seeded random systems in parallel; results
/// are ordered by system index. Dimensions alternate between `1` and `2`.
pub fn run_suite(
    seed: u64,
    systems: usize,
    indexers: &[OmegaIndexer],
    opts: &IndexOptions,
    bott_ks: &[usize],
    chain_max: usize,
) -> Result<Vec<VerificationReport>> {
    let batches: Vec<Result<Vec<VerificationReport>>> = (0..systems)
        .into_par_iter()
        .map(|i| {
            let n = 1 + i % 2;
            let indexer = indexers
                .iter()
                .find(|x| x.n() == n)
                .ok_or_else(|| Error::InvalidDimension(format!("no indexer for n = {n}")))?;
            let b = seeded_system(seed, i, n)?;
            verify_system(&b, indexer, opts, bott_ks, chain_max)
        })
        .collect();
    let mut out = Vec::new();
    for batch in batches {
        out.extend(batch?);
    }
    Ok(out)
}

/// Fails with the full report of the first relation that does not hold.
pub fn ensure_all_pass(reports: &[VerificationReport]) -> Result<()> {
    if let Some(bad) = reports.iter().find(|r| !r.pass) {
        return Err(Error::VerificationFailed(serde_json::to_string_pretty(bad)?));
    }
    Ok(())
}

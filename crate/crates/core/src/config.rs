//! Experiment configuration files and the built-in system catalog.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::CoefficientPath;
use crate::hamiltonian::{self, HamiltonianSpec};
use crate::iteration;
use crate::linalg::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Index,
    IterateVerify,
    GalerkinCheck,
    Solve,
    Subharmonic,
    Audit,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Index => "index",
            Kind::IterateVerify => "iterate-verify",
            Kind::GalerkinCheck => "galerkin-check",
            Kind::Solve => "solve",
            Kind::Subharmonic => "subharmonic",
            Kind::Audit => "audit",
        }
    }
}

/// Which system to run on. Named built-ins take the listed overrides;
/// `constant` supplies an inline `2n×2n` coefficient for `LINEAR`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    pub n: usize,
    pub period: f64,
    pub beta0: f64,
    /// `B̂ = c·I` for `LINEAR` when no inline matrix is given.
    pub scalar: f64,
    pub constant: Option<Vec<Vec<f64>>>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self { name: "QUARTIC".into(), n: 1, period: 2.0, beta0: 0.5, scalar: 0.0, constant: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Solver tolerance on the dual gradient norm.
    pub gradient: f64,
    pub distinct: f64,
    pub residual: f64,
    pub fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gradient: 1e-8, distinct: 1e-4, residual: 1e-6, fd: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Integration steps per unit normal time.
    pub grid: usize,
    /// Galerkin truncation `m`.
    pub m: usize,
    /// Fourier modes of the `ω`-index forms.
    pub omega_modes: usize,
    /// Quadrature panels per unit normal time; `0` selects `4m+4`.
    pub quadrature: usize,
    /// Number of seeded systems for suite runs.
    pub systems: usize,
    /// Newton seeds per mode amplitude list and random seeds.
    pub seeds: usize,
    pub tau: f64,
    pub bott_k: Vec<usize>,
    pub chain_max: usize,
    pub j: Vec<usize>,
    pub k: Vec<usize>,
    pub truncation_radius: f64,
    pub audit_samples: usize,
    pub tolerances: Tolerances,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            grid: 1024,
            m: 32,
            omega_modes: 16,
            quadrature: 0,
            systems: 20,
            seeds: 4,
            tau: 1.0,
            bott_k: vec![3, 4, 5, 6],
            chain_max: 6,
            j: vec![1],
            k: vec![5],
            truncation_radius: 4.0,
            audit_samples: 1000,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub json: bool,
    pub csv: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn new(kind: Kind) -> Self {
        let mut system = SystemConfig::default();
        if matches!(kind, Kind::Index | Kind::IterateVerify | Kind::GalerkinCheck) {
            system.name = "LINEAR-RANDOM".into();
        }
        Self { kind, seed: 0, system, numerics: Numerics::default(), output: OutputConfig::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.numerics.tolerances;
        for (name, v) in [("gradient", t.gradient), ("distinct", t.distinct), ("residual", t.residual), ("fd", t.fd)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        let nm = &self.numerics;
        if nm.grid < 16 {
            return Err(Error::Config("grid must be at least 16 steps per unit".into()));
        }
        if self.system.n == 0 {
            return Err(Error::Config("system.n must be at least 1".into()));
        }
        if !(self.system.period > 0.0) {
            return Err(Error::Config("system.period must be positive".into()));
        }
        match self.kind {
            Kind::Index => {
                if !(nm.tau > 0.0) {
                    return Err(Error::Config("index runs need tau > 0".into()));
                }
            }
            Kind::IterateVerify => {
                if nm.systems == 0 || nm.bott_k.is_empty() {
                    return Err(Error::Config("iterate-verify needs systems ≥ 1 and a nonempty bott_k".into()));
                }
            }
            Kind::GalerkinCheck | Kind::Solve => {
                if nm.m == 0 {
                    return Err(Error::Config("m must be positive".into()));
                }
                if nm.quadrature != 0 && nm.quadrature < 4 * nm.m + 4 {
                    return Err(Error::Config(format!(
                        "quadrature = {} panels cannot resolve m = {} (need at least {})",
                        nm.quadrature,
                        nm.m,
                        4 * nm.m + 4
                    )));
                }
                if self.kind == Kind::Solve && nm.j.is_empty() {
                    return Err(Error::Config("solve needs at least one j".into()));
                }
            }
            Kind::Subharmonic => {
                if nm.j.is_empty() || nm.k.is_empty() || nm.j.contains(&0) || nm.k.contains(&0) {
                    return Err(Error::Config("subharmonic needs nonempty positive j and k lists".into()));
                }
            }
            Kind::Audit => {
                if nm.audit_samples < 1000 {
                    return Err(Error::Config("audit needs at least 1000 samples".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuiltinInfo {
    pub name: &'static str,
    pub description: &'static str,
}

pub fn builtin_systems() -> Vec<BuiltinInfo> {
    vec![
        BuiltinInfo { name: "QUARTIC", description: "Ĥ = (2+cos(2πt/T))|z|⁴, θ = 1/4, B̂ ≡ 0" },
        BuiltinInfo { name: "QUARTIC-B", description: "quartic Ĥ with B̂ = (β₀/2)(1+cos(2πt/T))·I" },
        BuiltinInfo { name: "LINEAR", description: "Ĥ ≡ 0 with constant B̂ (scalar·I or inline matrix)" },
        BuiltinInfo { name: "LINEAR-RANDOM", description: "seeded random brake-symmetric B on [0, 2]" },
        BuiltinInfo { name: "LINEAR-POSITIVE", description: "seeded random positive-definite brake-symmetric B" },
    ]
}

fn constant_matrix(rows: &[Vec<f64>], n: usize) -> Result<Mat> {
    let d = 2 * n;
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Config(format!("inline constant must be {d}×{d}")));
    }
    Ok(Mat::from_fn(d, d, |a, b| rows[a][b]))
}

/// The Hamiltonian named by the system section.
pub fn hamiltonian(sys: &SystemConfig) -> Result<HamiltonianSpec> {
    match sys.name.as_str() {
        "QUARTIC" => hamiltonian::quartic(sys.n, sys.period),
        "QUARTIC-B" => hamiltonian::quartic_b(sys.n, sys.period, sys.beta0),
        "LINEAR" => {
            let b = match &sys.constant {
                Some(rows) => CoefficientPath::constant(constant_matrix(rows, sys.n)?)?,
                None => CoefficientPath::scalar(sys.n, sys.scalar)?,
            };
            let beta0 = crate::linalg::norm2(&b.eval(0.0));
            hamiltonian::linear(b, beta0, sys.period)
        }
        other => Err(Error::Config(format!("`{other}` is not a Hamiltonian built-in"))),
    }
}

/// Linear coefficients for index-type runs: the seeded family, or the
/// normal-time `B̂` of a named Hamiltonian.
pub fn linear_systems(sys: &SystemConfig, seed: u64, count: usize) -> Result<Vec<CoefficientPath>> {
    match sys.name.as_str() {
        "LINEAR-RANDOM" => (0..count).map(|i| iteration::seeded_system(seed, i, sys.n)).collect(),
        "LINEAR-POSITIVE" => (0..count).map(|i| iteration::seeded_positive_system(seed, i, sys.n)).collect(),
        _ => {
            let spec = hamiltonian(sys)?;
            let label = format!("B̂({})", spec.label);
            let flags = spec.bhat.flags();
            let b = CoefficientPath::from_fn(spec.n, label, move |s| spec.normal_bhat(s))?.with_flags(flags);
            Ok(vec![b])
        }
    }
}

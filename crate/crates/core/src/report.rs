//! Experiment orchestration and machine-readable output.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::brake::{self, BrakeSolution, FamilyReport, PipelineOptions};
use crate::config::{self, ExperimentConfig, Kind};
use crate::error::{Error, Result};
use crate::galerkin::{galerkin_dimension_check, find_critical_points, DimensionOptions, DimensionReport, SolveReport, SolverOptions};
use crate::hamiltonian::{self, ConditionVerdict, Verdict};
use crate::index::{self, IndexOptions, IndexPair};
use crate::iteration::{self, VerificationReport};
use crate::periodic::OmegaIndexer;
use crate::symplectic::LagrangianFrame;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever a CSV column is added, removed or reordered.
pub const CSV_SCHEMA_VERSION: u32 = 1;
/// Node-wise bound for iterated paths against direct integration.
pub const ITERATE_FIDELITY_TOL: f64 = 1e-7;
/// Perturbation used by the ε-jump rows of `iterate-verify`.
pub const EPS_JUMP: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct IndexRow {
    pub system: String,
    pub n: usize,
    pub tau: f64,
    pub l0: IndexPair,
    pub l1: IndexPair,
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityRow {
    pub system: String,
    pub k: usize,
    pub error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuitePayload {
    pub reports: Vec<VerificationReport>,
    pub fidelity: Vec<FidelityRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveEntry {
    pub report: SolveReport,
    pub solution: Option<BrakeSolution>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditPayload {
    pub system: String,
    pub verdicts: Vec<ConditionVerdict>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", content = "data", rename_all = "kebab-case")]
pub enum Payload {
    Index(Vec<IndexRow>),
    IterateVerify(SuitePayload),
    GalerkinCheck(Vec<DimensionReport>),
    Solve(Vec<SolveEntry>),
    Subharmonic(FamilyReport),
    Audit(AuditPayload),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub version: String,
    pub kind: Kind,
    /// SHA-256 of the canonical TOML form of the configuration.
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
    pub pass: bool,
    pub payload: Payload,
}

pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let digest = Sha256::digest(cfg.to_toml()?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn index_options(cfg: &ExperimentConfig) -> IndexOptions {
    IndexOptions { steps_per_unit: cfg.numerics.grid, ..Default::default() }
}

fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    let nm = &cfg.numerics;
    SolverOptions {
        tol: nm.tolerances.gradient,
        random_seeds: nm.seeds,
        seed: cfg.seed,
        truncation_radius: nm.truncation_radius,
        fd_tol: nm.tolerances.fd,
        quadrature: (nm.quadrature > 0).then_some(nm.quadrature),
        ..Default::default()
    }
}

fn run_index(cfg: &ExperimentConfig) -> Result<(Vec<IndexRow>, bool)> {
    let opts = index_options(cfg);
    let tau = cfg.numerics.tau;
    let systems = config::linear_systems(&cfg.system, cfg.seed, cfg.numerics.systems)?;
    let rows = systems
        .par_iter()
        .map(|b| {
            Ok(IndexRow {
                system: b.label().to_string(),
                n: b.n(),
                tau,
                l0: index::l0_index_with(b, tau, &opts)?,
                l1: index::l_index_with(b, &LagrangianFrame::l1(b.n())?, tau, &opts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, true))
}

fn run_iterate_verify(cfg: &ExperimentConfig) -> Result<(SuitePayload, bool)> {
    let nm = &cfg.numerics;
    let opts = index_options(cfg);
    let systems = if cfg.system.name == "LINEAR-RANDOM" {
        // dimensions alternate between 1 and 2
        (0..nm.systems)
            .map(|i| iteration::seeded_system(cfg.seed, i, 1 + i % 2))
            .collect::<Result<Vec<_>>>()?
    } else {
        config::linear_systems(&cfg.system, cfg.seed, nm.systems)?
    };
    let mut dims: Vec<usize> = systems.iter().map(|b| b.n()).collect();
    dims.sort_unstable();
    dims.dedup();
    let indexers: Vec<OmegaIndexer> = dims.iter().map(|&n| OmegaIndexer::shared(n)).collect::<Result<_>>()?;
    let ks: Vec<usize> = (1..=nm.chain_max).chain(nm.bott_k.iter().copied()).collect();
    let max_k = ks.iter().copied().max().unwrap_or(1);
    let batches = systems
        .par_iter()
        .map(|b| {
            let indexer = indexers.iter().find(|x| x.n() == b.n()).expect("indexer per dimension");
            let mut reports = iteration::verify_system(b, indexer, &opts, &nm.bott_k, nm.chain_max)?;
            reports.push(iteration::verify_eps_jump(b, EPS_JUMP, &opts)?);
            let fidelity = (1..=max_k)
                .map(|k| {
                    let error = iteration::iterate_fidelity(b, k, nm.grid)?;
                    Ok(FidelityRow { system: b.label().to_string(), k, error, pass: error <= ITERATE_FIDELITY_TOL })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((reports, fidelity))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut payload = SuitePayload { reports: Vec::new(), fidelity: Vec::new() };
    for (r, f) in batches {
        payload.reports.extend(r);
        payload.fidelity.extend(f);
    }
    let pass = payload.reports.iter().all(|r| r.pass) && payload.fidelity.iter().all(|f| f.pass);
    Ok((payload, pass))
}

fn run_galerkin_check(cfg: &ExperimentConfig) -> Result<(Vec<DimensionReport>, bool)> {
    let opts = DimensionOptions { index: index_options(cfg), ..Default::default() };
    let systems = config::linear_systems(&cfg.system, cfg.seed, cfg.numerics.systems)?;
    let m = cfg.numerics.m;
    let jobs: Vec<_> = systems.iter().flat_map(|b| [(b, true), (b, false)]).collect();
    let reports = jobs
        .par_iter()
        .map(|&(b, l0)| {
            let frame = if l0 { LagrangianFrame::l0(b.n())? } else { LagrangianFrame::l1(b.n())? };
            galerkin_dimension_check(b, &frame, 1, m, &opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass_m && r.pass_2m);
    Ok((reports, pass))
}

fn run_solve(cfg: &ExperimentConfig) -> Result<(Vec<SolveEntry>, bool)> {
    let spec = config::hamiltonian(&cfg.system)?;
    let opts = solver_options(cfg);
    let tol = cfg.numerics.tolerances.residual;
    let samples = 512;
    let mut entries = Vec::new();
    for &j in &cfg.numerics.j {
        if !spec.admits(j) {
            return Err(Error::HypothesisViolation(format!("j = {j} is outside the admissible range")));
        }
        let report = find_critical_points(&spec, cfg.numerics.m, j, &opts)?;
        let (solution, error) = match report.witness() {
            Some(cp) => match BrakeSolution::from_critical_point(&spec, cp, samples * j, tol) {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            },
            None => (None, Some("no nonconstant critical point inside the Morse window".into())),
        };
        entries.push(SolveEntry { report, solution, error });
    }
    let pass = entries.iter().all(|e| {
        e.report.fd.pass && e.solution.as_ref().is_some_and(|s| s.residuals.max() <= tol && s.morse_window)
    });
    Ok((entries, pass))
}

fn run_subharmonic(cfg: &ExperimentConfig) -> Result<(FamilyReport, bool)> {
    let spec = config::hamiltonian(&cfg.system)?;
    let nm = &cfg.numerics;
    let opts = PipelineOptions {
        m: nm.m,
        solver: solver_options(cfg),
        index: index_options(cfg),
        distinct_tol: nm.tolerances.distinct,
        residual_tol: nm.tolerances.residual,
        ..Default::default()
    };
    let report = brake::subharmonic_pipeline(&spec, &nm.j, &nm.k, &opts)?;
    let pass = report.pass && report.solutions.iter().all(|s| s.fd.pass);
    Ok((report, pass))
}

fn run_audit(cfg: &ExperimentConfig) -> Result<(AuditPayload, bool)> {
    let spec = config::hamiltonian(&cfg.system)?;
    let verdicts = hamiltonian::audit_conditions(&spec, cfg.numerics.audit_samples);
    let pass = verdicts.iter().all(|v| v.verdict == Verdict::Pass);
    Ok((AuditPayload { system: spec.label.clone(), verdicts }, pass))
}

/// Runs the pipeline named by `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let (payload, pass) = match cfg.kind {
        Kind::Index => run_index(cfg).map(|(p, ok)| (Payload::Index(p), ok))?,
        Kind::IterateVerify => run_iterate_verify(cfg).map(|(p, ok)| (Payload::IterateVerify(p), ok))?,
        Kind::GalerkinCheck => run_galerkin_check(cfg).map(|(p, ok)| (Payload::GalerkinCheck(p), ok))?,
        Kind::Solve => run_solve(cfg).map(|(p, ok)| (Payload::Solve(p), ok))?,
        Kind::Subharmonic => run_subharmonic(cfg).map(|(p, ok)| (Payload::Subharmonic(p), ok))?,
        Kind::Audit => run_audit(cfg).map(|(p, ok)| (Payload::Audit(p), ok))?,
    };
    Ok(RunRecord {
        version: ARTIFACT_VERSION.to_string(),
        kind: cfg.kind,
        config_hash: config_hash(cfg)?,
        seed: cfg.seed,
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        pass,
        payload,
    })
}

pub fn emit_json(record: &RunRecord, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, record)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// One CSV row: the same eight columns for every run kind.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub schema: u32,
    pub kind: &'static str,
    pub system: String,
    pub item: String,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub quantity: String,
    pub value: f64,
    pub expected: Option<f64>,
    pub pass: Option<bool>,
}

fn row(kind: Kind, system: &str, item: impl Into<String>, quantity: impl Into<String>, value: f64) -> CsvRow {
    CsvRow {
        schema: CSV_SCHEMA_VERSION,
        kind: kind.name(),
        system: system.to_string(),
        item: item.into(),
        k: None,
        m: None,
        quantity: quantity.into(),
        value,
        expected: None,
        pass: None,
    }
}

/// Flattens the tabular content of a record: indices, dimension counts,
/// distinctness distances and condition verdicts.
pub fn csv_rows(record: &RunRecord) -> Vec<CsvRow> {
    let kind = record.kind;
    let mut out = Vec::new();
    match &record.payload {
        Payload::Index(rows) => {
            for r in rows {
                out.push(row(kind, &r.system, "L0", "index", r.l0.index as f64));
                out.push(row(kind, &r.system, "L0", "nullity", r.l0.nullity as f64));
                out.push(row(kind, &r.system, "L1", "index", r.l1.index as f64));
                out.push(row(kind, &r.system, "L1", "nullity", r.l1.nullity as f64));
            }
        }
        Payload::IterateVerify(p) => {
            for rep in &p.reports {
                let claim = serde_json::to_value(rep.claim).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                for rel in &rep.relations {
                    let mut r = row(kind, &rep.system_id, claim.clone(), rel.label.clone(), rel.value as f64);
                    r.k = rep.k;
                    r.expected = if rel.lower == rel.upper { rel.lower.map(|v| v as f64) } else { None };
                    r.pass = Some(rel.pass);
                    out.push(r);
                }
            }
            for f in &p.fidelity {
                let mut r = row(kind, &f.system, "fidelity", "max_node_error", f.error);
                r.k = Some(f.k);
                r.expected = Some(ITERATE_FIDELITY_TOL);
                r.pass = Some(f.pass);
                out.push(r);
            }
        }
        Payload::GalerkinCheck(reports) => {
            for rep in reports {
                let frame = format!("{:?}", rep.frame);
                for d in &rep.rows {
                    for (q, v, e) in [
                        ("plus", d.plus, d.expected_plus),
                        ("zero", d.zero, d.expected_zero),
                        ("minus", d.minus, d.expected_minus),
                    ] {
                        let mut r = row(kind, &rep.label, frame.clone(), q, v as f64);
                        r.m = Some(d.m);
                        r.expected = Some(e as f64);
                        r.pass = Some(v as i64 == e);
                        out.push(r);
                    }
                }
                if let Some(m0) = rep.empirical_m0 {
                    out.push(row(kind, &rep.label, frame, "empirical_m0", m0 as f64));
                }
            }
        }
        Payload::Solve(entries) => {
            for e in entries {
                let rep = &e.report;
                let item = format!("j={}", rep.j);
                for (i, p) in rep.points.iter().enumerate() {
                    let mut push = |q: &str, v: f64| {
                        let mut r = row(kind, &rep.label, format!("{item}:point={i}"), q, v);
                        r.m = Some(rep.m);
                        out.push(r);
                    };
                    push("critical_value", p.value);
                    push("grad_norm", p.grad_norm);
                    push("morse_index", p.morse_index as f64);
                    push("morse_nullity", p.morse_nullity as f64);
                    push("sup_norm", p.sup_norm);
                }
                if let Some(s) = &e.solution {
                    let mut r = row(kind, &rep.label, item, "residual_max", s.residuals.max());
                    r.m = Some(rep.m);
                    r.pass = Some(s.residuals.max() <= record.config.numerics.tolerances.residual);
                    out.push(r);
                }
            }
        }
        Payload::Subharmonic(fam) => {
            for s in &fam.solutions {
                if let Some(sol) = &s.solution {
                    let item = format!("j={}", s.j);
                    let mut push = |q: &str, v: f64| {
                        let mut r = row(kind, &fam.label, item.clone(), q, v);
                        r.m = Some(fam.m);
                        out.push(r);
                    };
                    push("critical_value", sol.critical_value);
                    push("grad_norm", sol.grad_norm);
                    push("morse_index", sol.morse_index as f64);
                    push("residual_max", sol.residuals.max());
                    if let Some(p) = &sol.index_pair {
                        push("i_L0", p.index as f64);
                        push("nu_L0", p.nullity as f64);
                    }
                }
            }
            for fr in &fam.rows {
                let item = format!("j={}", fr.j);
                if let Some(d) = &fr.distinctness {
                    for (shift, dist) in d.shift_distances.iter().enumerate() {
                        let mut r = row(kind, &fam.label, item.clone(), format!("shift_distance[{shift}]"), *dist);
                        r.k = Some(fr.k);
                        out.push(r);
                    }
                    let mut r = row(kind, &fam.label, item.clone(), "min_distance", d.min_distance);
                    r.k = Some(fr.k);
                    r.expected = Some(d.tol);
                    r.pass = Some(d.distinct);
                    out.push(r);
                }
                if let Some(c) = &fr.certificate {
                    for (q, v) in [
                        ("chain_rhs", c.chain_rhs),
                        ("reduced_rhs", c.reduced_rhs),
                        ("iterate_index", c.iterate_index as f64),
                        ("measured_index", c.measured_index.as_ref().map_or(f64::NAN, |p| p.index as f64)),
                    ] {
                        let mut r = row(kind, &fam.label, item.clone(), q, v);
                        r.k = Some(fr.k);
                        out.push(r);
                    }
                }
            }
        }
        Payload::Audit(a) => {
            for v in &a.verdicts {
                let mut r = row(kind, &a.system, v.condition.clone(), "worst", v.worst.as_ref().map_or(f64::NAN, |w| w.value));
                r.pass = match v.verdict {
                    Verdict::Pass => Some(true),
                    Verdict::Fail => Some(false),
                    Verdict::Undecidable => None,
                };
                out.push(r);
            }
        }
    }
    out
}

pub fn emit_csv(record: &RunRecord, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in csv_rows(record) {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `t, z1, …, z2n` on the full period of a brake solution.
pub fn emit_trajectory_csv(sol: &BrakeSolution, samples: usize, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let d = sol.series.n * 2;
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("z{i}")));
    w.write_record(&header).map_err(csv_error)?;
    let tmax = sol.j as f64 * sol.period;
    for i in 0..=samples {
        let t = tmax * i as f64 / samples as f64;
        let z = sol.eval(t);
        let mut rec = vec![format!("{t:.17e}")];
        rec.extend(z.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::NumericalFailure(format!("csv serialization: {other:?}")),
    }
}

/// Output paths under `dir` for the run's JSON, CSV and trajectories.
pub fn artifact_paths(dir: &Path, record: &RunRecord) -> (PathBuf, PathBuf) {
    let stem = format!("{}-{}", record.kind.name(), &record.config_hash[..12]);
    (dir.join(format!("{stem}.json")), dir.join(format!("{stem}.csv")))
}

/// Writes every requested artifact and returns the paths written.
pub fn write_artifacts(record: &RunRecord, dir: &Path, json: bool, csv_out: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let (jp, cp) = artifact_paths(dir, record);
    let mut written = Vec::new();
    if json {
        emit_json(record, &jp)?;
        written.push(jp);
    }
    if csv_out {
        emit_csv(record, &cp)?;
        written.push(cp);
        let sols: Vec<&BrakeSolution> = match &record.payload {
            Payload::Solve(e) => e.iter().filter_map(|e| e.solution.as_ref()).collect(),
            Payload::Subharmonic(f) => f.solutions.iter().filter_map(|s| s.solution.as_ref()).collect(),
            _ => Vec::new(),
        };
        for s in sols {
            let p = dir.join(format!("{}-{}-trajectory-j{}.csv", record.kind.name(), &record.config_hash[..12], s.j));
            emit_trajectory_csv(s, 512 * s.j, &p)?;
            written.push(p);
        }
    }
    Ok(written)
}

//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;

use brake_index::brake::{self, BrakeSolution, PipelineOptions};
use brake_index::flow::CoefficientPath;
use brake_index::galerkin::{find_critical_points, galerkin_dimension_check, DimensionOptions, SolverOptions};
use brake_index::hamiltonian::quartic;
use brake_index::index::IndexOptions;
use brake_index::iteration::{self, IterationAnalysis, VerificationReport};
use brake_index::linalg::{Mat, Vector};
use brake_index::periodic::OmegaIndexer;
use brake_index::symplectic::LagrangianFrame;

const SEED: u64 = 7;
const GRID: usize = 1024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(results: &mut Vec<(usize, bool)>, id: usize, name: &str, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let out = f();
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{} criterion {id:>2} {name}: {} [{secs:.1}s]",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail
    );
    results.push((id, out.pass));
}

fn system(i: usize) -> CoefficientPath {
    iteration::seeded_system(SEED, i, 1 + i % 2).unwrap()
}

fn first_failure(reports: &[VerificationReport]) -> String {
    reports
        .iter()
        .find(|r| !r.pass)
        .map(|r| format!(" first failure: {}", serde_json::to_string(r).unwrap()))
        .unwrap_or_default()
}

/// Indexers for n = 1 (anchored on system 0) and n = 2 (anchored on the
/// shared reference system, which is not among the tested ones).
fn indexers(opts: &IndexOptions) -> Vec<OmegaIndexer> {
    vec![
        OmegaIndexer::calibrated(&system(0), 16, opts).unwrap(),
        OmegaIndexer::shared(2).unwrap(),
    ]
}

fn per_system<F>(count: usize, ixs: &[OmegaIndexer], opts: &IndexOptions, f: F) -> Vec<VerificationReport>
where
    F: Fn(&mut IterationAnalysis<'_>) -> Vec<VerificationReport> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let b = system(i);
            let ix = ixs.iter().find(|x| x.n() == b.n()).unwrap();
            let mut a = IterationAnalysis::new(&b, ix, opts).unwrap();
            f(&mut a)
        })
        .flatten()
        .collect()
}

fn main() {
    let opts = IndexOptions { steps_per_unit: GRID, ..Default::default() };
    let ixs = indexers(&opts);
    let mut results = Vec::new();

    criterion(&mut results, 1, "Bott identities, 20 systems, k = 3,4,5,6", || {
        let reports = per_system(20, &ixs, &opts, |a| {
            [3, 4, 5, 6]
                .iter()
                .map(|&k| {
                    if k % 2 == 1 {
                        iteration::verify_bott_odd(a, k).unwrap()
                    } else {
                        iteration::verify_bott_even(a, k).unwrap()
                    }
                })
                .collect()
        });
        let ok = reports.iter().filter(|r| r.pass).count();
        Outcome {
            pass: ok == reports.len() && reports.len() == 80,
            detail: format!("{ok}/{} identities (index and nullity rows){}", reports.len(), first_failure(&reports)),
        }
    });

    criterion(&mut results, 2, "period doubling, 19 tested + 1 anchor", || {
        let offsets: Vec<i64> = ixs.iter().map(|x| x.unit_offset()).collect();
        let reports = per_system(20, &ixs, &opts, |a| vec![iteration::verify_period_doubling(a).unwrap()]);
        let tested = &reports[1..];
        let ok = tested.iter().filter(|r| r.pass).count();
        // the unit offset is −n for any anchor
        let offsets_ok = offsets == vec![-1, -2];
        Outcome {
            pass: ok == 19 && reports[0].pass && offsets_ok,
            detail: format!(
                "{ok}/19 genuine systems, anchor {}, unit offsets {offsets:?}{}",
                if reports[0].pass { "consistent" } else { "INCONSISTENT" },
                first_failure(tested)
            ),
        }
    });

    criterion(&mut results, 3, "iteration chains, k = 1..6, 20 systems", || {
        let reports = per_system(20, &ixs, &opts, |a| {
            (1..=6).map(|k| iteration::verify_iteration_inequalities(a, k).unwrap()).collect()
        });
        for r in &reports {
            let terms: Vec<String> = r.terms.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("    chain {} k={} {}: {}", r.system_id, r.k.unwrap_or(0), if r.pass { "ok" } else { "FAIL" }, terms.join(" "));
        }
        let ok = reports.iter().filter(|r| r.pass).count();
        Outcome {
            pass: ok == reports.len() && reports.len() == 120,
            detail: format!("{ok}/{} chain reports{}", reports.len(), first_failure(&reports)),
        }
    });

    criterion(&mut results, 4, "index bounds, 50 systems", || {
        let reports = per_system(50, &ixs, &opts, |a| vec![iteration::verify_index_bounds(a).unwrap()]);
        let ok = reports.iter().filter(|r| r.pass).count();
        Outcome { pass: ok == 50, detail: format!("{ok}/50 systems{}", first_failure(&reports)) }
    });

    criterion(&mut results, 5, "positivity, 100 positive-definite systems", || {
        let reports: Vec<VerificationReport> = (0..100)
            .into_par_iter()
            .map(|i| {
                let b = iteration::seeded_positive_system(SEED, i, 1 + i % 2).unwrap();
                iteration::verify_positivity(&b, &opts).unwrap()
            })
            .collect();
        let ok = reports.iter().filter(|r| r.pass).count();
        Outcome { pass: ok == 100, detail: format!("{ok}/100 with i_L0 ≥ 0 and i_L1 ≥ 0{}", first_failure(&reports)) }
    });

    criterion(&mut results, 6, "Galerkin eigenvalue counts, 20 systems, m = 32 and 64, L0 and L1", || {
        let dopts = DimensionOptions { index: opts.clone(), ..Default::default() };
        let reports: Vec<_> = (0..20)
            .into_par_iter()
            .flat_map(|i| {
                let b = system(i);
                let n = b.n();
                [LagrangianFrame::l0(n).unwrap(), LagrangianFrame::l1(n).unwrap()]
                    .into_iter()
                    .map(|fr| galerkin_dimension_check(&b, &fr, 1, 32, &dopts).unwrap())
                    .collect::<Vec<_>>()
            })
            .collect();
        let ok = reports.iter().filter(|r| r.pass_m && r.pass_2m).count();
        let m0 = reports.iter().map(|r| r.empirical_m0.unwrap_or(usize::MAX)).max().unwrap();
        Outcome {
            pass: ok == 40 && m0 <= 32,
            detail: format!("{ok}/40 (system, frame) pairs match at m and 2m; largest empirical m0 = {m0}"),
        }
    });

    criterion(&mut results, 7, "iterate path fidelity ≤ 1e-7, k ≤ 6", || {
        let worst = (0..20)
            .into_par_iter()
            .map(|i| {
                let b = system(i);
                (1..=6).map(|k| iteration::iterate_fidelity(&b, k, GRID).unwrap()).fold(0.0_f64, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        Outcome { pass: worst <= 1e-7, detail: format!("worst node-wise relative error {worst:.3e}") }
    });

    criterion(&mut results, 8, "ε-jump, 30 systems including degenerate ones", || {
        let eps = 1e-3;
        let mut systems = vec![
            CoefficientPath::scalar(1, 0.0).unwrap(),
            CoefficientPath::scalar(1, PI).unwrap(),
            CoefficientPath::constant(Mat::from_diagonal(&Vector::from_vec(vec![PI, 1.0, PI, 1.0]))).unwrap(),
        ];
        systems.extend((0..27).map(system));
        let reports: Vec<VerificationReport> =
            systems.par_iter().map(|b| iteration::verify_eps_jump(b, eps, &opts).unwrap()).collect();
        let ok = reports.iter().filter(|r| r.pass).count();
        let degenerate: Vec<i64> = reports[..3].iter().map(|r| r.terms["nu_L0(B)"]).collect();
        Outcome {
            pass: ok == 30 && degenerate.iter().all(|&v| v > 0),
            detail: format!("{ok}/30 at ε = {eps:e}; nullities of the degenerate cases {degenerate:?}{}", first_failure(&reports)),
        }
    });

    criterion(&mut results, 9, "QUARTIC existence witness, j = 1, m = 32 vs 64", || {
        let spec = quartic(1, 2.0).unwrap();
        let sopts = SolverOptions::default();
        let r32 = find_critical_points(&spec, 32, 1, &sopts).unwrap();
        let r64 = find_critical_points(&spec, 64, 1, &sopts).unwrap();
        let (Some(w32), Some(w64)) = (r32.witness(), r64.witness()) else {
            return Outcome { pass: false, detail: "no nonconstant window point".into() };
        };
        let sol = BrakeSolution::from_critical_point(&spec, w32, 512, 1e-6).unwrap();
        let (pair, window) = brake::solution_index_pair(&spec, &sol, &opts).unwrap();
        let (n, m) = (1usize, 32usize);
        let target = m * n + n + 1;
        let morse = w32.morse_index <= target && target <= w32.morse_index + w32.morse_nullity;
        let drift = (w32.value - w64.value).abs();
        let checks = [
            ("fd", r32.fd.pass),
            ("nonconstant", w32.is_nonconstant(1e-6)),
            ("grad", w32.grad_norm <= 1e-8),
            ("morse window", morse),
            ("index window", window && pair.index <= 1 && 1 <= pair.index + pair.nullity as i64),
            ("residuals", sol.residuals.max() <= 1e-6),
            ("value drift", drift <= 1e-4),
        ];
        Outcome {
            pass: checks.iter().all(|c| c.1),
            detail: format!(
                "value {:.10} (m=64: {:.10}, drift {drift:.2e}), ‖∇φ‖ {:.2e}, m⁻ {} m⁰ {} vs {target}, (i, ν) = ({}, {}), residual {:.2e}, FD error {:.2e}; {}",
                w32.value,
                w64.value,
                w32.grad_norm,
                w32.morse_index,
                w32.morse_nullity,
                pair.index,
                pair.nullity,
                sol.residuals.max(),
                r32.fd.max_gradient_error,
                checks.iter().filter(|c| !c.1).map(|c| c.0).collect::<Vec<_>>().join(",")
            ),
        }
    });

    criterion(&mut results, 10, "QUARTIC subharmonic distinctness, j = 1, k = 5", || {
        let spec = quartic(1, 2.0).unwrap();
        let popts = PipelineOptions { index: opts.clone(), ..Default::default() };
        let fam = brake::subharmonic_pipeline(&spec, &[1], &[5], &popts).unwrap();
        let fd_ok = fam.solutions.iter().all(|s| s.fd.pass && s.fd.points == 20 && s.fd.tol <= 1e-6);
        let row = &fam.rows[0];
        let (dist, distinct) = row.distinctness.as_ref().map_or((f64::NAN, false), |d| (d.min_distance, d.distinct));
        if let Some(c) = &row.certificate {
            println!("    certificate: {}", serde_json::to_string(c).unwrap());
        }
        for s in &fam.solutions {
            if let Some(sol) = &s.solution {
                println!(
                    "    j={}: value {:.10}, residual {:.2e}, index pair {:?}",
                    s.j,
                    sol.critical_value,
                    sol.residuals.max(),
                    sol.index_pair.map(|p| (p.index, p.nullity))
                );
            } else {
                println!("    j={}: {}", s.j, s.error.clone().unwrap_or_default());
            }
        }
        Outcome {
            pass: fam.pass && fd_ok && distinct && dist > 1e-4 && row.certificate.is_some(),
            detail: format!("min shift distance {dist:.4} (> 1e-4: {distinct}), FD checks {}, family pass {}", fd_ok, fam.pass),
        }
    });

    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

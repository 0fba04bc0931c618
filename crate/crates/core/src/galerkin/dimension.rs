//! Eigenvalue counts of `P^m(A−B)P^m` against the index pair of `B`.

use serde::{Deserialize, Serialize};

use super::GalerkinSpace;
use crate::error::{Error, Result};
use crate::flow::CoefficientPath;
use crate::index::{self, IndexOptions, IndexPair};
use crate::linalg::{self, Mat};
use crate::symplectic::{FrameLabel, LagrangianFrame};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionOptions {
    /// Threshold `d`; `None` takes a quarter of the smallest nonzero
    /// `|eigenvalue|` at the finest probe.
    pub d: Option<f64>,
    /// Eigenvalues below this fraction of the largest are treated as zero
    /// when choosing `d`.
    pub zero_cutoff: f64,
    pub index: IndexOptions,
}

impl Default for DimensionOptions {
    fn default() -> Self {
        Self { d: None, zero_cutoff: 1e-7, index: IndexOptions::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionRow {
    pub m: usize,
    pub plus: usize,
    pub zero: usize,
    pub minus: usize,
    pub expected_plus: i64,
    pub expected_zero: i64,
    pub expected_minus: i64,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionReport {
    pub label: String,
    pub frame: FrameLabel,
    pub n: usize,
    pub j: usize,
    pub index_pair: IndexPair,
    pub d: f64,
    /// Probes `1, 2, 4, …` below `m`, then `m` and `2m`.
    pub rows: Vec<DimensionRow>,
    /// Smallest probe from which every later probe matches.
    pub empirical_m0: Option<usize>,
    pub pass_m: bool,
    pub pass_2m: bool,
}

impl DimensionReport {
    /// Counts (`i`, `ν`) inferred from the rows at `m` and `2m`.
    pub fn inferred(&self) -> Vec<(usize, i64, i64)> {
        let n = self.n;
        self.rows
            .iter()
            .map(|r| (r.m, r.minus as i64 - (r.m * n) as i64 - n as i64, r.zero as i64))
            .collect()
    }
}

fn spectrum(b: &CoefficientPath, p: &Mat, j: usize, m: usize) -> Result<Vec<f64>> {
    let space = GalerkinSpace::new(b.n(), m, j)?;
    let pt = p.transpose();
    let bop = space.assemble_bhat(|s| &pt * b.eval(s) * p)?;
    let op = space.assemble_a() - bop;
    let g = space.gram();
    let d = op.nrows();
    let scaled = Mat::from_fn(d, d, |a, c| op[(a, c)] / (g[a] * g[c]).sqrt());
    Ok(linalg::sym_eigenvalues(&linalg::symmetrize(&scaled)))
}

/// Compares `dim M_d^{+,0,−}(P^m(A−B)P^m)` with `mn − i − ν`, `ν`, and
/// `mn + i + n` on `[0, j]`, for the frame's boundary condition realized as
/// `PᵀBP` on the `L₀` space.
pub fn galerkin_dimension_check(
    b: &CoefficientPath,
    frame: &LagrangianFrame,
    j: usize,
    m: usize,
    opts: &DimensionOptions,
) -> Result<DimensionReport> {
    let n = b.n();
    if frame.n() != n {
        return Err(Error::InvalidDimension("frame and coefficient dimensions differ".into()));
    }
    if m == 0 || j == 0 {
        return Err(Error::Config("m and j must be positive".into()));
    }
    let pair = index::l_index_with(b, frame, j as f64, &opts.index)?;
    let p = frame.p().matrix().clone();
    let mut probes: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|&k| k < m).collect();
    probes.push(m);
    probes.push(2 * m);
    let spectra: Vec<Vec<f64>> = probes
        .iter()
        .map(|&mm| spectrum(b, &p, j, mm))
        .collect::<Result<_>>()?;
    let d = match opts.d {
        Some(d) => d,
        None => {
            let finest = spectra.last().expect("probes are nonempty");
            let scale = finest.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let cut = opts.zero_cutoff * scale;
            0.25 * finest
                .iter()
                .map(|v| v.abs())
                .filter(|&v| v > cut)
                .fold(f64::INFINITY, f64::min)
        }
    };
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::NumericalFailure(format!("invalid eigenvalue threshold d = {d}")));
    }
    let (i, nu) = (pair.index, pair.nullity as i64);
    let rows: Vec<DimensionRow> = probes
        .iter()
        .zip(&spectra)
        .map(|(&mm, sp)| {
            let plus = sp.iter().filter(|&&v| v >= d).count();
            let minus = sp.iter().filter(|&&v| v <= -d).count();
            let zero = sp.len() - plus - minus;
            let mn = (mm * n) as i64;
            let (ep, ez, em) = (mn - i - nu, nu, mn + i + n as i64);
            DimensionRow {
                m: mm,
                plus,
                zero,
                minus,
                expected_plus: ep,
                expected_zero: ez,
                expected_minus: em,
                matches: plus as i64 == ep && zero as i64 == ez && minus as i64 == em,
            }
        })
        .collect();
    let empirical_m0 = (0..rows.len())
        .find(|&k| rows[k..].iter().all(|r| r.matches))
        .map(|k| rows[k].m);
    let pass_m = rows[rows.len() - 2].matches;
    let pass_2m = rows[rows.len() - 1].matches;
    Ok(DimensionReport {
        label: b.label().to_string(),
        frame: frame.label(),
        n,
        j,
        index_pair: pair,
        d,
        rows,
        empirical_m0,
        pass_m,
        pass_2m,
    })
}

//! Derived studies built on [`maximize_score`]: bin growth, dimension and
//! efficiency sweeps, the loss threshold and the energy-conserving check.

use serde::{Deserialize, Serialize};

use super::driver::{maximize_score, OptimizationReport, OptimizeOptions};
use super::objective::ScoreProblem;
use super::params::ShareMode;
use crate::bell::energy_conserving_basis;
use crate::error::{Error, Result};
use crate::fock::{BipartiteState, FockVector};
use crate::povm::LossModel;

/// Largest interval count tried by [`maximize_with_bin_growth`].
pub const BIN_CAP: usize = 8;

/// Runs `q = 1, 2, …` until one more interval gains less than `score_tol`,
/// and reports the smaller `q`. Each `q + 1` run is warm-started from the
/// `q` optimum padded with an empty interval, so scores never decrease.
pub fn maximize_with_bin_growth(
    problem: &ScoreProblem,
    opts: &OptimizeOptions,
    score_tol: f64,
) -> Result<OptimizationReport> {
    if !(score_tol > 0.0) {
        return Err(Error::InvalidParameter("score_tol must be positive".into()));
    }
    let mut current = maximize_score(problem, &OptimizeOptions { q: 1, ..opts.clone() })?;
    if score_tol.is_infinite() {
        return Ok(current);
    }
    for q in 2..=BIN_CAP {
        let mut warm = vec![current.best_params.padded(q)];
        warm.extend(opts.warm_starts.iter().cloned());
        let next = maximize_score(
            problem,
            &OptimizeOptions {
                q,
                warm_starts: warm,
                ..opts.clone()
            },
        )?;
        if next.best_score - current.best_score < score_tol {
            return Ok(current);
        }
        current = next;
    }
    Err(Error::BinGrowthCap { cap: BIN_CAP })
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub dim: usize,
    pub report: OptimizationReport,
}

/// Best score per local dimension. Each dimension is warm-started from the
/// previous optimum, which is admissible because the smaller space embeds
/// into the larger one, so the table is nondecreasing.
pub fn dimension_sweep(dims: &[usize], template: &ScoreProblem, opts: &OptimizeOptions) -> Result<Vec<SweepPoint>> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter("empty dimension grid".into()));
    }
    if let Some(bad) = dims.iter().find(|d| !(2..=10).contains(*d)) {
        return Err(Error::InvalidParameter(format!("dimension {bad} outside [2, 10]")));
    }
    let mut sorted = dims.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out: Vec<SweepPoint> = Vec::with_capacity(sorted.len());
    for d in sorted {
        let problem = ScoreProblem {
            dim: d,
            ..template.clone()
        };
        let mut o = opts.clone();
        if let Some(prev) = out.last() {
            o.warm_starts.insert(0, prev.report.best_params.clone());
        }
        out.push(SweepPoint {
            dim: d,
            report: maximize_score(&problem, &o)?,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct EfficiencyPoint {
    pub eta: f64,
    pub report: OptimizationReport,
}

/// Re-optimized score on a grid of efficiencies, processed from the highest
/// `η` down with warm starts from the neighbour above.
pub fn efficiency_sweep(etas: &[f64], template: &ScoreProblem, opts: &OptimizeOptions) -> Result<Vec<EfficiencyPoint>> {
    if etas.is_empty() {
        return Err(Error::InvalidParameter("empty efficiency grid".into()));
    }
    let mut sorted = etas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();
    let mut out: Vec<EfficiencyPoint> = Vec::with_capacity(sorted.len());
    for eta in sorted {
        let problem = template.clone().with_loss(Some(LossModel::new(eta)?));
        let mut o = opts.clone();
        if let Some(prev) = out.last() {
            o.warm_starts.insert(0, prev.report.best_params.clone());
        }
        out.push(EfficiencyPoint {
            eta,
            report: maximize_score(&problem, &o)?,
        });
    }
    out.reverse();
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Midpoint of the final bracket.
    pub eta_c: f64,
    pub bracket: (f64, f64),
    /// Every evaluated `(η, score)`, ascending in `η`.
    pub evaluations: Vec<(f64, f64)>,
}

/// Critical efficiency below which the re-optimized score no longer beats
/// the local bound, by bisection; `None` when even `η = 1` does not violate.
///
/// `η = 0` never violates: every observable collapses to a multiple of the
/// identity and the score to a deterministic local value.
pub fn efficiency_threshold(
    template: &ScoreProblem,
    opts: &OptimizeOptions,
    bracket_tol: f64,
) -> Result<Option<ThresholdResult>> {
    if !(bracket_tol > 0.0) {
        return Err(Error::InvalidParameter("bracket_tol must be positive".into()));
    }
    let bound = template.inequality.local_bound;
    let top = maximize_score(&template.clone().with_loss(None), opts)?;
    let mut evaluations = vec![(1.0, top.best_score)];
    if top.best_score <= bound + 1e-9 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut hi_params = top.best_params.clone();
    while hi - lo > bracket_tol {
        let mid = 0.5 * (lo + hi);
        let problem = template.clone().with_loss(Some(LossModel::new(mid)?));
        let mut o = opts.clone();
        o.warm_starts.insert(0, hi_params.clone());
        let r = maximize_score(&problem, &o)?;
        evaluations.push((mid, r.best_score));
        if r.best_score > bound + 1e-9 {
            hi = mid;
            hi_params = r.best_params;
        } else {
            lo = mid;
        }
    }
    evaluations.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Some(ThresholdResult {
        eta_c: 0.5 * (lo + hi),
        bracket: (lo, hi),
        evaluations,
    }))
}

#[derive(Clone, Debug)]
pub struct EnergyPoint {
    pub total_photons: usize,
    pub report: OptimizationReport,
}

/// Best score for states with exactly `n` photons shared between the two
/// modes, for each `n` in `photon_numbers`. Settings are fully independent,
/// the most permissive choice.
pub fn energy_conserving_check(photon_numbers: &[usize], opts: &OptimizeOptions) -> Result<Vec<EnergyPoint>> {
    photon_numbers
        .iter()
        .map(|&n| {
            if !(2..=5).contains(&n) {
                return Err(Error::InvalidParameter(format!("photon number {n} outside [2, 5]")));
            }
            let basis = energy_conserving_basis(n, n + 1, n + 1)?;
            let problem = ScoreProblem::new(crate::bell::Inequality::chsh(), n + 1).with_subspace(basis);
            let o = OptimizeOptions {
                share_mode: ShareMode::FullyIndependent,
                ..opts.clone()
            };
            Ok(EnergyPoint {
                total_photons: n,
                report: maximize_score(&problem, &o)?,
            })
        })
        .collect()
}

/// Score problem whose state is pinned to `state`, so only measurements are
/// optimized: the subspace is the single vector `|state⟩`, zero-padded to a
/// square local dimension.
pub fn fixed_state_problem(inequality: crate::bell::Inequality, state: &BipartiteState<f64>) -> ScoreProblem {
    let (da, db) = state.dims();
    let d = da.max(db);
    let padded = state.resized(d, d);
    let flat = nalgebra::DVector::from_fn(d * d, |k, _| padded[(k / d, k % d)]);
    ScoreProblem::new(inequality, d).with_subspace(vec![FockVector::new(flat)])
}

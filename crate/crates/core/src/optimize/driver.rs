//! Multistart local maximization of Bell scores.

use std::sync::{Arc, Mutex};

use argmin::core::observers::{Observe, ObserverMode};
use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient, State, KV};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::neldermead::NelderMead;
use argmin::solver::quasinewton::LBFGS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{evaluate_params, Objective, ScoreProblem};
use super::params::{Layout, ParameterVector, ShareMode};
use crate::error::{Error, Result};
use crate::fock::BipartiteState;

/// Local search run from every start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalMethod {
    /// Derivative-free simplex.
    #[default]
    NelderMead,
    /// Quasi-Newton on the Hellmann–Feynman gradient.
    Gradient,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeOptions {
    pub share_mode: ShareMode,
    /// Intervals per setting.
    pub q: usize,
    /// Random starts, in addition to any warm starts.
    pub seeds: usize,
    pub rng_seed: u64,
    pub method: LocalMethod,
    pub max_iters: u64,
    /// Extra starting points tried before the random ones.
    #[serde(skip)]
    pub warm_starts: Vec<ParameterVector>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            share_mode: ShareMode::default(),
            q: 1,
            seeds: 200,
            rng_seed: 0,
            method: LocalMethod::default(),
            max_iters: 4000,
            warm_starts: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationReport {
    /// Re-evaluated from `best_params`, not taken from the local search.
    pub best_score: f64,
    pub best_params: ParameterVector,
    pub best_state: BipartiteState<f64>,
    pub q_used: usize,
    pub seeds_run: usize,
    /// Starts whose objective became non-finite or failed.
    pub seeds_discarded: usize,
    /// Index of the winning start (warm starts first).
    pub best_seed: usize,
    /// Best score after each iteration of the winning start.
    pub convergence_trace: Vec<f64>,
}

/// Standard deviation of the Gaussian used to draw starting boundaries.
const BOUNDARY_SPREAD: f64 = 1.5;

fn random_start(layout: &Layout, rng_seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index as u64);
    let normal = Normal::new(0.0, BOUNDARY_SPREAD).expect("positive spread");
    let mut x: Vec<f64> = (0..layout.settings)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    for _ in 0..layout.settings {
        let mut b: Vec<f64> = (0..2 * layout.q).map(|_| normal.sample(&mut rng)).collect();
        b.sort_by(f64::total_cmp);
        x.extend(b);
    }
    x
}

struct NegScore<'a> {
    obj: &'a Objective<'a>,
}

impl CostFunction for NegScore<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        Ok(self.obj.value(x).map_or(f64::INFINITY, |v| -v))
    }
}

/// Caches the last gradient so a line search asking for cost then gradient
/// at the same point pays for one eigendecomposition.
struct NegScoreWithGradient<'a> {
    obj: &'a Objective<'a>,
    cache: Mutex<Option<(Vec<f64>, f64, Vec<f64>)>>,
}

impl NegScoreWithGradient<'_> {
    fn both(&self, x: &[f64]) -> std::result::Result<(f64, Vec<f64>), ArgminError> {
        let mut cache = self.cache.lock().expect("cache lock");
        if let Some((cx, v, g)) = cache.as_ref() {
            if cx.as_slice() == x {
                return Ok((*v, g.clone()));
            }
        }
        let (v, g) = self
            .obj
            .value_and_gradient(x)
            .map_err(|e| ArgminError::msg(e.to_string()))?;
        let out = (-v, g.iter().map(|gi| -gi).collect::<Vec<_>>());
        *cache = Some((x.to_vec(), out.0, out.1.clone()));
        Ok(out)
    }
}

impl CostFunction for NegScoreWithGradient<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        Ok(self.both(x)?.0)
    }
}

impl Gradient for NegScoreWithGradient<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Vec<f64>) -> std::result::Result<Vec<f64>, ArgminError> {
        Ok(self.both(x)?.1)
    }
}

struct Trace(Arc<Mutex<Vec<f64>>>);

impl<I: State<Float = f64>> Observe<I> for Trace {
    fn observe_iter(&mut self, state: &I, _kv: &KV) -> std::result::Result<(), ArgminError> {
        self.0.lock().expect("trace lock").push(-state.get_best_cost());
        Ok(())
    }
}

struct LocalResult {
    score: f64,
    x: Vec<f64>,
    trace: Vec<f64>,
}

fn simplex(x0: &[f64], settings: usize) -> Vec<Vec<f64>> {
    let mut vertices = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] += if i < settings { 0.3 } else { 0.25 };
        vertices.push(v);
    }
    vertices
}

fn local_search(obj: &Objective<'_>, x0: Vec<f64>, method: LocalMethod, max_iters: u64) -> Option<LocalResult> {
    let trace = Arc::new(Mutex::new(Vec::new()));
    let best = match method {
        LocalMethod::NelderMead => {
            let solver = NelderMead::new(simplex(&x0, obj.layout.settings))
                .with_sd_tolerance(1e-13)
                .ok()?;
            let res = Executor::new(NegScore { obj }, solver)
                .configure(|s| s.max_iters(max_iters))
                .add_observer(Trace(trace.clone()), ObserverMode::Always)
                .run()
                .ok()?;
            res.state().get_best_param().cloned()
        }
        LocalMethod::Gradient => {
            let solver = LBFGS::new(MoreThuenteLineSearch::new(), 8)
                .with_tolerance_grad(1e-10)
                .ok()?
                .with_tolerance_cost(1e-14)
                .ok()?;
            let problem = NegScoreWithGradient {
                obj,
                cache: Mutex::new(None),
            };
            match Executor::new(problem, solver)
                .configure(|s| s.param(x0.clone()).max_iters(max_iters))
                .add_observer(Trace(trace.clone()), ObserverMode::Always)
                .run()
            {
                Ok(res) => res.state().get_best_param().cloned(),
                // A failed line search still leaves the start as a valid point.
                Err(_) => Some(x0),
            }
        }
    }?;
    let score = obj.value(&best).ok().filter(|s| s.is_finite())?;
    let trace = trace.lock().expect("trace lock").clone();
    Some(LocalResult { score, x: best, trace })
}

/// Multistart maximization of the top Bell-operator eigenvalue.
///
/// Deterministic for a given `rng_seed`: start `i` draws from ChaCha stream
/// `i`, starts run in parallel and the best is picked in start order.
pub fn maximize_score(problem: &ScoreProblem, opts: &OptimizeOptions) -> Result<OptimizationReport> {
    let layout = Layout::new(&problem.inequality, opts.share_mode, opts.q)?;
    if opts.seeds == 0 && opts.warm_starts.is_empty() {
        return Err(Error::InvalidParameter("at least one seed is required".into()));
    }
    let obj = Objective::new(problem, layout)?;
    let mut starts = Vec::with_capacity(opts.warm_starts.len() + opts.seeds);
    for w in &opts.warm_starts {
        starts.push(layout.flatten(w)?);
    }
    starts.extend((0..opts.seeds).map(|i| random_start(&layout, opts.rng_seed, i)));
    let seeds_run = starts.len();

    let results: Vec<Option<LocalResult>> = starts
        .into_par_iter()
        .map(|x0| local_search(&obj, x0, opts.method, opts.max_iters))
        .collect();

    let seeds_discarded = results.iter().filter(|r| r.is_none()).count();
    let mut best: Option<(usize, &LocalResult)> = None;
    for (i, r) in results.iter().enumerate() {
        if let Some(r) = r {
            if best.is_none_or(|(_, b)| r.score > b.score) {
                best = Some((i, r));
            }
        }
    }
    let (best_seed, winner) = best.ok_or(Error::AllSeedsFailed)?;
    let best_params = obj.params(&winner.x);
    let eval = evaluate_params(problem, &best_params)?;
    Ok(OptimizationReport {
        best_score: eval.score,
        best_params,
        best_state: eval.state,
        q_used: opts.q,
        seeds_run,
        seeds_discarded,
        best_seed,
        convergence_trace: winner.trace.clone(),
    })
}

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::{fidelity, rectangular_mesh, run_circuit, run_circuit_at, MeshElement, PhotonicCircuit};
use crate::error::{Error, Result};
use crate::fock::BipartiteState;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitOptions {
    pub seeds: usize,
    pub rng_seed: u64,
    /// Total-photon cutoff used during the search.
    pub cutoff: usize,
    /// Simplex iterations per restart.
    pub max_iters: u64,
    /// Simplex rebuilt around the incumbent this many extra times.
    pub restarts: usize,
    /// Squeezings are confined to `|r| < max_squeezing`.
    pub max_squeezing: f64,
    /// Truncation leakage tolerated during the search; excess is penalized
    /// so the search cannot profit from the cutoff.
    pub max_leakage: f64,
}

impl Default for CircuitOptions {
    fn default() -> Self {
        Self {
            seeds: 20,
            rng_seed: 0,
            cutoff: 10,
            max_iters: 3000,
            restarts: 2,
            max_squeezing: 1.5,
            max_leakage: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitFit {
    pub circuit: PhotonicCircuit,
    /// Re-evaluated after cutoff escalation.
    pub fidelity: f64,
    pub herald_probability: f64,
    pub leakage: f64,
    pub seeds_run: usize,
    /// Seeds whose best point still heralded with probability below 1e-12.
    pub seeds_degenerate: usize,
    pub best_seed: usize,
}

/// Flat coordinates `[u (n), (angle, phase) per mesh element, phases (n),
/// displacements (n − 2)]` with `r = r_max tanh(u)`.
struct Encoding {
    n: usize,
    pairs: Vec<(usize, usize)>,
    cutoff: usize,
    max_squeezing: f64,
}

impl Encoding {
    fn len(&self) -> usize {
        self.n + 2 * self.pairs.len() + self.n + (self.n - 2)
    }

    fn decode(&self, x: &[f64]) -> PhotonicCircuit {
        let n = self.n;
        let m = self.pairs.len();
        let mesh = self
            .pairs
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| MeshElement {
                i,
                j,
                angle: x[n + 2 * k],
                phase: x[n + 2 * k + 1],
            })
            .collect();
        PhotonicCircuit {
            n_modes: n,
            cutoff: self.cutoff,
            squeezings: x[..n].iter().map(|u| self.max_squeezing * u.tanh()).collect(),
            mesh,
            phases: x[n + 2 * m..2 * n + 2 * m].to_vec(),
            displacements: x[2 * n + 2 * m..].to_vec(),
            herald: vec![1; n - 2],
            notes: None,
        }
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let tau = std::f64::consts::TAU;
        let n = self.n;
        let mut x = Vec::with_capacity(self.len());
        x.extend((0..n).map(|_| rng.random_range(-0.8..0.8)));
        x.extend((0..2 * self.pairs.len()).map(|_| rng.random_range(0.0..tau)));
        x.extend((0..n).map(|_| rng.random_range(0.0..tau)));
        x.extend((0..n - 2).map(|_| rng.random_range(-0.8..0.8)));
        x
    }
}

/// Cost of a point whose herald probability falls below 1e-12.
const DEGENERATE_COST: f64 = 1e3;

struct Infidelity<'a> {
    enc: &'a Encoding,
    target: &'a BipartiteState<f64>,
    max_leakage: f64,
}

impl CostFunction for Infidelity<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        if x.iter().any(|v| !v.is_finite()) {
            return Ok(f64::INFINITY);
        }
        let circuit = self.enc.decode(x);
        // Degenerate heralds rank below every valid point.
        let Ok(out) = run_circuit_at(&circuit, self.enc.cutoff) else {
            return Ok(DEGENERATE_COST);
        };
        let excess = (out.leakage - self.max_leakage).max(0.0);
        Ok(1.0 - fidelity(self.target, &out) + 10.0 * excess)
    }
}

fn local_search(problem: &Infidelity<'_>, mut x: Vec<f64>, opts: &CircuitOptions) -> (f64, Vec<f64>) {
    let mut best = problem.cost(&x).unwrap_or(f64::INFINITY);
    for round in 0..=opts.restarts {
        let step = 0.4 / (1 << round) as f64;
        let mut simplex = vec![x.clone()];
        for i in 0..x.len() {
            let mut v = x.clone();
            v[i] += step;
            simplex.push(v);
        }
        let Ok(solver) = NelderMead::new(simplex).with_sd_tolerance(1e-12) else {
            break;
        };
        let Ok(res) = Executor::new(Infidelity { ..*problem }, solver)
            .configure(|s| s.max_iters(opts.max_iters))
            .run()
        else {
            break;
        };
        let state = res.state();
        if let Some(p) = state.get_best_param() {
            if state.get_best_cost() < best {
                best = state.get_best_cost();
                x = p.clone();
            }
        }
    }
    (best, x)
}

/// Multistart simplex search for the circuit whose heralded output best
/// overlaps `target`. Seed `i` draws from ChaCha stream `i`; the winner is
/// re-simulated with cutoff escalation.
pub fn optimize_circuit(target: &BipartiteState<f64>, n_modes: usize, opts: &CircuitOptions) -> Result<CircuitFit> {
    if !(3..=7).contains(&n_modes) {
        return Err(Error::InvalidParameter(format!("n_modes = {n_modes} outside [3, 7]")));
    }
    if opts.seeds == 0 {
        return Err(Error::InvalidParameter("at least one seed is required".into()));
    }
    if !(opts.max_squeezing > 0.0) {
        return Err(Error::InvalidParameter("max_squeezing must be positive".into()));
    }
    let enc = Encoding {
        n: n_modes,
        pairs: rectangular_mesh(n_modes),
        cutoff: opts.cutoff,
        max_squeezing: opts.max_squeezing,
    };
    PhotonicCircuit::blank(n_modes, opts.cutoff).validate()?;
    let problem = Infidelity {
        enc: &enc,
        target,
        max_leakage: opts.max_leakage,
    };
    let results: Vec<(f64, Vec<f64>)> = (0..opts.seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
            rng.set_stream(i as u64);
            local_search(&problem, enc.random(&mut rng), opts)
        })
        .collect();
    let seeds_degenerate = results.iter().filter(|(c, _)| !(*c < DEGENERATE_COST)).count();
    let mut best: Option<(usize, f64)> = None;
    for (i, (c, _)) in results.iter().enumerate() {
        if *c < DEGENERATE_COST && best.is_none_or(|(_, b)| *c < b) {
            best = Some((i, *c));
        }
    }
    let (best_seed, _) = best.ok_or(Error::AllHeraldsDegenerate)?;
    let circuit = enc.decode(&results[best_seed].1);
    let out = run_circuit(&circuit)?;
    Ok(CircuitFit {
        fidelity: fidelity(target, &out),
        herald_probability: out.herald_probability,
        leakage: out.leakage,
        circuit,
        seeds_run: opts.seeds,
        seeds_degenerate,
        best_seed,
    })
}

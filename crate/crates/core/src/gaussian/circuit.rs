//! Heralded preparation circuits: squeezed vacua, a passive interferometer,
//! real displacements on the ancillas and photon counting on the ancillas.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::gates::{displacement_row, squeezed_photon_distribution, squeezed_vacuum, squeezing_db};
use super::space::FockSpace;
use crate::error::{Error, Result};
use crate::fock::BipartiteState;

type C64 = Complex<f64>;

/// Largest total-photon cutoff the simulator escalates to.
pub const MAX_CUTOFF: usize = 14;
/// Leakage that stops cutoff escalation.
pub const LEAKAGE_BUDGET: f64 = 1e-6;
/// Smallest herald probability treated as an event.
pub const MIN_HERALD_PROBABILITY: f64 = 1e-12;

/// One two-mode rotation of the interferometer, see [`Gate::Beamsplit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshElement {
    pub i: usize,
    pub j: usize,
    pub angle: f64,
    pub phase: f64,
}

/// `n` vacuum modes → squeezers → mesh → per-mode phases → displacements on
/// modes `3..n` → photon counting on modes `3..n`. Modes 1 and 2 carry the
/// output. Mode indices in the mesh are zero-based.
///
/// `cutoff` bounds the total photon number: states with `Σ nᵢ < cutoff` are
/// kept, so each mode also has at most `cutoff` levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonicCircuit {
    pub n_modes: usize,
    pub cutoff: usize,
    pub squeezings: Vec<f64>,
    #[serde(default)]
    pub mesh: Vec<MeshElement>,
    /// Empty, or one phase per mode.
    #[serde(default)]
    pub phases: Vec<f64>,
    /// One real displacement per ancilla (modes `3..n`).
    pub displacements: Vec<f64>,
    /// Photon count per ancilla.
    pub herald: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl PhotonicCircuit {
    /// Circuit with a full rectangular mesh of zero rotations, zero phases
    /// and a single-photon herald on every ancilla.
    pub fn blank(n_modes: usize, cutoff: usize) -> Self {
        let mesh = rectangular_mesh(n_modes)
            .into_iter()
            .map(|(i, j)| MeshElement {
                i,
                j,
                angle: 0.0,
                phase: 0.0,
            })
            .collect();
        Self {
            n_modes,
            cutoff,
            squeezings: vec![0.0; n_modes],
            mesh,
            phases: vec![0.0; n_modes],
            displacements: vec![0.0; n_modes.saturating_sub(2)],
            herald: vec![1; n_modes.saturating_sub(2)],
            notes: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_modes;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(3..=7).contains(&n) {
            return bad(format!("n_modes = {n} outside [3, 7]"));
        }
        let max_herald = self.herald.iter().copied().max().unwrap_or(0);
        if self.cutoff < 4 || self.cutoff > MAX_CUTOFF {
            return bad(format!("cutoff {} outside [4, {MAX_CUTOFF}]", self.cutoff));
        }
        if self.cutoff < 2 * max_herald + 2 {
            return bad(format!(
                "cutoff {} too small for herald count {max_herald}",
                self.cutoff
            ));
        }
        if self.squeezings.len() != n {
            return bad(format!("{} squeezings for {n} modes", self.squeezings.len()));
        }
        if !self.phases.is_empty() && self.phases.len() != n {
            return bad(format!("{} phases for {n} modes", self.phases.len()));
        }
        if self.displacements.len() != n - 2 || self.herald.len() != n - 2 {
            return bad(format!("ancilla modes need {} displacements and herald counts", n - 2));
        }
        for m in &self.mesh {
            if m.i >= n || m.j >= n || m.i == m.j {
                return bad(format!("mesh element ({}, {}) invalid for {n} modes", m.i, m.j));
            }
        }
        let finite = self
            .squeezings
            .iter()
            .chain(&self.phases)
            .chain(&self.displacements)
            .chain(self.mesh.iter().flat_map(|m| [&m.angle, &m.phase]))
            .all(|v| v.is_finite());
        if !finite {
            return bad("non-finite circuit parameter".into());
        }
        Ok(())
    }

    /// Norm discarded by truncating the squeezed inputs at `cutoff`.
    pub fn leakage_at(&self, cutoff: usize) -> f64 {
        let mut total = vec![1.0];
        for &r in &self.squeezings {
            let p = squeezed_photon_distribution(r, cutoff);
            let mut next = vec![0.0; cutoff.min(total.len() + cutoff - 1)];
            for (a, pa) in total.iter().enumerate() {
                for (b, pb) in p.iter().enumerate() {
                    if a + b < next.len() {
                        next[a + b] += pa * pb;
                    }
                }
            }
            total = next;
        }
        (1.0 - total.iter().sum::<f64>()).max(0.0)
    }

    /// Passive single-photon transfer matrix: `a_k† → Σ_l M[l,k] a_l†`.
    pub fn interferometer(&self) -> DMatrix<C64> {
        let n = self.n_modes;
        let mut m = DMatrix::<C64>::identity(n, n);
        for e in &self.mesh {
            let mut g = DMatrix::<C64>::identity(n, n);
            let (c, s) = (e.angle.cos(), e.angle.sin());
            g[(e.i, e.i)] = C64::from(c);
            g[(e.j, e.j)] = C64::from(c);
            g[(e.j, e.i)] = C64::from_polar(s, e.phase);
            g[(e.i, e.j)] = -C64::from_polar(s, -e.phase);
            m = g * m;
        }
        for (k, &p) in self.phases.iter().enumerate() {
            for c in 0..n {
                m[(k, c)] *= C64::from_polar(1.0, p);
            }
        }
        m
    }
}

/// Rectangular mesh of nearest-neighbour pairs, `n(n−1)/2` elements.
pub fn rectangular_mesh(n_modes: usize) -> Vec<(usize, usize)> {
    (0..n_modes)
        .flat_map(|layer| ((layer % 2)..n_modes.saturating_sub(1)).step_by(2).map(|i| (i, i + 1)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct HeraldedOutput {
    /// Normalized state of modes 1 and 2, `cutoff × cutoff`.
    pub state: BipartiteState<f64>,
    pub herald_probability: f64,
    /// Input norm discarded by the photon-number truncation.
    pub leakage: f64,
    /// Cutoff actually simulated, after escalation.
    pub cutoff: usize,
}

/// Pure `n`-mode state on the total-photon-truncated space.
#[derive(Clone, Debug)]
pub struct MultimodeState {
    space: Arc<FockSpace>,
    amps: Vec<C64>,
}

impl MultimodeState {
    pub fn modes(&self) -> usize {
        self.space.modes()
    }

    /// Largest total photon number kept.
    pub fn max_total(&self) -> usize {
        self.space.max_total()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// `(occupations, amplitude)` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (&[u8], C64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .map(|(k, z)| (self.space.occupation(k), *z))
    }

    /// Zero outside the truncated space.
    pub fn amplitude(&self, occ: &[u8]) -> C64 {
        if occ.len() != self.modes() || occ.iter().map(|&n| n as usize).sum::<usize>() > self.max_total() {
            return C64::from(0.0);
        }
        self.amps[self.space.rank(occ)]
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨ψ|O|ψ⟩` for a product of ladder operators applied right to left;
    /// `(mode, true)` is a creation operator.
    fn moment(&self, ops: &[(usize, bool)]) -> C64 {
        let mut acc = C64::from(0.0);
        let mut occ = vec![0u8; self.modes()];
        'states: for (k, z) in self.amps.iter().enumerate() {
            occ.copy_from_slice(self.space.occupation(k));
            let mut factor = 1.0;
            for &(mode, create) in ops.iter().rev() {
                if create {
                    occ[mode] += 1;
                    factor *= (occ[mode] as f64).sqrt();
                } else {
                    if occ[mode] == 0 {
                        continue 'states;
                    }
                    factor *= (occ[mode] as f64).sqrt();
                    occ[mode] -= 1;
                }
            }
            acc += self.amplitude(&occ).conj() * z * factor;
        }
        acc / self.norm_squared()
    }

    /// Quadrature covariance `σ = ½⟨{ΔR, ΔR}⟩`, `R = (x₁…xₙ, p₁…pₙ)`,
    /// `x = (a + a†)/√2`; the vacuum has `σ = I/2`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.modes();
        let mean: Vec<C64> = (0..n).map(|k| self.moment(&[(k, false)])).collect();
        // Symmetrized moments of b = (a₁…aₙ, a₁†…aₙ†).
        let mut sb = DMatrix::<C64>::zeros(2 * n, 2 * n);
        for k in 0..n {
            for l in 0..n {
                let aa = self.moment(&[(k, false), (l, false)]) - mean[k] * mean[l];
                let ada = self.moment(&[(k, true), (l, false)]) - mean[k].conj() * mean[l];
                let delta = if k == l { 0.5 } else { 0.0 };
                sb[(k, l)] = aa;
                sb[(n + k, n + l)] = aa.conj();
                // ½⟨{a_k, a_l†}⟩ = ⟨a_l† a_k⟩ + δ/2
                sb[(k, n + l)] = ada.conj() + delta;
                sb[(n + k, l)] = ada + delta;
            }
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut t = DMatrix::<C64>::zeros(2 * n, 2 * n);
        for k in 0..n {
            t[(k, k)] = C64::from(h);
            t[(k, n + k)] = C64::from(h);
            t[(n + k, k)] = C64::new(0.0, -h);
            t[(n + k, n + k)] = C64::new(0.0, h);
        }
        (&t * sb * t.transpose()).map(|z| z.re)
    }
}

/// State after squeezers, mesh and phases, before displacements and
/// heralding, on the space with fewer than `cutoff` photons in total.
pub fn gaussian_stage(circuit: &PhotonicCircuit, cutoff: usize) -> Result<MultimodeState> {
    circuit.validate()?;
    if cutoff == 0 {
        return Err(Error::InvalidParameter("cutoff must be positive".into()));
    }
    let space = FockSpace::cached(circuit.n_modes, cutoff - 1);
    let columns: Vec<Vec<C64>> = circuit
        .squeezings
        .iter()
        .map(|&r| squeezed_vacuum(r, 0.0, cutoff))
        .collect();
    let mut amps: Vec<C64> = (0..space.dim())
        .map(|k| {
            space
                .occupation(k)
                .iter()
                .zip(&columns)
                .fold(C64::from(1.0), |acc, (&n, col)| acc * col[n as usize])
        })
        .collect();
    for e in &circuit.mesh {
        space.apply_beamsplitter(&mut amps, e.i, e.j, e.angle, e.phase);
    }
    if circuit.phases.iter().any(|&p| p != 0.0) {
        for (k, z) in amps.iter_mut().enumerate() {
            let phase: f64 = space
                .occupation(k)
                .iter()
                .zip(&circuit.phases)
                .map(|(&n, p)| n as f64 * p)
                .sum();
            *z *= C64::from_polar(1.0, phase);
        }
    }
    Ok(MultimodeState { space, amps })
}

/// Simulates at exactly `cutoff`, without escalation.
pub fn run_circuit_at(circuit: &PhotonicCircuit, cutoff: usize) -> Result<HeraldedOutput> {
    circuit.validate()?;
    if cutoff < circuit.cutoff || cutoff > MAX_CUTOFF {
        return Err(Error::InvalidParameter(format!(
            "cutoff {cutoff} outside [{}, {MAX_CUTOFF}]",
            circuit.cutoff
        )));
    }
    let stage = gaussian_stage(circuit, cutoff)?;
    // ⟨h|D(α)|m⟩ for every ancilla.
    let rows: Vec<Vec<C64>> = circuit
        .displacements
        .iter()
        .zip(&circuit.herald)
        .map(|(&alpha, &h)| displacement_row(alpha, h, cutoff))
        .collect();
    let mut out = DMatrix::<C64>::zeros(cutoff, cutoff);
    for (occ, z) in stage.entries() {
        let w = occ[2..]
            .iter()
            .zip(&rows)
            .fold(z, |acc, (&n, row)| acc * row[n as usize]);
        out[(occ[0] as usize, occ[1] as usize)] += w;
    }
    let herald_probability = out.norm_squared();
    if !(herald_probability >= MIN_HERALD_PROBABILITY) {
        return Err(Error::DegenerateHerald {
            probability: herald_probability,
        });
    }
    Ok(HeraldedOutput {
        state: BipartiteState::new(out)?,
        herald_probability,
        leakage: circuit.leakage_at(cutoff),
        cutoff,
    })
}

/// Simulates the circuit, raising the cutoff (up to 14) until the
/// truncation leakage is at most 1e-6.
pub fn run_circuit(circuit: &PhotonicCircuit) -> Result<HeraldedOutput> {
    circuit.validate()?;
    let cutoff = (circuit.cutoff..=MAX_CUTOFF)
        .find(|&c| circuit.leakage_at(c) <= LEAKAGE_BUDGET)
        .unwrap_or(MAX_CUTOFF);
    run_circuit_at(circuit, cutoff)
}

/// `|⟨target|τ⟩|²`, zero-padding the smaller state.
pub fn fidelity(target: &BipartiteState<f64>, output: &HeraldedOutput) -> f64 {
    target.overlap_squared(&output.state)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitReport {
    pub squeezings: Vec<f64>,
    pub squeezing_db: Vec<f64>,
    pub displacements: Vec<f64>,
}

pub fn report_parameters(circuit: &PhotonicCircuit) -> CircuitReport {
    CircuitReport {
        squeezings: circuit.squeezings.clone(),
        squeezing_db: circuit.squeezings.iter().map(|&r| squeezing_db(r)).collect(),
        displacements: circuit.displacements.clone(),
    }
}

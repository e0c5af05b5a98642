//! Oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use hombell::fock::linalg::unitary_exp;
use hombell::fock::HermitianOperator;
use hombell::gaussian::{gate_matrix, rectangular_mesh, Gate, MeshElement, PhotonicCircuit};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;

pub fn random_circuit(n: usize, cutoff: usize, seed: u64, r_max: f64) -> PhotonicCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = PhotonicCircuit::blank(n, cutoff);
    c.squeezings = (0..n).map(|_| rng.random_range(-r_max..r_max)).collect();
    c.mesh = rectangular_mesh(n)
        .into_iter()
        .map(|(i, j)| MeshElement {
            i,
            j,
            angle: rng.random_range(0.0..std::f64::consts::TAU),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        })
        .collect();
    // An out-of-order pair exercises the mirrored block layout.
    c.mesh.push(MeshElement {
        i: n - 1,
        j: 0,
        angle: 0.6,
        phase: 0.9,
    });
    c.phases = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    c.displacements = (0..n - 2).map(|_| rng.random_range(-0.6..0.6)).collect();
    c
}

/// Dense `L^n` simulator: every gate is a `gate_matrix` acting on its modes.
struct Dense {
    n: usize,
    l: usize,
    psi: DVector<C64>,
}

impl Dense {
    fn stride(&self, mode: usize) -> usize {
        self.l.pow((self.n - 1 - mode) as u32)
    }

    fn digit(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.l
    }

    fn apply_one(&mut self, g: &DMatrix<C64>, mode: usize) {
        let s = self.stride(mode);
        let mut out = DVector::zeros(self.psi.len());
        for idx in 0..self.psi.len() {
            let base = idx - self.digit(idx, mode) * s;
            let row = self.digit(idx, mode);
            for col in 0..self.l {
                out[idx] += g[(row, col)] * self.psi[base + col * s];
            }
        }
        self.psi = out;
    }

    fn apply_two(&mut self, g: &DMatrix<C64>, a: usize, b: usize) {
        let (sa, sb) = (self.stride(a), self.stride(b));
        let mut out = DVector::zeros(self.psi.len());
        for idx in 0..self.psi.len() {
            let (na, nb) = (self.digit(idx, a), self.digit(idx, b));
            let base = idx - na * sa - nb * sb;
            for ma in 0..self.l {
                for mb in 0..self.l {
                    out[idx] += g[(na * self.l + nb, ma * self.l + mb)] * self.psi[base + ma * sa + mb * sb];
                }
            }
        }
        self.psi = out;
    }
}

/// Herald probability and unnormalized output of modes 1–2.
pub fn dense_oracle(c: &PhotonicCircuit, l: usize) -> (f64, DMatrix<C64>) {
    let n = c.n_modes;
    let cols: Vec<DMatrix<C64>> = c
        .squeezings
        .iter()
        .map(|&r| {
            gate_matrix(Gate::Squeeze { r, phi: 0.0 }, l)
                .unwrap()
                .columns(0, 1)
                .into_owned()
        })
        .collect();
    let mut psi = cols[0].clone();
    for col in &cols[1..] {
        psi = psi.kronecker(col);
    }
    let mut d = Dense {
        n,
        l,
        psi: DVector::from_column_slice(psi.as_slice()),
    };
    // Same truncation as the simulator: fewer than L photons in total.
    for idx in 0..d.psi.len() {
        let total: usize = (0..n).map(|m| d.digit(idx, m)).sum();
        if total >= l {
            d.psi[idx] = C64::from(0.0);
        }
    }
    for e in &c.mesh {
        let g = gate_matrix(
            Gate::Beamsplit {
                gamma: e.angle,
                phi: e.phase,
            },
            l,
        )
        .unwrap();
        d.apply_two(&g, e.i, e.j);
    }
    for (m, &p) in c.phases.iter().enumerate() {
        d.apply_one(&gate_matrix(Gate::Phase { phi: p }, l).unwrap(), m);
    }
    for (k, &alpha) in c.displacements.iter().enumerate() {
        d.apply_one(&gate_matrix(Gate::Displace { re: alpha, im: 0.0 }, l).unwrap(), k + 2);
    }
    let mut out = DMatrix::zeros(l, l);
    for idx in 0..d.psi.len() {
        if (2..n).all(|m| d.digit(idx, m) == c.herald[m - 2]) {
            out[(d.digit(idx, 0), d.digit(idx, 1))] += d.psi[idx];
        }
    }
    (out.norm_squared(), out)
}

/// Loss adjoint by explicit contraction: `⟨m|E†(O)|n⟩ = ⟨m,0|U†(O ⊗ I)U|n,0⟩`
/// with `U = exp(γ(a†b − ab†))`, `cos²γ = η`, on a two-mode space of `2d`
/// levels per mode. `U` conserves the total photon number, so every block
/// reached from `|n,0⟩` with `n < d` is complete and the result is exact.
pub fn brute_force_loss_adjoint(o: &DMatrix<C64>, eta: f64) -> DMatrix<C64> {
    let d = o.nrows();
    let l = 2 * d;
    let idx = |a: usize, b: usize| a * l + b;
    // H = i(a†b − ab†), so exp(−iγH) = exp(γ(a†b − ab†)).
    let mut h = DMatrix::<C64>::zeros(l * l, l * l);
    for a in 0..l {
        for b in 0..l {
            if a + 1 < l && b >= 1 {
                let amp = ((a + 1) as f64 * b as f64).sqrt();
                h[(idx(a + 1, b - 1), idx(a, b))] += C64::new(0.0, amp);
                h[(idx(a, b), idx(a + 1, b - 1))] += C64::new(0.0, -amp);
            }
        }
    }
    let gamma = eta.sqrt().acos();
    let u = unitary_exp(&HermitianOperator::new(h).unwrap(), gamma).unwrap();
    let mut big = DMatrix::<C64>::zeros(l * l, l * l);
    for m in 0..d {
        for n in 0..d {
            for b in 0..l {
                big[(idx(m, b), idx(n, b))] = o[(m, n)];
            }
        }
    }
    let conj = u.adjoint() * big * &u;
    DMatrix::from_fn(d, d, |m, n| conj[(idx(m, 0), idx(n, 0))])
}

pub fn random_hermitian(d: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * C64::from(0.5)
}

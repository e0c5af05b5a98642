//! Single- and two-mode gates on truncated Fock spaces.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::linalg::unitary_exp;
use crate::fock::HermitianOperator;

type C64 = Complex<f64>;

/// Extra levels kept while exponentiating, then discarded.
const PAD: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Gate {
    /// `S(z) = exp(½(z* a² − z a†²))`, `z = r e^{iφ}`.
    Squeeze { r: f64, phi: f64 },
    /// `exp(iφ a†a)`.
    Phase { phi: f64 },
    /// `exp(γ(e^{iφ} a b† − e^{−iφ} a† b))`, sending `|1,0⟩` to
    /// `cos γ |1,0⟩ + e^{iφ} sin γ |0,1⟩`.
    Beamsplit { gamma: f64, phi: f64 },
    /// `D(α) = exp(α a − α* a†)`; note `D(α)|0⟩ = |−α⟩`.
    Displace { re: f64, im: f64 },
}

fn lowering(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C64::from((j as f64).sqrt())
        } else {
            C64::from(0.0)
        }
    })
}

/// `exp(X)` for anti-Hermitian `X`, through the Hermitian `iX`.
fn exp_anti_hermitian(x: DMatrix<C64>) -> Result<DMatrix<C64>> {
    let h = HermitianOperator::symmetrized(x * C64::i());
    unitary_exp(&h, 1.0)
}

/// Gate matrix on `cutoff` levels per mode. Two-mode gates use the row index
/// `n_a · cutoff + n_b`.
///
/// Single-mode gates exponentiate the generator on `cutoff + 48` levels and
/// keep the leading block. The beam splitter conserves `n_a + n_b`, so each
/// fixed-total block is exponentiated exactly and entries beyond the cutoff
/// are dropped.
pub fn gate_matrix(gate: Gate, cutoff: usize) -> Result<DMatrix<C64>> {
    if cutoff < 4 {
        return Err(Error::InvalidParameter(format!("gate cutoff {cutoff} below 4")));
    }
    let padded = cutoff + PAD;
    let a = lowering(padded);
    let ad = a.adjoint();
    let full = match gate {
        Gate::Phase { phi } => {
            return Ok(DMatrix::from_fn(cutoff, cutoff, |i, j| {
                if i == j {
                    C64::from_polar(1.0, phi * i as f64)
                } else {
                    C64::from(0.0)
                }
            }))
        }
        Gate::Squeeze { r, phi } => {
            let z = C64::from_polar(r, phi);
            exp_anti_hermitian((&a * &a * z.conj() - &ad * &ad * z) * C64::from(0.5))?
        }
        Gate::Displace { re, im } => {
            let alpha = C64::new(re, im);
            exp_anti_hermitian(&a * alpha - &ad * alpha.conj())?
        }
        Gate::Beamsplit { gamma, phi } => {
            let blocks = BeamsplitBlocks::new(2 * (cutoff - 1));
            let mut out = DMatrix::zeros(cutoff * cutoff, cutoff * cutoff);
            for s in 0..=2 * (cutoff - 1) {
                let u = blocks.block(s, gamma, phi);
                // Block index t is n_b; n_a = s − t.
                for t_out in 0..=s {
                    for t_in in 0..=s {
                        let (na_o, nb_o, na_i, nb_i) = (s - t_out, t_out, s - t_in, t_in);
                        if na_o < cutoff && nb_o < cutoff && na_i < cutoff && nb_i < cutoff {
                            out[(na_o * cutoff + nb_o, na_i * cutoff + nb_i)] = u[(t_out, t_in)];
                        }
                    }
                }
            }
            return Ok(out);
        }
    };
    Ok(full.view((0, 0), (cutoff, cutoff)).into_owned())
}

/// Closed-form squeezed vacuum `S(r e^{iφ})|0⟩` on `levels` levels.
pub fn squeezed_vacuum(r: f64, phi: f64, levels: usize) -> Vec<C64> {
    let mut out = vec![C64::from(0.0); levels];
    if levels == 0 {
        return out;
    }
    let ratio = -C64::from_polar(r.tanh(), phi);
    let mut amp = C64::from(1.0 / r.cosh().sqrt());
    out[0] = amp;
    let mut k = 1;
    while 2 * k < levels {
        // c_k / c_{k−1} = ratio · √((2k)(2k−1)) / (2k)
        amp *= ratio * ((2 * k - 1) as f64 / (2 * k) as f64).sqrt();
        out[2 * k] = amp;
        k += 1;
    }
    out
}

/// Row `⟨h|D(α)|m⟩`, `m < len`, for real `α`.
///
/// Columns follow `D(α)|m⟩ = (a† + α)/√m · D(α)|m−1⟩` from the coherent
/// column, which needs no truncation because `a†` only raises.
pub fn displacement_row(alpha: f64, h: usize, len: usize) -> Vec<C64> {
    // D(α)|0⟩ = |−α⟩.
    let beta = -alpha;
    let mut col: Vec<f64> = Vec::with_capacity(h + 1);
    let mut c = (-0.5 * beta * beta).exp();
    for k in 0..=h {
        if k > 0 {
            c *= beta / (k as f64).sqrt();
        }
        col.push(c);
    }
    let mut row = Vec::with_capacity(len);
    for m in 0..len {
        if m > 0 {
            for k in (0..=h).rev() {
                let up = if k > 0 { (k as f64).sqrt() * col[k - 1] } else { 0.0 };
                col[k] = (up - beta * col[k]) / (m as f64).sqrt();
            }
        }
        row.push(C64::from(col[h]));
    }
    row
}

/// Photon-number distribution of a squeezed vacuum, `levels` entries.
pub(crate) fn squeezed_photon_distribution(r: f64, levels: usize) -> Vec<f64> {
    squeezed_vacuum(r, 0.0, levels).iter().map(|z| z.norm_sqr()).collect()
}

/// Eigensystems of the `φ = 0` beam-splitter generator on each fixed-total
/// block; every `(γ, φ)` block follows by phases alone.
#[derive(Clone, Debug)]
pub(crate) struct BeamsplitBlocks {
    vectors: Vec<DMatrix<C64>>,
    values: Vec<Vec<f64>>,
}

impl BeamsplitBlocks {
    pub(crate) fn new(max_total: usize) -> Self {
        let (vectors, values) = (0..=max_total)
            .map(|s| {
                // Basis |s − t, t⟩; H = i(a b† − a† b).
                let h = DMatrix::from_fn(s + 1, s + 1, |row, col| {
                    let t = col as f64;
                    let sf = s as f64;
                    if row == col + 1 {
                        C64::new(0.0, ((sf - t) * (t + 1.0)).sqrt())
                    } else if row + 1 == col {
                        C64::new(0.0, -((sf - t + 1.0) * t).sqrt())
                    } else {
                        C64::from(0.0)
                    }
                });
                let es = crate::fock::hermitian_eigensystem(&HermitianOperator::symmetrized(h))
                    .expect("small Hermitian block");
                (es.vectors, es.values)
            })
            .unzip();
        Self { vectors, values }
    }

    /// Block on `|s − t, t⟩`, `t = n_b`.
    pub(crate) fn block(&self, s: usize, gamma: f64, phi: f64) -> DMatrix<C64> {
        let v = &self.vectors[s];
        let lam = &self.values[s];
        let mut scaled = v.clone();
        for (c, l) in lam.iter().enumerate() {
            let e = C64::from_polar(1.0, -gamma * l);
            for r in 0..=s {
                scaled[(r, c)] *= e;
            }
        }
        let mut u = scaled * v.adjoint();
        for r in 0..=s {
            for c in 0..=s {
                u[(r, c)] *= C64::from_polar(1.0, phi * (r as f64 - c as f64));
            }
        }
        u
    }
}

/// Squeezing in decibels, `−10 log₁₀(e^{−2|r|})`.
pub fn squeezing_db(r: f64) -> f64 {
    -10.0 * (-2.0 * r.abs()).exp().log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn displaced_vacuum_is_coherent() {
        let alpha: f64 = 0.5089;
        let d = gate_matrix(Gate::Displace { re: alpha, im: 0.0 }, 12).unwrap();
        for n in 0..12 {
            // D(α)|0⟩ = |−α⟩ under this sign convention.
            let want = (-alpha * alpha / 2.0).exp() * (-alpha).powi(n as i32) / factorial(n).sqrt();
            assert!((d[(n, 0)] - C64::from(want)).norm() < 1e-8, "n={n}");
        }
        assert!((d[(1, 0)].norm() - 0.4471).abs() < 5e-5);
    }

    #[test]
    fn displacement_rows_match_gate() {
        for alpha in [0.5089, -0.7174, 1.2] {
            let d = gate_matrix(Gate::Displace { re: alpha, im: 0.0 }, 14).unwrap();
            for h in 0..3 {
                let row = displacement_row(alpha, h, 14);
                for m in 0..14 {
                    assert!((row[m] - d[(h, m)]).norm() < 1e-10, "α={alpha} h={h} m={m}");
                }
            }
        }
    }

    #[test]
    fn squeeze_gate_matches_closed_form() {
        let r = 0.6872;
        let s = gate_matrix(Gate::Squeeze { r, phi: 0.0 }, 14).unwrap();
        for k in 0..7 {
            let want = r.cosh().powf(-0.5) * (-r.tanh()).powi(k as i32) * factorial(2 * k).sqrt()
                / (2f64.powi(k as i32) * factorial(k));
            assert!((s[(2 * k, 0)] - C64::from(want)).norm() < 1e-8, "k={k}");
            assert!(s[(2 * k + 1, 0)].norm() < 1e-12);
        }
        let closed = squeezed_vacuum(r, 0.4, 14);
        let gate = gate_matrix(Gate::Squeeze { r, phi: 0.4 }, 14).unwrap();
        for n in 0..14 {
            assert!((closed[n] - gate[(n, 0)]).norm() < 1e-8);
        }
    }

    #[test]
    fn beamsplitter_rotates_single_photon() {
        let (gamma, phi) = (0.37, 1.1);
        let cutoff = 5;
        let u = gate_matrix(Gate::Beamsplit { gamma, phi }, cutoff).unwrap();
        let col = u.column(cutoff); // |1,0⟩
        assert!((col[cutoff] - C64::from(gamma.cos())).norm() < 1e-10);
        assert!((col[1] - C64::from_polar(gamma.sin(), phi)).norm() < 1e-10);
        let rest: f64 = col
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != cutoff && *i != 1)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(rest < 1e-20);
    }

    #[test]
    fn gates_are_unitary_on_low_levels() {
        for g in [
            Gate::Phase { phi: 0.3 },
            Gate::Squeeze { r: 0.4, phi: 0.2 },
            Gate::Displace { re: 0.3, im: -0.2 },
        ] {
            let u = gate_matrix(g, 40).unwrap();
            let gram = u.adjoint() * &u;
            for i in 0..6 {
                for j in 0..6 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (gram[(i, j)] - C64::from(want)).norm() < 1e-9,
                        "{g:?} {i} {j} {}",
                        gram[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn decibel_conversion() {
        assert!((squeezing_db(2.3) - 19.98).abs() < 0.01);
        assert!((squeezing_db(1.485) - 12.9).abs() < 0.01);
        assert_eq!(squeezing_db(0.0), 0.0);
        assert!(gate_matrix(Gate::Phase { phi: 0.0 }, 3).is_err());
    }
}

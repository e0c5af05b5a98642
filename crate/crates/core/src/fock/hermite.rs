//! Harmonic-oscillator eigenfunctions in the position quadrature.
//!
//! Convention: `x = (a + a†)/√2`, so that
//! `ψ_n(x) = π^{-1/4} (2ⁿ n!)^{-1/2} H_n(x) e^{-x²/2}`.
//! Values come from the normalized three-term recurrence, which never forms
//! `n!` or `2ⁿ` explicitly and stays finite well past `n = 64`.

use crate::scalar::Real;

/// `π^{-1/4}`.
const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

/// `ψ_n(x)`.
pub fn wavefunction<T: Real>(n: usize, x: T) -> T {
    *wavefunctions(n, x).last().expect("n + 1 values")
}

/// `[ψ_0(x), …, ψ_{n_max}(x)]`.
///
/// Returns exact zeros when the Gaussian envelope underflows.
pub fn wavefunctions<T: Real>(n_max: usize, x: T) -> Vec<T> {
    let mut out = vec![T::zero(); n_max + 1];
    fill_wavefunctions(x, &mut out);
    out
}

/// Writes `ψ_0(x) … ψ_{len-1}(x)` into `out`.
pub fn fill_wavefunctions<T: Real>(x: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    let envelope = (-(x * x) / T::lit(2.0)).exp();
    if !x.is_finite_value() || envelope == T::zero() {
        out.iter_mut().for_each(|v| *v = T::zero());
        return;
    }
    out[0] = T::lit(PI_POW_NEG_QUARTER) * envelope;
    if out.len() == 1 {
        return;
    }
    out[1] = T::lit(std::f64::consts::SQRT_2) * x * out[0];
    for n in 1..out.len() - 1 {
        let nf = T::lit(n as f64);
        let n1 = nf + T::one();
        out[n + 1] = (T::lit(2.0) / n1).sqrt() * x * out[n] - (nf / n1).sqrt() * out[n - 1];
    }
}

/// Derivatives `ψ'_0(x) … ψ'_{n_max}(x)`, via
/// `ψ'_n = √(n/2) ψ_{n-1} − √((n+1)/2) ψ_{n+1}`.
pub fn wavefunction_derivatives<T: Real>(n_max: usize, x: T) -> Vec<T> {
    let psi = wavefunctions(n_max + 1, x);
    (0..=n_max)
        .map(|n| {
            let down = if n > 0 {
                (T::lit(n as f64) / T::lit(2.0)).sqrt() * psi[n - 1]
            } else {
                T::zero()
            };
            down - (T::lit((n + 1) as f64) / T::lit(2.0)).sqrt() * psi[n + 1]
        })
        .collect()
}

/// Physicists' Hermite polynomial coefficients in the monomial basis,
/// lowest degree first, scaled by the wavefunction normalization
/// `(√π 2ⁿ n!)^{-1/2}`. Used for root isolation of quadrature densities.
pub fn normalized_hermite_coefficients(n: usize) -> Vec<f64> {
    // H_{k+1} = 2x H_k − 2k H_{k-1}, normalized on the fly:
    // h_k = H_k / √(2^k k!) obeys h_{k+1} = √(2/(k+1)) x h_k − √(k/(k+1)) h_{k-1}.
    let mut prev = vec![0.0; n + 1];
    let mut cur = vec![0.0; n + 1];
    cur[0] = 1.0;
    for k in 0..n {
        let mut next = vec![0.0; n + 1];
        let a = (2.0 / (k + 1) as f64).sqrt();
        let b = (k as f64 / (k + 1) as f64).sqrt();
        for j in 0..n {
            next[j + 1] += a * cur[j];
        }
        for j in 0..=n {
            next[j] -= b * prev[j];
        }
        prev = cur;
        cur = next;
    }
    let norm = std::f64::consts::PI.powf(-0.25);
    cur.iter().map(|c| c * norm).collect()
}

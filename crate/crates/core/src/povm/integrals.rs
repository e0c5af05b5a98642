//! Overlap integrals `∫_I ψ_m(x) ψ_n(x) dx` over interval sets.
//!
//! Two independent routes:
//! * [`quadrature_cell_integral`]: adaptive Gauss–Legendre per segment.
//! * [`cell_matrix`]: exact antiderivative. Off the diagonal it is the
//!   Wronskian `(ψ_m ψ_n' − ψ_n ψ_m') / (2(m − n))`; on the diagonal a
//!   recurrence seeded by `∫_{-∞}^x ψ_0² = erfc(−x)/2`.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::interval::IntervalSet;
use crate::fock::hermite::fill_wavefunctions;
use crate::scalar::Real;

/// `G[m][n] = ∫_{-∞}^{x} ψ_m ψ_n` for `m, n < dim`.
pub fn cumulative_overlaps<T: Real>(dim: usize, x: T) -> DMatrix<T> {
    if x == T::infinity() {
        return DMatrix::identity(dim, dim);
    }
    if x == -T::infinity() || dim == 0 {
        return DMatrix::zeros(dim, dim);
    }
    // ψ up to index dim + 1 so that derivatives exist up to index dim.
    let mut psi = vec![T::zero(); dim + 2];
    fill_wavefunctions(x, &mut psi);
    let half = T::lit(0.5);
    let dpsi: Vec<T> = (0..=dim)
        .map(|n| {
            let down = if n > 0 {
                (T::lit(n as f64) * half).sqrt() * psi[n - 1]
            } else {
                T::zero()
            };
            down - (T::lit((n + 1) as f64) * half).sqrt() * psi[n + 1]
        })
        .collect();
    let off = |m: usize, n: usize| -> T {
        (psi[m] * dpsi[n] - psi[n] * dpsi[m]) / (T::lit(2.0) * (T::lit(m as f64) - T::lit(n as f64)))
    };

    let mut g = DMatrix::zeros(dim, dim);
    for m in 0..dim {
        for n in 0..m {
            let v = off(m, n);
            g[(m, n)] = v;
            g[(n, m)] = v;
        }
    }
    g[(0, 0)] = (-x).erfc() * half;
    for n in 1..dim {
        let nf = T::lit(n as f64);
        let mut f = g[(n - 1, n - 1)]
            - (T::lit(2.0) / nf).sqrt() * psi[n] * psi[n - 1]
            - ((nf + T::one()) / nf).sqrt() * off(n + 1, n - 1);
        if n >= 2 {
            f += ((nf - T::one()) / nf).sqrt() * off(n, n - 2);
        }
        g[(n, n)] = f;
    }
    g
}

/// Real matrix `C[m][n] = ∫_I ψ_m ψ_n` for `m, n < dim` (closed form).
pub fn cell_matrix<T: Real>(dim: usize, bins: &IntervalSet<T>) -> DMatrix<T> {
    let mut c = DMatrix::zeros(dim, dim);
    for (lo, hi) in bins.segments() {
        c += cumulative_overlaps(dim, hi) - cumulative_overlaps(dim, lo);
    }
    c
}

/// `ψ_m(a) ψ_n(a)` for all `m, n < dim`: the derivative of [`cell_matrix`]
/// with respect to an upper segment end at `a`.
pub fn boundary_density<T: Real>(dim: usize, a: T) -> DMatrix<T> {
    let mut psi = vec![T::zero(); dim];
    fill_wavefunctions(a, &mut psi);
    DMatrix::from_fn(dim, dim, |m, n| psi[m] * psi[n])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Adaptive Gauss–Legendre: bisects until the 12-point panel and its two
/// halves agree to `tol`.
pub fn adaptive_gauss_legendre<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    let (nodes, weights) = gauss_legendre(12);
    let panel = |lo: T, hi: T| -> T {
        let mid = (lo + hi) * T::lit(0.5);
        let half = (hi - lo) * T::lit(0.5);
        nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| T::lit(*w) * f(mid + half * T::lit(*t)))
            .fold(T::zero(), |acc, v| acc + v)
            * half
    };
    fn recurse<T: Real>(panel: &impl Fn(T, T) -> T, lo: T, hi: T, whole: T, tol: T, depth: usize) -> T {
        let mid = (lo + hi) * T::lit(0.5);
        let left = panel(lo, mid);
        let right = panel(mid, hi);
        if depth == 0 || (left + right - whole).abs() <= tol {
            return left + right;
        }
        recurse(panel, lo, mid, left, tol * T::lit(0.5), depth - 1)
            + recurse(panel, mid, hi, right, tol * T::lit(0.5), depth - 1)
    }
    recurse(&panel, a, b, panel(a, b), tol, 40)
}

/// Half-width beyond which `ψ_m ψ_n` is below double-precision resolution.
fn effective_support(m: usize, n: usize) -> f64 {
    (2.0 * m.max(n) as f64 + 1.0).sqrt() + 14.0
}

/// `∫_I ψ_m(x) ψ_n(x) dx` by adaptive quadrature, absolute tolerance `1e-12`.
///
/// Unbounded ends are clipped where the integrand has decayed below `1e-40`.
/// Real by construction; returned as complex for uniformity with operator
/// entries.
pub fn quadrature_cell_integral<T: Real>(m: usize, n: usize, bins: &IntervalSet<T>) -> Complex<T> {
    let reach = T::lit(effective_support(m, n));
    let len = m.max(n) + 1;
    let integrand = |x: T| {
        let mut psi = vec![T::zero(); len];
        fill_wavefunctions(x, &mut psi);
        psi[m] * psi[n]
    };
    let tol = T::lit(1e-12).max(<T as Real>::epsilon() * T::lit(16.0));
    let mut total = T::zero();
    for (lo, hi) in bins.segments() {
        let lo = lo.max(-reach);
        let hi = hi.min(reach);
        if lo < hi {
            total += adaptive_gauss_legendre(&integrand, lo, hi, tol);
        }
    }
    Complex::new(total, T::zero())
}

//! Binned homodyne measurements restricted to a two-level Fock subspace
//! `{|l⟩, |m⟩}`.
//!
//! Any two-outcome qubit POVM splits as `E₁ = μ|n⟩⟨n| + (1−μ) r₁ I`. For a
//! homodyne measurement the best projective weight towards the basis
//! `|+n⟩ = cos a|l⟩ + sin a|m⟩`, `|−n⟩ = sin a|l⟩ − cos a|m⟩` is the trace
//! distance `μ_h = ½∫|p₊ − p₋|` between the two quadrature densities, reached
//! by binning on the sign of `D = p₊ − p₋`. Whenever `cos²2a ≤ ½` the CHSH
//! score `2√2 μ_h²` is attainable.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::hermite::{fill_wavefunctions, normalized_hermite_coefficients};
use crate::fock::{hermitian_eigensystem, FockVector, HermitianOperator};
use crate::povm::{cell_matrix, povm_element, HomodyneSetting, IntervalSet, Outcome};

const SEED_COUNT: usize = 64;
const VIOLATION_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitPair {
    l: usize,
    m: usize,
}

impl QubitPair {
    pub fn new(l: usize, m: usize) -> Result<Self> {
        if l >= m {
            return Err(Error::InvalidParameter(format!(
                "qubit pair needs l < m, got ({l}, {m})"
            )));
        }
        Ok(Self { l, m })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// `E₁ = μ|n⟩⟨n| + (1−μ) r₁ I`, `E₂ = μ|n⊥⟩⟨n⊥| + (1−μ) r₂ I` with `r₁ + r₂ = 1`.
#[derive(Clone, Debug)]
pub struct PovmDecomposition {
    pub mu: f64,
    pub r1: f64,
    /// `|n⟩` in the `{|l⟩, |m⟩}` basis.
    pub direction: FockVector<f64>,
}

impl PovmDecomposition {
    /// Decomposes a complete qubit POVM `{E₁, E₂}`.
    pub fn from_elements(e1: &HermitianOperator<f64>, e2: &HermitianOperator<f64>) -> Result<Self> {
        if e1.dim() != 2 || e2.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: if e1.dim() != 2 { e1.dim() } else { e2.dim() },
            });
        }
        let deviation = e1
            .add_scaled(e2, 1.0)
            .max_entry_deviation(&HermitianOperator::identity(2));
        if deviation > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "POVM elements do not sum to identity (deviation {deviation:e})"
            )));
        }
        let es = hermitian_eigensystem(e1)?;
        let (lo, hi) = (es.values[0], es.values[1]);
        let mu = (hi - lo).clamp(0.0, 1.0);
        let r1 = if mu < 1.0 {
            (lo / (1.0 - mu)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (_, top) = es.top();
        Ok(Self {
            mu,
            r1,
            direction: FockVector::new(top),
        })
    }

    pub fn r2(&self) -> f64 {
        1.0 - self.r1
    }

    fn projector(v: &DVector<Complex<f64>>) -> DMatrix<Complex<f64>> {
        v * v.adjoint()
    }

    pub fn element1(&self) -> HermitianOperator<f64> {
        let p = Self::projector(self.direction.amplitudes()) * Complex::from(self.mu);
        HermitianOperator::symmetrized(p + DMatrix::identity(2, 2) * Complex::from((1.0 - self.mu) * self.r1))
    }

    pub fn element2(&self) -> HermitianOperator<f64> {
        let n = self.direction.amplitudes();
        let perp = DVector::from_vec(vec![-n[1].conj(), n[0].conj()]);
        let p = Self::projector(&perp) * Complex::from(self.mu);
        HermitianOperator::symmetrized(p + DMatrix::identity(2, 2) * Complex::from((1.0 - self.mu) * self.r2()))
    }
}

/// The two outcomes of a binned homodyne setting compressed onto `{|l⟩, |m⟩}`.
pub fn qubit_povm(pair: QubitPair, setting: &HomodyneSetting<f64>) -> (HermitianOperator<f64>, HermitianOperator<f64>) {
    let dim = pair.m + 1;
    let compress = |o: Outcome| {
        let full = povm_element(setting, o, dim);
        let idx = [pair.l, pair.m];
        HermitianOperator::symmetrized(DMatrix::from_fn(2, 2, |i, j| full.get(idx[i], idx[j])))
    };
    (compress(Outcome::Plus), compress(Outcome::Minus))
}

/// Coefficients of `D(x) = α(ψ_l² − ψ_m²) + β ψ_l ψ_m`.
#[derive(Clone, Copy, Debug)]
struct DensityGap {
    l: usize,
    m: usize,
    alpha: f64,
    beta: f64,
}

impl DensityGap {
    fn new(pair: QubitPair, a: f64, theta: f64) -> Self {
        let phase = (theta * (pair.m - pair.l) as f64).cos();
        Self {
            l: pair.l,
            m: pair.m,
            alpha: (2.0 * a).cos(),
            beta: 2.0 * (2.0 * a).sin() * phase,
        }
    }

    /// `(D(x), D'(x))`.
    fn eval(&self, x: f64, psi: &mut [f64]) -> (f64, f64) {
        fill_wavefunctions(x, psi);
        let d = |n: usize| {
            let down = if n > 0 {
                (n as f64 / 2.0).sqrt() * psi[n - 1]
            } else {
                0.0
            };
            down - ((n + 1) as f64 / 2.0).sqrt() * psi[n + 1]
        };
        let (pl, pm, dl, dm) = (psi[self.l], psi[self.m], d(self.l), d(self.m));
        let value = self.alpha * (pl * pl - pm * pm) + self.beta * pl * pm;
        let slope = 2.0 * self.alpha * (pl * dl - pm * dm) + self.beta * (dl * pm + pl * dm);
        (value, slope)
    }

    /// `D(x) e^{x²}` as monomial coefficients, lowest degree first.
    fn polynomial(&self) -> Vec<f64> {
        let hl = normalized_hermite_coefficients(self.l);
        let hm = normalized_hermite_coefficients(self.m);
        let mut q = vec![0.0; 2 * self.m + 1];
        for (i, ci) in hl.iter().enumerate() {
            for (j, cj) in hl.iter().enumerate() {
                q[i + j] += self.alpha * ci * cj;
            }
            for (j, cj) in hm.iter().enumerate() {
                q[i + j] += self.beta * ci * cj;
            }
        }
        for (i, ci) in hm.iter().enumerate() {
            for (j, cj) in hm.iter().enumerate() {
                q[i + j] -= self.alpha * ci * cj;
            }
        }
        let scale = q.iter().fold(0.0f64, |s, c| s.max(c.abs()));
        while q.len() > 1 && q.last().is_some_and(|c| c.abs() <= 1e-13 * scale) {
            q.pop();
        }
        q
    }

    /// Half-width outside which every root of `D` has been found.
    fn reach(&self) -> f64 {
        (2.0 * self.m as f64 + 1.0).sqrt() + 6.0
    }
}

/// Real roots of a polynomial (lowest degree first) from the companion matrix.
///
/// Parity-symmetric polynomials give companion matrices on which unshifted
/// QR iterations can stall, so the variable is translated first and a few
/// translations are tried before giving up.
fn companion_real_roots(coeffs: &[f64]) -> Option<Vec<f64>> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Some(Vec::new());
    }
    for shift in [0.1234567, -0.3141593, 0.5772157] {
        let p = translated(coeffs, shift);
        let lead = p[deg];
        let mut c = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            c[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            c[(i, deg - 1)] = -p[i] / lead;
        }
        if let Some(schur) = Schur::try_new(c, f64::EPSILON, 10_000) {
            return Some(
                schur
                    .complex_eigenvalues()
                    .iter()
                    .filter(|z| z.im.abs() <= 1e-3 * (1.0 + z.re.abs()))
                    .map(|z| z.re + shift)
                    .collect(),
            );
        }
    }
    None
}

/// Coefficients of `p(y + s)` in `y` (repeated synthetic division).
fn translated(coeffs: &[f64], s: f64) -> Vec<f64> {
    let mut p = coeffs.to_vec();
    let n = p.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            p[j] += s * p[j + 1];
        }
    }
    p
}

/// Sign-change points of `D`: companion-matrix candidates polished by
/// Newton, then cross-checked against a sign grid. A grid bracket that no
/// polished root explains is resolved by bisection.
fn sign_change_points(gap: &DensityGap) -> Result<Vec<f64>> {
    let q = gap.polynomial();
    let degree = q.len() - 1;
    let mut psi = vec![0.0; gap.m + 2];
    let reach = gap.reach();

    let mut roots: Vec<f64> = Vec::new();
    let candidates = companion_real_roots(&q).ok_or(Error::RootIsolation { degree })?;
    for mut x in candidates {
        for _ in 0..60 {
            let (v, s) = gap.eval(x, &mut psi);
            if s == 0.0 || !s.is_finite() {
                break;
            }
            let step = v / s;
            x -= step;
            if step.abs() <= 1e-14 * (1.0 + x.abs()) {
                break;
            }
        }
        if x.is_finite() && x.abs() < reach {
            roots.push(x);
        }
    }

    let n = 2000;
    let h = 2.0 * reach / n as f64;
    let mut prev = gap.eval(-reach, &mut psi).0;
    for k in 1..=n {
        let hi = -reach + h * k as f64;
        let lo = hi - h;
        let v = gap.eval(hi, &mut psi).0;
        if prev * v < 0.0 && !roots.iter().any(|r| *r > lo && *r < hi) {
            let r = bisect(|x| gap.eval(x, &mut psi).0, lo, hi, prev);
            if !r.is_finite() {
                return Err(Error::RootIsolation { degree });
            }
            roots.push(r);
        }
        prev = v;
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + a.abs()));

    // Keep only roots where the sign actually flips; even-multiplicity
    // touches do not move a bin edge.
    let mut edges = vec![-reach];
    edges.extend(&roots);
    edges.push(reach);
    let signs: Vec<bool> = edges
        .windows(2)
        .map(|w| gap.eval(0.5 * (w[0] + w[1]), &mut psi).0 > 0.0)
        .collect();
    Ok(roots
        .iter()
        .enumerate()
        .filter(|(i, _)| signs[*i] != signs[i + 1])
        .map(|(_, r)| *r)
        .collect())
}

fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_positive = f_lo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Region `{x : D(x) > 0}` assembled from sign changes.
fn positive_region(gap: &DensityGap, flips: &[f64]) -> IntervalSet<f64> {
    let mut psi = vec![0.0; gap.m + 2];
    let left = flips.first().map_or(0.0, |r| r - 1.0);
    let lower_positive = gap.eval(left, &mut psi).0 > 0.0;
    IntervalSet::new(flips.to_vec(), lower_positive).expect("sorted distinct roots")
}

/// Projective weight `μ_h` of the best binning and that binning.
///
/// `μ_h = ½∫|D| = ∫_{D>0} D`, since `D` integrates to zero.
pub fn mu_h(pair: QubitPair, a: f64, theta: f64) -> Result<(f64, IntervalSet<f64>)> {
    let gap = DensityGap::new(pair, a, theta);
    if gap.alpha.abs() <= 1e-15 && gap.beta.abs() <= 1e-15 {
        return Ok((0.0, IntervalSet::empty()));
    }
    let flips = sign_change_points(&gap)?;
    let bins = positive_region(&gap, &flips);
    let c = cell_matrix(pair.m + 1, &bins);
    let (l, m) = (pair.l, pair.m);
    let mu = gap.alpha * (c[(l, l)] - c[(m, m)]) + gap.beta * c[(l, m)];
    Ok((mu.clamp(0.0, 1.0), bins))
}

/// `2√2 μ²` when `cos²(2a) ≤ ½`, otherwise `None`.
pub fn chsh_lower_bound(mu: f64, a: f64) -> Option<f64> {
    let c = (2.0 * a).cos();
    (c * c <= 0.5 + 1e-12).then_some(2.0 * std::f64::consts::SQRT_2 * mu * mu)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairScan {
    pub pair: QubitPair,
    pub best_a: f64,
    pub best_mu: f64,
    pub best_bound: f64,
    pub violates: bool,
}

/// Best bound for one pair over the mixing angle (θ = 0).
pub fn optimize_pair(pair: QubitPair) -> Result<PairScan> {
    let objective = |a: f64| -> Result<(f64, f64)> {
        let (mu, _) = mu_h(pair, a, 0.0)?;
        Ok((chsh_lower_bound(mu, a).unwrap_or(f64::NEG_INFINITY), mu))
    };
    let span = 2.0 * std::f64::consts::PI;
    let h = span / SEED_COUNT as f64;
    let mut seeds = Vec::with_capacity(SEED_COUNT);
    for k in 0..SEED_COUNT {
        let a = (k as f64 + 0.5) * h;
        seeds.push((objective(a)?.0, a));
    }
    seeds.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &(_, a0) in seeds.iter().take(4) {
        let a = golden_section(|a| objective(a).map(|v| v.0), a0 - h, a0 + h, 1e-10)?;
        let (v, mu) = objective(a)?;
        if v > best.0 {
            best = (v, a, mu);
        }
    }
    let (bound, a, mu) = if best.0.is_finite() {
        best
    } else {
        (0.0, seeds[0].1, 0.0)
    };
    Ok(PairScan {
        pair,
        best_a: a,
        best_mu: mu,
        best_bound: bound,
        violates: bound > 2.0 + VIOLATION_MARGIN,
    })
}

fn golden_section(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All pairs `l < m ≤ l_max`, in lexicographic order.
pub fn scan_pairs(l_max: usize) -> Result<Vec<PairScan>> {
    if l_max > 20 {
        return Err(Error::InvalidParameter(format!("l_max = {l_max} exceeds 20")));
    }
    let pairs: Vec<QubitPair> = (0..=l_max)
        .flat_map(|l| (l + 1..=l_max).map(move |m| QubitPair { l, m }))
        .collect();
    pairs.into_par_iter().map(optimize_pair).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Plain Simpson rule on `½|p₊ − p₋|`, sampled densely.
    fn dense_l1(pair: QubitPair, a: f64, theta: f64) -> f64 {
        let gap = DensityGap::new(pair, a, theta);
        let mut psi = vec![0.0; pair.m + 2];
        let r = gap.reach() + 2.0;
        let n = 200_000;
        let h = 2.0 * r / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * gap.eval(-r + k as f64 * h, &mut psi).0.abs();
        }
        0.5 * s * h / 3.0
    }

    #[test]
    fn polynomial_translation() {
        // (x − 1)(x + 2) = x² + x − 2, shifted by 1: y² + 3y.
        let p = translated(&[-2.0, 1.0, 1.0], 1.0);
        assert_eq!(p, vec![0.0, 3.0, 1.0]);
        let mut r = companion_real_roots(&[-2.0, 1.0, 1.0]).unwrap();
        r.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(r[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pair_validation() {
        assert!(QubitPair::new(2, 2).is_err());
        assert!(QubitPair::new(3, 1).is_err());
        assert!(QubitPair::new(0, 2).is_ok());
    }

    #[test]
    fn ground_and_second_excited_bound() {
        let scan = optimize_pair(QubitPair::new(0, 2).unwrap()).unwrap();
        assert!(scan.violates);
        assert_abs_diff_eq!(scan.best_bound, 2.1477, epsilon = 1e-3);
        assert_abs_diff_eq!(scan.best_mu, 0.8714, epsilon = 1e-3);
    }

    #[test]
    fn optimal_bins_for_ground_and_second_excited() {
        let pair = QubitPair::new(0, 2).unwrap();
        let scan = optimize_pair(pair).unwrap();
        let (_, bins) = mu_h(pair, scan.best_a, 0.0).unwrap();
        // a → a + π/2 flips the sign of D, so either the bins or their
        // complement form the central interval.
        let bins = if bins.lower_unbounded() {
            bins.complement()
        } else {
            bins
        };
        let segs = bins.segments();
        assert_eq!(segs.len(), 1);
        assert_abs_diff_eq!(segs[0].0, -segs[0].1, epsilon = 1e-9);
    }

    #[test]
    fn non_violating_pairs() {
        for (l, m) in [(0, 1), (1, 3)] {
            let s = optimize_pair(QubitPair::new(l, m).unwrap()).unwrap();
            assert!(!s.violates, "({l},{m}) bound {}", s.best_bound);
        }
    }

    #[test]
    fn bound_condition() {
        assert_abs_diff_eq!(
            chsh_lower_bound(1.0, std::f64::consts::FRAC_PI_8).unwrap(),
            2.0 * 2f64.sqrt()
        );
        assert_abs_diff_eq!(chsh_lower_bound(0.8714, 1.15).unwrap(), 2.1477, epsilon = 1e-3);
        assert!(chsh_lower_bound(0.9, 0.0).is_none());
        assert!(chsh_lower_bound(0.9, 0.1).is_none());
    }

    #[test]
    fn theta_zero_is_optimal() {
        // For fixed a a phase can act like a → −a, so the claim is about
        // the joint maximum over (a, θ).
        for (l, m) in [(0, 2), (1, 2), (0, 3)] {
            let pair = QubitPair::new(l, m).unwrap();
            let at_zero = |a: f64| Ok(mu_h(pair, a, 0.0)?.0);
            let grid: Vec<f64> = (0..200).map(|k| std::f64::consts::PI * k as f64 / 200.0).collect();
            let a0 = *grid
                .iter()
                .max_by(|x, y| at_zero(**x).unwrap().total_cmp(&at_zero(**y).unwrap()))
                .unwrap();
            let a_best = golden_section(at_zero, a0 - 0.02, a0 + 0.02, 1e-12).unwrap();
            let best = at_zero(a_best).unwrap();
            for j in 1..24 {
                let theta = std::f64::consts::TAU * j as f64 / 24.0;
                for a in &grid {
                    assert!(mu_h(pair, *a, theta).unwrap().0 <= best + 1e-9);
                }
            }
        }
    }

    #[test]
    fn decomposition_round_trip() {
        let pair = QubitPair::new(0, 2).unwrap();
        let setting = HomodyneSetting::new(0.3, IntervalSet::interval(-0.85, 0.87).unwrap());
        let (e1, e2) = qubit_povm(pair, &setting);
        let d = PovmDecomposition::from_elements(&e1, &e2).unwrap();
        assert!(d.element1().max_entry_deviation(&e1) <= 1e-9);
        assert!(d.element2().max_entry_deviation(&e2) <= 1e-9);
        assert!((0.0..=1.0).contains(&d.mu) && (0.0..=1.0).contains(&d.r1));
    }

    #[test]
    fn remainder_weight_below_one_at_optimum() {
        let pair = QubitPair::new(0, 2).unwrap();
        let scan = optimize_pair(pair).unwrap();
        let (mu, bins) = mu_h(pair, scan.best_a, 0.0).unwrap();
        let (e1, e2) = qubit_povm(pair, &HomodyneSetting::new(0.0, bins));
        let d = PovmDecomposition::from_elements(&e1, &e2).unwrap();
        assert!(d.r1 < 1.0);
        // The trace-distance weight never exceeds the spectral one.
        assert!(d.mu >= mu - 1e-9);
    }

    #[test]
    fn rejects_incomplete_povm() {
        let e = HermitianOperator::identity(2).scale(0.4);
        assert!(PovmDecomposition::from_elements(&e, &e).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn root_bins_match_dense_l1(l in 0usize..5, dm in 1usize..5, a in 0.0f64..std::f64::consts::TAU, theta in 0.0f64..std::f64::consts::TAU) {
            let pair = QubitPair::new(l, l + dm).unwrap();
            let (mu, _) = mu_h(pair, a, theta).unwrap();
            prop_assert!((mu - dense_l1(pair, a, theta)).abs() <= 1e-6);
        }

        #[test]
        fn mu_is_gap_of_povm_expectations(a in 0.0f64..std::f64::consts::TAU) {
            let pair = QubitPair::new(1, 4).unwrap();
            let (mu, bins) = mu_h(pair, a, 0.0).unwrap();
            let (e1, _) = qubit_povm(pair, &HomodyneSetting::new(0.0, bins));
            let (c, s) = (a.cos(), a.sin());
            let plus = nalgebra::DVector::from_vec(vec![Complex::from(c), Complex::from(s)]);
            let minus = nalgebra::DVector::from_vec(vec![Complex::from(s), Complex::from(-c)]);
            prop_assert!((e1.expectation(&plus) - e1.expectation(&minus) - mu).abs() <= 1e-10);
        }
    }
}

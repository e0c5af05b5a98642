//! Photon loss as the adjoint of a pure-loss channel acting on observables.
//!
//! A beam splitter of transmissivity `η` mixes the mode with vacuum and the
//! reflected port is discarded. In the Heisenberg picture
//! `⟨m|O_η|n⟩ = Σ_k √(C(m,k) C(n,k)) (1−η)^k η^{(m+n)/2−k} ⟨m−k|O|n−k⟩`.
//! The sum only lowers indices, so the `d×d` block is exact.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::HermitianOperator;
use crate::scalar::Real;

/// Detection efficiency `η ∈ [0, 1]` (beam-splitter transmissivity).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossModel<T: Real> {
    eta: T,
}

impl<T: Real> LossModel<T> {
    pub fn new(eta: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::InvalidEfficiency(eta.to_f64_lossy()));
        }
        Ok(Self { eta })
    }

    pub fn lossless() -> Self {
        Self { eta: T::one() }
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    /// Beam-splitter mixing angle `γ` with `cos²γ = η`.
    pub fn mixing_angle(&self) -> T {
        self.eta.sqrt().acos()
    }

    /// Channel-adjoint coefficients `K[m][n][k]`, reusable across observables.
    pub fn kernel(&self, dim: usize) -> LossKernel<T> {
        LossKernel::new(self.eta, dim)
    }
}

/// Precomputed weights of the loss adjoint for a fixed dimension.
#[derive(Clone, Debug)]
pub struct LossKernel<T: Real> {
    dim: usize,
    weights: Vec<T>,
}

impl<T: Real> LossKernel<T> {
    fn new(eta: T, dim: usize) -> Self {
        let binom = binomial_table(dim);
        let root_eta = eta.sqrt();
        let loss = T::one() - eta;
        let mut weights = vec![T::zero(); dim * dim * dim];
        for m in 0..dim {
            for n in 0..dim {
                for k in 0..=m.min(n) {
                    let comb = (binom[m][k] * binom[n][k]).sqrt();
                    let w = T::lit(comb) * loss.powi(k as i32) * root_eta.powi((m + n - 2 * k) as i32);
                    weights[(m * dim + n) * dim + k] = w;
                }
            }
        }
        Self { dim, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applies the adjoint channel to an arbitrary (not necessarily Hermitian) matrix.
    pub fn apply_matrix(&self, o: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |m, n| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..=m.min(n) {
                acc += o[(m - k, n - k)] * self.weights[(m * d + n) * d + k];
            }
            acc
        })
    }

    pub fn apply(&self, o: &HermitianOperator<T>) -> HermitianOperator<T> {
        HermitianOperator::symmetrized(self.apply_matrix(o.entries()))
    }
}

fn binomial_table(dim: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; dim.max(1)]; dim.max(1)];
    for n in 0..dim {
        t[n][0] = 1.0;
        for k in 1..=n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0.0 };
        }
    }
    t
}

/// Observable seen through a lossy detector of efficiency `η`.
pub fn apply_loss<T: Real>(o: &HermitianOperator<T>, loss: &LossModel<T>) -> HermitianOperator<T> {
    loss.kernel(o.dim()).apply(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::hermitian_eigensystem;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, seed: u64) -> HermitianOperator<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        HermitianOperator::symmetrized(DMatrix::from_fn(dim, dim, |_, _| {
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
    }

    #[test]
    fn rejects_out_of_range_efficiency() {
        assert!(LossModel::new(1.2f64).is_err());
        assert!(LossModel::new(-0.1f64).is_err());
        assert!(LossModel::new(f64::NAN).is_err());
    }

    #[test]
    fn unit_efficiency_is_identity_map() {
        let o = random_hermitian(6, 1);
        let out = apply_loss(&o, &LossModel::new(1.0).unwrap());
        assert!(out.max_entry_deviation(&o) <= 1e-12);
    }

    #[test]
    fn zero_efficiency_collapses_to_vacuum_element() {
        let o = random_hermitian(6, 2);
        let out = apply_loss(&o, &LossModel::new(0.0).unwrap());
        let expected = HermitianOperator::identity(6).scale(o.get(0, 0).re);
        assert!(out.max_entry_deviation(&expected) <= 1e-12);
    }

    #[test]
    fn binomials() {
        let t = binomial_table(7);
        assert_eq!(t[6][3], 20.0);
        assert_eq!(t[5][5], 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn unital_linear_and_contractive(seed in any::<u64>(), eta in 0.0f64..1.0, s in -2.0f64..2.0) {
            let loss = LossModel::new(eta).unwrap();
            let id = apply_loss(&HermitianOperator::<f64>::identity(7), &loss);
            prop_assert!(id.max_entry_deviation(&HermitianOperator::identity(7)) <= 1e-12);

            let a = random_hermitian(7, seed);
            let b = random_hermitian(7, seed.wrapping_add(1));
            let lhs = apply_loss(&a.add_scaled(&b, s), &loss);
            let rhs = apply_loss(&a, &loss).add_scaled(&apply_loss(&b, &loss), s);
            prop_assert!(lhs.max_entry_deviation(&rhs) <= 1e-12);

            let before = a.operator_norm().unwrap();
            let after = apply_loss(&a, &loss).operator_norm().unwrap();
            prop_assert!(after <= before + 1e-10);
        }

        #[test]
        fn block_exact_under_compression(seed in any::<u64>(), eta in 0.0f64..1.0) {
            let loss = LossModel::new(eta).unwrap();
            let big = random_hermitian(10, seed);
            let small = HermitianOperator::symmetrized(big.entries().view((0, 0), (5, 5)).into_owned());
            let a = apply_loss(&big, &loss);
            let b = apply_loss(&small, &loss);
            for m in 0..5 {
                for n in 0..5 {
                    prop_assert!((a.get(m, n) - b.get(m, n)).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn lossy_observable_spectrum_stays_in_unit_interval() {
        let s = crate::povm::HomodyneSetting::new(0.7, crate::povm::IntervalSet::interval(-0.9, 0.9).unwrap());
        let sigma = crate::povm::observable(&s, 8);
        let noisy = apply_loss(&sigma, &LossModel::new(0.6).unwrap());
        let es = hermitian_eigensystem(&noisy).unwrap();
        assert!(es.values[0] >= -1.0 - 1e-10 && es.values[7] <= 1.0 + 1e-10);
    }
}

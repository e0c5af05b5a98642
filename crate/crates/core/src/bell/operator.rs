use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::inequality::Inequality;
use crate::error::{Error, Result};
use crate::fock::linalg::basis_matrix;
use crate::fock::{hermitian_eigensystem, project_subspace, tensor, BipartiteState, FockVector, HermitianOperator};
use crate::povm::{observable, HomodyneSetting, LossModel};
use crate::scalar::Real;

/// An inequality together with one homodyne setting per party and input.
#[derive(Clone, Debug, PartialEq)]
pub struct BellScenario<T: Real> {
    pub inequality: Inequality,
    pub settings_a: Vec<HomodyneSetting<T>>,
    pub settings_b: Vec<HomodyneSetting<T>>,
}

impl<T: Real> BellScenario<T> {
    pub fn new(
        inequality: Inequality,
        settings_a: Vec<HomodyneSetting<T>>,
        settings_b: Vec<HomodyneSetting<T>>,
    ) -> Result<Self> {
        if settings_a.len() != inequality.settings_a() {
            return Err(Error::DimensionMismatch {
                expected: inequality.settings_a(),
                found: settings_a.len(),
            });
        }
        if settings_b.len() != inequality.settings_b() {
            return Err(Error::DimensionMismatch {
                expected: inequality.settings_b(),
                found: settings_b.len(),
            });
        }
        Ok(Self {
            inequality,
            settings_a,
            settings_b,
        })
    }

    /// Alice and Bob exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            inequality: self.inequality.swapped(),
            settings_a: self.settings_b.clone(),
            settings_b: self.settings_a.clone(),
        }
    }
}

/// Top eigenpair of a Bell operator.
#[derive(Clone, Debug)]
pub struct BellScore<T: Real> {
    pub score: T,
    pub optimal_state: BipartiteState<T>,
    /// Eigen-residual `‖Bψ − λψ‖` of the reported pair.
    pub operator_norm_check: T,
}

/// `Σ c_xy σ_A(x) ⊗ σ_B(y) + Σ a_x σ_A(x) ⊗ I + Σ b_y I ⊗ σ_B(y)`
/// from already-built local observables.
pub fn assemble_from_observables<T: Real>(
    inequality: &Inequality,
    obs_a: &[HermitianOperator<T>],
    obs_b: &[HermitianOperator<T>],
) -> HermitianOperator<T> {
    let dim_a = obs_a.first().map_or(0, HermitianOperator::dim);
    let dim_b = obs_b.first().map_or(0, HermitianOperator::dim);
    let mut total = DMatrix::<Complex<T>>::zeros(dim_a * dim_b, dim_a * dim_b);
    for (x, sa) in obs_a.iter().enumerate() {
        let mut bob = HermitianOperator::zeros(dim_b);
        for (y, sb) in obs_b.iter().enumerate() {
            let c = inequality.coefficients[x][y];
            if c != 0.0 {
                bob = bob.add_scaled(sb, T::lit(c));
            }
        }
        let ma = inequality.marginals_a[x];
        if ma != 0.0 {
            bob = bob.add_scaled(&HermitianOperator::identity(dim_b), T::lit(ma));
        }
        total += tensor(sa, &bob).entries();
    }
    let mut bob_marg = HermitianOperator::zeros(dim_b);
    for (y, sb) in obs_b.iter().enumerate() {
        let mb = inequality.marginals_b[y];
        if mb != 0.0 {
            bob_marg = bob_marg.add_scaled(sb, T::lit(mb));
        }
    }
    if inequality.marginals_b.iter().any(|v| *v != 0.0) {
        total += tensor(&HermitianOperator::identity(dim_a), &bob_marg).entries();
    }
    HermitianOperator::symmetrized(total)
}

/// Local observables for one party, with loss applied first when present.
pub fn local_observables<T: Real>(
    settings: &[HomodyneSetting<T>],
    dim: usize,
    loss: Option<&LossModel<T>>,
) -> Vec<HermitianOperator<T>> {
    let kernel = loss.map(|l| l.kernel(dim));
    settings
        .iter()
        .map(|s| {
            let sigma = observable(s, dim);
            match &kernel {
                Some(k) => k.apply(&sigma),
                None => sigma,
            }
        })
        .collect()
}

/// Bell operator on `C^{dA} ⊗ C^{dB}`; the same loss acts on both parties.
pub fn assemble<T: Real>(
    scenario: &BellScenario<T>,
    dim_a: usize,
    dim_b: usize,
    loss: Option<&LossModel<T>>,
) -> HermitianOperator<T> {
    let obs_a = local_observables(&scenario.settings_a, dim_a, loss);
    let obs_b = local_observables(&scenario.settings_b, dim_b, loss);
    assemble_from_observables(&scenario.inequality, &obs_a, &obs_b)
}

/// Largest eigenvalue of the Bell operator (or of its compression onto
/// `subspace`), with the eigenvector lifted back to the full space.
pub fn score<T: Real>(
    scenario: &BellScenario<T>,
    dim_a: usize,
    dim_b: usize,
    loss: Option<&LossModel<T>>,
    subspace: Option<&[FockVector<T>]>,
) -> Result<BellScore<T>> {
    top_of_operator(&assemble(scenario, dim_a, dim_b, loss), dim_a, dim_b, subspace)
}

/// Top eigenpair of a bipartite operator, optionally on a subspace.
pub fn top_of_operator<T: Real>(
    op: &HermitianOperator<T>,
    dim_a: usize,
    dim_b: usize,
    subspace: Option<&[FockVector<T>]>,
) -> Result<BellScore<T>> {
    let (value, full_vec): (T, DVector<Complex<T>>) = match subspace {
        None => hermitian_eigensystem(op)?.top(),
        Some(basis) => {
            let compressed = project_subspace(op, basis)?;
            let (v, sub_vec) = hermitian_eigensystem(&compressed)?.top();
            let p = basis_matrix(op.dim(), basis)?;
            (v, p * sub_vec)
        }
    };
    let residual = (op.entries() * &full_vec - &full_vec * Complex::new(value, T::zero())).norm();
    Ok(BellScore {
        score: value,
        optimal_state: BipartiteState::from_flat(dim_a, dim_b, &full_vec)?,
        operator_norm_check: residual,
    })
}

/// Product basis `{|i⟩_A ⊗ |j⟩_B : i ∈ levels_a, j ∈ levels_b}` in (Alice, Bob) order.
pub fn local_subspace_basis<T: Real>(
    dim_a: usize,
    dim_b: usize,
    levels_a: &[usize],
    levels_b: &[usize],
) -> Vec<FockVector<T>> {
    levels_a
        .iter()
        .flat_map(|&i| {
            levels_b
                .iter()
                .map(move |&j| FockVector::basis(dim_a * dim_b, i * dim_b + j))
        })
        .collect()
}

/// `{|0,n⟩, |1,n−1⟩, …, |n,0⟩}`: states with exactly `n` photons in total.
pub fn energy_conserving_basis<T: Real>(total: usize, dim_a: usize, dim_b: usize) -> Result<Vec<FockVector<T>>> {
    if total >= dim_a || total >= dim_b {
        return Err(Error::InvalidParameter(format!(
            "total photon number {total} needs local dimensions > {total}"
        )));
    }
    Ok((0..=total)
        .map(|k| FockVector::basis(dim_a * dim_b, k * dim_b + (total - k)))
        .collect())
}

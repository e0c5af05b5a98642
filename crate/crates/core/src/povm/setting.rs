use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::integrals::cell_matrix;
use super::interval::IntervalSet;
use crate::fock::HermitianOperator;
use crate::scalar::{cis, Real};

/// Reduces an angle to `[0, 2π)`.
pub fn reduce_angle<T: Real>(theta: T) -> T {
    let two_pi = T::two_pi();
    let r = theta % two_pi;
    let r = if r < T::zero() { r + two_pi } else { r };
    if r >= two_pi {
        T::zero()
    } else {
        r
    }
}

/// A quadrature angle and the binning that maps its outcome to `+1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSetting<T: Real> {
    theta: T,
    bins: IntervalSet<T>,
}

impl<T: Real> HomodyneSetting<T> {
    pub fn new(theta: T, bins: IntervalSet<T>) -> Self {
        Self {
            theta: reduce_angle(theta),
            bins,
        }
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn bins(&self) -> &IntervalSet<T> {
        &self.bins
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

/// Dresses a real cell matrix with the quadrature phase:
/// `⟨m|Π|n⟩ = e^{iθ(n−m)} C[m][n]`.
pub fn phased<T: Real>(theta: T, cells: &DMatrix<T>) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(cells.nrows(), cells.ncols(), |m, n| {
        cis(theta * (T::lit(n as f64) - T::lit(m as f64))) * cells[(m, n)]
    })
}

/// Binned homodyne POVM element on the first `dim` Fock states.
///
/// The `d×d` block is exact: it equals the top-left block of the same
/// element built at any larger dimension.
pub fn povm_element<T: Real>(setting: &HomodyneSetting<T>, outcome: Outcome, dim: usize) -> HermitianOperator<T> {
    let region = match outcome {
        Outcome::Plus => setting.bins.clone(),
        Outcome::Minus => setting.bins.complement(),
    };
    HermitianOperator::symmetrized(phased(setting.theta, &cell_matrix(dim, &region)))
}

/// Dichotomic observable `σ = Π₊ − Π₋ = 2Π₊ − I`.
pub fn observable<T: Real>(setting: &HomodyneSetting<T>, dim: usize) -> HermitianOperator<T> {
    observable_from_cells(setting.theta, &cell_matrix(dim, &setting.bins))
}

/// `2 e^{iθ(n−m)} C − I` from a precomputed cell matrix.
pub fn observable_from_cells<T: Real>(theta: T, cells: &DMatrix<T>) -> HermitianOperator<T> {
    let dim = cells.nrows();
    let two = T::lit(2.0);
    let mut m = phased(theta, cells).map(|z| z * two);
    for i in 0..dim {
        m[(i, i)] -= Complex::new(T::one(), T::zero());
    }
    HermitianOperator::symmetrized(m)
}

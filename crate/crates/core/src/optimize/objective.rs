//! Bell score as a function of flat optimizer coordinates, with its
//! Hellmann–Feynman gradient `∂λ/∂p = ⟨ψ|∂B/∂p|ψ⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::params::{Layout, ParameterVector};
use crate::bell::{assemble_from_observables, Inequality};
use crate::error::{Error, Result};
use crate::fock::linalg::basis_matrix;
use crate::fock::{hermitian_eigensystem, project_subspace, BipartiteState, FockVector, HermitianOperator};
use crate::povm::integrals::boundary_density;
use crate::povm::setting::phased;
use crate::povm::{cell_matrix, observable_from_cells, IntervalSet, LossKernel, LossModel};

type C64 = Complex<f64>;

/// What is being maximized: an inequality at local dimension `dim`,
/// optionally through lossy detectors and restricted to a subspace.
#[derive(Clone, Debug)]
pub struct ScoreProblem {
    pub inequality: Inequality,
    pub dim: usize,
    pub loss: Option<LossModel<f64>>,
    /// Orthonormal vectors of `C^{d} ⊗ C^{d}`; the state is confined to their span.
    pub subspace: Option<Vec<FockVector<f64>>>,
}

impl ScoreProblem {
    pub fn new(inequality: Inequality, dim: usize) -> Self {
        Self {
            inequality,
            dim,
            loss: None,
            subspace: None,
        }
    }

    pub fn with_loss(mut self, loss: Option<LossModel<f64>>) -> Self {
        self.loss = loss;
        self
    }

    pub fn with_subspace(mut self, basis: Vec<FockVector<f64>>) -> Self {
        self.subspace = Some(basis);
        self
    }
}

/// Score and optimal state at a point.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub score: f64,
    pub state: BipartiteState<f64>,
}

pub(crate) struct Objective<'a> {
    problem: &'a ScoreProblem,
    pub(crate) layout: Layout,
    kernel: Option<LossKernel<f64>>,
    basis: Option<DMatrix<C64>>,
}

struct Point {
    cells: Vec<DMatrix<f64>>,
    observables: Vec<HermitianOperator<f64>>,
    score: f64,
    psi: DVector<C64>,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(problem: &'a ScoreProblem, layout: Layout) -> Result<Self> {
        if problem.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let kernel = problem.loss.filter(|l| l.eta() < 1.0).map(|l| l.kernel(problem.dim));
        let basis = match &problem.subspace {
            Some(b) => Some(basis_matrix(problem.dim * problem.dim, b)?),
            None => None,
        };
        Ok(Self {
            problem,
            layout,
            kernel,
            basis,
        })
    }

    fn observables_at(&self, x: &[f64]) -> (Vec<DMatrix<f64>>, Vec<HermitianOperator<f64>>) {
        let d = self.problem.dim;
        (0..self.layout.settings)
            .map(|s| {
                let bins = IntervalSet::from_unsorted(self.layout.raw_boundaries(x, s));
                let cells = cell_matrix(d, &bins);
                let sigma = observable_from_cells(self.layout.theta(x, s), &cells);
                let sigma = match &self.kernel {
                    Some(k) => k.apply(&sigma),
                    None => sigma,
                };
                (cells, sigma)
            })
            .unzip()
    }

    fn point(&self, x: &[f64]) -> Result<Point> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite optimizer coordinate".into()));
        }
        let (cells, observables) = self.observables_at(x);
        let obs_a: Vec<_> = (0..self.layout.m_a).map(|i| observables[i].clone()).collect();
        let obs_b: Vec<_> = (0..self.layout.m_b)
            .map(|y| observables[self.layout.bob_slot(y)].clone())
            .collect();
        let op = assemble_from_observables(&self.problem.inequality, &obs_a, &obs_b);
        let (score, psi) = match &self.basis {
            None => hermitian_eigensystem(&op)?.top(),
            Some(p) => {
                let basis = self.problem.subspace.as_deref().unwrap_or_default();
                let (v, sub) = hermitian_eigensystem(&project_subspace(&op, basis)?)?.top();
                (v, p * sub)
            }
        };
        Ok(Point {
            cells,
            observables,
            score,
            psi,
        })
    }

    pub(crate) fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        let p = self.point(x)?;
        let d = self.problem.dim;
        Ok(Evaluation {
            score: p.score,
            state: BipartiteState::from_flat(d, d, &p.psi)?,
        })
    }

    pub(crate) fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.point(x)?.score)
    }

    /// Score and its gradient with respect to every flat coordinate.
    pub(crate) fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let p = self.point(x)?;
        let d = self.problem.dim;
        let ineq = &self.problem.inequality;
        let layout = &self.layout;
        // Ψ[iA, iB] = ψ[iA·d + iB].
        let psi = DMatrix::from_fn(d, d, |i, j| p.psi[i * d + j]);
        let id = DMatrix::<C64>::identity(d, d);

        // Reduced "environment" matrices: ∂λ = Re Tr(∂σ_s · env_s).
        let mut env = vec![DMatrix::<C64>::zeros(d, d); layout.settings];
        for x_in in 0..layout.m_a {
            let mut m = &id * C64::from(ineq.marginals_a[x_in]);
            for y in 0..layout.m_b {
                m += p.observables[layout.bob_slot(y)].entries() * C64::from(ineq.coefficients[x_in][y]);
            }
            env[x_in] += &psi * m.transpose() * psi.adjoint();
        }
        for y in 0..layout.m_b {
            let mut n = &id * C64::from(ineq.marginals_b[y]);
            for x_in in 0..layout.m_a {
                n += p.observables[x_in].entries() * C64::from(ineq.coefficients[x_in][y]);
            }
            env[layout.bob_slot(y)] += psi.transpose() * n.transpose() * psi.conjugate();
        }

        let through_loss = |m: DMatrix<C64>| match &self.kernel {
            Some(k) => k.apply_matrix(&m),
            None => m,
        };
        let pair_trace = |a: &DMatrix<C64>, b: &DMatrix<C64>| -> f64 {
            let mut t = 0.0;
            for i in 0..d {
                for j in 0..d {
                    t += (a[(i, j)] * b[(j, i)]).re;
                }
            }
            t
        };

        let mut grad = vec![0.0; layout.len()];
        for s in 0..layout.settings {
            let theta = layout.theta(x, s);
            let ph = phased(theta, &p.cells[s]);
            let d_theta = DMatrix::from_fn(d, d, |m, n| ph[(m, n)] * C64::new(0.0, 2.0 * (n as f64 - m as f64)));
            grad[s] = pair_trace(&through_loss(d_theta), &env[s]);

            let raw = layout.raw_boundaries(x, s);
            let offset = layout.boundary_offset(s);
            for (k, &b) in raw.iter().enumerate() {
                if raw.iter().enumerate().any(|(j, &o)| j != k && o == b) {
                    continue;
                }
                let rank = raw.iter().filter(|&&o| o < b).count();
                let sign = if rank % 2 == 1 { 2.0 } else { -2.0 };
                let dc = phased(theta, &boundary_density(d, b)).map(|z| z * sign);
                grad[offset + k] = pair_trace(&through_loss(dc), &env[s]);
            }
        }
        Ok((p.score, grad))
    }

    pub(crate) fn params(&self, x: &[f64]) -> ParameterVector {
        self.layout.to_params(x)
    }
}

/// Score of explicit parameters; the re-evaluation used to certify reports.
pub fn evaluate_params(problem: &ScoreProblem, params: &ParameterVector) -> Result<Evaluation> {
    let q = params.max_intervals().max(1);
    let layout = Layout::new(&problem.inequality, params.share_mode, q)?;
    let x = layout.flatten(params)?;
    Objective::new(problem, layout)?.evaluate(&x)
}

//! Dense complex linear algebra on truncated Fock spaces.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance used to accept a matrix as Hermitian, relative to its largest entry.
fn hermitian_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(<T as Real>::epsilon() * T::lit(64.0))
}

fn orthonormal_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(<T as Real>::epsilon() * T::lit(256.0))
}

/// State vector of a single truncated mode, indexed by photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<T: Real> {
    amplitudes: DVector<Complex<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn new(amplitudes: DVector<Complex<T>>) -> Self {
        Self { amplitudes }
    }

    pub fn from_slice(amplitudes: &[Complex<T>]) -> Self {
        Self::new(DVector::from_column_slice(amplitudes))
    }

    /// The number state `|n⟩` in a space of dimension `dim`.
    pub fn basis(dim: usize, n: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[n] = Complex::new(T::one(), T::zero());
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Self {
        Self::new(self.amplitudes.normalize())
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() * self.norm() - T::one()).abs() <= T::lit(1e-10).max(<T as Real>::epsilon() * T::lit(64.0))
    }
}

/// Complex Hermitian matrix on a truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Real> {
    entries: DMatrix<Complex<T>>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates conjugate symmetry and stores the exactly symmetrized matrix.
    pub fn new(entries: DMatrix<Complex<T>>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let asym = max_asymmetry(&entries);
        let scale = entries.iter().fold(T::one(), |acc, z| acc.max(z.modulus()));
        if !(asym <= hermitian_tolerance::<T>() * scale) {
            return Err(Error::NotHermitian {
                max_asymmetry: asym.to_f64_lossy(),
            });
        }
        Ok(Self::symmetrized(entries))
    }

    /// Wraps a matrix that is Hermitian by construction, replacing it by
    /// `(M + M†)/2` to remove rounding asymmetry.
    pub fn symmetrized(entries: DMatrix<Complex<T>>) -> Self {
        let adj = entries.adjoint();
        let half = T::lit(0.5);
        Self {
            entries: (entries + adj).map(|z| z * half),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let d = diag.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(*v, T::zero());
        }
        Self { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex<T>> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[(row, col)]
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            entries: self.entries.map(|z| z * factor),
        }
    }

    /// Real linear combination `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: T) -> Self {
        let mut entries = self.entries.clone();
        entries.zip_apply(&other.entries, |a, b| *a += b * factor);
        Self { entries }
    }

    /// `⟨v|H|v⟩`, real for Hermitian `H`.
    pub fn expectation(&self, v: &DVector<Complex<T>>) -> T {
        v.dotc(&(&self.entries * v)).re
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_entry_deviation(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).modulus()))
    }

    /// Spectral norm (largest absolute eigenvalue).
    pub fn operator_norm(&self) -> Result<T> {
        let es = hermitian_eigensystem(self)?;
        let lo = es.values[0].abs();
        let hi = es.values[es.values.len() - 1].abs();
        Ok(lo.max(hi))
    }
}

/// Largest entry of `|H - H†|`.
pub fn max_asymmetry<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let n = m.nrows().min(m.ncols());
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).modulus());
        }
    }
    worst
}

/// Eigenvalues ascending with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigensystem<T: Real> {
    pub values: Vec<T>,
    pub vectors: DMatrix<Complex<T>>,
}

impl<T: Real> Eigensystem<T> {
    pub fn top(&self) -> (T, DVector<Complex<T>>) {
        let k = self.values.len() - 1;
        (self.values[k], self.vectors.column(k).into_owned())
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn hermitian_eigensystem<T: Real>(h: &HermitianOperator<T>) -> Result<Eigensystem<T>> {
    let dim = h.dim();
    if dim == 0 {
        return Ok(Eigensystem {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let eig =
        SymmetricEigen::try_new(h.entries.clone(), <T as Real>::epsilon(), 0).ok_or(Error::EigenFailure { dim })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite_value()) {
        return Err(Error::EigenFailure { dim });
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok(Eigensystem { values, vectors })
}

/// Validating front door: rejects non-Hermitian input with the asymmetry found.
pub fn eigensystem_of_matrix<T: Real>(m: DMatrix<Complex<T>>) -> Result<Eigensystem<T>> {
    hermitian_eigensystem(&HermitianOperator::new(m)?)
}

/// `exp(−i t H)` through the eigendecomposition of `H`.
pub fn unitary_exp<T: Real>(h: &HermitianOperator<T>, t: T) -> Result<DMatrix<Complex<T>>> {
    let es = hermitian_eigensystem(h)?;
    let phases = DMatrix::from_fn(h.dim(), h.dim(), |i, j| {
        if i == j {
            crate::scalar::cis(-t * es.values[i])
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    Ok(&es.vectors * phases * es.vectors.adjoint())
}

/// Kronecker product with index order (Alice, Bob): row `iA * dB + iB`.
pub fn tensor<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> HermitianOperator<T> {
    HermitianOperator {
        entries: a.entries.kronecker(&b.entries),
    }
}

/// Compression `P† H P` onto the span of `basis`, in the given order.
pub fn project_subspace<T: Real>(h: &HermitianOperator<T>, basis: &[FockVector<T>]) -> Result<HermitianOperator<T>> {
    let p = basis_matrix(h.dim(), basis)?;
    Ok(HermitianOperator::symmetrized(p.adjoint() * h.entries() * &p))
}

/// Columns of `basis` as a matrix after checking orthonormality.
pub fn basis_matrix<T: Real>(dim: usize, basis: &[FockVector<T>]) -> Result<DMatrix<Complex<T>>> {
    let mut p = DMatrix::zeros(dim, basis.len());
    for (j, v) in basis.iter().enumerate() {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        p.set_column(j, v.amplitudes());
    }
    let gram = p.adjoint() * &p;
    let mut dev = T::zero();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            let target = if i == j { T::one() } else { T::zero() };
            dev = dev.max((gram[(i, j)] - Complex::new(target, T::zero())).modulus());
        }
    }
    if !(dev <= orthonormal_tolerance::<T>()) {
        return Err(Error::NotOrthonormal {
            max_deviation: dev.to_f64_lossy(),
        });
    }
    Ok(p)
}

/// Pure state of two truncated modes, amplitudes indexed `[n_A, n_B]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState<T: Real> {
    amplitudes: DMatrix<Complex<T>>,
}

impl<T: Real> BipartiteState<T> {
    /// Normalizes the given amplitudes; fails on a zero or non-finite vector.
    pub fn new(amplitudes: DMatrix<Complex<T>>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > T::zero()) || !norm.is_finite_value() {
            return Err(Error::InvalidParameter("state has zero or non-finite norm".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.map(|z| z / norm),
        })
    }

    /// From a flat vector in (Alice, Bob) order.
    pub fn from_flat(dim_a: usize, dim_b: usize, flat: &DVector<Complex<T>>) -> Result<Self> {
        if flat.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                found: flat.len(),
            });
        }
        Self::new(DMatrix::from_fn(dim_a, dim_b, |i, j| flat[i * dim_b + j]))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.amplitudes.nrows(), self.amplitudes.ncols())
    }

    pub fn amplitudes(&self) -> &DMatrix<Complex<T>> {
        &self.amplitudes
    }

    pub fn amplitude(&self, n_a: usize, n_b: usize) -> Complex<T> {
        self.amplitudes[(n_a, n_b)]
    }

    pub fn to_flat(&self) -> DVector<Complex<T>> {
        let (da, db) = self.dims();
        DVector::from_fn(da * db, |k, _| self.amplitudes[(k / db, k % db)])
    }

    /// Zero-pads (or truncates) to new local dimensions without renormalizing.
    pub fn resized(&self, dim_a: usize, dim_b: usize) -> DMatrix<Complex<T>> {
        DMatrix::from_fn(dim_a, dim_b, |i, j| {
            if i < self.amplitudes.nrows() && j < self.amplitudes.ncols() {
                self.amplitudes[(i, j)]
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    /// `|⟨self|other⟩|²` after zero-padding both to common dimensions.
    pub fn overlap_squared(&self, other: &Self) -> T {
        let (a1, b1) = self.dims();
        let (a2, b2) = other.dims();
        let (da, db) = (a1.max(a2), b1.max(b2));
        let x = self.resized(da, db);
        let y = other.resized(da, db);
        x.iter()
            .zip(y.iter())
            .fold(Complex::new(T::zero(), T::zero()), |acc, (p, q)| acc + p.conj() * q)
            .norm_sqr()
    }

    /// Largest squared overlap over global phase and local photon-number phases
    /// `|nA, nB⟩ → e^{i(φ_A nA + φ_B nB)}|nA, nB⟩`, also trying complex
    /// conjugation and party exchange. Grid scan plus coordinate refinement.
    pub fn gauge_fidelity(&self, other: &Self) -> T {
        let (a1, b1) = self.dims();
        let (a2, b2) = other.dims();
        let (da, db) = (a1.max(a2).max(b1).max(b2), a1.max(a2).max(b1).max(b2));
        let x = self.resized(da, db);
        let y0 = other.resized(da, db);
        let candidates = [
            y0.clone(),
            y0.map(|z| z.conj()),
            y0.transpose(),
            y0.transpose().map(|z| z.conj()),
        ];
        let two_pi = T::two_pi();
        let overlap = |y: &DMatrix<Complex<T>>, pa: T, pb: T| -> T {
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 0..da {
                for j in 0..db {
                    let phase = crate::scalar::cis(pa * T::lit(i as f64) + pb * T::lit(j as f64));
                    acc += x[(i, j)].conj() * y[(i, j)] * phase;
                }
            }
            acc.norm_sqr()
        };
        let mut best = T::zero();
        let grid = 24;
        for y in &candidates {
            let mut local_best = (T::zero(), T::zero(), T::zero());
            for ia in 0..grid {
                for ib in 0..grid {
                    let pa = two_pi * T::lit(ia as f64 / grid as f64);
                    let pb = two_pi * T::lit(ib as f64 / grid as f64);
                    let f = overlap(y, pa, pb);
                    if f > local_best.0 {
                        local_best = (f, pa, pb);
                    }
                }
            }
            let (mut f, mut pa, mut pb) = local_best;
            let mut step = two_pi / T::lit(grid as f64);
            while step > T::lit(1e-9) {
                let mut improved = false;
                for (da_, db_) in [
                    (step, T::zero()),
                    (-step, T::zero()),
                    (T::zero(), step),
                    (T::zero(), -step),
                ] {
                    let g = overlap(y, pa + da_, pb + db_);
                    if g > f {
                        f = g;
                        pa += da_;
                        pb += db_;
                        improved = true;
                    }
                }
                if !improved {
                    step *= T::lit(0.5);
                }
            }
            best = best.max(f);
        }
        best
    }
}

/// Serializable amplitude record: `re`/`im` flattened in (Alice, Bob) order.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateRecord {
    pub dim_a: usize,
    pub dim_b: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&BipartiteState<f64>> for StateRecord {
    fn from(s: &BipartiteState<f64>) -> Self {
        let (dim_a, dim_b) = s.dims();
        let flat = s.to_flat();
        Self {
            dim_a,
            dim_b,
            re: flat.iter().map(|z| z.re).collect(),
            im: flat.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<&StateRecord> for BipartiteState<f64> {
    type Error = Error;

    fn try_from(r: &StateRecord) -> Result<Self> {
        let n = r.dim_a * r.dim_b;
        if r.re.len() != n || r.im.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.re.len().min(r.im.len()),
            });
        }
        let flat = DVector::from_fn(n, |k, _| Complex::new(r.re[k], r.im[k]));
        BipartiteState::from_flat(r.dim_a, r.dim_b, &flat)
    }
}

//! Dense complex linear algebra on a finite Hilbert space.
//!
//! Operators are stored as dense `n x n` complex matrices and wrapped in
//! newtypes that certify their structural role (Hermitian, projector,
//! unitary, effect) at construction. All tolerance statements use the
//! max-absolute-entry norm. Units are chosen with hbar = 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const TOL_HERMITIAN: f64 = 1e-10;
pub const TOL_PROJECTOR: f64 = 1e-10;
pub const TOL_UNITARY: f64 = 1e-10;
/// Allowed deviation of a state's norm (or a density matrix's trace) from 1.
pub const TOL_NORMALIZATION: f64 = 1e-10;
/// Eigenvalues closer than this fraction of the spectral range are merged.
pub const DEGENERACY_RELATIVE: f64 = 1e-8;
/// Negative eigenvalues above `-TOL_PSD * max(1, spectral radius)` are clipped to zero.
pub const TOL_PSD: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Max-absolute-entry norm.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(m.nrows())
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Dimension of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertDim(usize);

impl HilbertDim {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("Hilbert dimension must be >= 1".into()));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Common read access to the matrix behind any operator newtype.
pub trait Operator {
    fn matrix(&self) -> &CMatrix;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    /// Certifies hermiticity within `TOL_HERMITIAN` and stores `(M + M^dagger)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let deviation = hermitian_deviation(&m);
        if deviation > TOL_HERMITIAN {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(symmetrize(&m)))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(symmetrize(&m))
    }

    pub fn from_real_diagonal(diagonal: &[f64]) -> Self {
        let d = CVector::from_iterator(diagonal.len(), diagonal.iter().map(|&x| Complex64::from(x)));
        Self(CMatrix::from_diagonal(&d))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    /// Sorted eigenvalues.
    pub fn spectrum(&self) -> Vec<f64> {
        Eigensystem::of(self).values
    }
}

impl Operator for HermitianOperator {
    fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// Orthogonal projector with cached rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let deviation = hermitian_deviation(&m);
        if deviation > TOL_PROJECTOR {
            return Err(Error::NotHermitian { deviation });
        }
        let m = symmetrize(&m);
        let deviation = max_abs(&(&m * &m - &m));
        if deviation > TOL_PROJECTOR {
            return Err(Error::NotProjector { deviation });
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        let m = symmetrize(&m);
        let rank = m.trace().re.round().max(0.0) as usize;
        Self { matrix: m, rank }
    }

    /// Projector `W W^dagger` onto the span of orthonormal columns `W`.
    pub(crate) fn from_orthonormal_columns(n: usize, columns: &CMatrix) -> Self {
        if columns.ncols() == 0 {
            return Self::zero(n);
        }
        Self::from_matrix_unchecked(columns * columns.adjoint())
    }

    pub fn zero(n: usize) -> Self {
        Self { matrix: CMatrix::zeros(n, n), rank: 0 }
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: CMatrix::identity(n, n), rank: n }
    }

    /// Projector onto the coordinate subspace selected by `mask`.
    pub fn diagonal(mask: &[bool]) -> Self {
        let d = CVector::from_iterator(mask.len(), mask.iter().map(|&b| if b { ONE } else { ZERO }));
        Self { matrix: CMatrix::from_diagonal(&d), rank: mask.iter().filter(|&&b| b).count() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `1 - P`.
    pub fn complement(&self) -> Self {
        let n = self.dim();
        Self { matrix: CMatrix::identity(n, n) - &self.matrix, rank: n - self.rank }
    }

    pub fn to_hermitian(&self) -> HermitianOperator {
        HermitianOperator(self.matrix.clone())
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

impl Operator for Projector {
    fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(CMatrix);

impl Unitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = check_square(&m)?;
        let deviation = max_abs(&(m.adjoint() * &m - CMatrix::identity(n, n)));
        if deviation > TOL_UNITARY {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 * &other.0))
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        check_same_dim(self.dim(), state.dim())?;
        Ok(state.transformed(&self.0))
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl Operator for Unitary {
    fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// Effect of a POV measure: Hermitian with spectrum in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmEffect(CMatrix);

impl PovmEffect {
    pub fn new(m: CMatrix) -> Result<Self> {
        let h = HermitianOperator::new(m)?;
        let values = h.spectrum();
        let (lo, hi) = (values[0], values[values.len() - 1]);
        if lo < -TOL_PROJECTOR {
            return Err(Error::InvalidEffect { eigenvalue: lo });
        }
        if hi > 1.0 + TOL_PROJECTOR {
            return Err(Error::InvalidEffect { eigenvalue: hi });
        }
        Ok(Self(h.0))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }
}

impl From<&Projector> for PovmEffect {
    fn from(p: &Projector) -> Self {
        Self(p.matrix.clone())
    }
}

impl From<Projector> for PovmEffect {
    fn from(p: Projector) -> Self {
        Self(p.matrix)
    }
}

impl Operator for PovmEffect {
    fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// A normalized pure state or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Vector(CVector),
    Density(CMatrix),
}

impl QuantumState {
    /// Normalizes `v`; rejects the zero vector.
    pub fn from_vector(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if v.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(Self::Vector(v.unscale(norm)))
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut v = CVector::zeros(n);
        v[index] = ONE;
        Self::Vector(v)
    }

    /// Validates a density matrix: Hermitian, trace one, positive semidefinite.
    pub fn from_density(rho: CMatrix) -> Result<Self> {
        let h = HermitianOperator::new(rho)?;
        let trace = h.0.trace();
        if (trace.re - 1.0).abs() > TOL_NORMALIZATION {
            return Err(Error::InvalidDensity(format!("trace {} != 1", trace.re)));
        }
        let min = h.spectrum()[0];
        if min < -TOL_PSD {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
        }
        Ok(Self::Density(h.0))
    }

    /// Maximally mixed state on the range of `p`: `rho = P / tr P`.
    pub fn conditioned_on(p: &Projector) -> Result<Self> {
        let trace = p.matrix.trace().re;
        if trace < 0.5 {
            return Err(Error::DegenerateConditioning);
        }
        Ok(Self::Density(p.matrix.unscale(trace)))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Vector(v) => v.len(),
            Self::Density(rho) => rho.nrows(),
        }
    }

    pub fn as_vector(&self) -> Option<&CVector> {
        match self {
            Self::Vector(v) => Some(v),
            Self::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match self {
            Self::Vector(v) => v * v.adjoint(),
            Self::Density(rho) => rho.clone(),
        }
    }

    /// `<a|A|a>` or `tr(rho A)`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        match self {
            Self::Vector(v) => v.dotc(&(op * v)),
            Self::Density(rho) => (rho * op).trace(),
        }
    }

    /// Pure-state ensemble `sum_i w_i |psi_i><psi_i|` (eigen-ensemble for density matrices).
    pub fn ensemble(&self) -> Vec<(f64, CVector)> {
        match self {
            Self::Vector(v) => vec![(1.0, v.clone())],
            Self::Density(rho) => {
                let eig = Eigensystem::of(&HermitianOperator::from_matrix_unchecked(rho.clone()));
                eig.values
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 1e-15)
                    .map(|(k, &w)| (w, eig.vectors.column(k).into_owned()))
                    .collect()
            }
        }
    }

    /// `U a` or `U rho U^dagger`; `u` must be unitary.
    pub(crate) fn transformed(&self, u: &CMatrix) -> Self {
        match self {
            Self::Vector(v) => Self::Vector(u * v),
            Self::Density(rho) => Self::Density(u * rho * u.adjoint()),
        }
    }
}

/// Normalizes an amplitude list into a state.
pub fn make_state(amplitudes: &[Complex64]) -> Result<QuantumState> {
    QuantumState::from_vector(CVector::from_column_slice(amplitudes))
}

/// Rank-one projector `|a><a|`.
pub fn projector_from_state(a: &QuantumState) -> Result<Projector> {
    let v = a.as_vector().ok_or(Error::ExpectedVectorState)?;
    Ok(Projector::from_matrix_unchecked(v * v.adjoint()))
}

/// Eigenvalues (ascending) and matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl Eigensystem {
    pub fn of(op: &HermitianOperator) -> Self {
        let eig = op.0.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = eig.eigenvectors.select_columns(order.iter());
        Self { values, vectors }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Lambda) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Projector onto the eigenvectors whose eigenvalue satisfies `select`.
    pub fn band_projector(&self, select: impl Fn(f64) -> bool) -> Projector {
        let chosen: Vec<usize> = (0..self.dim()).filter(|&k| select(self.values[k])).collect();
        let columns = self.vectors.select_columns(chosen.iter());
        Projector::from_orthonormal_columns(self.dim(), &columns)
    }

    /// Groups eigenvalues closer than `DEGENERACY_RELATIVE * range`.
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        let n = self.dim();
        let range = self.values[n - 1] - self.values[0];
        let merge = DEGENERACY_RELATIVE * range;
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..n {
            if self.values[k] - self.values[k - 1] > merge {
                out.push(start..k);
                start = k;
            }
        }
        out.push(start..n);
        out
    }

    pub fn components(&self) -> Vec<SpectralComponent> {
        let n = self.dim();
        self.clusters()
            .into_iter()
            .map(|range| {
                let count = range.len() as f64;
                let eigenvalue = self.values[range.clone()].iter().sum::<f64>() / count;
                let columns = self.vectors.columns(range.start, range.len()).into_owned();
                SpectralComponent { eigenvalue, projector: Projector::from_orthonormal_columns(n, &columns) }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SpectralComponent {
    pub eigenvalue: f64,
    pub projector: Projector,
}

/// Distinct eigenvalues (ascending) with their eigenprojectors.
pub fn spectral_decompose(m: &HermitianOperator) -> Vec<SpectralComponent> {
    Eigensystem::of(m).components()
}

/// Time evolution generated by a fixed Hamiltonian, diagonalized once.
///
/// `unitary(t) = exp(itH)` and `heisenberg(A, t) = exp(itH) A exp(-itH)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    hamiltonian: HermitianOperator,
    eigen: Eigensystem,
}

impl Propagator {
    pub fn new(hamiltonian: &HermitianOperator) -> Self {
        Self { eigen: Eigensystem::of(hamiltonian), hamiltonian: hamiltonian.clone() }
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eigen
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    pub fn unitary(&self, t: f64) -> Unitary {
        Unitary(self.eigen.map(|lambda| Complex64::from_polar(1.0, lambda * t)))
    }

    pub(crate) fn heisenberg_matrix(&self, a: &CMatrix, t: f64) -> CMatrix {
        if t == 0.0 {
            return a.clone();
        }
        let u = self.unitary(t).0;
        &u * a * u.adjoint()
    }

    pub fn heisenberg(&self, a: &HermitianOperator, t: f64) -> Result<HermitianOperator> {
        check_same_dim(self.dim(), a.dim())?;
        Ok(HermitianOperator::from_matrix_unchecked(self.heisenberg_matrix(&a.0, t)))
    }
}

/// `exp(itH)` via the spectral decomposition of `H`.
pub fn unitary_from_hamiltonian(h: &HermitianOperator, t: f64) -> Unitary {
    Propagator::new(h).unitary(t)
}

/// `exp(iHt) A exp(-iHt)`.
pub fn evolve_heisenberg(a: &HermitianOperator, h: &HermitianOperator, t: f64) -> Result<HermitianOperator> {
    check_same_dim(h.dim(), a.dim())?;
    Propagator::new(h).heisenberg(a, t)
}

/// Positive semidefinite square root. Eigenvalues in `[-tol, 0)` are clipped.
pub fn operator_sqrt(m: &HermitianOperator) -> Result<HermitianOperator> {
    let eig = Eigensystem::of(m);
    let radius = eig.values.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let floor = -TOL_PSD * radius.max(1.0);
    let min = eig.values[0];
    if min < floor {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
    }
    Ok(HermitianOperator::from_matrix_unchecked(eig.map(|lambda| Complex64::from(lambda.max(0.0).sqrt()))))
}

/// `||AB - BA||_max`.
pub fn commutator_norm(a: &impl Operator, b: &impl Operator) -> Result<f64> {
    check_same_dim(a.dim(), b.dim())?;
    let (a, b) = (a.matrix(), b.matrix());
    Ok(max_abs(&(a * b - b * a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{hermitian as random_hermitian, seeded as rng, state as random_state};
    use crate::spin::pauli;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn make_state_normalizes() {
        let s = make_state(&[c(1.0), c(0.0)]).unwrap();
        assert_eq!(s.as_vector().unwrap().as_slice(), &[c(1.0), c(0.0)]);

        let s = make_state(&[c(1.0), c(1.0)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for z in s.as_vector().unwrap().iter() {
            assert!((z - c(h)).norm() < 1e-15);
        }

        assert_eq!(make_state(&[c(0.0), c(0.0)]), Err(Error::DegenerateState));
    }

    #[test]
    fn projector_from_basis_and_diagonal_states() {
        let p = projector_from_state(&QuantumState::basis(2, 0)).unwrap();
        assert_eq!(p.matrix(), &CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(0.0)])));
        assert_eq!(p.rank(), 1);

        let plus = make_state(&[c(1.0), c(1.0)]).unwrap();
        let p = projector_from_state(&plus).unwrap();
        assert!(p.matrix().iter().all(|z| (z - c(0.5)).norm() < 1e-15));

        let rho = QuantumState::conditioned_on(&Projector::identity(2)).unwrap();
        assert_eq!(projector_from_state(&rho), Err(Error::ExpectedVectorState));
    }

    #[test]
    fn projector_from_random_state_fixes_it() {
        let mut r = rng(1);
        for n in 2..7 {
            let a = random_state(&mut r, n);
            let p = projector_from_state(&a).unwrap();
            let m = p.matrix();
            assert!(max_abs(&(m * m - m)) < 1e-12);
            let v = a.as_vector().unwrap();
            assert!((m * v - v).norm() < 1e-12);
            assert!(Projector::new(m.clone()).is_ok());
        }
    }

    #[test]
    fn projector_constructor_rejects_non_idempotent() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(0.5)]));
        assert!(matches!(Projector::new(m), Err(Error::NotProjector { .. })));
    }

    #[test]
    fn spectral_decompose_merges_degenerate_eigenvalues() {
        let m = HermitianOperator::from_real_diagonal(&[3.0, 1.0, 1.0]);
        let parts = spectral_decompose(&m);
        assert_eq!(parts.len(), 2);
        assert!((parts[0].eigenvalue - 1.0).abs() < 1e-14);
        assert_eq!(parts[0].projector.rank(), 2);
        assert!((parts[1].eigenvalue - 3.0).abs() < 1e-14);
        assert_eq!(parts[1].projector.rank(), 1);
    }

    #[test]
    fn spectral_decompose_pauli_z() {
        let parts = spectral_decompose(&pauli::z());
        assert_eq!(parts.len(), 2);
        assert!((parts[0].eigenvalue + 1.0).abs() < 1e-14);
        assert!((parts[1].eigenvalue - 1.0).abs() < 1e-14);
        let down = Projector::diagonal(&[false, true]);
        let up = Projector::diagonal(&[true, false]);
        assert!(max_abs(&(parts[0].projector.matrix() - down.matrix())) < 1e-14);
        assert!(max_abs(&(parts[1].projector.matrix() - up.matrix())) < 1e-14);
    }

    #[test]
    fn spectral_resynthesis_on_random_hermitian() {
        let mut r = rng(2);
        for n in [1, 2, 5, 16, 48] {
            let m = random_hermitian(&mut r, n);
            let parts = spectral_decompose(&m);
            let mut sum = CMatrix::zeros(n, n);
            let mut id = CMatrix::zeros(n, n);
            for part in &parts {
                sum += part.projector.matrix().scale(part.eigenvalue);
                id += part.projector.matrix();
            }
            assert!(max_abs(&(sum - m.matrix())) < 1e-10, "n = {n}");
            assert!(max_abs(&(id - CMatrix::identity(n, n))) < 1e-10);
            for (j, pj) in parts.iter().enumerate() {
                let p = pj.projector.matrix();
                assert!(max_abs(&(p * p - p)) < 1e-10);
                for pk in parts.iter().skip(j + 1) {
                    assert!(max_abs(&(p * pk.projector.matrix())) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn unitary_of_zero_and_diagonal_hamiltonians() {
        let u = unitary_from_hamiltonian(&HermitianOperator::zeros(3), 1.7);
        assert!(max_abs(&(u.matrix() - CMatrix::identity(3, 3))) < 1e-15);

        let (w1, w2, t) = (0.3, -1.9, 2.5);
        let u = unitary_from_hamiltonian(&HermitianOperator::from_real_diagonal(&[w1, w2]), t);
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::from_polar(1.0, w1 * t),
            Complex64::from_polar(1.0, w2 * t),
        ]));
        assert!(max_abs(&(u.matrix() - expected)) < 1e-14);
    }

    #[test]
    fn unitary_group_law_and_inverse() {
        let mut r = rng(3);
        for n in [2, 6, 20] {
            let h = random_hermitian(&mut r, n);
            let prop = Propagator::new(&h);
            let (t, s) = (0.77, -1.31);
            let ut = prop.unitary(t);
            let us = prop.unitary(s);
            assert!(Unitary::new(ut.matrix().clone()).is_ok());
            let prod = ut.compose(&us).unwrap();
            assert!(max_abs(&(prod.matrix() - prop.unitary(t + s).matrix())) < 1e-10);
            assert!(max_abs(&(prop.unitary(-t).matrix() - ut.adjoint().matrix())) < 1e-10);

            let a = random_state(&mut r, n);
            let b = ut.apply(&a).unwrap();
            assert!((b.as_vector().unwrap().norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn heisenberg_trivial_cases() {
        let mut r = rng(4);
        let a = random_hermitian(&mut r, 4);
        let h = random_hermitian(&mut r, 4);
        let a0 = evolve_heisenberg(&a, &h, 0.0).unwrap();
        assert!(max_abs(&(a0.matrix() - a.matrix())) < 1e-14);

        let d = HermitianOperator::from_real_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let hd = HermitianOperator::from_real_diagonal(&[-0.5, 0.1, 0.7, 2.0]);
        for t in [0.3, 5.0, -11.0] {
            let dt = evolve_heisenberg(&d, &hd, t).unwrap();
            assert!(max_abs(&(dt.matrix() - d.matrix())) < 1e-12);
        }

        let wrong = HermitianOperator::identity(3);
        assert!(matches!(evolve_heisenberg(&wrong, &h, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn heisenberg_two_level_precession() {
        // A(t) = exp(iHt) sz exp(-iHt) with H = (w/2) sx rotates sz towards sy.
        let w = 1.3;
        let h = pauli::x().scaled(w / 2.0);
        for t in [0.0, 0.4, 1.1, 2.9, -0.8] {
            let zt = evolve_heisenberg(&pauli::z(), &h, t).unwrap();
            let expected = pauli::z().matrix().scale((w * t).cos()) + pauli::y().matrix().scale((w * t).sin());
            assert!(max_abs(&(zt.matrix() - expected)) < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn heisenberg_preserves_spectrum() {
        let mut r = rng(5);
        let a = random_hermitian(&mut r, 12);
        let h = random_hermitian(&mut r, 12);
        let at = evolve_heisenberg(&a, &h, 3.3).unwrap();
        for (x, y) in a.spectrum().iter().zip(at.spectrum()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn sqrt_examples() {
        let s = operator_sqrt(&HermitianOperator::identity(3)).unwrap();
        assert!(max_abs(&(s.matrix() - CMatrix::identity(3, 3))) < 1e-14);

        let s = operator_sqrt(&HermitianOperator::from_real_diagonal(&[4.0, 9.0])).unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[2.0, 3.0]);
        assert!(max_abs(&(s.matrix() - expected.matrix())) < 1e-14);

        let neg = HermitianOperator::from_real_diagonal(&[1.0, -0.1]);
        assert!(matches!(operator_sqrt(&neg), Err(Error::NotPositiveSemidefinite { .. })));

        let tiny_neg = HermitianOperator::from_real_diagonal(&[1.0, -1e-13]);
        let s = operator_sqrt(&tiny_neg).unwrap();
        assert_eq!(s.matrix()[(1, 1)], c(0.0));
    }

    #[test]
    fn sqrt_of_random_psd() {
        let mut r = rng(6);
        for n in [2, 7, 30] {
            let x = random_hermitian(&mut r, n);
            let m = HermitianOperator::new(x.matrix().adjoint() * x.matrix()).unwrap();
            let s = operator_sqrt(&m).unwrap();
            let scale = max_abs(m.matrix()).max(1.0);
            assert!(max_abs(&(s.matrix() * s.matrix() - m.matrix())) / scale < 1e-9);
            assert!(s.spectrum()[0] >= 0.0);
        }
    }

    #[test]
    fn commutator_norms() {
        let mut r = rng(7);
        let a = random_hermitian(&mut r, 4);
        assert!(commutator_norm(&a, &a).unwrap() < 1e-14);

        let d1 = HermitianOperator::from_real_diagonal(&[1.0, 2.0]);
        let d2 = HermitianOperator::from_real_diagonal(&[5.0, -3.0]);
        assert_eq!(commutator_norm(&d1, &d2).unwrap(), 0.0);

        // [sx, sy] = 2i sz: largest entry magnitude is 2.
        let v = commutator_norm(&pauli::x(), &pauli::y()).unwrap();
        assert!((v - 2.0).abs() < 1e-15);

        assert!(commutator_norm(&a, &d1).is_err());
    }

    #[test]
    fn density_validation() {
        let rho = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.25), c(0.75)]));
        assert!(QuantumState::from_density(rho).is_ok());
        let bad_trace = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5), c(0.75)]));
        assert!(matches!(QuantumState::from_density(bad_trace), Err(Error::InvalidDensity(_))));
        let not_psd = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(matches!(QuantumState::from_density(not_psd), Err(Error::NotPositiveSemidefinite { .. })));
        assert_eq!(QuantumState::conditioned_on(&Projector::zero(2)), Err(Error::DegenerateConditioning));
    }

    #[test]
    fn effect_validation() {
        assert!(PovmEffect::new(CMatrix::identity(2, 2).scale(0.3)).is_ok());
        assert!(matches!(PovmEffect::new(CMatrix::identity(2, 2).scale(1.3)), Err(Error::InvalidEffect { .. })));
    }
}

//! Seeded random instances for tests and scenarios: states, Hermitian
//! operators, Haar unitaries, projectors and unit 3-vectors.

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{CMatrix, CVector, HermitianOperator, Projector, QuantumState, Unitary};
use crate::spin::UnitVector3;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Uniformly distributed pure state.
pub fn state(rng: &mut impl Rng, n: usize) -> QuantumState {
    let v = CVector::from_fn(n, |_, _| gaussian_complex(rng));
    QuantumState::from_vector(v).expect("gaussian vector is nonzero")
}

/// Random density matrix `G G^dagger / tr` of full rank.
pub fn density(rng: &mut impl Rng, n: usize) -> QuantumState {
    let g = gaussian_matrix(rng, n, n);
    let rho = &g * g.adjoint();
    let trace = rho.trace().re;
    QuantumState::from_density(rho.unscale(trace)).expect("G G^dagger is a valid density")
}

/// GUE-like Hermitian matrix.
pub fn hermitian(rng: &mut impl Rng, n: usize) -> HermitianOperator {
    let g = gaussian_matrix(rng, n, n);
    HermitianOperator::new((&g + g.adjoint()).scale(0.5)).expect("symmetrized matrix is Hermitian")
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary(rng: &mut impl Rng, n: usize) -> Unitary {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for z in q.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    Unitary::new(q).expect("QR factor is unitary")
}

/// Projector of the given rank onto a Haar-random subspace.
pub fn projector(rng: &mut impl Rng, n: usize, rank: usize) -> Projector {
    let u = unitary(rng, n).into_matrix();
    let w = u.columns(0, rank).into_owned();
    Projector::new(&w * w.adjoint()).expect("orthonormal columns span a projector")
}

/// Orthonormal basis as the columns of a Haar unitary.
pub fn basis(rng: &mut impl Rng, n: usize) -> CMatrix {
    unitary(rng, n).into_matrix()
}

pub fn unit_vector3(rng: &mut impl Rng) -> UnitVector3 {
    loop {
        let v = Vector3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        if let Ok(u) = UnitVector3::normalized(v.x, v.y, v.z) {
            return u;
        }
    }
}

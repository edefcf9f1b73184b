//! Projector lattice operations: subspace-intersection meet, the strict
//! variant that refuses noncommuting pairs, and the resulting event
//! probabilities.

use crate::error::{Error, Result};
use crate::hilbert::commutator_norm;
use crate::hilbert::{check_same_dim, CMatrix, Eigensystem, HermitianOperator, Operator, Projector, QuantumState};
use crate::sequence::clip_probability;

/// Eigenvalues of `P + Q` above `2 - TOL_MEET` span the intersection.
pub const TOL_MEET: f64 = 1e-8;
/// Pairs with `||[P, Q]||_max` above this are treated as noncommuting.
pub const TOL_COMMUTE: f64 = 1e-10;
/// Completeness tolerance for projector families.
pub const TOL_FAMILY: f64 = 1e-9;

/// A value that exists only when the projectors involved commute.
///
/// `Undefined` propagates: anything computed from it stays `Undefined`.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<T> {
    Defined(T),
    Undefined { commutator_norm: f64 },
}

impl<T> Verdict<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Verdict<U> {
        match self {
            Self::Defined(x) => Verdict::Defined(f(x)),
            Self::Undefined { commutator_norm } => Verdict::Undefined { commutator_norm },
        }
    }

    pub fn and_then<U>(self, f: impl FnOnce(T) -> Verdict<U>) -> Verdict<U> {
        match self {
            Self::Defined(x) => f(x),
            Self::Undefined { commutator_norm } => Verdict::Undefined { commutator_norm },
        }
    }

    pub fn defined(self) -> Option<T> {
        match self {
            Self::Defined(x) => Some(x),
            Self::Undefined { .. } => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Self::Defined(_))
    }
}

pub type MeetResult = Verdict<Projector>;

/// Projector onto `Range(P) ∩ Range(Q)`.
pub fn meet(p: &Projector, q: &Projector) -> Result<Projector> {
    check_same_dim(p.dim(), q.dim())?;
    let sum = HermitianOperator::new(p.matrix() + q.matrix())?;
    let eig = Eigensystem::of(&sum);
    Ok(eig.band_projector(|lambda| lambda > 2.0 - TOL_MEET))
}

/// `Defined(PQ)` for commuting projectors, `Undefined` otherwise.
pub fn meet_strict(p: &Projector, q: &Projector) -> Result<MeetResult> {
    let norm = commutator_norm(p, q)?;
    if norm > TOL_COMMUTE {
        return Ok(Verdict::Undefined { commutator_norm: norm });
    }
    Ok(Verdict::Defined(Projector::new(p.matrix() * q.matrix())?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicMode {
    /// Conjunction is subspace intersection, always defined.
    Orthodox,
    /// Conjunction only for commuting projectors.
    Strict,
}

/// Probability of the conjunction "P and Q" in state `a`.
pub fn ql_sequence_probability(
    a: &QuantumState,
    p: &Projector,
    q: &Projector,
    mode: LogicMode,
) -> Result<Verdict<f64>> {
    check_same_dim(p.dim(), a.dim())?;
    let conjunction = match mode {
        LogicMode::Orthodox => Verdict::Defined(meet(p, q)?),
        LogicMode::Strict => meet_strict(p, q)?,
    };
    match conjunction {
        Verdict::Defined(pq) => Ok(Verdict::Defined(clip_probability(a.expectation(pq.matrix()).re)?)),
        Verdict::Undefined { commutator_norm } => Ok(Verdict::Undefined { commutator_norm }),
    }
}

/// Checks that `family` consists of mutually orthogonal projectors summing to the identity.
pub fn check_complete_family(family: &[Projector]) -> Result<()> {
    let first = family.first().ok_or_else(|| Error::IncompleteFamily("empty family".into()))?;
    let n = first.dim();
    let mut sum = CMatrix::zeros(n, n);
    for (j, p) in family.iter().enumerate() {
        check_same_dim(n, p.dim())?;
        sum += p.matrix();
        for q in &family[j + 1..] {
            let overlap = crate::hilbert::max_abs(&(p.matrix() * q.matrix()));
            if overlap > TOL_FAMILY {
                return Err(Error::IncompleteFamily(format!("members are not orthogonal (overlap {overlap:.3e})")));
            }
        }
    }
    let deviation = crate::hilbert::max_abs(&(sum - CMatrix::identity(n, n)));
    if deviation > TOL_FAMILY {
        return Err(Error::IncompleteFamily(format!("members do not sum to the identity (deviation {deviation:.3e})")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSumCheck {
    /// `sum_b <a| meet(P_b, P_c) |a>`.
    pub lhs: f64,
    /// `<a| P_c |a>`.
    pub rhs: f64,
    pub delta: f64,
}

/// Evaluates the sum rule `P_ac = sum_b P_abc` with the orthodox meet.
pub fn ql_chain_sum_check(a: &QuantumState, basis_b: &[Projector], pi_c: &Projector) -> Result<ChainSumCheck> {
    check_complete_family(basis_b)?;
    if let Some(bad) = basis_b.iter().find(|p| p.rank() != 1) {
        return Err(Error::IncompleteFamily(format!("member of rank {} is not rank one", bad.rank())));
    }
    check_same_dim(pi_c.dim(), a.dim())?;
    let mut lhs = 0.0;
    for pb in basis_b {
        let m = meet(pb, pi_c)?;
        lhs += a.expectation(m.matrix()).re;
    }
    let lhs = clip_probability(lhs)?;
    let rhs = clip_probability(a.expectation(pi_c.matrix()).re)?;
    Ok(ChainSumCheck { lhs, rhs, delta: (lhs - rhs).abs() })
}

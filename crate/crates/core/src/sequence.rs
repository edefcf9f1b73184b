//! Probability rules for sequences of measurements.
//!
//! Conventions: a projector measured at time `t` is taken in the Heisenberg
//! picture as `P(t) = U(t)^dagger P U(t)` with `U(t) = exp(itH)`; equivalently
//! the state moves as `|a(t)> = U(t)|a>`. The explicit pointer model below
//! uses the same convention so that both routes are directly comparable.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_same_dim, max_abs, CMatrix, CVector, Eigensystem, HermitianOperator, Operator, PovmEffect, Projector,
    Propagator, QuantumState,
};
use crate::logic::check_complete_family;

/// Probabilities within this band outside `[0, 1]` are clipped; beyond it they are errors.
pub const TOL_CLIP: f64 = 1e-9;
/// Default cap on `system_dim * pointer_dim^steps` for the pointer model.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;
const TOL_BASIS: f64 = 1e-10;

pub fn clip_probability(value: f64) -> Result<f64> {
    if !value.is_finite() || !(-TOL_CLIP..=1.0 + TOL_CLIP).contains(&value) {
        return Err(Error::ProbabilityOutOfRange { value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// `tr(rho E)`, or `<a|E|a>` for a vector state.
pub fn born_probability(state: &QuantumState, effect: &PovmEffect) -> Result<f64> {
    check_same_dim(effect.dim(), state.dim())?;
    clip_probability(state.expectation(effect.matrix()).re)
}

/// Probability `|| P_n ... P_1 a ||^2` (or `tr(K rho K^dagger)`) of passing every
/// filter in order with ideal reductions in between.
pub(crate) fn reduction_chain_probability(initial: &QuantumState, filters: &[&CMatrix]) -> f64 {
    match initial {
        QuantumState::Vector(a) => {
            let mut v = a.clone();
            for p in filters {
                v = *p * v;
            }
            v.norm_squared()
        }
        QuantumState::Density(rho) => {
            let mut m = rho.clone();
            for p in filters {
                m = *p * m * *p;
            }
            m.trace().re
        }
    }
}

/// `U(t)^dagger A U(t)` with `U(t) = exp(itH)`; identity map without a Hamiltonian.
fn at_time(propagator: Option<&Propagator>, a: &CMatrix, t: f64) -> CMatrix {
    match propagator {
        Some(prop) => prop.heisenberg_matrix(a, -t),
        None => a.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementStep {
    pub projector: Projector,
    pub time: f64,
}

impl MeasurementStep {
    pub fn new(projector: Projector, time: f64) -> Self {
        Self { projector, time }
    }
}

/// An initial state followed by projective filters at given times.
#[derive(Debug, Clone)]
pub struct MeasurementChain {
    initial: QuantumState,
    steps: Vec<MeasurementStep>,
    hamiltonian: Option<HermitianOperator>,
}

impl MeasurementChain {
    pub fn new(
        initial: QuantumState,
        steps: Vec<MeasurementStep>,
        hamiltonian: Option<HermitianOperator>,
    ) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidArgument("measurement chain has no steps".into()));
        }
        let n = initial.dim();
        for step in &steps {
            check_same_dim(n, step.projector.dim())?;
            if !step.time.is_finite() {
                return Err(Error::InvalidArgument("step time must be finite".into()));
            }
        }
        if let Some(h) = &hamiltonian {
            check_same_dim(n, h.dim())?;
            for w in steps.windows(2) {
                if w[1].time <= w[0].time {
                    return Err(Error::TimeOrdering(format!("{} then {}", w[0].time, w[1].time)));
                }
            }
        }
        Ok(Self { initial, steps, hamiltonian })
    }

    /// Chain that starts from the normalized range of `pi_a`, `rho = P_a / tr P_a`.
    pub fn conditioned(
        pi_a: &Projector,
        steps: Vec<MeasurementStep>,
        hamiltonian: Option<HermitianOperator>,
    ) -> Result<Self> {
        Self::new(QuantumState::conditioned_on(pi_a)?, steps, hamiltonian)
    }

    pub fn initial(&self) -> &QuantumState {
        &self.initial
    }

    pub fn steps(&self) -> &[MeasurementStep] {
        &self.steps
    }

    pub fn hamiltonian(&self) -> Option<&HermitianOperator> {
        self.hamiltonian.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    fn propagator(&self) -> Option<Propagator> {
        self.hamiltonian.as_ref().map(Propagator::new)
    }

    /// Step projectors in the Heisenberg picture.
    pub fn heisenberg_projectors(&self) -> Vec<CMatrix> {
        let prop = self.propagator();
        self.steps.iter().map(|s| at_time(prop.as_ref(), s.projector.matrix(), s.time)).collect()
    }
}

/// Nested two-sided product `tr(rho P_b P_c ... P_c P_b)` for the chain.
pub fn wigner_chain(chain: &MeasurementChain) -> Result<f64> {
    let filters = chain.heisenberg_projectors();
    let refs: Vec<&CMatrix> = filters.iter().collect();
    clip_probability(reduction_chain_probability(&chain.initial, &refs))
}

/// Orthonormal basis stored as matrix columns, with outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    labels: Vec<String>,
    vectors: CMatrix,
}

impl OrthonormalBasis {
    pub fn new(labels: Vec<String>, vectors: CMatrix) -> Result<Self> {
        let n = vectors.nrows();
        if vectors.ncols() != n || labels.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for a {}x{} basis matrix",
                labels.len(),
                n,
                vectors.ncols()
            )));
        }
        let deviation = max_abs(&(vectors.adjoint() * &vectors - CMatrix::identity(n, n)));
        if deviation > TOL_BASIS {
            return Err(Error::IncompleteFamily(format!("basis is not orthonormal ({deviation:.3e})")));
        }
        Ok(Self { labels, vectors })
    }

    /// Columns labelled `0, 1, ...`.
    pub fn indexed(vectors: CMatrix) -> Result<Self> {
        let labels = (0..vectors.ncols()).map(|k| k.to_string()).collect();
        Self::new(labels, vectors)
    }

    pub fn computational(n: usize) -> Self {
        Self::indexed(CMatrix::identity(n, n)).expect("identity is orthonormal")
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    pub fn family(&self) -> ProjectorFamily {
        let projectors = (0..self.vectors.ncols())
            .map(|k| {
                let v = self.vector(k);
                Projector::new(&v * v.adjoint()).expect("unit vector gives a projector")
            })
            .collect();
        ProjectorFamily { labels: self.labels.clone(), projectors }
    }
}

/// Complete family of mutually orthogonal projectors (a projective measurement).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    labels: Vec<String>,
    projectors: Vec<Projector>,
}

impl ProjectorFamily {
    pub fn new(labels: Vec<String>, projectors: Vec<Projector>) -> Result<Self> {
        if labels.len() != projectors.len() {
            return Err(Error::ShapeMismatch(format!("{} labels for {} projectors", labels.len(), projectors.len())));
        }
        check_complete_family(&projectors)?;
        Ok(Self { labels, projectors })
    }

    /// `{1 - P, P}` labelled `"0"` and `"1"`.
    pub fn binary(p: &Projector) -> Self {
        Self { labels: vec!["0".into(), "1".into()], projectors: vec![p.complement(), p.clone()] }
    }

    /// Eigenprojectors of a nondegenerate observable, labelled by eigenvalue.
    pub fn eigenbasis(observable: &HermitianOperator) -> Result<Self> {
        let eig = Eigensystem::of(observable);
        for cluster in eig.clusters() {
            if cluster.len() > 1 {
                return Err(Error::DegenerateSpectrum { eigenvalue: eig.values()[cluster.start] });
            }
        }
        let n = eig.dim();
        let basis =
            OrthonormalBasis::new(eig.values().iter().map(|v| format!("{v:.6}")).collect(), eig.vectors().clone())?;
        debug_assert_eq!(basis.labels.len(), n);
        Ok(basis.family())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    fn require_rank_one(&self) -> Result<()> {
        match self.projectors.iter().find(|p| p.rank() != 1) {
            Some(p) => Err(Error::IncompleteFamily(format!("member of rank {} is not rank one", p.rank()))),
            None => Ok(()),
        }
    }
}

/// Real transition probabilities `P_ab` indexed by outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: DMatrix<f64>,
}

impl TransitionTable {
    pub fn new(rows: Vec<String>, cols: Vec<String>, entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != rows.len() || entries.ncols() != cols.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} table for {} row and {} column labels",
                entries.nrows(),
                entries.ncols(),
                rows.len(),
                cols.len()
            )));
        }
        for &p in entries.iter() {
            clip_probability(p)?;
        }
        Ok(Self { rows, cols, entries })
    }

    /// `P_ab = tr(P_a P_b) / tr P_a`.
    pub fn between(a: &ProjectorFamily, b: &ProjectorFamily) -> Result<Self> {
        check_same_dim(a.dim(), b.dim())?;
        let entries = DMatrix::from_fn(a.len(), b.len(), |i, j| {
            let pa = a.projectors[i].matrix();
            (pa * b.projectors[j].matrix()).trace().re / pa.trace().re
        });
        Self::new(a.labels.clone(), b.labels.clone(), entries)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.row_iter().map(|r| r.sum()).collect()
    }
}

/// Complex amplitudes `phi_ab = <b|a>`, so that `|phi_ab|^2 = P_ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTable {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: CMatrix,
}

impl AmplitudeTable {
    pub fn between(a: &OrthonormalBasis, b: &OrthonormalBasis) -> Result<Self> {
        check_same_dim(a.vectors.nrows(), b.vectors.nrows())?;
        Ok(Self {
            rows: a.labels.clone(),
            cols: b.labels.clone(),
            entries: (b.vectors.adjoint() * &a.vectors).transpose(),
        })
    }

    pub fn probabilities(&self) -> Result<TransitionTable> {
        TransitionTable::new(self.rows.clone(), self.cols.clone(), self.entries.map(|z| z.norm_sqr()))
    }
}

fn check_composable(left_cols: &[String], right_rows: &[String]) -> Result<()> {
    if left_cols != right_rows {
        return Err(Error::ShapeMismatch(format!("intermediate outcomes differ: {left_cols:?} vs {right_rows:?}")));
    }
    Ok(())
}

/// Classical composition `P_ac = sum_b P_ab P_bc`.
pub fn markov_composition(ab: &TransitionTable, bc: &TransitionTable) -> Result<TransitionTable> {
    check_composable(&ab.cols, &bc.rows)?;
    TransitionTable::new(ab.rows.clone(), bc.cols.clone(), &ab.entries * &bc.entries)
}

/// Amplitude composition `phi_ac = sum_b phi_ab phi_bc`.
pub fn amplitude_composition(ab: &AmplitudeTable, bc: &AmplitudeTable) -> Result<AmplitudeTable> {
    check_composable(&ab.cols, &bc.rows)?;
    Ok(AmplitudeTable { rows: ab.rows.clone(), cols: bc.cols.clone(), entries: &ab.entries * &bc.entries })
}

/// Direct two-time probabilities versus their Markov reconstruction through an
/// unobserved intermediate measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct FeynmanGap {
    pub a_labels: Vec<String>,
    pub c_labels: Vec<String>,
    /// `P(c at t3 | a at t1)` with nothing measured at `t2`.
    pub p_direct: DMatrix<f64>,
    /// `sum_b P(b at t2 | a at t1) P(c at t3 | b at t2)`.
    pub p_markov: DMatrix<f64>,
    pub max_abs_gap: f64,
    /// Born weights of the `a` outcomes at `t1` in the supplied state.
    pub a_weights: Vec<f64>,
    /// `sum_a w_a sum_c |p_direct - p_markov|`: L1 distance of the joint `(a, c)` laws.
    pub state_weighted_gap: f64,
    /// `max |P_abc - P_ab P_bc|` with `P_abc` from the reduction chain.
    pub factorization_defect: f64,
}

fn three_time_gap(
    a: &ProjectorFamily,
    b: &ProjectorFamily,
    c: &ProjectorFamily,
    state: &QuantumState,
    propagator: Option<&Propagator>,
    times: [f64; 3],
) -> Result<FeynmanGap> {
    let n = a.dim();
    for f in [b, c] {
        check_same_dim(n, f.dim())?;
    }
    check_same_dim(n, state.dim())?;
    for f in [a, b, c] {
        f.require_rank_one()?;
    }
    let lift = |f: &ProjectorFamily, t: f64| -> Vec<CMatrix> {
        f.projectors.iter().map(|p| at_time(propagator, p.matrix(), t)).collect()
    };
    let (pa, pb, pc) = (lift(a, times[0]), lift(b, times[1]), lift(c, times[2]));
    let two_time = |x: &CMatrix, y: &CMatrix| (x * y).trace().re / x.trace().re;

    let ab = DMatrix::from_fn(pa.len(), pb.len(), |i, j| two_time(&pa[i], &pb[j]));
    let bc = DMatrix::from_fn(pb.len(), pc.len(), |i, j| two_time(&pb[i], &pc[j]));
    let p_direct = DMatrix::from_fn(pa.len(), pc.len(), |i, j| two_time(&pa[i], &pc[j]));
    let p_markov = &ab * &bc;
    for &p in p_direct.iter().chain(p_markov.iter()) {
        clip_probability(p)?;
    }

    let a_weights = pa.iter().map(|p| clip_probability(state.expectation(p).re)).collect::<Result<Vec<_>>>()?;
    let gap = &p_direct - &p_markov;
    let max_abs_gap = gap.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let state_weighted_gap =
        (0..pa.len()).map(|i| a_weights[i] * gap.row(i).iter().map(|x| x.abs()).sum::<f64>()).sum();

    let mut factorization_defect = 0.0_f64;
    for (i, xa) in pa.iter().enumerate() {
        let norm = xa.trace().re;
        for (j, xb) in pb.iter().enumerate() {
            for (k, xc) in pc.iter().enumerate() {
                let chain = (xa * xb * xc * xb).trace().re / norm;
                factorization_defect = factorization_defect.max((chain - ab[(i, j)] * bc[(j, k)]).abs());
            }
        }
    }

    Ok(FeynmanGap {
        a_labels: a.labels.clone(),
        c_labels: c.labels.clone(),
        p_direct,
        p_markov,
        max_abs_gap,
        a_weights,
        state_weighted_gap,
        factorization_defect,
    })
}

/// Compares the direct `a -> c` probability with the Markov sum over an
/// intermediate complete measurement `b`.
pub fn feynman_discrepancy(
    a: &ProjectorFamily,
    b: &ProjectorFamily,
    c: &ProjectorFamily,
    state: &QuantumState,
    hamiltonian: Option<&HermitianOperator>,
    times: [f64; 3],
) -> Result<FeynmanGap> {
    if !(times[0] < times[1] && times[1] < times[2]) {
        return Err(Error::TimeOrdering(format!("{times:?}")));
    }
    let prop = hamiltonian.map(Propagator::new);
    three_time_gap(a, b, c, state, prop.as_ref(), times)
}

/// Measurement apparatus: one fresh pointer per step, coupled by
/// `exp(-i g tau P (x) G)` where `G` generates the cyclic pointer shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerModel {
    pub pointer_dim: usize,
    pub coupling: f64,
    pub duration: f64,
}

impl PointerModel {
    pub fn new(pointer_dim: usize, coupling: f64, duration: f64) -> Result<Self> {
        if pointer_dim < 2 {
            return Err(Error::InvalidArgument("pointer must distinguish two outcomes".into()));
        }
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidArgument(format!("coupling {coupling} must be >= 0")));
        }
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::InvalidArgument(format!("duration {duration} must be >= 0")));
        }
        Ok(Self { pointer_dim, coupling, duration })
    }

    /// Pointer of dimension outcomes + 1 for yes/no steps.
    pub fn binary(coupling: f64, duration: f64) -> Result<Self> {
        Self::new(3, coupling, duration)
    }

    /// `g tau`; at 1 the "yes" record is orthogonal to the ready state.
    pub fn strength(&self) -> f64 {
        self.coupling * self.duration
    }
}

/// `exp(-i s G)` with `exp(-iG)|j> = |j + 1 mod m>`, eigenphases taken in `(-pi, pi]`.
pub fn pointer_shift(m: usize, s: f64) -> CMatrix {
    let norm = 1.0 / (m as f64).sqrt();
    let fourier = CMatrix::from_fn(m, m, |j, k| {
        Complex64::from_polar(norm, 2.0 * std::f64::consts::PI * (j * k) as f64 / m as f64)
    });
    let phases = CVector::from_fn(m, |k, _| {
        let wrapped = if 2 * k <= m { k as f64 } else { k as f64 - m as f64 };
        Complex64::from_polar(1.0, -s * 2.0 * std::f64::consts::PI * wrapped / m as f64)
    });
    &fourier * CMatrix::from_diagonal(&phases) * fourier.adjoint()
}

/// Applies `op` to the tensor factors `axes` of a row-major composite vector.
fn apply_on_factors(state: &CVector, dims: &[usize], axes: &[usize], op: &CMatrix) -> CVector {
    let total = state.len();
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let local_dims: Vec<usize> = axes.iter().map(|&a| dims[a]).collect();
    let local: usize = local_dims.iter().product();
    let offsets: Vec<usize> = (0..local)
        .map(|mut l| {
            let mut off = 0;
            for (pos, &axis) in axes.iter().enumerate().rev() {
                off += (l % local_dims[pos]) * strides[axis];
                l /= local_dims[pos];
            }
            off
        })
        .collect();
    let mut out = CVector::zeros(total);
    let mut buf = CVector::zeros(local);
    for base in 0..total {
        if axes.iter().any(|&a| !(base / strides[a]).is_multiple_of(dims[a])) {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = state[base + off];
        }
        let res = op * &buf;
        for (l, off) in offsets.iter().enumerate() {
            out[base + off] = res[l];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemonComparison {
    /// Outcome sequences in step-major lexicographic order; `1` means the step's projector fired.
    pub sequences: Vec<Vec<u8>>,
    pub wigner: Vec<f64>,
    pub full_model: Vec<f64>,
    pub total_variation: f64,
    /// Reduced density matrix of the system after the last coupling.
    pub system_state: CMatrix,
}

fn sequence_bits(index: usize, steps: usize) -> Vec<u8> {
    (0..steps).map(|j| ((index >> (steps - 1 - j)) & 1) as u8).collect()
}

pub fn demon_compare(chain: &MeasurementChain, pointer: &PointerModel) -> Result<DemonComparison> {
    demon_compare_with_cap(chain, pointer, DEFAULT_DIMENSION_CAP)
}

/// Reduction-chain probabilities of every yes/no outcome sequence next to the
/// pointer statistics of the explicitly simulated system-plus-pointers dynamics.
pub fn demon_compare_with_cap(chain: &MeasurementChain, pointer: &PointerModel, cap: usize) -> Result<DemonComparison> {
    let d = chain.dim();
    let k = chain.steps.len();
    let m = pointer.pointer_dim;
    let required = (0..k).try_fold(d, |acc, _| acc.checked_mul(m)).unwrap_or(usize::MAX);
    if required > cap {
        return Err(Error::DimensionCap { required, cap });
    }
    let n_seq = 1usize << k;
    let prop = chain.propagator();

    // Reduction chain per outcome sequence.
    let families: Vec<[CMatrix; 2]> = chain
        .steps
        .iter()
        .map(|s| {
            [
                at_time(prop.as_ref(), s.projector.complement().matrix(), s.time),
                at_time(prop.as_ref(), s.projector.matrix(), s.time),
            ]
        })
        .collect();
    let wigner = (0..n_seq)
        .map(|idx| {
            let bits = sequence_bits(idx, k);
            let filters: Vec<&CMatrix> = bits.iter().zip(&families).map(|(&b, f)| &f[b as usize]).collect();
            clip_probability(reduction_chain_probability(&chain.initial, &filters))
        })
        .collect::<Result<Vec<_>>>()?;

    // Full unitary model on system (x) pointer_1 (x) ... (x) pointer_k.
    let mut dims = vec![d];
    dims.extend(std::iter::repeat_n(m, k));
    let pointer_block = required / d;
    let shift = pointer_shift(m, pointer.strength());
    let couplings: Vec<CMatrix> = chain
        .steps
        .iter()
        .map(|s| {
            let p = s.projector.matrix();
            let id_d = CMatrix::identity(d, d);
            (id_d - p).kronecker(&CMatrix::identity(m, m)) + p.kronecker(&shift)
        })
        .collect();
    let evolutions: Vec<Option<CMatrix>> = {
        let mut last = 0.0;
        chain
            .steps
            .iter()
            .map(|s| {
                let dt = s.time - last;
                last = s.time;
                match &prop {
                    Some(p) if dt != 0.0 => Some(p.unitary(dt).into_matrix()),
                    _ => None,
                }
            })
            .collect()
    };

    let mut pointer_probs = vec![0.0; pointer_block];
    let mut system_state = CMatrix::zeros(d, d);
    for (weight, psi) in chain.initial.ensemble() {
        let mut state = CVector::zeros(required);
        for s in 0..d {
            state[s * pointer_block] = psi[s];
        }
        for (j, (evolve, coupling)) in evolutions.iter().zip(&couplings).enumerate() {
            if let Some(u) = evolve {
                state = apply_on_factors(&state, &dims, &[0], u);
            }
            state = apply_on_factors(&state, &dims, &[0, j + 1], coupling);
        }
        for (r, prob) in pointer_probs.iter_mut().enumerate() {
            *prob += weight * (0..d).map(|s| state[s * pointer_block + r].norm_sqr()).sum::<f64>();
        }
        let amplitudes = CMatrix::from_fn(d, pointer_block, |s, r| state[s * pointer_block + r]);
        system_state += (&amplitudes * amplitudes.adjoint()).scale(weight);
    }

    // Pointer j reading |1> records "yes" for step j.
    let mut full_model = vec![0.0; n_seq];
    for (r, prob) in pointer_probs.iter().enumerate() {
        let mut idx = 0;
        let mut rest = r;
        for j in (0..k).rev() {
            if rest % m == 1 {
                idx |= 1 << (k - 1 - j);
            }
            rest /= m;
        }
        full_model[idx] += prob;
    }
    let full_model = full_model.into_iter().map(clip_probability).collect::<Result<Vec<_>>>()?;

    let total_variation = 0.5 * wigner.iter().zip(&full_model).map(|(w, f)| (w - f).abs()).sum::<f64>();
    Ok(DemonComparison {
        sequences: (0..n_seq).map(|i| sequence_bits(i, k)).collect(),
        wigner,
        full_model,
        total_variation,
        system_state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub coupling: f64,
    pub total_variation: f64,
}

/// `demon_compare` over a list of couplings; order of results follows `couplings`.
pub fn demon_sweep(
    chain: &MeasurementChain,
    pointer_dim: usize,
    couplings: &[f64],
    duration: f64,
    cap: usize,
) -> Result<Vec<SweepPoint>> {
    couplings
        .par_iter()
        .map(|&g| {
            let pointer = PointerModel::new(pointer_dim, g, duration)?;
            let cmp = demon_compare_with_cap(chain, &pointer, cap)?;
            Ok(SweepPoint { coupling: g, total_variation: cmp.total_variation })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingDefect {
    pub times: [f64; 3],
    /// `P_ac` with no intermediate measurement.
    pub direct: DMatrix<f64>,
    /// `sum_b P_ab P_bc`.
    pub markov: DMatrix<f64>,
    /// `max_ac |P_ac - sum_b P_ab P_bc|`.
    pub max_defect: f64,
    pub state_weighted_defect: f64,
    /// `max |P_abc - P_ab P_bc|` with ideal reductions; vanishes for rank-one outcomes.
    pub factorization_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovReport {
    pub labels: Vec<String>,
    /// Observations at `t1 < t2 < t3`.
    pub memory: OrderingDefect,
    /// The same observations taken in the order `t3, t2, t1`.
    pub anticipation: OrderingDefect,
    pub max_defect: f64,
}

/// Memory and anticipation defects of repeated observations of one observable.
pub fn markov_violation_report(
    observable: &HermitianOperator,
    hamiltonian: &HermitianOperator,
    state: &QuantumState,
    times: [f64; 3],
) -> Result<MarkovReport> {
    if !(times[0] < times[1] && times[1] < times[2]) {
        return Err(Error::TimeOrdering(format!("{times:?}")));
    }
    check_same_dim(observable.dim(), hamiltonian.dim())?;
    let family = ProjectorFamily::eigenbasis(observable)?;
    let prop = Propagator::new(hamiltonian);
    let run = |t: [f64; 3]| -> Result<OrderingDefect> {
        let gap = three_time_gap(&family, &family, &family, state, Some(&prop), t)?;
        Ok(OrderingDefect {
            times: t,
            max_defect: gap.max_abs_gap,
            state_weighted_defect: gap.state_weighted_gap,
            factorization_defect: gap.factorization_defect,
            direct: gap.p_direct,
            markov: gap.p_markov,
        })
    };
    let memory = run(times)?;
    let anticipation = run([times[2], times[1], times[0]])?;
    Ok(MarkovReport {
        labels: family.labels.clone(),
        max_defect: memory.max_defect.max(anticipation.max_defect),
        memory,
        anticipation,
    })
}

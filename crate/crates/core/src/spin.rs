//! Spin-1/2 statistics and a classical hidden-variable sphere model.
//!
//! The quantum side computes `tr(P_u P_v)` for the eigenprojectors
//! `P_u = (1 + u.sigma)/2`. The classical side draws a hidden unit vector
//! `lambda` with density `max(0, u.lambda)/pi` and answers every direction `v`
//! with `sign(v.lambda)`; this reproduces `(1 + u.v)/2` for all `v`.
//!
//! Sampling is counter-based: sample `i` consumes words `[4i, 4i + 4)` of the
//! ChaCha8 keystream keyed by the run seed, so any partition of the sample
//! range over threads yields identical results.

use nalgebra::{Matrix3, Rotation3, Vector3};
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, Operator, Projector};

/// Closed-form agreement required of `tr(P_u P_v)`.
pub const TOL_CLOSED_FORM: f64 = 1e-12;
/// Allowed deviation of `|u|` from one.
pub const TOL_UNIT: f64 = 1e-12;
/// Triples of directions with `|det| <= TOL_INDEPENDENCE` count as dependent.
pub const TOL_INDEPENDENCE: f64 = 1e-9;
/// Exhaustive sign enumeration is limited to this many directions.
pub const MAX_JOINT_DIRECTIONS: usize = 16;

const CHUNK: u64 = 1 << 15;

pub mod pauli {
    use num_complex::Complex64;

    use crate::hilbert::{CMatrix, HermitianOperator};

    fn op(entries: [Complex64; 4]) -> HermitianOperator {
        HermitianOperator::new(CMatrix::from_row_slice(2, 2, &entries)).expect("Pauli matrices are Hermitian")
    }

    pub fn x() -> HermitianOperator {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        op([o, l, l, o])
    }

    pub fn y() -> HermitianOperator {
        let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
        op([o, -i, i, o])
    }

    pub fn z() -> HermitianOperator {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        op([l, o, o, -l])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3(Vector3<f64>);

impl UnitVector3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vector3::new(x, y, z);
        let norm = v.norm();
        if !norm.is_finite() || (norm * norm - 1.0).abs() > TOL_UNIT {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Self(v))
    }

    /// Scales a nonzero vector to unit length.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vector3::new(x, y, z);
        let norm = v.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Self(v / norm))
    }

    pub fn x_axis() -> Self {
        Self(Vector3::x())
    }

    pub fn y_axis() -> Self {
        Self(Vector3::y())
    }

    pub fn z_axis() -> Self {
        Self(Vector3::z())
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self(Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn components(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn rotated(&self, rotation: &Rotation3<f64>) -> Self {
        Self(rotation * self.0)
    }
}

impl std::ops::Neg for UnitVector3 {
    type Output = Self;

    fn neg(self) -> Self {
        Self(-self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

/// `(1 + s u.sigma)/2`: eigenprojector of `u.sigma` for eigenvalue `s`.
pub fn spin_projector(u: &UnitVector3, sign: Sign) -> Projector {
    let s = sign.value();
    let [x, y, z] = u.components();
    let half = |re: f64, im: f64| Complex64::new(0.5 * re, 0.5 * im);
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[half(1.0 + s * z, 0.0), half(s * x, -s * y), half(s * x, s * y), half(1.0 - s * z, 0.0)],
    );
    Projector::new(m).expect("spin projector is idempotent for unit u")
}

/// `tr(P_u P_v)`, cross-checked against `(1 + u.v)/2`.
pub fn quantum_spin_correlation(u: &UnitVector3, v: &UnitVector3) -> Result<f64> {
    let pu = spin_projector(u, Sign::Plus);
    let pv = spin_projector(v, Sign::Plus);
    let trace = (pu.matrix() * pv.matrix()).trace();
    let closed = 0.5 * (1.0 + u.dot(v));
    if (trace.re - closed).abs() > TOL_CLOSED_FORM || trace.im.abs() > TOL_CLOSED_FORM {
        return Err(Error::InternalConsistency(format!("tr(P_u P_v) = {trace} but (1 + u.v)/2 = {closed}")));
    }
    Ok(trace.re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereModelConfig {
    /// The prepared direction: the sphere was seen white (+1) along it.
    pub conditioning_direction: UnitVector3,
    pub n_samples: u64,
    pub seed: u64,
}

impl SphereModelConfig {
    pub fn new(conditioning_direction: UnitVector3, n_samples: u64, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
        }
        Ok(Self { conditioning_direction, n_samples, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub n: u64,
}

impl MonteCarloEstimate {
    pub fn from_count(hits: u64, n: u64) -> Self {
        let p_hat = hits as f64 / n as f64;
        Self { p_hat, std_err: (p_hat * (1.0 - p_hat) / n as f64).sqrt(), n }
    }
}

/// One sphere: its hidden vector and the colour (+1/-1) seen along each direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSample {
    pub index: u64,
    pub hidden: [f64; 3],
    pub outcomes: Vec<i8>,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn stream_at(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(4 * index as u128);
    rng
}

/// Orthonormal pair completing `u` to a right-handed frame.
fn frame(u: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if u.x.abs() <= u.y.abs() && u.x.abs() <= u.z.abs() {
        Vector3::x()
    } else if u.y.abs() <= u.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = u.cross(&helper).normalize();
    let e2 = u.cross(&e1);
    (e1, e2)
}

struct HiddenSampler {
    u: Vector3<f64>,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
}

impl HiddenSampler {
    fn new(u: &UnitVector3) -> Self {
        let (e1, e2) = frame(&u.0);
        Self { u: u.0, e1, e2 }
    }

    /// Cosine-weighted draw on the hemisphere around `u`.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Vector3<f64> {
        let cos_theta = uniform(rng).sqrt();
        let phi = 2.0 * std::f64::consts::PI * uniform(rng);
        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        self.u * cos_theta + (self.e1 * phi.cos() + self.e2 * phi.sin()) * sin_theta
    }
}

fn colour(hidden: &Vector3<f64>, v: &UnitVector3) -> i8 {
    if v.0.dot(hidden) >= 0.0 {
        1
    } else {
        -1
    }
}

/// Hidden vector of sample `index`; independent of how samples are partitioned.
pub fn hidden_vector(config: &SphereModelConfig, index: u64) -> [f64; 3] {
    let sampler = HiddenSampler::new(&config.conditioning_direction);
    let h = sampler.draw(&mut stream_at(config.seed, index));
    [h.x, h.y, h.z]
}

/// Draws every sphere and reads all requested directions from the same hidden vector.
pub fn sphere_sample(config: &SphereModelConfig, directions: &[UnitVector3]) -> Vec<SphereSample> {
    let sampler = HiddenSampler::new(&config.conditioning_direction);
    let mut rng = stream_at(config.seed, 0);
    (0..config.n_samples)
        .map(|index| {
            let h = sampler.draw(&mut rng);
            SphereSample {
                index,
                hidden: [h.x, h.y, h.z],
                outcomes: directions.iter().map(|v| colour(&h, v)).collect(),
            }
        })
        .collect()
}

/// Number of samples answering +1 along each direction, evaluated in parallel.
pub fn sphere_counts(config: &SphereModelConfig, directions: &[UnitVector3]) -> Vec<u64> {
    let sampler = HiddenSampler::new(&config.conditioning_direction);
    let n = config.n_samples;
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(n);
            let mut rng = stream_at(config.seed, start);
            let mut hits = vec![0u64; directions.len()];
            for _ in start..end {
                let h = sampler.draw(&mut rng);
                for (count, v) in hits.iter_mut().zip(directions) {
                    if colour(&h, v) > 0 {
                        *count += 1;
                    }
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; directions.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereRow {
    pub direction: UnitVector3,
    pub estimate: MonteCarloEstimate,
    pub p_quantum: f64,
    pub z_score: f64,
}

pub fn sphere_vs_quantum(config: &SphereModelConfig, grid: &[UnitVector3]) -> Result<Vec<SphereRow>> {
    let counts = sphere_counts(config, grid);
    grid.iter()
        .zip(counts)
        .map(|(v, hits)| {
            let estimate = MonteCarloEstimate::from_count(hits, config.n_samples);
            let p_quantum = quantum_spin_correlation(&config.conditioning_direction, v)?;
            let diff = estimate.p_hat - p_quantum;
            let z_score = if estimate.std_err > 0.0 {
                diff / estimate.std_err
            } else if diff.abs() <= TOL_CLOSED_FORM {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            };
            Ok(SphereRow { direction: *v, estimate, p_quantum, z_score })
        })
        .collect()
}

/// `n` nearly uniform directions on the sphere (Fibonacci lattice).
pub fn fibonacci_directions(n: usize) -> Vec<UnitVector3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2 * k + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            UnitVector3::normalized(r * phi.cos(), r * phi.sin(), z).expect("nonzero")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Infeasibility {
    /// `min_s min_J sum_i (u_i.J - s_i)^2`.
    pub best_residual: f64,
    pub assignments_tested: u64,
    pub best_assignment: Vec<i8>,
    pub best_vector: [f64; 3],
}

fn check_triplewise(directions: &[UnitVector3]) -> Result<()> {
    let k = directions.len();
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                let m = Matrix3::from_columns(&[directions[i].0, directions[j].0, directions[l].0]);
                if m.determinant().abs() <= TOL_INDEPENDENCE {
                    return Err(Error::NotTriplewiseIndependent(i, j, l));
                }
            }
        }
    }
    Ok(())
}

/// Least-squares search for a single vector `J` whose projections `u_i.J`
/// hit prescribed eigenvalues `s_i = +-1`, over all `2^k` sign patterns.
///
/// A strictly positive `best_residual` certifies that no `J` reproduces sharp
/// spin values along every direction simultaneously.
pub fn joint_value_infeasibility(directions: &[UnitVector3]) -> Result<Infeasibility> {
    let k = directions.len();
    if k < 3 {
        return Err(Error::InvalidArgument("need at least 3 directions".into()));
    }
    if k > MAX_JOINT_DIRECTIONS {
        return Err(Error::InvalidArgument(format!("at most {MAX_JOINT_DIRECTIONS} directions can be enumerated")));
    }
    check_triplewise(directions)?;

    let a = nalgebra::DMatrix::from_fn(k, 3, |i, c| directions[i].0[c]);
    let normal = (a.transpose() * &a)
        .try_inverse()
        .ok_or_else(|| Error::InternalConsistency("normal matrix of independent directions is singular".into()))?;
    let solve = &normal * a.transpose();

    let mut best = (f64::INFINITY, 0u64);
    for mask in 0..(1u64 << k) {
        let s = nalgebra::DVector::from_fn(k, |i, _| if mask >> i & 1 == 1 { -1.0 } else { 1.0 });
        let j = &solve * &s;
        let residual = (&a * j - &s).norm_squared();
        if residual < best.0 {
            best = (residual, mask);
        }
    }
    let (best_residual, mask) = best;
    let s = nalgebra::DVector::from_fn(k, |i, _| if mask >> i & 1 == 1 { -1.0 } else { 1.0 });
    let j = &solve * &s;
    Ok(Infeasibility {
        best_residual,
        assignments_tested: 1u64 << k,
        best_assignment: s.iter().map(|&x| x as i8).collect(),
        best_vector: [j[0], j[1], j[2]],
    })
}

//! Path probabilities on a periodic 1-D lattice.
//!
//! Position in the Heisenberg picture is `x(t) = exp(iHt) x exp(-iHt)`, so a
//! state `a` is seen at time `t` as `exp(-iHt) a`. The distance of the
//! particle path from a reference path `xi` over `[t0, t_end]` is the operator
//! `Delta = sqrt(sum_k dt (x(t_k) - xi_k)^2)` on a left-endpoint grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_same_dim, operator_sqrt, CMatrix, CVector, Eigensystem, HermitianOperator, Operator, PovmEffect, Projector,
    Propagator, QuantumState,
};
use crate::logic::meet;
use crate::sequence::{born_probability, clip_probability};

pub const MIN_SITES: usize = 8;
/// Default lattice size for path scenarios.
pub const DEFAULT_SITES: usize = 128;
/// Default number of time points in the distance sum.
pub const DEFAULT_STEPS: usize = 16;
/// Likelihood ratios are capped at this value (and its inverse).
pub const LIKELIHOOD_CAP: f64 = 1e12;
/// Both slit probabilities below this make an inference inconclusive.
pub const PROBABILITY_FLOOR: f64 = 1e-15;
/// Largest tolerated eigenvector mass on the outer tenth of the lattice.
pub const TAIL_MASS_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice1D {
    n_sites: usize,
    dx: f64,
    x_origin: f64,
}

impl Lattice1D {
    /// Periodic lattice with sites at `x_origin + j dx`.
    pub fn new(n_sites: usize, dx: f64, x_origin: f64) -> Result<Self> {
        if n_sites < MIN_SITES {
            return Err(Error::InvalidArgument(format!("lattice needs at least {MIN_SITES} sites, got {n_sites}")));
        }
        if !(dx > 0.0 && dx.is_finite()) || !x_origin.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid spacing {dx} or origin {x_origin}")));
        }
        Ok(Self { n_sites, dx, x_origin })
    }

    /// Lattice whose sites are symmetric about `x = 0`.
    pub fn centered(n_sites: usize, dx: f64) -> Result<Self> {
        Self::new(n_sites, dx, -0.5 * (n_sites as f64 - 1.0) * dx)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_origin(&self) -> f64 {
        self.x_origin
    }

    pub fn extent(&self) -> f64 {
        self.n_sites as f64 * self.dx
    }

    pub fn position(&self, site: usize) -> f64 {
        self.x_origin + site as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_sites).map(|j| self.position(j)).collect()
    }

    /// Coordinate of the lattice midpoint; reflections are taken about it.
    pub fn center(&self) -> f64 {
        self.x_origin + 0.5 * (self.n_sites as f64 - 1.0) * self.dx
    }

    pub fn mirror_site(&self, site: usize) -> usize {
        self.n_sites - 1 - site
    }

    /// Wavenumbers of the discrete Fourier modes, `2 pi k / (n dx)` with `k` in `(-n/2, n/2]`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_sites as i64;
        (0..n)
            .map(|k| {
                let wrapped = if 2 * k <= n { k } else { k - n };
                2.0 * PI * wrapped as f64 / (n as f64 * self.dx)
            })
            .collect()
    }

    pub fn position_operator(&self) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&self.positions())
    }

    /// Site-reversed copy of a vector state.
    pub fn reflect(&self, v: &CVector) -> CVector {
        CVector::from_fn(self.n_sites, |j, _| v[self.mirror_site(j)])
    }

    fn check(&self, dim: usize) -> Result<()> {
        check_same_dim(self.n_sites, dim)
    }
}

/// Discretization of the kinetic energy `p^2 / 2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KineticScheme {
    /// Exact `k^2 / 2m` on every Fourier mode.
    #[default]
    Spectral,
    /// Nearest-neighbour Laplacian, dispersion `(1 - cos(k dx)) / (m dx^2)`.
    FiniteDifference,
}

impl KineticScheme {
    pub fn dispersion(self, k: f64, mass: f64, dx: f64) -> f64 {
        match self {
            Self::Spectral => k * k / (2.0 * mass),
            Self::FiniteDifference => (1.0 - (k * dx).cos()) / (mass * dx * dx),
        }
    }
}

/// `p^2 / 2m + V(x)` with the default spectral kinetic term.
pub fn build_hamiltonian(lattice: &Lattice1D, potential: &[f64], mass: f64) -> Result<HermitianOperator> {
    build_hamiltonian_with(lattice, potential, mass, KineticScheme::Spectral)
}

pub fn build_hamiltonian_with(
    lattice: &Lattice1D,
    potential: &[f64],
    mass: f64,
    scheme: KineticScheme,
) -> Result<HermitianOperator> {
    lattice.check(potential.len())?;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")));
    }
    let n = lattice.n_sites;
    let dx = lattice.dx;
    // Circulant: first column from the inverse transform of the dispersion.
    let energies: Vec<f64> = lattice.wavenumbers().iter().map(|&k| scheme.dispersion(k, mass, dx)).collect();
    let column: Vec<f64> = (0..n)
        .map(|d| {
            energies.iter().enumerate().map(|(k, e)| e * (2.0 * PI * (k * d) as f64 / n as f64).cos()).sum::<f64>()
                / n as f64
        })
        .collect();
    let m = CMatrix::from_fn(n, n, |i, j| {
        let d = (i + n - j) % n;
        let diag = if i == j { potential[i] } else { 0.0 };
        Complex64::new(column[d] + diag, 0.0)
    });
    HermitianOperator::new(m)
}

/// Uniform left-endpoint grid `t_k = t0 + k dt`, `dt = (t_end - t0) / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time grid needs t_end > t0 and at least one step (got {t0}, {t_end}, {n_steps})"
            )));
        }
        Ok(Self { t0, t_end, n_steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t0) / self.n_steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_steps).map(|k| self.t0 + k as f64 * self.dt()).collect()
    }
}

/// Positions sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    samples: Vec<f64>,
}

impl PathSpec {
    pub fn new(samples: Vec<f64>, grid: &TimeGrid) -> Result<Self> {
        if samples.len() != grid.n_steps {
            return Err(Error::ShapeMismatch(format!(
                "path has {} samples, grid has {} points",
                samples.len(),
                grid.n_steps
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self { samples: grid.times().into_iter().map(f).collect() }
    }

    pub fn constant(grid: &TimeGrid, x: f64) -> Self {
        Self::from_fn(grid, |_| x)
    }

    /// Uniform motion from `x_start` at `t0` to `x_end` at `t_end`.
    pub fn straight_line(grid: &TimeGrid, x_start: f64, x_end: f64) -> Self {
        let span = grid.t_end - grid.t0;
        Self::from_fn(grid, |t| x_start + (x_end - x_start) * (t - grid.t0) / span)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mirror image about `center`.
    pub fn reflected(&self, center: f64) -> Self {
        Self { samples: self.samples.iter().map(|x| 2.0 * center - x).collect() }
    }
}

fn check_path(path: &PathSpec, grid: &TimeGrid) -> Result<()> {
    if path.len() != grid.n_steps {
        return Err(Error::ShapeMismatch(format!("path has {} samples, grid has {} points", path.len(), grid.n_steps)));
    }
    Ok(())
}

/// `sqrt(sum_k dt (xi1_k - xi2_k)^2)`.
pub fn path_distance(xi1: &PathSpec, xi2: &PathSpec, grid: &TimeGrid) -> Result<f64> {
    check_path(xi1, grid)?;
    check_path(xi2, grid)?;
    let dt = grid.dt();
    Ok(xi1.samples.iter().zip(&xi2.samples).map(|(a, b)| dt * (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// `Delta^2 = sum_k dt (x(t_k) - xi_k)^2`, assembled in the eigenbasis of `H`.
pub fn path_distance_squared(
    lattice: &Lattice1D,
    propagator: &Propagator,
    xi: &PathSpec,
    grid: &TimeGrid,
) -> Result<HermitianOperator> {
    lattice.check(propagator.dim())?;
    distance_squared_with_positions(&lattice.positions(), propagator, xi, grid)
}

fn distance_squared_with_positions(
    positions: &[f64],
    propagator: &Propagator,
    xi: &PathSpec,
    grid: &TimeGrid,
) -> Result<HermitianOperator> {
    check_path(xi, grid)?;
    let n = positions.len();
    let eig = propagator.eigensystem();
    let v = eig.vectors();
    let x_diag = CVector::from_iterator(n, positions.iter().map(|&x| Complex64::from(x)));
    // V^dagger x V
    let x_eigen = v.adjoint() * CMatrix::from_diagonal(&x_diag) * v;
    let lambda = eig.values();
    let dt = grid.dt();
    let terms: Vec<CMatrix> = grid
        .times()
        .into_par_iter()
        .zip(xi.samples.par_iter())
        .map(|(t, &target)| {
            let mut y = CMatrix::from_fn(n, n, |i, j| {
                x_eigen[(i, j)] * Complex64::from_polar(1.0, (lambda[i] - lambda[j]) * t)
            });
            for i in 0..n {
                y[(i, i)] -= Complex64::from(target);
            }
            (&y * &y).scale(dt)
        })
        .collect();
    let mut sum = CMatrix::zeros(n, n);
    for term in &terms {
        sum += term;
    }
    let m = v * sum * v.adjoint();
    HermitianOperator::new((&m + m.adjoint()).scale(0.5))
}

/// The distance operator `Delta_xi`.
pub fn path_distance_operator(
    lattice: &Lattice1D,
    hamiltonian: &HermitianOperator,
    xi: &PathSpec,
    grid: &TimeGrid,
) -> Result<HermitianOperator> {
    let squared = path_distance_squared(lattice, &Propagator::new(hamiltonian), xi, grid)?;
    operator_sqrt(&squared)
}

/// Spectral projector of `Delta` onto eigenvalues `<= eps`.
pub fn path_band_projector(delta: &HermitianOperator, eps: f64) -> Result<Projector> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("band width must be >= 0, got {eps}")));
    }
    Ok(Eigensystem::of(delta).band_projector(|lambda| lambda <= eps))
}

/// Probability that the path stays within `eps` of `xi`.
pub fn path_probability(
    lattice: &Lattice1D,
    state: &QuantumState,
    hamiltonian: &HermitianOperator,
    xi: &PathSpec,
    grid: &TimeGrid,
    eps: f64,
) -> Result<f64> {
    lattice.check(state.dim())?;
    let delta = path_distance_operator(lattice, hamiltonian, xi, grid)?;
    born_probability(state, &PovmEffect::from(path_band_projector(&delta, eps)?))
}

/// Eigenvalues of `Delta` (ascending) with the Born weight of each eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSpectrum {
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DistanceSpectrum {
    pub fn cdf(&self, eps: f64) -> f64 {
        let total: f64 =
            self.eigenvalues.iter().zip(&self.weights).filter(|(lambda, _)| **lambda <= eps).map(|(_, w)| w).sum();
        total.clamp(0.0, 1.0) + 0.0
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }
}

pub fn distance_spectrum(
    lattice: &Lattice1D,
    state: &QuantumState,
    hamiltonian: &HermitianOperator,
    xi: &PathSpec,
    grid: &TimeGrid,
) -> Result<DistanceSpectrum> {
    lattice.check(state.dim())?;
    let delta = path_distance_operator(lattice, hamiltonian, xi, grid)?;
    let eig = Eigensystem::of(&delta);
    let v = eig.vectors();
    let weights = (0..eig.dim())
        .map(|k| {
            let col = v.column(k);
            clip_probability(state.expectation(&(col * col.adjoint())).re)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceSpectrum { eigenvalues: eig.values().to_vec(), weights })
}

/// `P(d(x, xi) <= eps)` on an ascending grid of band widths.
pub fn distance_distribution(
    lattice: &Lattice1D,
    state: &QuantumState,
    hamiltonian: &HermitianOperator,
    xi: &PathSpec,
    grid: &TimeGrid,
    eps_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if eps_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument("band widths must be ascending".into()));
    }
    let spectrum = distance_spectrum(lattice, state, hamiltonian, xi, grid)?;
    Ok(eps_grid.iter().map(|&eps| (eps, spectrum.cdf(eps))).collect())
}

/// `xi(t_k) = <a| x(t_k) |a>`.
pub fn expected_path(
    lattice: &Lattice1D,
    state: &QuantumState,
    hamiltonian: &HermitianOperator,
    grid: &TimeGrid,
) -> Result<PathSpec> {
    lattice.check(state.dim())?;
    lattice.check(hamiltonian.dim())?;
    let prop = Propagator::new(hamiltonian);
    let x = lattice.position_operator();
    let samples = grid
        .times()
        .into_iter()
        .map(|t| {
            let u = prop.unitary(-t);
            state.transformed(u.matrix()).expectation(x.matrix()).re
        })
        .collect();
    Ok(PathSpec { samples })
}

#[derive(Debug, Clone)]
pub struct JointRegion {
    pub projector: Projector,
    pub dim: usize,
}

/// Projector onto states found inside `masks[k]` at every grid time `t_k`.
pub fn joint_region_projector(
    lattice: &Lattice1D,
    hamiltonian: &HermitianOperator,
    masks: &[Vec<bool>],
    grid: &TimeGrid,
) -> Result<JointRegion> {
    if masks.len() != grid.n_steps {
        return Err(Error::ShapeMismatch(format!("{} masks for {} grid times", masks.len(), grid.n_steps)));
    }
    for mask in masks {
        lattice.check(mask.len())?;
        if !mask.iter().any(|&b| b) {
            return Err(Error::InvalidArgument("region mask selects no site".into()));
        }
    }
    lattice.check(hamiltonian.dim())?;
    let prop = Propagator::new(hamiltonian);
    let mut acc: Option<Projector> = None;
    for (mask, t) in masks.iter().zip(grid.times()) {
        let p = Projector::new(prop.heisenberg_matrix(Projector::diagonal(mask).matrix(), t))?;
        acc = Some(match acc {
            None => p,
            Some(q) => meet(&q, &p)?,
        });
    }
    let projector = acc.expect("at least one grid time");
    Ok(JointRegion { dim: projector.rank(), projector })
}

/// Double-slit geometry on a centered lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitSetup {
    pub lattice: Lattice1D,
    pub mass: f64,
    pub slit_a: usize,
    pub slit_b: usize,
    /// Gaussian aperture width in sites.
    pub aperture_width: f64,
    /// Width of the incoming packet in position units, centered between the slits.
    pub source_width: f64,
    pub propagation_time: f64,
    /// Sites per screen cell.
    pub screen_width: usize,
    /// Band width of the path projectors.
    pub eps: f64,
    /// Time points along each reference path.
    pub n_steps: usize,
}

impl SlitSetup {
    /// Symmetric two-slit setup with the band width set to half the distance of the two reference paths.
    pub fn symmetric(n_sites: usize, separation: usize, propagation_time: f64) -> Result<Self> {
        if n_sites.is_multiple_of(2) || !separation.is_multiple_of(2) {
            return Err(Error::InvalidArgument("symmetric setup needs odd n_sites and even separation".into()));
        }
        let lattice = Lattice1D::centered(n_sites, 1.0)?;
        let mid = n_sites / 2;
        let mut setup = Self {
            lattice,
            mass: 1.0,
            slit_a: mid - separation / 2,
            slit_b: mid + separation / 2,
            aperture_width: 2.0,
            source_width: 30.0,
            propagation_time,
            screen_width: 1,
            eps: 0.0,
            n_steps: DEFAULT_STEPS,
        };
        setup.eps = 0.5 * setup.reference_separation();
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lattice.n_sites;
        if self.slit_a == self.slit_b || self.slit_a >= n || self.slit_b >= n {
            return Err(Error::InvalidArgument(format!(
                "slits must be distinct lattice sites, got {} and {}",
                self.slit_a, self.slit_b
            )));
        }
        let positive = [self.mass, self.aperture_width, self.source_width, self.propagation_time];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !(self.eps >= 0.0) {
            return Err(Error::InvalidArgument("slit setup parameters must be positive".into()));
        }
        if self.screen_width == 0 || self.n_steps == 0 {
            return Err(Error::InvalidArgument("screen width and step count must be positive".into()));
        }
        Ok(())
    }

    /// Distance between straight paths from the two slits to a common detection point.
    pub fn reference_separation(&self) -> f64 {
        let gap = (self.lattice.position(self.slit_b) - self.lattice.position(self.slit_a)).abs();
        gap * (self.propagation_time / 3.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slit {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitInference {
    pub detection_site: usize,
    pub p_a: f64,
    pub p_b: f64,
    /// `p_a / p_b` capped to `[1/LIKELIHOOD_CAP, LIKELIHOOD_CAP]`; `None` if inconclusive.
    pub likelihood_ratio: Option<f64>,
}

/// Prepared double-slit experiment: post-slit state and its propagator.
#[derive(Debug, Clone)]
pub struct DoubleSlit {
    setup: SlitSetup,
    hamiltonian: HermitianOperator,
    propagator: Propagator,
    grid: TimeGrid,
    state: CVector,
    partial_a: CVector,
    partial_b: CVector,
}

impl DoubleSlit {
    pub fn new(setup: SlitSetup) -> Result<Self> {
        setup.validate()?;
        let lattice = setup.lattice;
        let n = lattice.n_sites;
        let hamiltonian = build_hamiltonian(&lattice, &vec![0.0; n], setup.mass)?;
        let propagator = Propagator::new(&hamiltonian);
        let grid = TimeGrid::new(0.0, setup.propagation_time, setup.n_steps)?;
        let center = 0.5 * (lattice.position(setup.slit_a) + lattice.position(setup.slit_b));
        let w = setup.aperture_width * lattice.dx;
        let aperture = |slit: usize| {
            let xs = lattice.position(slit);
            CVector::from_fn(n, |j, _| {
                let x = lattice.position(j);
                let source = (-(x - center).powi(2) / (2.0 * setup.source_width.powi(2))).exp();
                Complex64::from(source * (-(x - xs).powi(2) / (2.0 * w * w)).exp())
            })
        };
        let (raw_a, raw_b) = (aperture(setup.slit_a), aperture(setup.slit_b));
        let raw = &raw_a + &raw_b;
        let norm = raw.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateState);
        }
        Ok(Self {
            hamiltonian,
            propagator,
            grid,
            state: raw.unscale(norm),
            partial_a: raw_a.unscale(norm),
            partial_b: raw_b.unscale(norm),
            setup,
        })
    }

    pub fn setup(&self) -> &SlitSetup {
        &self.setup
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    /// Normalized state just behind the slits.
    pub fn state(&self) -> QuantumState {
        QuantumState::Vector(self.state.clone())
    }

    /// Unnormalized contribution of one slit; the two add up to [`Self::state`].
    pub fn partial(&self, slit: Slit) -> &CVector {
        match slit {
            Slit::A => &self.partial_a,
            Slit::B => &self.partial_b,
        }
    }

    /// Amplitudes at the screen time.
    pub fn screen_amplitudes(&self, v: &CVector) -> CVector {
        self.propagator.unitary(-self.setup.propagation_time).matrix() * v
    }

    /// Per-site detection probabilities at the screen time.
    pub fn screen_intensity(&self) -> Vec<f64> {
        self.screen_amplitudes(&self.state).iter().map(|z| z.norm_sqr()).collect()
    }

    /// Screen intensity with only one slit open (not renormalized).
    pub fn single_slit_intensity(&self, slit: Slit) -> Vec<f64> {
        self.screen_amplitudes(self.partial(slit)).iter().map(|z| z.norm_sqr()).collect()
    }

    /// Intensity summed over cells of `screen_width` sites.
    pub fn screen_cells(&self) -> Vec<f64> {
        self.screen_intensity().chunks(self.setup.screen_width).map(|c| c.iter().sum()).collect()
    }

    pub fn reference_path(&self, slit: Slit, detection_site: usize) -> PathSpec {
        let lattice = &self.setup.lattice;
        let start = match slit {
            Slit::A => self.setup.slit_a,
            Slit::B => self.setup.slit_b,
        };
        PathSpec::straight_line(&self.grid, lattice.position(start), lattice.position(detection_site))
    }

    pub fn slit_probability(&self, slit: Slit, detection_site: usize) -> Result<f64> {
        let xi = self.reference_path(slit, detection_site);
        let squared = path_distance_squared(&self.setup.lattice, &self.propagator, &xi, &self.grid)?;
        let delta = operator_sqrt(&squared)?;
        born_probability(&self.state(), &PovmEffect::from(path_band_projector(&delta, self.setup.eps)?))
    }

    pub fn infer(&self, detection_site: usize) -> Result<SlitInference> {
        if detection_site >= self.setup.lattice.n_sites {
            return Err(Error::InvalidArgument(format!("detection site {detection_site} is off the lattice")));
        }
        let p_a = self.slit_probability(Slit::A, detection_site)?;
        let p_b = self.slit_probability(Slit::B, detection_site)?;
        let likelihood_ratio = if p_a < PROBABILITY_FLOOR && p_b < PROBABILITY_FLOOR {
            None
        } else if p_b < PROBABILITY_FLOOR {
            Some(LIKELIHOOD_CAP)
        } else {
            Some((p_a / p_b).clamp(1.0 / LIKELIHOOD_CAP, LIKELIHOOD_CAP))
        };
        Ok(SlitInference { detection_site, p_a, p_b, likelihood_ratio })
    }
}

pub fn double_slit_inference(setup: &SlitSetup, detection_site: usize) -> Result<SlitInference> {
    DoubleSlit::new(setup.clone())?.infer(detection_site)
}

/// Strict interior local minima of `intensity` at sites where `envelope` is at
/// least `fraction` of its maximum.
pub fn count_minima(intensity: &[f64], envelope: &[f64], fraction: f64) -> usize {
    let peak = envelope.iter().cloned().fold(0.0_f64, f64::max);
    (1..intensity.len().saturating_sub(1))
        .filter(|&j| {
            envelope[j] >= fraction * peak && intensity[j] < intensity[j - 1] && intensity[j] < intensity[j + 1]
        })
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSpectrum {
    pub eigenvalues: Vec<f64>,
    pub max_tail_mass: f64,
}

/// Lowest `levels` eigenvalues of `p^2 + a^2 q^2`.
pub fn oscillator_spectrum(a: f64, lattice: &Lattice1D, levels: usize) -> Result<OscillatorSpectrum> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("oscillator parameter must be positive, got {a}")));
    }
    let n = lattice.n_sites;
    if levels == 0 || levels > n {
        return Err(Error::InvalidArgument(format!("cannot return {levels} levels from {n} sites")));
    }
    let center = lattice.center();
    let potential: Vec<f64> = lattice.positions().iter().map(|x| a * a * (x - center).powi(2)).collect();
    let h = build_hamiltonian(lattice, &potential, 0.5)?;
    let eig = Eigensystem::of(&h);
    let edge = (n / 20).max(1);
    let max_tail_mass = (0..levels)
        .map(|k| {
            let v = eig.vectors().column(k);
            (0..edge).chain(n - edge..n).map(|j| v[j].norm_sqr()).sum::<f64>()
        })
        .fold(0.0_f64, f64::max);
    if max_tail_mass > TAIL_MASS_LIMIT {
        return Err(Error::LatticeTooSmall { tail_mass: max_tail_mass, limit: TAIL_MASS_LIMIT });
    }
    Ok(OscillatorSpectrum { eigenvalues: eig.values()[..levels].to_vec(), max_tail_mass })
}

/// Gaussian packet `exp(-(x - x0)^2 / (4 sigma^2) + i k0 x)`, normalized on the lattice.
pub fn gaussian_packet(lattice: &Lattice1D, x0: f64, sigma: f64, k0: f64) -> Result<QuantumState> {
    let v = CVector::from_iterator(
        lattice.n_sites,
        lattice
            .positions()
            .into_iter()
            .map(|x| Complex64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), k0 * x)),
    );
    QuantumState::from_vector(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::max_abs;
    use crate::random::{seeded, state as random_state};
    use rand::Rng;

    fn free(lattice: &Lattice1D) -> HermitianOperator {
        build_hamiltonian(lattice, &vec![0.0; lattice.n_sites()], 1.0).unwrap()
    }

    #[test]
    fn lattice_validation() {
        assert!(Lattice1D::new(7, 1.0, 0.0).is_err());
        assert!(Lattice1D::new(8, 0.0, 0.0).is_err());
        let l = Lattice1D::centered(9, 0.5).unwrap();
        assert_eq!(l.position(4), 0.0);
        assert_eq!(l.position(0), -l.position(8));
    }

    #[test]
    fn free_hamiltonian_is_circulant() {
        for scheme in [KineticScheme::Spectral, KineticScheme::FiniteDifference] {
            let l = Lattice1D::new(12, 0.7, 0.0).unwrap();
            let h = build_hamiltonian_with(&l, &[0.0; 12], 1.3, scheme).unwrap();
            let m = h.matrix();
            for i in 0..12 {
                for j in 0..12 {
                    assert!((m[(i, j)] - m[((i + 1) % 12, (j + 1) % 12)]).norm() < 1e-12);
                }
            }
            assert!(h.spectrum()[0] > -1e-12);
        }
    }

    #[test]
    fn dispersion_matches_fourier_modes() {
        let l = Lattice1D::new(16, 0.5, 0.0).unwrap();
        let mass = 2.0;
        for scheme in [KineticScheme::Spectral, KineticScheme::FiniteDifference] {
            let h = build_hamiltonian_with(&l, &[0.0; 16], mass, scheme).unwrap();
            for &k in &l.wavenumbers() {
                let plane =
                    CVector::from_iterator(16, (0..16).map(|j| Complex64::from_polar(0.25, k * j as f64 * l.dx())));
                let expected = match scheme {
                    KineticScheme::Spectral => k * k / (2.0 * mass),
                    KineticScheme::FiniteDifference => (1.0 - (k * l.dx()).cos()) / (mass * l.dx() * l.dx()),
                };
                assert!((h.matrix() * &plane - plane.scale(expected)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn path_distance_examples() {
        let grid = TimeGrid::new(0.0, 3.0, 30).unwrap();
        let a = PathSpec::straight_line(&grid, 0.0, 1.0);
        assert_eq!(path_distance(&a, &a, &grid).unwrap(), 0.0);
        let b = PathSpec::from_fn(&grid, |t| t / 3.0 + 0.4);
        assert!((path_distance(&a, &b, &grid).unwrap() - 0.4 * 3.0_f64.sqrt()).abs() < 1e-12);

        let mut rng = seeded(1);
        let p: Vec<f64> = (0..30).map(|_| rng.random_range(-2.0..2.0)).collect();
        let q: Vec<f64> = (0..30).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut riemann = 0.0;
        for k in 0..30 {
            riemann += (p[k] - q[k]).powi(2) * 0.1;
        }
        let d = path_distance(&PathSpec::new(p, &grid).unwrap(), &PathSpec::new(q, &grid).unwrap(), &grid).unwrap();
        assert!((d - riemann.sqrt()).abs() < 1e-12);

        let short = TimeGrid::new(0.0, 3.0, 29).unwrap();
        assert!(path_distance(&a, &a, &short).is_err());
    }

    #[test]
    fn single_time_distance_is_scaled_absolute_position() {
        let l = Lattice1D::centered(10, 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 0.25, 1).unwrap();
        let delta = path_distance_operator(&l, &free(&l), &PathSpec::constant(&grid, 0.0), &grid).unwrap();
        let expected: Vec<f64> = l.positions().iter().map(|x| 0.5 * x.abs()).collect();
        assert!(
            max_abs(&(delta.into_matrix() - HermitianOperator::from_real_diagonal(&expected).into_matrix())) < 1e-10
        );
    }

    #[test]
    fn commuting_hamiltonian_gives_diagonal_distance() {
        let l = Lattice1D::new(8, 0.5, 0.0).unwrap();
        let potential: Vec<f64> = (0..8).map(|j| (j as f64).sin()).collect();
        let h = HermitianOperator::from_real_diagonal(&potential);
        let grid = TimeGrid::new(0.0, 2.0, 5).unwrap();
        let xi = PathSpec::from_fn(&grid, |t| 1.0 + 0.3 * t);
        let delta = path_distance_operator(&l, &h, &xi, &grid).unwrap();
        for (j, x) in l.positions().iter().enumerate() {
            let brute: f64 = xi.samples().iter().map(|s| grid.dt() * (x - s).powi(2)).sum::<f64>().sqrt();
            assert!((delta.matrix()[(j, j)].re - brute).abs() < 1e-10);
        }
        let off: f64 = (0..8)
            .flat_map(|i| (0..8).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| delta.matrix()[(i, j)].norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-10);
    }

    #[test]
    fn translating_the_path_conjugates_the_distance() {
        // The ring is invariant under the cyclic shift T by s sites once coordinates
        // are relabelled along with it: site j then sits at x_origin + s dx + ((j - s) mod n) dx.
        let n = 12;
        let s = 5;
        let l = Lattice1D::new(n, 0.8, -1.0).unwrap();
        let prop = Propagator::new(&free(&l));
        let grid = TimeGrid::new(0.0, 1.5, 4).unwrap();
        let xi = PathSpec::from_fn(&grid, |t| 0.5 + 0.7 * t);
        let moved = PathSpec::from_fn(&grid, |t| 0.5 + 0.7 * t + s as f64 * l.dx());
        let shift = CMatrix::from_fn(n, n, |i, j| Complex64::from(if i == (j + s) % n { 1.0 } else { 0.0 }));
        let relabelled: Vec<f64> =
            (0..n).map(|j| l.x_origin() + s as f64 * l.dx() + ((j + n - s) % n) as f64 * l.dx()).collect();

        let base = path_distance_squared(&l, &prop, &xi, &grid).unwrap();
        let translated = distance_squared_with_positions(&relabelled, &prop, &moved, &grid).unwrap();
        let conj = &shift * base.matrix() * shift.adjoint();
        assert!(max_abs(&(conj - translated.matrix())) < 1e-9);

        let d1 = operator_sqrt(&base).unwrap();
        let d2 = operator_sqrt(&translated).unwrap();
        assert!(max_abs(&(&shift * d1.matrix() * shift.adjoint() - d2.matrix())) < 1e-9);
    }

    #[test]
    fn band_projector_limits_and_steps() {
        let l = Lattice1D::centered(16, 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 4).unwrap();
        let delta = path_distance_operator(&l, &free(&l), &PathSpec::constant(&grid, 0.0), &grid).unwrap();
        let spectrum = delta.spectrum();
        assert_eq!(path_band_projector(&delta, spectrum[15] + 1.0).unwrap().rank(), 16);
        assert_eq!(path_band_projector(&delta, spectrum[0] * 0.5).unwrap().rank(), 0);
        for k in 0..15 {
            if spectrum[k + 1] - spectrum[k] > 1e-6 {
                let mid = 0.5 * (spectrum[k] + spectrum[k + 1]);
                let p = path_band_projector(&delta, mid).unwrap();
                assert_eq!(p.rank(), k + 1);
                assert!(max_abs(&(p.matrix() * p.matrix() - p.matrix())) < 1e-10);
            }
        }
        assert!(path_band_projector(&delta, -1.0).is_err());
    }

    #[test]
    fn probability_matches_squared_distance_spectrum() {
        // Independent route: eigen-decompose Delta^2 and keep sqrt(mu) <= eps.
        let l = Lattice1D::centered(32, 1.0).unwrap();
        let h = free(&l);
        let a = gaussian_packet(&l, -3.0, 2.5, 0.4).unwrap();
        let grid = TimeGrid::new(0.0, 6.0, 8).unwrap();
        let xi = expected_path(&l, &a, &h, &grid).unwrap();
        let squared = path_distance_squared(&l, &Propagator::new(&h), &xi, &grid).unwrap();
        let eig = Eigensystem::of(&squared);
        let v = a.as_vector().unwrap();
        let weights: Vec<f64> = (0..32).map(|k| eig.vectors().column(k).dotc(v).norm_sqr()).collect();
        let spectrum = distance_spectrum(&l, &a, &h, &xi, &grid).unwrap();
        let mut last = 0.0;
        for eps in [0.5, 1.5, 3.0, 5.0, 8.0, 12.0, 20.0, 40.0] {
            let oracle: f64 =
                eig.values().iter().zip(&weights).filter(|(mu, _)| mu.max(0.0).sqrt() <= eps).map(|(_, w)| w).sum();
            let p = path_probability(&l, &a, &h, &xi, &grid, eps).unwrap();
            assert!((p - oracle).abs() < 1e-10, "eps {eps}: {p} vs {oracle}");
            assert!((spectrum.cdf(eps) - p).abs() < 1e-10);
            assert!(p >= last - 1e-12);
            last = p;
        }
        assert!(
            (path_probability(&l, &a, &h, &xi, &grid, spectrum.max_eigenvalue() + 1.0).unwrap() - 1.0).abs() < 1e-10
        );
    }

    #[test]
    fn distribution_validates_and_ends_at_one() {
        let l = Lattice1D::centered(16, 1.0).unwrap();
        let h = free(&l);
        let mut rng = seeded(2);
        let a = random_state(&mut rng, 16);
        let grid = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let xi = PathSpec::constant(&grid, 0.0);
        assert!(distance_distribution(&l, &a, &h, &xi, &grid, &[1.0, 0.5]).is_err());
        let top = distance_spectrum(&l, &a, &h, &xi, &grid).unwrap().max_eigenvalue();
        let table = distance_distribution(&l, &a, &h, &xi, &grid, &[top]).unwrap();
        assert!((table[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_symmetry_of_probabilities_and_paths() {
        let l = Lattice1D::centered(21, 1.0).unwrap();
        let h = free(&l);
        let a = gaussian_packet(&l, -2.0, 2.0, 0.3).unwrap();
        let mirrored = QuantumState::from_vector(l.reflect(a.as_vector().unwrap())).unwrap();
        let grid = TimeGrid::new(0.0, 4.0, 6).unwrap();
        let path = expected_path(&l, &a, &h, &grid).unwrap();
        let path_m = expected_path(&l, &mirrored, &h, &grid).unwrap();
        for (p, q) in path.samples().iter().zip(path_m.samples()) {
            assert!((p + q).abs() < 1e-10);
        }
        let xi = PathSpec::straight_line(&grid, -2.0, 1.0);
        for eps in [2.0, 4.0, 7.0] {
            let p = path_probability(&l, &a, &h, &xi, &grid, eps).unwrap();
            let q = path_probability(&l, &mirrored, &h, &xi.reflected(0.0), &grid, eps).unwrap();
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn expected_path_examples() {
        let l = Lattice1D::centered(16, 0.5).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 4).unwrap();
        let site = QuantumState::basis(16, 11);
        let path = expected_path(&l, &site, &free(&l), &grid).unwrap();
        assert!((path.samples()[0] - l.position(11)).abs() < 1e-12);

        let diag = HermitianOperator::from_real_diagonal(&(0..16).map(|j| j as f64 * 0.1).collect::<Vec<_>>());
        let mut rng = seeded(3);
        let a = random_state(&mut rng, 16);
        let constant = expected_path(&l, &a, &diag, &grid).unwrap();
        for s in constant.samples() {
            assert!((s - constant.samples()[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn expected_path_group_property() {
        let l = Lattice1D::centered(24, 1.0).unwrap();
        let h = free(&l);
        let a = gaussian_packet(&l, 0.0, 2.0, 0.5).unwrap();
        let s = 0.75;
        let moved = a.transformed(Propagator::new(&h).unitary(-s).matrix());
        let grid = TimeGrid::new(0.0, 3.0, 4).unwrap();
        let later = TimeGrid::new(s, 3.0 + s, 4).unwrap();
        let p = expected_path(&l, &moved, &h, &grid).unwrap();
        let q = expected_path(&l, &a, &h, &later).unwrap();
        for (x, y) in p.samples().iter().zip(q.samples()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn joint_region_examples() {
        let l = Lattice1D::new(10, 1.0, 0.0).unwrap();
        let h = free(&l);
        let one = TimeGrid::new(0.0, 1.0, 1).unwrap();
        let mask: Vec<bool> = (0..10).map(|j| j % 3 != 0).collect();
        let r = joint_region_projector(&l, &h, std::slice::from_ref(&mask), &one).unwrap();
        assert_eq!(r.dim, mask.iter().filter(|&&b| b).count());

        let diag = HermitianOperator::from_real_diagonal(&(0..10).map(|j| (j as f64).cos()).collect::<Vec<_>>());
        let two = TimeGrid::new(0.0, 2.0, 2).unwrap();
        let inner: Vec<bool> = (0..10).map(|j| (2..6).contains(&j)).collect();
        let outer: Vec<bool> = (0..10).map(|j| (1..8).contains(&j)).collect();
        let r = joint_region_projector(&l, &diag, &[outer, inner], &two).unwrap();
        assert_eq!(r.dim, 4);

        assert!(joint_region_projector(&l, &h, &[vec![false; 10]], &one).is_err());
    }

    #[test]
    fn joint_region_is_trivial_for_generic_masks() {
        let l = Lattice1D::new(16, 1.0, 0.0).unwrap();
        let h = free(&l);
        let grid = TimeGrid::new(0.0, 10.0, 2).unwrap();
        let mut rng = seeded(4);
        for _ in 0..5 {
            let masks: Vec<Vec<bool>> = (0..2)
                .map(|_| {
                    let mut idx: Vec<usize> = (0..16).collect();
                    rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
                    let mut m = vec![false; 16];
                    for &i in &idx[..8] {
                        m[i] = true;
                    }
                    m
                })
                .collect();
            let r = joint_region_projector(&l, &h, &masks, &grid).unwrap();
            assert!(r.dim <= 8);
            assert_eq!(r.dim, 0);
        }
    }

    #[test]
    fn double_slit_symmetry_and_fringes() {
        let setup = SlitSetup::symmetric(129, 20, 24.0).unwrap();
        let ds = DoubleSlit::new(setup).unwrap();
        let mid = 64;
        let inf = ds.infer(mid).unwrap();
        assert!((inf.likelihood_ratio.unwrap() - 1.0).abs() < 1e-6);
        let far_a = ds.infer(mid - 20).unwrap();
        assert!(far_a.likelihood_ratio.unwrap() > 10.0);

        let both = ds.screen_intensity();
        let ia = ds.single_slit_intensity(Slit::A);
        let ib = ds.single_slit_intensity(Slit::B);
        let envelope: Vec<f64> = ia.iter().zip(&ib).map(|(a, b)| a + b).collect();
        assert!(count_minima(&both, &envelope, 0.01) >= 3);
        assert_eq!(count_minima(&ia, &ia, 0.01), 0);
        assert!((both.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn slit_setup_validation() {
        let mut s = SlitSetup::symmetric(33, 8, 5.0).unwrap();
        s.slit_b = s.slit_a;
        assert!(DoubleSlit::new(s).is_err());
        assert!(SlitSetup::symmetric(32, 8, 5.0).is_err());
    }

    #[test]
    fn oscillator_levels() {
        let l = Lattice1D::centered(256, 0.1).unwrap();
        let levels = oscillator_spectrum(1.0, &l, 5).unwrap();
        for (k, e) in levels.eigenvalues.iter().enumerate() {
            let exact = 2.0 * k as f64 + 1.0;
            assert!((e - exact).abs() < 0.01 * exact, "level {k}: {e}");
        }
        let doubled = oscillator_spectrum(2.0, &l, 5).unwrap();
        for (e1, e2) in levels.eigenvalues.iter().zip(&doubled.eigenvalues) {
            assert!((e2 / e1 - 2.0).abs() < 0.02);
        }
        let small = Lattice1D::centered(32, 0.1).unwrap();
        assert!(matches!(oscillator_spectrum(1.0, &small, 5), Err(Error::LatticeTooSmall { .. })));
    }
}

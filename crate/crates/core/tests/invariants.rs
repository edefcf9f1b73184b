use proptest::prelude::*;

use qbench_core::hilbert::{max_abs, spectral_decompose, unitary_from_hamiltonian, Eigensystem};
use qbench_core::logic::{meet, meet_strict};
use qbench_core::path::{
    build_hamiltonian, distance_distribution, expected_path, gaussian_packet, joint_region_projector,
    path_band_projector, path_distance_operator, Lattice1D, PathSpec, TimeGrid,
};
use qbench_core::random::{density, hermitian, projector, seeded, state, unit_vector3, unitary};
use qbench_core::sequence::{
    demon_compare, wigner_chain, MeasurementChain, MeasurementStep, PointerModel, ProjectorFamily,
};
use qbench_core::spin::{joint_value_infeasibility, quantum_spin_correlation};
use qbench_core::{CMatrix, Operator, Projector, QuantumState};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn spectral_resynthesis(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = seeded(seed);
        let m = hermitian(&mut rng, n);
        let parts = spectral_decompose(&m);
        let mut sum = CMatrix::zeros(n, n);
        let mut identity = CMatrix::zeros(n, n);
        for part in &parts {
            sum += part.projector.matrix().scale(part.eigenvalue);
            identity += part.projector.matrix();
        }
        prop_assert!(max_abs(&(sum - m.matrix())) <= 1e-10);
        prop_assert!(max_abs(&(identity - CMatrix::identity(n, n))) <= 1e-10);
        for (j, p) in parts.iter().enumerate() {
            for q in parts.iter().skip(j + 1) {
                prop_assert!(max_abs(&(p.projector.matrix() * q.projector.matrix())) <= 1e-10);
            }
        }
    }

    #[test]
    fn unitaries_invert_and_preserve_norm(seed in any::<u64>(), n in 1usize..9, t in -5.0f64..5.0) {
        let mut rng = seeded(seed);
        let h = hermitian(&mut rng, n);
        let forward = unitary_from_hamiltonian(&h, t);
        let backward = unitary_from_hamiltonian(&h, -t);
        prop_assert!(max_abs(&(backward.matrix() - forward.matrix().adjoint())) <= 1e-10);
        let a = state(&mut rng, n);
        let moved = forward.apply(&a).unwrap();
        prop_assert!((moved.as_vector().unwrap().norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn heisenberg_preserves_spectrum(seed in any::<u64>(), n in 1usize..9, t in -3.0f64..3.0) {
        let mut rng = seeded(seed);
        let a = hermitian(&mut rng, n);
        let h = hermitian(&mut rng, n);
        let moved = qbench_core::hilbert::evolve_heisenberg(&a, &h, t).unwrap();
        for (x, y) in a.spectrum().iter().zip(moved.spectrum()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn meet_lattice_laws(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = seeded(seed);
        let p = projector(&mut rng, n, 1 + (seed as usize) % (n - 1));
        let q = projector(&mut rng, n, 1 + (seed as usize / 7) % (n - 1));
        let pq = meet(&p, &q).unwrap();
        prop_assert!(max_abs(&(p.matrix() * pq.matrix() - pq.matrix())) <= 1e-9);
        prop_assert!(max_abs(&(q.matrix() * pq.matrix() - pq.matrix())) <= 1e-9);
        prop_assert!(max_abs(&(pq.matrix() - meet(&q, &p).unwrap().matrix())) <= 1e-9);
        prop_assert!(max_abs(&(meet(&p, &p).unwrap().matrix() - p.matrix())) <= 1e-9);
        prop_assert!(max_abs(&(meet(&p, &Projector::identity(n)).unwrap().matrix() - p.matrix())) <= 1e-9);
        prop_assert_eq!(meet(&p, &Projector::zero(n)).unwrap().rank(), 0);
        prop_assert!(pq.rank() <= p.rank().min(q.rank()));
    }

    #[test]
    fn commuting_meet_is_product(seed in any::<u64>(), n in 2usize..8, bits in any::<u16>()) {
        let mut rng = seeded(seed);
        let u = unitary(&mut rng, n).into_matrix();
        let mask_p: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
        let mask_q: Vec<bool> = (0..n).map(|k| bits >> (k + 8) & 1 == 1).collect();
        let rotate = |mask: &[bool]| Projector::new(&u * Projector::diagonal(mask).matrix() * u.adjoint()).unwrap();
        let (p, q) = (rotate(&mask_p), rotate(&mask_q));
        let product = p.matrix() * q.matrix();
        prop_assert!(max_abs(&(meet(&p, &q).unwrap().matrix() - &product)) <= 1e-9);
        let strict = meet_strict(&p, &q).unwrap().defined().unwrap();
        prop_assert!(max_abs(&(strict.matrix() - product)) <= 1e-9);
    }

    #[test]
    fn binary_chain_outcomes_sum_to_one(seed in any::<u64>(), n in 2usize..6, steps in 1usize..4) {
        let mut rng = seeded(seed);
        let rho = density(&mut rng, n);
        let projectors: Vec<Projector> = (0..steps).map(|_| projector(&mut rng, n, 1)).collect();
        let h = hermitian(&mut rng, n);
        let mut total = 0.0;
        for outcome in 0..(1usize << steps) {
            let chain_steps = projectors
                .iter()
                .enumerate()
                .map(|(j, p)| {
                    let fired = outcome >> (steps - 1 - j) & 1 == 1;
                    MeasurementStep::new(if fired { p.clone() } else { p.complement() }, 0.5 * j as f64)
                })
                .collect();
            let chain = MeasurementChain::new(rho.clone(), chain_steps, Some(h.clone())).unwrap();
            let p = wigner_chain(&chain).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            total += p;
        }
        prop_assert!((total - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn demon_distributions_are_normalized_and_reproducible(seed in any::<u64>(), g in 0.0f64..1.0) {
        let mut rng = seeded(seed);
        let a = state(&mut rng, 2);
        let steps = vec![
            MeasurementStep::new(projector(&mut rng, 2, 1), 0.3),
            MeasurementStep::new(projector(&mut rng, 2, 1), 0.8),
        ];
        let chain = MeasurementChain::new(a, steps, Some(hermitian(&mut rng, 2))).unwrap();
        let pointer = PointerModel::binary(g, 1.0).unwrap();
        let first = demon_compare(&chain, &pointer).unwrap();
        prop_assert!((first.full_model.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        prop_assert!((first.wigner.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        prop_assert!((0.0..=1.0).contains(&first.total_variation));
        let second = demon_compare(&chain, &pointer).unwrap();
        prop_assert_eq!(first.total_variation.to_bits(), second.total_variation.to_bits());
    }

    #[test]
    fn spin_correlations_complement(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let u = unit_vector3(&mut rng);
        let v = unit_vector3(&mut rng);
        let sum = quantum_spin_correlation(&u, &v).unwrap() + quantum_spin_correlation(&u, &-v).unwrap();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn infeasibility_grows_with_directions(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let mut dirs: Vec<_> = (0..4).map(|_| unit_vector3(&mut rng)).collect();
        let mut last = joint_value_infeasibility(&dirs).unwrap().best_residual;
        for _ in 0..3 {
            dirs.push(unit_vector3(&mut rng));
            let next = joint_value_infeasibility(&dirs).unwrap().best_residual;
            prop_assert!(next >= last - 1e-12);
            last = next;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn band_projectors_and_cdf(seed in any::<u64>(), eps in 0.0f64..30.0) {
        let lattice = Lattice1D::centered(16, 1.0).unwrap();
        let h = build_hamiltonian(&lattice, &[0.0; 16], 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 3.0, 4).unwrap();
        let mut rng = seeded(seed);
        let a = state(&mut rng, 16);
        let xi = expected_path(&lattice, &a, &h, &grid).unwrap();
        let delta = path_distance_operator(&lattice, &h, &xi, &grid).unwrap();
        let p = path_band_projector(&delta, eps).unwrap();
        prop_assert!(max_abs(&(p.matrix() * p.matrix() - p.matrix())) <= 1e-10);
        prop_assert!(max_abs(&(p.matrix() - p.matrix().adjoint())) <= 1e-10);

        let eps_grid: Vec<f64> = (0..=30).map(|k| k as f64).collect();
        let table = distance_distribution(&lattice, &a, &h, &xi, &grid, &eps_grid).unwrap();
        for w in table.windows(2) {
            prop_assert!(w[1].1 >= w[0].1);
        }
        let top = Eigensystem::of(&delta).values()[15];
        let last = distance_distribution(&lattice, &a, &h, &xi, &grid, &[top]).unwrap();
        prop_assert!((last[0].1 - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn joint_region_rank_is_bounded(seed in any::<u64>(), m1 in any::<u16>(), m2 in any::<u16>()) {
        let lattice = Lattice1D::new(16, 1.0, 0.0).unwrap();
        let mut rng = seeded(seed);
        let potential: Vec<f64> = (0..16).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let h = build_hamiltonian(&lattice, &potential, 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let mask = |bits: u16| -> Vec<bool> { (0..16).map(|k| bits >> k & 1 == 1 || k == 0).collect() };
        let masks = vec![mask(m1), mask(m2)];
        let region = joint_region_projector(&lattice, &h, &masks, &grid).unwrap();
        let smallest = masks.iter().map(|m| m.iter().filter(|&&b| b).count()).min().unwrap();
        prop_assert!(region.dim <= smallest);
    }

    #[test]
    fn mirrored_packets_mirror_their_paths(x0 in -3.0f64..3.0, k0 in -0.8f64..0.8) {
        let lattice = Lattice1D::centered(25, 1.0).unwrap();
        let h = build_hamiltonian(&lattice, &[0.0; 25], 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 4.0, 5).unwrap();
        let a = gaussian_packet(&lattice, x0, 2.0, k0).unwrap();
        let b = QuantumState::from_vector(lattice.reflect(a.as_vector().unwrap())).unwrap();
        let pa = expected_path(&lattice, &a, &h, &grid).unwrap();
        let pb = expected_path(&lattice, &b, &h, &grid).unwrap();
        let reflected = pa.reflected(lattice.center());
        for (x, y) in reflected.samples().iter().zip(pb.samples()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        let xi = PathSpec::straight_line(&grid, x0, 0.0);
        let da = path_distance_operator(&lattice, &h, &xi, &grid).unwrap();
        let db = path_distance_operator(&lattice, &h, &xi.reflected(lattice.center()), &grid).unwrap();
        for eps in [2.0, 5.0, 9.0] {
            let fa = path_band_projector(&da, eps).unwrap();
            let fb = path_band_projector(&db, eps).unwrap();
            let qa = a.expectation(fa.matrix()).re;
            let qb = b.expectation(fb.matrix()).re;
            prop_assert!((qa - qb).abs() <= 1e-10);
        }
    }
}

#[test]
fn eigenbasis_family_is_complete() {
    let mut rng = seeded(99);
    let h = hermitian(&mut rng, 5);
    let family = ProjectorFamily::eigenbasis(&h).unwrap();
    assert_eq!(family.len(), 5);
}

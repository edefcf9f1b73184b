use num_complex::Complex64;
use rand::Rng;

use qbench_core::hilbert::{
    commutator_norm, make_state, max_abs, HermitianOperator, Operator, Projector, QuantumState,
};
use qbench_core::logic::{meet, ql_chain_sum_check};
use qbench_core::random::{basis, density, projector, seeded, state, unitary};
use qbench_core::sequence::{
    demon_compare_with_cap, feynman_discrepancy, markov_violation_report, wigner_chain, MeasurementChain,
    MeasurementStep, OrderingDefect, PointerModel, ProjectorFamily,
};
use qbench_core::spin::{pauli, spin_projector, Sign, UnitVector3};
use qbench_core::CMatrix;

use super::{Outcome, Status};
use crate::config::{Diagnostic, ParamSpec, Params};
use crate::table::Table;
use crate::CliError;

fn z_family() -> ProjectorFamily {
    spin_family(&UnitVector3::z_axis())
}

fn spin_family(u: &UnitVector3) -> ProjectorFamily {
    ProjectorFamily::new(
        vec!["+".into(), "-".into()],
        vec![spin_projector(u, Sign::Plus), spin_projector(u, Sign::Minus)],
    )
    .expect("spin projectors form a complete family")
}

fn precession(omega: f64) -> Option<HermitianOperator> {
    (omega != 0.0).then(|| pauli::x().scaled(omega / 2.0))
}

pub fn feynman_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::float("b_angle_deg", 90.0, 0.0, 180.0, "tilt of the intermediate basis from z in the xz-plane"),
        ParamSpec::float("omega", 0.0, 0.0, 100.0, "precession rate, H = (omega/2) sigma_x"),
        ParamSpec::float("t1", 0.0, -1e6, 1e6, "time of the first observation"),
        ParamSpec::float("t2", 1.0, -1e6, 1e6, "time of the unobserved intermediate basis"),
        ParamSpec::float("t3", 2.0, -1e6, 1e6, "time of the final observation"),
        ParamSpec::int("n_angles", 19, 2, 1001, "points in the tilt sweep"),
    ]
}

pub fn feynman_gap(p: &Params, _seed: u64) -> Result<Outcome, CliError> {
    let times = [p.float("t1"), p.float("t2"), p.float("t3")];
    let h = precession(p.float("omega"));
    let up = QuantumState::basis(2, 0);
    let tilted = |deg: f64| spin_family(&UnitVector3::from_angles(deg.to_radians(), 0.0));

    let gap = feynman_discrepancy(&z_family(), &tilted(p.float("b_angle_deg")), &z_family(), &up, h.as_ref(), times)?;
    let mut table = Table::new(
        "gap.csv",
        "z-to-z transition probability measured directly and composed through the intermediate basis",
        &["a", "c", "p_direct", "p_markov", "gap"],
    );
    for (i, a) in gap.a_labels.iter().enumerate() {
        for (k, c) in gap.c_labels.iter().enumerate() {
            let (d, m) = (gap.p_direct[(i, k)], gap.p_markov[(i, k)]);
            table.push(vec![a.as_str().into(), c.as_str().into(), d.into(), m.into(), (d - m).into()]);
        }
    }

    let n = p.usize("n_angles");
    let mut sweep = Table::new(
        "gap_vs_angle.csv",
        "largest direct-minus-composed gap as the intermediate basis tilts away from z",
        &["b_angle_deg", "max_abs_gap", "state_weighted_gap"],
    );
    for k in 0..n {
        let deg = 180.0 * k as f64 / (n - 1) as f64;
        let g = feynman_discrepancy(&z_family(), &tilted(deg), &z_family(), &up, h.as_ref(), times)?;
        sweep.push(vec![deg.into(), g.max_abs_gap.into(), g.state_weighted_gap.into()]);
    }
    let notes = vec![format!("max |gap| = {:.6e}", gap.max_abs_gap)];
    Ok(Outcome::ok(vec![table, sweep], notes))
}

pub fn meet_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::int("trials", 1000, 1, 1_000_000, "random instances"),
        ParamSpec::int("dim_min", 2, 2, 64, "smallest Hilbert dimension"),
        ParamSpec::int("dim_max", 8, 2, 64, "largest Hilbert dimension"),
    ]
}

pub fn meet_check(p: &Params) -> Vec<Diagnostic> {
    if p.int("dim_min") > p.int("dim_max") {
        vec![Diagnostic::error("dim_min exceeds dim_max")]
    } else {
        Vec::new()
    }
}

fn random_mask(rng: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random_bool(0.5)).collect()
}

pub fn ql_meet(p: &Params, seed: u64) -> Result<Outcome, CliError> {
    let mut rng = seeded(seed);
    let (lo, hi) = (p.usize("dim_min"), p.usize("dim_max"));
    let mut table = Table::new(
        "meet.csv",
        "meet of random rank-one pairs, deviation of the meet from PQ for commuting pairs, and the chain sum rule defect",
        &[
            "trial",
            "dim",
            "rank_one_meet_norm",
            "rank_one_commutator_norm",
            "commuting_meet_deviation",
            "chain_delta_in_basis",
            "chain_delta_generic",
        ],
    );
    let mut worst = [0.0_f64; 3];
    for trial in 0..p.usize("trials") {
        let n = lo + trial % (hi - lo + 1);
        let (r1, r2) = (projector(&mut rng, n, 1), projector(&mut rng, n, 1));
        let rank_one = max_abs(meet(&r1, &r2)?.matrix());
        let commutator = commutator_norm(&r1, &r2)?;

        let u = unitary(&mut rng, n).into_matrix();
        let rotate = |mask: &[bool]| Projector::new(&u * Projector::diagonal(mask).matrix() * u.adjoint());
        let cp = rotate(&random_mask(&mut rng, n))?;
        let cq = rotate(&random_mask(&mut rng, n))?;
        let commuting = max_abs(&(meet(&cp, &cq)?.into_matrix() - cp.matrix() * cq.matrix()));

        let a = state(&mut rng, n);
        let b = basis(&mut rng, n);
        let family: Vec<Projector> = (0..n)
            .map(|k| {
                let v = b.column(k);
                Projector::new(v * v.adjoint())
            })
            .collect::<Result<_, _>>()?;
        let member = rng.random_range(0..n);
        let in_basis = ql_chain_sum_check(&a, &family, &family[member])?.delta;
        let generic = ql_chain_sum_check(&a, &family, &projector(&mut rng, n, 1))?.delta;

        worst[0] = worst[0].max(rank_one);
        worst[1] = worst[1].max(commuting);
        worst[2] = worst[2].max(in_basis);
        table.push(vec![
            trial.into(),
            n.into(),
            rank_one.into(),
            commutator.into(),
            commuting.into(),
            in_basis.into(),
            generic.into(),
        ]);
    }
    let notes = vec![
        format!("max rank-one meet norm = {:.3e}", worst[0]),
        format!("max commuting meet deviation = {:.3e}", worst[1]),
        format!("max in-basis chain delta = {:.3e}", worst[2]),
    ];
    Ok(Outcome::ok(vec![table], notes))
}

pub fn wigner_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::int("trials", 500, 1, 1_000_000, "random (rho, P_b, P_c) triples"),
        ParamSpec::int("dim", 4, 2, 64, "Hilbert dimension"),
    ]
}

pub fn wigner_two_step(p: &Params, seed: u64) -> Result<Outcome, CliError> {
    let mut rng = seeded(seed);
    let n = p.usize("dim");
    let mut table = Table::new(
        "two_step.csv",
        "two-step reduction chain probability and the Born probability of P_c in the state reduced by P_b",
        &["trial", "rank_b", "rank_c", "chain", "reduced_born", "abs_diff"],
    );
    let mut worst = 0.0_f64;
    for trial in 0..p.usize("trials") {
        let rho = density(&mut rng, n);
        let (rb, rc) = (rng.random_range(1..n), rng.random_range(1..n));
        let (pb, pc) = (projector(&mut rng, n, rb), projector(&mut rng, n, rc));
        let chain = MeasurementChain::new(
            rho.clone(),
            vec![MeasurementStep::new(pb.clone(), 0.0), MeasurementStep::new(pc.clone(), 1.0)],
            None,
        )?;
        let value = wigner_chain(&chain)?;
        let reduced: CMatrix = pb.matrix() * rho.density_matrix() * pb.matrix();
        let born = (reduced * pc.matrix()).trace().re;
        let diff = (value - born).abs();
        worst = worst.max(diff);
        table.push(vec![trial.into(), rb.into(), rc.into(), value.into(), born.into(), diff.into()]);
    }
    Ok(Outcome::ok(vec![table], vec![format!("max |chain - reduced Born| = {worst:.3e}")]))
}

const DEMON_DIRECTIONS: [(f64, f64, f64); 6] =
    [(1.0, 0.0, 1.0), (0.0, 1.0, -0.3), (1.0, 1.0, 0.0), (0.0, -1.0, 1.0), (1.0, 0.0, -0.5), (0.3, 1.0, 1.0)];

pub fn demon_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::int("n_couplings", 10, 2, 1000, "couplings g = k / n_couplings, k = 1..n_couplings"),
        ParamSpec::float("duration", 1.0, 1e-6, 1e6, "interaction time tau"),
        ParamSpec::int("pointer_dim", 3, 2, 64, "levels per pointer"),
        ParamSpec::int("steps", 2, 1, 6, "measurements in the chain"),
        ParamSpec::float("omega", 0.7, 0.0, 100.0, "system Hamiltonian omega sigma_x"),
        ParamSpec::int("cap", 4096, 2, 1 << 20, "largest composite dimension allowed"),
    ]
}

pub fn demon_check(p: &Params) -> Vec<Diagnostic> {
    let required = (0..p.int("steps")).try_fold(2i64, |acc, _| acc.checked_mul(p.int("pointer_dim")));
    match required {
        Some(d) if d <= p.int("cap") => Vec::new(),
        _ => vec![Diagnostic::error(format!(
            "composite dimension 2 * {}^{} exceeds the cap {}",
            p.int("pointer_dim"),
            p.int("steps"),
            p.int("cap")
        ))],
    }
}

fn demon_chains(p: &Params) -> Result<(MeasurementChain, MeasurementChain), CliError> {
    let omega = p.float("omega");
    let times: Vec<f64> = (0..p.usize("steps")).map(|j| 0.5 + 0.7 * j as f64).collect();
    let start = make_state(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)])?;
    let steps = times
        .iter()
        .zip(DEMON_DIRECTIONS.iter().cycle())
        .map(|(&t, &(x, y, z))| {
            Ok(MeasurementStep::new(spin_projector(&UnitVector3::normalized(x, y, z)?, Sign::Plus), t))
        })
        .collect::<Result<Vec<_>, qbench_core::Error>>()?;
    let chain = MeasurementChain::new(start.clone(), steps, Some(pauli::x().scaled(omega)))?;
    let up = spin_projector(&UnitVector3::z_axis(), Sign::Plus);
    let control_steps = times.iter().map(|&t| MeasurementStep::new(up.clone(), t)).collect();
    let control = MeasurementChain::new(start, control_steps, Some(pauli::z().scaled(omega)))?;
    Ok((chain, control))
}

fn sequence_label(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

pub fn demon_sweep(p: &Params, _seed: u64) -> Result<Outcome, CliError> {
    let (chain, control) = demon_chains(p)?;
    let n = p.usize("n_couplings");
    let (tau, m, cap) = (p.float("duration"), p.usize("pointer_dim"), p.usize("cap"));
    let couplings: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64 / tau).collect();
    let mut sweep = Table::new(
        "sweep.csv",
        "total variation between pointer statistics and the reduction chain, with a commuting-chain control",
        &["coupling", "strength", "total_variation", "commuting_total_variation"],
    );
    let mut sequences = Table::new(
        "sequences.csv",
        "probability of each yes/no outcome sequence: reduction chain and explicit pointer model",
        &["coupling", "sequence", "wigner", "full_model"],
    );
    for &g in &couplings {
        let pointer = PointerModel::new(m, g, tau)?;
        let cmp = demon_compare_with_cap(&chain, &pointer, cap)?;
        let ctl = demon_compare_with_cap(&control, &pointer, cap)?;
        sweep.push(vec![g.into(), pointer.strength().into(), cmp.total_variation.into(), ctl.total_variation.into()]);
        for (k, bits) in cmp.sequences.iter().enumerate() {
            sequences.push(vec![g.into(), sequence_label(bits).into(), cmp.wigner[k].into(), cmp.full_model[k].into()]);
        }
    }
    let tv = sweep.floats("total_variation");
    let notes = vec![format!(
        "total variation {:.3e} at the weakest coupling, {:.3e} at the strongest",
        tv[0],
        tv[tv.len() - 1]
    )];
    Ok(Outcome::ok(vec![sweep, sequences], notes))
}

pub fn markov_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::float("omega", 1.0, 0.0, 100.0, "precession rate, H = (omega/2) sigma_x"),
        ParamSpec::float("t1", 0.0, -1e6, 1e6, "first observation"),
        ParamSpec::float("t2", 0.7, -1e6, 1e6, "second observation"),
        ParamSpec::float("t3", 1.9, -1e6, 1e6, "third observation"),
    ]
}

pub fn markov_check(p: &Params) -> Vec<Diagnostic> {
    if p.float("t1") < p.float("t2") && p.float("t2") < p.float("t3") {
        Vec::new()
    } else {
        vec![Diagnostic::error("observation times must satisfy t1 < t2 < t3")]
    }
}

pub fn markov_memory(p: &Params, _seed: u64) -> Result<Outcome, CliError> {
    let times = [p.float("t1"), p.float("t2"), p.float("t3")];
    let omega = p.float("omega");
    let up = QuantumState::basis(2, 0);
    let precessing = markov_violation_report(&pauli::z(), &pauli::x().scaled(omega / 2.0), &up, times)?;
    let conserved = markov_violation_report(&pauli::z(), &pauli::z().scaled(omega / 2.0), &up, times)?;

    let mut transitions = Table::new(
        "transitions.csv",
        "sigma_z transition probabilities from the first to the last observation: direct and composed through the middle one",
        &["case", "a", "c", "direct", "markov", "defect"],
    );
    let mut defects = Table::new(
        "defects.csv",
        "Chapman-Kolmogorov defect |P_ac - sum_b P_ab P_bc| of repeated sigma_z observations",
        &["case", "max_defect", "state_weighted_defect", "factorization_defect"],
    );
    let cases: [(&str, &[String], &OrderingDefect); 3] = [
        ("memory", &precessing.labels, &precessing.memory),
        ("anticipation", &precessing.labels, &precessing.anticipation),
        ("conserved", &conserved.labels, &conserved.memory),
    ];
    for (name, labels, d) in cases {
        for (i, a) in labels.iter().enumerate() {
            for (k, c) in labels.iter().enumerate() {
                let (x, y) = (d.direct[(i, k)], d.markov[(i, k)]);
                transitions.push(vec![
                    name.into(),
                    a.as_str().into(),
                    c.as_str().into(),
                    x.into(),
                    y.into(),
                    (x - y).abs().into(),
                ]);
            }
        }
        defects.push(vec![
            name.into(),
            d.max_defect.into(),
            d.state_weighted_defect.into(),
            d.factorization_defect.into(),
        ]);
    }
    let notes = vec![
        format!("defect under precession = {:.6e}", precessing.max_defect),
        format!("defect with conserved observable = {:.3e}", conserved.max_defect),
    ];
    Ok(Outcome { status: Status::Ok, tables: vec![transitions, defects], notes })
}

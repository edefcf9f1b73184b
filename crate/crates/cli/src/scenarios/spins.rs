use qbench_core::random::{seeded, unit_vector3};
use qbench_core::spin::{
    fibonacci_directions, joint_value_infeasibility, sphere_vs_quantum, SphereModelConfig, UnitVector3,
    MAX_JOINT_DIRECTIONS,
};
use qbench_core::Error;

use super::Outcome;
use crate::config::{ParamSpec, Params};
use crate::table::Table;
use crate::CliError;

pub fn sphere_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::int("n_samples", 1_000_000, 1, 1_000_000_000, "hidden vectors drawn per direction"),
        ParamSpec::int("n_directions", 32, 1, 10_000, "quasi-uniform measurement directions"),
        ParamSpec::float("theta_deg", 0.0, 0.0, 180.0, "polar angle of the prepared direction"),
        ParamSpec::float("phi_deg", 0.0, -360.0, 360.0, "azimuth of the prepared direction"),
    ]
}

pub fn spin_sphere(p: &Params, seed: u64) -> Result<Outcome, CliError> {
    let u = UnitVector3::from_angles(p.float("theta_deg").to_radians(), p.float("phi_deg").to_radians());
    let config = SphereModelConfig::new(u, p.int("n_samples") as u64, seed)?;
    let mut grid = fibonacci_directions(p.usize("n_directions"));
    grid.push(u);
    grid.push(-u);
    let rows = sphere_vs_quantum(&config, &grid)?;

    let mut table = Table::new(
        "sphere.csv",
        "fraction of hemisphere hidden vectors reading +1 along v, against the quantum probability (1 + u.v) / 2",
        &["index", "vx", "vy", "vz", "u_dot_v", "p_hat", "std_err", "p_quantum", "z_score"],
    );
    let mut worst = 0.0_f64;
    for (k, row) in rows.iter().enumerate() {
        let [x, y, z] = row.direction.components();
        worst = worst.max(row.z_score.abs());
        table.push(vec![
            k.into(),
            x.into(),
            y.into(),
            z.into(),
            u.dot(&row.direction).into(),
            row.estimate.p_hat.into(),
            row.estimate.std_err.into(),
            row.p_quantum.into(),
            row.z_score.into(),
        ]);
    }
    Ok(Outcome::ok(vec![table], vec![format!("max |z| = {worst:.3}")]))
}

pub fn joint_params() -> Vec<ParamSpec> {
    vec![ParamSpec::int(
        "max_directions",
        8,
        4,
        MAX_JOINT_DIRECTIONS as i64,
        "largest direction set; random directions are appended to the four-direction base set",
    )]
}

/// z and three legs at polar angle acos(2/3), spaced evenly in azimuth.
fn tripod() -> Vec<UnitVector3> {
    let legs = (0..3).map(|k| UnitVector3::from_angles((2.0f64 / 3.0).acos(), k as f64 * std::f64::consts::TAU / 3.0));
    std::iter::once(UnitVector3::z_axis()).chain(legs).collect()
}

pub fn joint_value(p: &Params, seed: u64) -> Result<Outcome, CliError> {
    let mut rng = seeded(seed);
    let mut table = Table::new(
        "residual.csv",
        "smallest least-squares residual sum_i (u_i.J - s_i)^2 over sign patterns s and vectors J",
        &["set", "k", "best_residual", "assignments_tested", "jx", "jy", "jz"],
    );
    let mut push = |name: &str, dirs: &[UnitVector3]| -> Result<(), CliError> {
        let r = joint_value_infeasibility(dirs)?;
        let [jx, jy, jz] = r.best_vector;
        table.push(vec![
            name.into(),
            dirs.len().into(),
            r.best_residual.into(),
            (r.assignments_tested as i64).into(),
            jx.into(),
            jy.into(),
            jz.into(),
        ]);
        Ok(())
    };
    push("axes", &[UnitVector3::x_axis(), UnitVector3::y_axis(), UnitVector3::z_axis()])?;
    let mut dirs = tripod();
    push("tripod", &dirs)?;
    for k in dirs.len() + 1..=p.usize("max_directions") {
        // Redraw until the enlarged set has no three coplanar directions.
        loop {
            dirs.push(unit_vector3(&mut rng));
            match joint_value_infeasibility(&dirs) {
                Err(Error::NotTriplewiseIndependent(..)) => {
                    dirs.pop();
                }
                _ => break,
            }
        }
        push(&format!("tripod+{}", k - 4), &dirs)?;
    }
    let residuals = table.floats("best_residual");
    let notes = vec![format!("tripod residual = {:.12}", residuals[1])];
    Ok(Outcome::ok(vec![table], notes))
}

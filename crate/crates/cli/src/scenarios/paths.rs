use rand::seq::SliceRandom;

use qbench_core::path::{
    build_hamiltonian, count_minima, distance_spectrum, expected_path, gaussian_packet, joint_region_projector,
    oscillator_spectrum, DoubleSlit, Lattice1D, Slit, SlitSetup, TimeGrid, MIN_SITES,
};
use qbench_core::random::seeded;

use super::{Outcome, Status, MAX_SITES};
use crate::config::{Diagnostic, ParamSpec, Params};
use crate::table::Table;
use crate::CliError;

fn sites_param(default: i64, help: &'static str) -> ParamSpec {
    ParamSpec::int("n_sites", default, MIN_SITES as i64, i64::MAX, help)
}

fn sites_check(p: &Params) -> Vec<Diagnostic> {
    let n = p.int("n_sites");
    if n > MAX_SITES {
        vec![Diagnostic::error(format!("n_sites = {n} exceeds the lattice cap {MAX_SITES}"))]
    } else {
        Vec::new()
    }
}

pub fn cdf_params() -> Vec<ParamSpec> {
    vec![
        sites_param(128, "lattice sites"),
        ParamSpec::float("dx", 1.0, 1e-6, 1e6, "lattice spacing"),
        ParamSpec::float("mass", 1.0, 1e-6, 1e6, "particle mass"),
        ParamSpec::float("x0", -20.0, -1e6, 1e6, "initial packet center"),
        ParamSpec::float("sigma", 6.0, 1e-6, 1e6, "initial packet width"),
        ParamSpec::float("k0", 0.5, -1e3, 1e3, "initial packet wavenumber"),
        ParamSpec::float("t_end", 40.0, 1e-9, 1e6, "end of the time window"),
        ParamSpec::int("n_steps", 16, 1, 4096, "time points on the path"),
        ParamSpec::int("n_eps", 65, 2, 100_000, "band widths in the distribution"),
    ]
}

pub fn cdf_check(p: &Params) -> Vec<Diagnostic> {
    sites_check(p)
}

pub fn path_cdf(p: &Params, _seed: u64) -> Result<Outcome, CliError> {
    let lattice = Lattice1D::centered(p.usize("n_sites"), p.float("dx"))?;
    let h = build_hamiltonian(&lattice, &vec![0.0; lattice.n_sites()], p.float("mass"))?;
    let grid = TimeGrid::new(0.0, p.float("t_end"), p.usize("n_steps"))?;
    let packet = gaussian_packet(&lattice, p.float("x0"), p.float("sigma"), p.float("k0"))?;
    let xi = expected_path(&lattice, &packet, &h, &grid)?;
    let spectrum = distance_spectrum(&lattice, &packet, &h, &xi, &grid)?;

    let mut path = Table::new(
        "expected_path.csv",
        "expected position of the packet on the time grid, and free classical motion",
        &["t", "xi", "classical"],
    );
    let velocity = p.float("k0") / p.float("mass");
    for (t, x) in grid.times().into_iter().zip(xi.samples()) {
        path.push(vec![t.into(), (*x).into(), (p.float("x0") + velocity * t).into()]);
    }

    let mut cdf = Table::new(
        "cdf.csv",
        "probability that the path distance from the expected path is at most eps",
        &["eps", "probability"],
    );
    let top = spectrum.max_eigenvalue();
    let n = p.usize("n_eps");
    for k in 0..n {
        let eps = if k + 1 == n { top } else { top * k as f64 / (n - 1) as f64 };
        cdf.push(vec![eps.into(), spectrum.cdf(eps).into()]);
    }
    let notes = vec![format!("largest path distance eigenvalue = {top:.6}")];
    Ok(Outcome::ok(vec![path, cdf], notes))
}

pub fn slit_params() -> Vec<ParamSpec> {
    vec![
        sites_param(129, "lattice sites, odd so the midline is a site"),
        ParamSpec::int("separation", 20, 2, i64::MAX, "slit separation in sites, even"),
        ParamSpec::float("time", 24.0, 1e-6, 1e6, "propagation time from slits to screen"),
        ParamSpec::float("aperture_width", 2.0, 1e-3, 1e3, "Gaussian aperture width in sites"),
        ParamSpec::float("source_width", 30.0, 1e-3, 1e6, "width of the incoming packet"),
        ParamSpec::float(
            "eps_factor",
            0.5,
            1e-6,
            1e3,
            "band width as a multiple of the distance between the two reference paths",
        ),
        ParamSpec::int("n_steps", 16, 1, 4096, "time points on each reference path"),
        ParamSpec::int("detection_stride", 4, 1, i64::MAX, "sites between inferred detection points"),
    ]
}

pub fn slit_check(p: &Params) -> Vec<Diagnostic> {
    let mut out = sites_check(p);
    let (n, s) = (p.int("n_sites"), p.int("separation"));
    if n % 2 == 0 {
        out.push(Diagnostic::error("n_sites must be odd"));
    }
    if s % 2 != 0 {
        out.push(Diagnostic::error("separation must be even"));
    }
    if s >= n {
        out.push(Diagnostic::error(format!("separation {s} does not fit on {n} sites")));
    }
    out
}

pub fn double_slit(p: &Params, _seed: u64) -> Result<Outcome, CliError> {
    let mut setup = SlitSetup::symmetric(p.usize("n_sites"), p.usize("separation"), p.float("time"))?;
    setup.aperture_width = p.float("aperture_width");
    setup.source_width = p.float("source_width");
    setup.n_steps = p.usize("n_steps");
    setup.eps = p.float("eps_factor") * setup.reference_separation();
    let ds = DoubleSlit::new(setup)?;
    let lattice = ds.setup().lattice;

    let both = ds.screen_intensity();
    let ia = ds.single_slit_intensity(Slit::A);
    let ib = ds.single_slit_intensity(Slit::B);
    let envelope: Vec<f64> = ia.iter().zip(&ib).map(|(a, b)| a + b).collect();
    let mut screen = Table::new(
        "screen.csv",
        "detection probability per screen site with both slits open and with one slit open",
        &["site", "x", "both", "slit_a_only", "slit_b_only"],
    );
    for j in 0..lattice.n_sites() {
        screen.push(vec![j.into(), lattice.position(j).into(), both[j].into(), ia[j].into(), ib[j].into()]);
    }
    let mut fringes = Table::new(
        "fringes.csv",
        "interior intensity minima where the two-slit envelope exceeds 1% of its peak",
        &["case", "minima"],
    );
    fringes.push(vec!["both".into(), count_minima(&both, &envelope, 0.01).into()]);
    fringes.push(vec!["slit_a_only".into(), count_minima(&ia, &ia, 0.01).into()]);
    fringes.push(vec!["slit_b_only".into(), count_minima(&ib, &ib, 0.01).into()]);

    let mid = lattice.n_sites() / 2;
    let mut sites: Vec<usize> = (0..lattice.n_sites()).step_by(p.usize("detection_stride")).collect();
    if !sites.contains(&mid) {
        sites.push(mid);
        sites.sort_unstable();
    }
    let mut inference = Table::new(
        "inference.csv",
        "probability of the band around the straight path from each slit to the detection site, and their ratio",
        &["site", "x", "p_a", "p_b", "likelihood_ratio"],
    );
    let mut decided = 0;
    for &site in &sites {
        let inf = ds.infer(site)?;
        let ratio = match inf.likelihood_ratio {
            Some(r) => {
                decided += 1;
                r.into()
            }
            None => "inconclusive".into(),
        };
        inference.push(vec![site.into(), lattice.position(site).into(), inf.p_a.into(), inf.p_b.into(), ratio]);
    }
    let status = if decided == 0 { Status::Inconclusive } else { Status::Ok };
    let notes = vec![
        format!("band width eps = {:.6}", ds.setup().eps),
        format!("{decided} of {} detection sites decided", sites.len()),
    ];
    Ok(Outcome { status, tables: vec![screen, fringes, inference], notes })
}

pub fn oscillator_params() -> Vec<ParamSpec> {
    vec![
        sites_param(256, "lattice sites"),
        ParamSpec::float("dx", 0.1, 1e-6, 1e3, "lattice spacing"),
        ParamSpec::float("a", 1.0, 1e-6, 1e3, "frequency parameter; the second run uses 2a"),
        ParamSpec::int("levels", 5, 1, 1024, "lowest levels reported"),
    ]
}

pub fn oscillator_check(p: &Params) -> Vec<Diagnostic> {
    let mut out = sites_check(p);
    if p.int("levels") > p.int("n_sites") {
        out.push(Diagnostic::error("levels exceeds n_sites"));
    }
    out
}

pub fn oscillator(p: &Params, _seed: u64) -> Result<Outcome, CliError> {
    let lattice = Lattice1D::centered(p.usize("n_sites"), p.float("dx"))?;
    let levels = p.usize("levels");
    let mut table = Table::new(
        "levels.csv",
        "lowest eigenvalues of p^2 + a^2 q^2 on the lattice against (2n + 1) a",
        &["a", "level", "eigenvalue", "exact", "relative_error"],
    );
    let mut notes = Vec::new();
    for a in [p.float("a"), 2.0 * p.float("a")] {
        let spectrum = oscillator_spectrum(a, &lattice, levels)?;
        for (n, e) in spectrum.eigenvalues.iter().enumerate() {
            let exact = (2 * n + 1) as f64 * a;
            table.push(vec![a.into(), n.into(), (*e).into(), exact.into(), ((e - exact) / exact).abs().into()]);
        }
        notes.push(format!("a = {a}: largest edge mass {:.3e}", spectrum.max_tail_mass));
    }
    Ok(Outcome::ok(vec![table], notes))
}

pub fn region_params() -> Vec<ParamSpec> {
    vec![
        sites_param(32, "lattice sites"),
        ParamSpec::float("time", 5.0, 1e-9, 1e6, "time of the second region; the first is at 0"),
        ParamSpec::int("trials", 100, 1, 1_000_000, "random mask pairs"),
    ]
}

pub fn region_check(p: &Params) -> Vec<Diagnostic> {
    sites_check(p)
}

pub fn region_degeneracy(p: &Params, seed: u64) -> Result<Outcome, CliError> {
    let mut rng = seeded(seed);
    let n = p.usize("n_sites");
    let lattice = Lattice1D::centered(n, 1.0)?;
    let h = build_hamiltonian(&lattice, &vec![0.0; n], 1.0)?;
    let grid = TimeGrid::new(0.0, 2.0 * p.float("time"), 2)?;
    let mut half_mask = || {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let mut m = vec![false; n];
        for &i in &idx[..n / 2] {
            m[i] = true;
        }
        m
    };
    let mut trials = Table::new(
        "trials.csv",
        "rank of the projector onto states inside a random half of the lattice at both times",
        &["trial", "rank"],
    );
    let mut counts = std::collections::BTreeMap::<usize, usize>::new();
    for trial in 0..p.usize("trials") {
        let masks = vec![half_mask(), half_mask()];
        let region = joint_region_projector(&lattice, &h, &masks, &grid)?;
        *counts.entry(region.dim).or_default() += 1;
        trials.push(vec![trial.into(), region.dim.into()]);
    }
    let mut histogram = Table::new("ranks.csv", "number of trials with each joint-region rank", &["rank", "count"]);
    for (rank, count) in &counts {
        histogram.push(vec![(*rank).into(), (*count).into()]);
    }
    let zero = counts.get(&0).copied().unwrap_or(0);
    let notes = vec![format!("{zero} of {} joint regions are empty", p.usize("trials"))];
    Ok(Outcome::ok(vec![trials, histogram], notes))
}

//! Named scenarios: parameter declarations, checks and table-producing runs.

mod paths;
mod sequences;
mod spins;

use crate::config::{Diagnostic, ParamSpec, Params};
use crate::table::Table;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The computation finished but could not decide the question it asks.
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub tables: Vec<Table>,
    /// Human-readable summary lines.
    pub notes: Vec<String>,
}

impl Outcome {
    fn ok(tables: Vec<Table>, notes: Vec<String>) -> Self {
        Self { status: Status::Ok, tables, notes }
    }

    pub fn table(&self, file_name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file_name == file_name)
    }
}

pub struct Scenario {
    pub name: &'static str,
    pub module: &'static str,
    pub summary: &'static str,
    pub params: fn() -> Vec<ParamSpec>,
    /// Cross-parameter checks run after each value passed its own range check.
    pub check: fn(&Params) -> Vec<Diagnostic>,
    pub run: fn(&Params, u64) -> Result<Outcome, CliError>,
}

fn no_checks(_: &Params) -> Vec<Diagnostic> {
    Vec::new()
}

pub fn registry() -> &'static [Scenario] {
    static REGISTRY: &[Scenario] = &[
        Scenario {
            name: "feynman-gap",
            module: "sequence-engine",
            summary: "direct vs Markov-composed spin transition probabilities through an unobserved basis",
            params: sequences::feynman_params,
            check: no_checks,
            run: sequences::feynman_gap,
        },
        Scenario {
            name: "ql-meet",
            module: "quantum-logic",
            summary: "projector meet on random rank-one and commuting pairs, and the chain sum rule",
            params: sequences::meet_params,
            check: sequences::meet_check,
            run: sequences::ql_meet,
        },
        Scenario {
            name: "wigner-two-step",
            module: "sequence-engine",
            summary: "two-step reduction chain vs the Born rule in the reduced state",
            params: sequences::wigner_params,
            check: no_checks,
            run: sequences::wigner_two_step,
        },
        Scenario {
            name: "demon-sweep",
            module: "sequence-engine",
            summary: "explicit pointer measurement model vs the reduction chain over coupling strength",
            params: sequences::demon_params,
            check: sequences::demon_check,
            run: sequences::demon_sweep,
        },
        Scenario {
            name: "markov-memory",
            module: "sequence-engine",
            summary: "Chapman-Kolmogorov defect of repeated spin observations under precession",
            params: sequences::markov_params,
            check: sequences::markov_check,
            run: sequences::markov_memory,
        },
        Scenario {
            name: "spin-sphere",
            module: "spin-sphere",
            summary: "classical hemisphere hidden-variable model vs the quantum spin probability",
            params: spins::sphere_params,
            check: no_checks,
            run: spins::spin_sphere,
        },
        Scenario {
            name: "joint-value",
            module: "spin-sphere",
            summary: "least-squares residual showing no single vector fixes all spin values",
            params: spins::joint_params,
            check: no_checks,
            run: spins::joint_value,
        },
        Scenario {
            name: "path-cdf",
            module: "path-lab",
            summary: "distribution of the path distance from the expected path of a free packet",
            params: paths::cdf_params,
            check: paths::cdf_check,
            run: paths::path_cdf,
        },
        Scenario {
            name: "double-slit",
            module: "path-lab",
            summary: "screen fringes and slit likelihood ratios from path-band probabilities",
            params: paths::slit_params,
            check: paths::slit_check,
            run: paths::double_slit,
        },
        Scenario {
            name: "oscillator",
            module: "path-lab",
            summary: "low spectrum of p^2 + a^2 q^2 on the lattice against (2n + 1) a",
            params: paths::oscillator_params,
            check: paths::oscillator_check,
            run: paths::oscillator,
        },
        Scenario {
            name: "region-degeneracy",
            module: "path-lab",
            summary: "rank of the joint space-time region projector for random half-lattice masks",
            params: paths::region_params,
            check: paths::region_check,
            run: paths::region_degeneracy,
        },
    ];
    REGISTRY
}

pub fn find(name: &str) -> Option<&'static Scenario> {
    registry().iter().find(|s| s.name == name)
}

/// Largest lattice any path scenario accepts.
pub const MAX_SITES: i64 = 1024;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qbench_cli::config::{parse_override, ConfigFile, ScenarioConfig, Severity};
use qbench_cli::{exit_code, run_scenario, scenarios, validate_config, CliError};

#[derive(Parser)]
#[command(
    name = "qbench",
    version,
    about = "Numerical scenarios for measurement sequences, spin models and lattice paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List scenarios and their parameters.
    List {
        /// Also print each parameter with its default.
        #[arg(long)]
        verbose: bool,
    },
    /// Resolve and check parameters without running.
    Validate(RunArgs),
    /// Run a scenario and write its tables.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario name; may instead come from the config file.
    #[arg(long, short)]
    scenario: Option<String>,
    /// TOML file with `scenario`, `seed`, `out` and a `[params]` table.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $QBENCH_OUT/<scenario> or qbench-out/<scenario>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parameter override, repeatable.
    #[arg(long = "param", short = 'p', value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long, short)]
    quiet: bool,
}

impl RunArgs {
    fn to_config(&self) -> Result<ScenarioConfig, CliError> {
        let mut config = ScenarioConfig::new(self.scenario.clone().unwrap_or_default());
        config.seed = self.seed;
        config.out = self.out.clone();
        for p in &self.params {
            config.overrides.push(parse_override(p)?);
        }
        if let Some(path) = &self.config {
            config = config.merge_file(ConfigFile::load(path)?);
        }
        if config.scenario.is_empty() {
            return Err(CliError::Config("no scenario given; use --scenario or set it in the config file".into()));
        }
        Ok(config)
    }
}

fn list(verbose: bool) {
    for s in scenarios::registry() {
        println!("{:<18} {:<16} {}", s.name, s.module, s.summary);
        if verbose {
            for p in (s.params)() {
                println!("    {:<18} = {:<10} {}", p.name, p.default.to_string(), p.help);
            }
        }
    }
}

fn run(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::List { verbose } => {
            list(verbose);
            Ok(0)
        }
        Command::Validate(args) => {
            let config = args.to_config()?;
            let (params, diagnostics) = validate_config(&config)?;
            for d in &diagnostics {
                eprintln!("{d}");
            }
            if diagnostics.iter().any(|d| d.severity == Severity::Error) {
                return Ok(1);
            }
            if !args.quiet {
                for (k, v) in params.iter() {
                    println!("{k} = {v}");
                }
            }
            Ok(0)
        }
        Command::Run(args) => {
            let config = args.to_config()?;
            let report = run_scenario(&config)?;
            if !args.quiet {
                for note in &report.outcome.notes {
                    println!("{note}");
                }
                println!("{}: {} -> {}", config.scenario, report.manifest.status, report.dir.display());
            }
            Ok(exit_code(report.outcome.status))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, RunConfig, SimulateArgs, DEFAULT_SEED};
use crate::output;
use crate::verify::{self, DEFAULT_TRIALS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "atomcav",
    version,
    about = "Two-atom cavity entanglement and linear-entropy dynamics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its trajectory.
    Simulate(SimulateArgs),
    /// Run the seeded invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Random states per suite.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 1.0, hide = true)]
    pub tolerance_scale: f64,
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
    }
}

fn usage(e: ConfigError) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

pub fn simulate(args: SimulateArgs) -> i32 {
    let config = match args.with_config_file().and_then(RunConfig::resolve) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let scenario = match config.build() {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let table = match output::simulate(&scenario, config.method, config.dt) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: invariant violated during run: {e}");
            return EXIT_INVARIANT;
        }
    };
    let written = match &config.output {
        Some(path) => output::write_atomic(&table, config.format, path)
            .map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let stdout = io::stdout().lock();
            let mut w = io::BufWriter::new(stdout);
            output::encode(&table, config.format, &mut w)
                .and_then(|_| w.flush())
                .map_err(|e| e.to_string())
        }
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(msg) => usage(ConfigError::new("output", msg)),
    }
}

pub fn verify(args: VerifyArgs) -> i32 {
    if args.trials == 0 {
        return usage(ConfigError::new("trials", "must be at least 1"));
    }
    if !(args.tolerance_scale.is_finite() && args.tolerance_scale >= 0.0) {
        return usage(ConfigError::new(
            "tolerance-scale",
            "must be finite and nonnegative",
        ));
    }
    let report = verify::run(args.seed, args.trials, args.tolerance_scale);
    print!("{report}");
    let mut code = EXIT_OK;
    for f in report.failures() {
        let seed = f.seed.unwrap_or(report.seed);
        eprintln!(
            "invariant `{}` violated: {:e} > {:e}; reproduce with `verify --seed {seed} --trials {}`",
            f.name,
            f.worst,
            f.tolerance,
            if f.seed.is_some() { 1 } else { report.trials },
        );
        code = EXIT_INVARIANT;
    }
    code
}

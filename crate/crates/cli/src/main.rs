use clap::{Parser, Subcommand, ValueEnum};
use maxheat_cli::output::write_outputs;
use maxheat_cli::presets::{self, Overrides, PRESETS};
use maxheat_cli::{simulate, verify, CliError, RunConfig};
use maxheat_core::coupled::SolverMode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "maxheat", version, about = "2D microwave heating simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation from a JSON config or a named preset.
    Run {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Grid resolution (cells across the domain).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the oracle and invariant self-checks.
    Verify,
    /// List the built-in scenarios.
    ListPresets,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Monolithic,
    Picard,
}

impl From<Mode> for SolverMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Monolithic => SolverMode::Monolithic,
            Mode::Picard => SolverMode::Picard,
        }
    }
}

fn run(
    config: Option<PathBuf>,
    preset: Option<String>,
    overrides: Overrides,
) -> Result<(), CliError> {
    let mut cfg = match (config, preset) {
        (Some(path), _) => RunConfig::load(&path)?,
        (None, Some(name)) => presets::find(&name)
            .ok_or_else(|| CliError::config("preset", format!("unknown preset {name:?}")))?
            .config(),
        (None, None) => return Err(CliError::config("run", "need --config or --preset")),
    };
    overrides.apply(&mut cfg);
    let sim = simulate(&cfg)?;
    let files = write_outputs(&sim, &cfg.output.dir)?;
    let report = sim.report();
    println!(
        "{} steps in {:.2} s on {} threads; max E = {:.6e}, Gronwall N = {:.6e}",
        report.steps, report.wall_time_s, report.threads, report.max_e, report.gronwall_n
    );
    if let Some(p) = &report.picard {
        println!("Picard converged after {} applications of T", p.iterations);
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            preset,
            n,
            mode,
            out,
            threads,
        } => run(
            config,
            preset,
            Overrides {
                n,
                mode: mode.map(Into::into),
                out,
                threads,
            },
        ),
        Command::Verify => {
            let checks = verify::run_checks();
            let mut ok = true;
            for c in &checks {
                println!("{} {:<36} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if ok {
                Ok(())
            } else {
                return ExitCode::from(3);
            }
        }
        Command::ListPresets => {
            for p in PRESETS {
                println!("{:<20} {}", p.name, p.summary);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use elliptheta_cli::{output, parse_job, run, CliError, Settings};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Evaluate elliptic hypergeometric series, compute their radii of
/// convergence and check the difference equations they satisfy.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Command to run; must match the job file when both are given.
    #[arg(value_parser = ["eval", "radius", "residual", "identities", "bounds", "sweep"])]
    command: Option<String>,

    /// Job file `{"command": ..., "params": {...}}`; `-` reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Inline params object, used with a positional command.
    #[arg(long)]
    params: Option<String>,

    #[arg(long, value_enum, default_value = "json")]
    format: Format,

    /// Seed for the randomized identity suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Tolerance override (meaning depends on the command).
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,

    #[arg(long, default_value_t = 10_000)]
    max_terms: usize,

    /// Orbit length for empirical radius estimates.
    #[arg(long, default_value_t = 100_000)]
    n_empirical: u64,
}

fn job_text(cli: &Cli) -> Result<String, CliError> {
    match (&cli.input, &cli.command) {
        (Some(path), _) if path.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
        (Some(path), _) => Ok(std::fs::read_to_string(path)?),
        (None, Some(cmd)) => {
            let params = cli.params.as_deref().unwrap_or("{}");
            Ok(format!("{{\"command\": \"{cmd}\", \"params\": {params}}}"))
        }
        (None, None) => Err(CliError::Invalid("give a command or --input".into())),
    }
}

fn main_inner(cli: &Cli) -> Result<i32, CliError> {
    let job = parse_job(&job_text(cli)?)?;
    if let Some(cmd) = &cli.command {
        if cmd != job.name() {
            return Err(CliError::Invalid(format!("command {cmd} does not match job file ({})", job.name())));
        }
    }
    if cli.tol.is_some_and(|t| !(t > 0.0)) {
        return Err(CliError::Invalid("--tol must be positive".into()));
    }
    let settings = Settings { seed: cli.seed, tol: cli.tol, max_terms: cli.max_terms, n_empirical: cli.n_empirical };
    let report = run(&job, &settings)?;
    let text = match cli.format {
        Format::Json => output::to_json(&report)?,
        Format::Csv => output::to_csv(&report)?,
    };
    print!("{text}");
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    // usage errors share exit code 1 with other input errors; 2 means flagged
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match main_inner(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ionsqueeze_cli::config::{parse_config, Command, ConfigErrors, ConfigIssue, Format, ProtocolConfig};
use ionsqueeze_cli::output::{companion_json, rwa_csv, write_atomic};
use ionsqueeze_cli::report::{run, Results, RunOptions, RunReport};
use serde_json::{json, Value};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 1;

/// Trapped-ion two-mode squeezing simulator.
#[derive(Parser)]
#[command(name = "ionsqueeze", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Squeezed vacuum from one conditional squeezing step.
    Squeeze(RunArgs),
    /// Post-selected superposition of squeezed vacua.
    Superpose(RunArgs),
    /// Displaced two-mode squeezed state.
    General(RunArgs),
    /// Compares time-dependent evolution against the effective Hamiltonian.
    ValidateRwa(RunArgs),
    /// Reports the sign conventions realized by the propagators.
    Conventions(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration (optional for `conventions`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; the report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Marks the run as free of random sampling. Every command is deterministic.
    #[arg(long)]
    seedless: bool,
    /// Adds wall-clock timings to the report, which makes it non-reproducible.
    #[arg(long)]
    timings: bool,
}

impl Sub {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Sub::Squeeze(a) => (Command::Squeeze, a),
            Sub::Superpose(a) => (Command::Superpose, a),
            Sub::General(a) => (Command::General, a),
            Sub::ValidateRwa(a) => (Command::ValidateRwa, a),
            Sub::Conventions(a) => (Command::Conventions, a),
        }
    }
}

struct Failure {
    code: u8,
    body: Value,
}

fn config_failure(message: &str, issues: &[ConfigIssue]) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        body: json!({
            "kind": "config",
            "module": "cli",
            "guard": "config",
            "tolerance": null,
            "message": message,
            "issues": issues,
        }),
    }
}

fn core_failure(err: &ionsqueeze::Error) -> Failure {
    Failure {
        code: if err.is_numerical() { EXIT_NUMERICAL } else { EXIT_CONFIG },
        body: json!({
            "kind": if err.is_numerical() { "numerical" } else { "input" },
            "module": err.module(),
            "guard": err.guard(),
            "tolerance": err.tolerance(),
            "message": err.to_string(),
            "issues": [],
        }),
    }
}

fn io_failure(path: &Path, err: &std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        body: json!({
            "kind": "io",
            "module": "cli",
            "guard": "io",
            "tolerance": null,
            "message": format!("{}: {err}", path.display()),
            "issues": [],
        }),
    }
}

fn check_failure(report: &RunReport) -> Option<Failure> {
    let failed: Vec<_> = report.failed_checks().collect();
    let first = failed.first()?;
    Some(Failure {
        code: EXIT_NUMERICAL,
        body: json!({
            "kind": "check",
            "module": "cli",
            "guard": first.name,
            "tolerance": first.tolerance,
            "message": format!("{} of {} checks failed", failed.len(), report.checks.len()),
            "issues": failed,
        }),
    })
}

fn load(command: Command, args: &RunArgs) -> Result<ProtocolConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, &e))?;
            parse_config(&text, command).map_err(|ConfigErrors(issues)| {
                config_failure(&format!("invalid configuration {}", path.display()), &issues)
            })?
        }
        None if command == Command::Conventions => ProtocolConfig::defaults(command),
        None => {
            let issue = ConfigIssue {
                field: "--config".into(),
                message: format!("`{}` needs a configuration file", command.name()),
            };
            return Err(config_failure("missing configuration", &[issue]));
        }
    };
    if let Some(out) = &args.out {
        config.output.path = Some(out.display().to_string());
    }
    if let Some(format) = args.format {
        config.output.format = format;
    }
    if config.output.format == Format::Csv {
        let mut issues = Vec::new();
        if command != Command::ValidateRwa {
            issues.push(ConfigIssue {
                field: "output.format".into(),
                message: "csv output exists only for validate-rwa sweeps".into(),
            });
        }
        if config.output.path.is_none() {
            issues.push(ConfigIssue {
                field: "output.path".into(),
                message: "csv output needs a path".into(),
            });
        }
        if !issues.is_empty() {
            return Err(config_failure("invalid output settings", &issues));
        }
    }
    Ok(config)
}

fn to_json(report: &RunReport) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(report).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

fn emit(config: &ProtocolConfig, report: &RunReport) -> Result<(), Failure> {
    let json = to_json(report);
    let Some(path) = config.output.path.as_deref().map(PathBuf::from) else {
        print!("{}", String::from_utf8_lossy(&json));
        return Ok(());
    };
    match (&report.results, config.output.format) {
        (Results::ValidateRwa(res), Format::Csv) => {
            let csv = rwa_csv(&res.rows);
            write_atomic(&path, &csv).map_err(|e| io_failure(&path, &e))?;
            let sidecar = companion_json(&path);
            write_atomic(&sidecar, &json).map_err(|e| io_failure(&sidecar, &e))
        }
        _ => write_atomic(&path, &json).map_err(|e| io_failure(&path, &e)),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let (command, args) = cli.command.split();
    let config = load(command, &args)?;
    let options = RunOptions {
        seedless: args.seedless,
        timings: args.timings,
    };
    let report = run(&config, options).map_err(|e| core_failure(&e))?;
    emit(&config, &report)?;
    match check_failure(&report) {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let issue = ConfigIssue {
                field: "arguments".into(),
                message: e.kind().to_string(),
            };
            let f = config_failure(e.to_string().trim(), &[issue]);
            eprintln!("{}", json!({ "error": f.body }));
            return ExitCode::from(f.code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": f.body }));
            ExitCode::from(f.code)
        }
    }
}

//! `wreathlab`: batch driver for the experiments in the `wreathlab` crate.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 when a computed
//! invariant fails or a computation cannot finish within its budget.

mod commands;
mod config;
mod table;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wreathlab::Exec;

use commands::{Failure, Report};
use config::{Flags, Settings};
use table::text;

#[derive(Parser)]
#[command(name = "wreathlab", version, about = "Experiments on lamplighter groups, their walks and embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Coefficients a_0..a_n of the stable step law.
    Coeffs,
    /// Characteristic function of the stable step law on [0, π].
    Charfn,
    /// Return probabilities P[S_n = 0] and their partial sums by quadrature.
    ReturnProb,
    /// Mean distance from the start at each probe time.
    Drift,
    /// Drift ratios ln E d(W_t) / ln(t E d(W_1)^p).
    Beta,
    /// Lower compression envelope of an embedding.
    Envelope,
    /// Exact and multiscale travelling-salesman checks.
    TspCheck,
    /// Markov type inequality on random reversible chains.
    MarkovCheck,
    /// Reflected walk in a tube around the zero section.
    Tubular,
    /// Zero-section walk distances against n²/3.
    ZeroSection,
    /// Upper, scale-wise and tail checks for the zero-section embedding.
    PhiCheck,
    /// Generator bound for the multiscale embedding.
    JonesCheck,
    /// Grid check of the mean inequality behind the zero-section bound.
    AmgmCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Charfn => "charfn",
            Command::ReturnProb => "return-prob",
            Command::Drift => "drift",
            Command::Beta => "beta",
            Command::Envelope => "envelope",
            Command::TspCheck => "tsp-check",
            Command::MarkovCheck => "markov-check",
            Command::Tubular => "tubular",
            Command::ZeroSection => "zero-section",
            Command::PhiCheck => "phi-check",
            Command::JonesCheck => "jones-check",
            Command::AmgmCheck => "amgm-check",
        }
    }
}

fn version() -> String {
    format!("{}+g{}", env!("CARGO_PKG_VERSION"), env!("WREATHLAB_GIT_REV"))
}

fn executor(threads: Option<usize>) -> Result<Exec, Failure> {
    match threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(1) => Ok(Exec::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Compute(format!("cannot start {n} workers: {e}")))?;
            Ok(Exec::Parallel)
        }
        _ => Ok(Exec::default()),
    }
}

fn dispatch(command: Command, s: &mut Settings, exec: Exec) -> Result<Report, Failure> {
    match command {
        Command::Coeffs => commands::coeffs(s),
        Command::Charfn => commands::charfn(s),
        Command::ReturnProb => commands::return_prob(s),
        Command::Drift => commands::drift(s, exec),
        Command::Beta => commands::beta(s, exec),
        Command::Envelope => commands::envelope(s, exec),
        Command::TspCheck => commands::tsp_check(s),
        Command::MarkovCheck => commands::markov_check(s),
        Command::Tubular => commands::tubular(s, exec),
        Command::ZeroSection => commands::zero_section(s, exec),
        Command::PhiCheck => commands::phi_check(s),
        Command::JonesCheck => commands::jones_check(s),
        Command::AmgmCheck => commands::amgm(s),
    }
}

fn emit(report: &mut Report, command: Command, s: &Settings) -> Result<(), Failure> {
    let (out, format) = s.output();
    let t = &mut report.table;
    t.set_meta("tool", text("wreathlab"));
    t.set_meta("version", text(version()));
    t.set_meta("command", text(command.name()));
    t.set_meta(
        "params",
        serde_json::Value::Object(s.used().iter().map(|(k, v)| (k.clone(), text(v.clone()))).collect()),
    );
    t.set_meta("status", text(if report.ok { "ok" } else { "invariant_failed" }));
    let mut buf = Vec::new();
    let written = match format.as_str() {
        "csv" => t.write_csv(&mut buf),
        "json" => t.write_json(&mut buf),
        other => return Err(Failure::Usage(format!("--format must be csv or json, got '{other}'"))),
    };
    written.map_err(|e| Failure::Compute(format!("cannot format output: {e}")))?;
    let result = match &out {
        Some(path) => std::fs::write(path, &buf),
        None => std::io::stdout().lock().write_all(&buf),
    };
    result.map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let mut settings = Settings::new(&cli.flags)?;
    let (_, format) = settings.output();
    if format != "csv" && format != "json" {
        return Err(Failure::Usage(format!("--format must be csv or json, got '{format}'")));
    }
    let exec = executor(settings.threads()?)?;
    let mut report = dispatch(cli.command, &mut settings, exec)?;
    emit(&mut report, cli.command, &settings)?;
    Ok(report.ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let command = cli.command.name();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("wreathlab {command}: invariant check failed");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("wreathlab {command}: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("wreathlab {command}: {msg}");
            ExitCode::from(2)
        }
    }
}

mod commands;
mod config;

use clap::{Parser, Subcommand, ValueEnum};
use commands::{SearchProtocol, SimArgs, SimProtocol};
use config::Config;
use pipefold::factory::FactoryVariant;
use pipefold::parallel::Exec;
use pipefold::protocols::VerifyGate;
use pipefold::rational::Q;
use pipefold::report::Document;
use pipefold::Error;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_FIXTURE: u8 = 4;
const EXIT_OTHER: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "pipefold", version, about = "Timing and verification for folded surface codes on shuttling loops")]
struct Cli {
    /// TOML file of timing parameters (nanoseconds); defaults to the silicon set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Variant {
    Folded,
    Rotated,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check logical actions of the transversal protocols.
    Verify {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value = "all", value_parser = commands::verify_gate)]
        gate: VerifyGate,
    },
    /// Stabilizer cycle time for n qubits per loop.
    CycleTime {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Closed-form gate times on every architecture.
    GateTimes {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 25)]
        d: usize,
    },
    /// Event-level trace of one protocol.
    Simulate {
        #[arg(long, value_enum)]
        protocol: SimProtocol,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Ring offset of token 0, in laps ("p/q" or decimal).
        #[arg(long, default_value = "0", value_parser = commands::parse_offset)]
        offset: Q,
        #[arg(long, default_value_t = 0)]
        a: usize,
        #[arg(long, default_value_t = 1)]
        b: usize,
        /// Target ring order for rearrange, e.g. "2,6,3,7,0,4,1,5".
        #[arg(long, value_parser = commands::parse_target)]
        target: Option<Vec<usize>>,
        #[arg(long, default_value_t = 50)]
        rounds: usize,
        #[arg(long)]
        preserve_orientation: bool,
    },
    /// Exhaustive worst case over offsets and operands.
    WorstCase {
        #[arg(long, value_enum)]
        protocol: SearchProtocol,
        #[arg(long)]
        n: usize,
        /// Offsets are multiples of 1/k laps; default 8n.
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        sequential: bool,
    },
    /// Runtime and verification of the 8T-to-CCZ factory.
    Factory {
        #[arg(long, value_enum, default_value_t = Variant::Folded)]
        variant: Variant,
        #[arg(long, default_value_t = 25)]
        d: usize,
        /// Skip the state-vector branch check.
        #[arg(long)]
        no_verify: bool,
    },
    /// Space-time comparison across architectures.
    Table1 {
        #[arg(long, default_value_t = 25)]
        d: usize,
    },
    /// Route a lattice-surgery request set with optional vertical swaps.
    Layout {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long, default_value_t = 8)]
        budget: usize,
    },
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Verify { .. } => "verify",
        Command::CycleTime { .. } => "cycle-time",
        Command::GateTimes { .. } => "gate-times",
        Command::Simulate { .. } => "simulate",
        Command::WorstCase { .. } => "worst-case",
        Command::Factory { .. } => "factory",
        Command::Table1 { .. } => "table1",
        Command::Layout { .. } => "layout",
    }
}

fn run(cli: &Cli, cfg: &Config, doc: &mut Document) -> pipefold::Result<()> {
    let p = &cfg.params;
    match &cli.command {
        Command::Verify { d, gate } => commands::verify(doc, *d, *gate, cfg.seed),
        Command::CycleTime { n } => commands::cycle_time(doc, *n, p),
        Command::GateTimes { n, d } => commands::gate_times(doc, *n, *d, p),
        Command::Simulate { protocol, n, offset, a, b, target, rounds, preserve_orientation } => {
            let args = SimArgs {
                protocol: *protocol,
                n: *n,
                offset: *offset,
                a: *a,
                b: *b,
                target: target.clone(),
                rounds: *rounds,
                preserve_orientation: *preserve_orientation,
            };
            commands::simulate(doc, &args, p)
        }
        Command::WorstCase { protocol, n, k, sequential } => {
            if matches!(k, Some(k) if *k <= 0) {
                return Err(Error::Precondition("k must be positive".into()));
            }
            let exec = if *sequential { Exec::Sequential } else { Exec::default() };
            commands::worst_case(doc, *protocol, *n, *k, exec, p)
        }
        Command::Factory { variant, d, no_verify } => {
            let v = match variant {
                Variant::Folded => FactoryVariant::Folded,
                Variant::Rotated => FactoryVariant::Rotated,
            };
            commands::factory(doc, v, *d, !no_verify, p)
        }
        Command::Table1 { d } => commands::table1(doc, *d, p),
        Command::Layout { fixture, budget } => commands::layout(doc, fixture, *budget),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let cfg = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: config {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => Config::default(),
    };
    let mut doc = Document::new(name(&cli.command), &cfg.params, cfg.seed);
    if let Err(e) = run(&cli, &cfg, &mut doc) {
        eprintln!("error: {e}");
        return ExitCode::from(match e {
            Error::Fixture(_) => EXIT_FIXTURE,
            _ => EXIT_OTHER,
        });
    }
    let out = match cli.format {
        Format::Text => doc.render_text(),
        Format::Json => doc.to_json() + "\n",
    };
    // A closed pipe (e.g. `| head`) is not an error worth a panic.
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    if doc.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

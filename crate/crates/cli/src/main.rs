mod commands;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Verification sweeps, protocol runs and two-process demos for distributed
/// oracle operators.
#[derive(Debug, Parser)]
#[command(name = "oracle-locc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every invariant over a sweep of function tables (or one table).
    Verify(VerifyArgs),
    /// Report the resource quantities of one function.
    Capacities(CapacitiesArgs),
    /// Run one protocol and print its transcript.
    Run(RunArgs),
    /// Act as referee for a socket run; prints the bound address first.
    Serve(ServeArgs),
    /// Join a socket run as Alice or Bob.
    Connect(ConnectArgs),
}

#[derive(Debug, clap::Args)]
struct FunctionArg {
    /// Function table: a JSON file path or an inline `{"M":..,"N":..,"table":[..]}`.
    #[arg(long = "f", value_name = "FILE|JSON")]
    f: String,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    max_m: usize,
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    /// Random input states per function.
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Random tables per (M, N) pair outside the exhaustive range.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Verify a single table instead of a sweep.
    #[arg(long = "f", value_name = "FILE|JSON")]
    f: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct CapacitiesArgs {
    #[command(flatten)]
    f: FunctionArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Locc,
    Entangle,
    Forward,
    Backward,
    Bidirectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transport {
    Direct,
    InProcess,
    Socket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Alice,
    Bob,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[command(flatten)]
    f: FunctionArg,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Protocol::Locc)]
    protocol: Protocol,
    #[arg(long, value_enum, default_value_t = Transport::InProcess)]
    transport: Transport,
    /// Input amplitudes on A ⊗ B as a JSON file or inline list of [re, im]
    /// pairs; defaults to a uniform superposition on A with B in |0⟩.
    #[arg(long, value_name = "FILE|JSON")]
    input: Option<String>,
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct ServeArgs {
    #[command(flatten)]
    f: FunctionArg,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_name = "FILE|JSON")]
    input: Option<String>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// 0 picks a free port.
    #[arg(long, default_value_t = 0)]
    port: u16,
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct ConnectArgs {
    #[command(flatten)]
    f: FunctionArg,
    #[arg(long, value_enum)]
    role: RoleArg,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long)]
    port: u16,
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1.
    Verification(String),
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Transport(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Transport(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Transport(m) => write!(f, "transport error: {m}"),
        }
    }
}

impl From<oracle_locc::Error> for CliError {
    fn from(e: oracle_locc::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<oracle_locc::netsim::NetError> for CliError {
    fn from(e: oracle_locc::netsim::NetError) -> Self {
        match e {
            oracle_locc::netsim::NetError::Sim(inner) => CliError::Config(inner.to_string()),
            other => CliError::Transport(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ORACLE_LOCC_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify::cmd_verify(&a),
        Command::Capacities(a) => commands::cmd_capacities(&a.f.f, a.out.as_deref()),
        Command::Run(a) => commands::cmd_run(&commands::RunOptions {
            f: a.f.f,
            seed: a.seed,
            protocol: a.protocol,
            transport: a.transport,
            input: a.input,
            timeout_ms: a.timeout_ms,
            out: a.out,
        }),
        Command::Serve(a) => commands::cmd_serve(&commands::ServeOptions {
            f: a.f.f,
            seed: a.seed,
            input: a.input,
            host: a.host,
            port: a.port,
            timeout_ms: a.timeout_ms,
            out: a.out,
        }),
        Command::Connect(a) => commands::cmd_connect(&a.f.f, a.role, &a.host, a.port, a.timeout_ms),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oracle-locc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use oracle_locc::locc::{finish_run, locc_referee, run_locc_over, AliceRole, BobRole, LoccSetup};
use oracle_locc::netsim::{connect_tcp, serve_tcp, NetConfig, Role, TransportKind};
use oracle_locc::oracle::oracle_matrix;
use oracle_locc::protocols::{
    bidirectional_bits, entangle_protocol, send_backward, send_bidirectional, send_forward,
    Decoded, ProtocolResult,
};
use oracle_locc::quantum::operator_schmidt_rank;
use oracle_locc::{build_partition, FunctionTable, Party, StateVector, Subsystem, C64};

use crate::{CliError, Protocol, RoleArg, Transport};

/// Reads a file, unless the argument already looks like inline JSON.
fn inline_or_file(arg: &str, opener: char) -> Result<String, CliError> {
    if arg.trim_start().starts_with(opener) {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| CliError::Config(format!("cannot read `{arg}`: {e}")))
}

pub fn load_function(arg: &str) -> Result<FunctionTable, CliError> {
    Ok(FunctionTable::from_json(&inline_or_file(arg, '{')?)?)
}

fn load_input(arg: Option<&str>, f: &FunctionTable) -> Result<StateVector, CliError> {
    let (m, n) = (f.domain_size(), f.codomain_size());
    let layout = vec![
        Subsystem::new("A", m, Party::Alice),
        Subsystem::new("B", n, Party::Bob),
    ];
    let amps: Vec<C64> = match arg {
        None => {
            let w = 1.0 / (m as f64).sqrt();
            (0..m * n)
                .map(|i| C64::new(if i % n == 0 { w } else { 0.0 }, 0.0))
                .collect()
        }
        Some(arg) => {
            let pairs: Vec<[f64; 2]> = serde_json::from_str(&inline_or_file(arg, '[')?)
                .map_err(|e| CliError::Config(format!("input amplitudes: {e}")))?;
            pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect()
        }
    };
    Ok(StateVector::new(layout, amps)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| CliError::Config(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn net_config(timeout_ms: u64) -> NetConfig {
    NetConfig {
        timeout: Duration::from_millis(timeout_ms),
    }
}

#[derive(Debug, Serialize)]
pub struct Capacities {
    pub n_f: usize,
    pub log2_n_f: f64,
    pub schmidt_rank: usize,
    pub ebits_measured: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bidirectional_bits_if_permutation: Option<f64>,
}

pub fn capacities(f: &FunctionTable) -> Result<Capacities, CliError> {
    let p = build_partition(f);
    let u = oracle_matrix(f)?;
    let (_, ebits) = entangle_protocol(f)?;
    Ok(Capacities {
        n_f: p.n_f,
        log2_n_f: p.log2_n_f(),
        schmidt_rank: operator_schmidt_rank(&u, f.domain_size(), f.codomain_size())?,
        ebits_measured: ebits,
        bidirectional_bits_if_permutation: f
            .is_permutation()
            .then(|| bidirectional_bits(f.domain_size())),
    })
}

pub fn cmd_capacities(f: &str, out: Option<&Path>) -> Result<(), CliError> {
    let f = load_function(f)?;
    let c = capacities(&f)?;
    emit(out, &pretty(&c))?;
    if c.schmidt_rank != c.n_f || (c.ebits_measured - c.log2_n_f).abs() > 1e-10 {
        return Err(CliError::Verification(format!(
            "n_f = {}, Schmidt rank = {}, ebits = {} disagree",
            c.n_f, c.schmidt_rank, c.ebits_measured
        )));
    }
    Ok(())
}

pub struct RunOptions {
    pub f: String,
    pub seed: u64,
    pub protocol: Protocol,
    pub transport: Transport,
    pub input: Option<String>,
    pub timeout_ms: u64,
    pub out: Option<PathBuf>,
}

fn decoded_json(d: Decoded) -> Value {
    match d {
        Decoded::Single(v) => json!(v),
        Decoded::Pair { r, s } => json!({ "r": r, "s": s }),
    }
}

#[derive(Serialize)]
struct EntangleReport {
    protocol: &'static str,
    f: FunctionTable,
    n_f: usize,
    log2_n_f: f64,
    ebits: f64,
}

#[derive(Serialize)]
struct MessageReport {
    protocol: &'static str,
    f: FunctionTable,
    seed: u64,
    sent: Value,
    decoded: Value,
    success: bool,
    outcome_probabilities: Vec<f64>,
    other_probability: f64,
}

fn message_report(
    protocol: &'static str,
    f: &FunctionTable,
    seed: u64,
    sent: Value,
    res: ProtocolResult,
) -> MessageReport {
    MessageReport {
        protocol,
        f: f.clone(),
        seed,
        sent,
        decoded: decoded_json(res.decoded),
        success: res.success,
        outcome_probabilities: res.outcome_probabilities,
        other_probability: res.other_probability,
    }
}

pub fn cmd_run(opts: &RunOptions) -> Result<(), CliError> {
    let f = load_function(&opts.f)?;
    let p = build_partition(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let text = match opts.protocol {
        Protocol::Locc => {
            let input = load_input(opts.input.as_deref(), &f)?;
            let kind = match opts.transport {
                Transport::Direct => TransportKind::Direct,
                Transport::InProcess => TransportKind::InProcess,
                Transport::Socket => TransportKind::Socket,
            };
            let (_, transcript, _) =
                run_locc_over(&f, &input, opts.seed, kind, &net_config(opts.timeout_ms))?;
            info!("r = {}, s = {}", transcript.r, transcript.s);
            transcript.to_json()
        }
        Protocol::Entangle => {
            let (_, ebits) = entangle_protocol(&f)?;
            pretty(&EntangleReport {
                protocol: "entangle",
                f: f.clone(),
                n_f: p.n_f,
                log2_n_f: p.log2_n_f(),
                ebits,
            })
        }
        Protocol::Forward => {
            let r = rng.random_range(0..p.n_f);
            let res = send_forward(&f, r)?;
            pretty(&message_report("forward", &f, opts.seed, json!(r), res))
        }
        Protocol::Backward => {
            let s = rng.random_range(0..p.n_f);
            let res = send_backward(&f, s)?;
            pretty(&message_report("backward", &f, opts.seed, json!(s), res))
        }
        Protocol::Bidirectional => {
            if !f.is_permutation() {
                return Err(CliError::Config(
                    "the bidirectional protocol requires f to be a permutation (M = N, bijective)"
                        .into(),
                ));
            }
            let m = f.domain_size();
            let (r, s) = (rng.random_range(0..m), rng.random_range(0..m));
            let res = send_bidirectional(&f, r, s)?;
            pretty(&message_report("bidirectional", &f, opts.seed, json!({ "r": r, "s": s }), res))
        }
    };
    emit(opts.out.as_deref(), &text)
}

pub struct ServeOptions {
    pub f: String,
    pub seed: u64,
    pub input: Option<String>,
    pub host: String,
    pub port: u16,
    pub timeout_ms: u64,
    pub out: Option<PathBuf>,
}

pub fn cmd_serve(opts: &ServeOptions) -> Result<(), CliError> {
    let f = load_function(&opts.f)?;
    let input = load_input(opts.input.as_deref(), &f)?;
    let setup = LoccSetup::new(&f);
    let referee = locc_referee(&setup, &input, opts.seed)?;
    let listener = TcpListener::bind((opts.host.as_str(), opts.port))
        .map_err(|e| CliError::Transport(format!("cannot bind {}:{}: {e}", opts.host, opts.port)))?;
    let addr = listener
        .local_addr()
        .map_err(|e| CliError::Transport(e.to_string()))?;
    {
        let mut stdout = std::io::stdout().lock();
        let _ = writeln!(stdout, "{addr}");
        let _ = stdout.flush();
    }
    let log = serve_tcp(&listener, referee, &net_config(opts.timeout_ms))?;
    let (_, transcript, _) = finish_run(&setup, &input, opts.seed, log)?;
    emit(opts.out.as_deref(), &transcript.to_json())
}

pub fn cmd_connect(f: &str, role: RoleArg, host: &str, port: u16, timeout_ms: u64) -> Result<(), CliError> {
    let f = load_function(f)?;
    let setup = LoccSetup::new(&f);
    let role: Box<dyn Role> = match role {
        RoleArg::Alice => Box::new(AliceRole::new(setup)),
        RoleArg::Bob => Box::new(BobRole::new(setup)),
    };
    connect_tcp(&format!("{host}:{port}"), role, &net_config(timeout_ms))?;
    Ok(())
}

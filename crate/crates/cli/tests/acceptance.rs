//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits nonzero if any of them fails.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Command, ExitCode, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oracle_locc::locc::{handshake, locc_referee, run_locc_over, AliceRole, BobRole, LoccSetup};
use oracle_locc::netsim::{
    decode_wire, encode_wire, matrix_to_wire, read_frame, serve_tcp, ClassicalValue, Endpoint, ErrorCode,
    MeasureRequest, NetConfig, NetError, OpRequest, Payload, Role, TransportKind, WireMessage,
};
use oracle_locc::oracle::{
    apply_oracle, enumerate_functions, enumerate_permutations, local_equivalence_deviation, minimal_oracle,
    oracle_matrix, phase_exponential, schmidt_decompose_oracle,
};
use oracle_locc::protocols::{bidirectional_bits, entangle_protocol, send_backward, send_bidirectional, send_forward};
use oracle_locc::quantum::{operator_schmidt_rank, realign, CMatrix};
use oracle_locc::{build_partition, run_locc, run_locc_all_branches};
use oracle_locc::{FunctionTable, Party, StateVector, Subsystem, C64};

const BIN: &str = env!("CARGO_BIN_EXE_oracle-locc");

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn small_tables(max: usize) -> Vec<FunctionTable> {
    let mut out = Vec::new();
    for m in 1..=max {
        for n in 1..=max {
            out.extend(enumerate_functions(m, n));
        }
    }
    out
}

/// Distinct values, counted without the library's partition code.
fn distinct(f: &FunctionTable) -> usize {
    f.table().iter().collect::<BTreeSet<_>>().len()
}

/// `U_f` written out entry by entry.
fn u_f(f: &FunctionTable) -> CMatrix {
    let (m, n) = (f.domain_size(), f.codomain_size());
    CMatrix::from_fn(m * n, m * n, |row, col| {
        let (x, y) = (col / n, col % n);
        let hit = row == x * n + (y + f.table()[x]) % n;
        C64::new(if hit { 1.0 } else { 0.0 }, 0.0)
    })
}

fn random_input(m: usize, n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..m * n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if amps.iter().map(|a| a.norm_sqr()).sum::<f64>() < 1e-6 {
            continue;
        }
        let layout = vec![
            Subsystem::new("A", m, Party::Alice),
            Subsystem::new("B", n, Party::Bob),
        ];
        return StateVector::normalized(layout, amps).unwrap();
    }
}

fn random_table(rng: &mut ChaCha8Rng, max: usize) -> FunctionTable {
    let m = rng.random_range(1..=max);
    let n = rng.random_range(1..=max);
    let table = (0..m).map(|_| rng.random_range(0..n)).collect();
    FunctionTable::new(m, n, table).unwrap()
}

fn ceil_log2(n: usize) -> u32 {
    let mut w = 0;
    while (1usize << w) < n {
        w += 1;
    }
    w
}

fn locc_correctness() -> Outcome {
    let start = Instant::now();
    let tables = small_tables(3);
    let (mut branches, mut worst) = (0usize, 0.0f64);
    for (i, f) in tables.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        for trial in 0..5 {
            let psi = random_input(f.domain_size(), f.codomain_size(), &mut rng);
            let want = apply_oracle(f, &psi, "A", "B").map_err(|e| e.to_string())?;
            for b in run_locc_all_branches(f, &psi).map_err(|e| e.to_string())? {
                let fid = b.state.fidelity(&want).map_err(|e| e.to_string())?;
                worst = worst.max(1.0 - fid);
                ensure(fid >= 1.0 - 1e-10, || {
                    format!("{:?} trial {trial} branch ({}, {}): fidelity {fid}", f.table(), b.r, b.s)
                })?;
                branches += 1;
            }
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(30), || format!("took {took:.1?}"))?;
    Ok(format!(
        "{} tables x 5 inputs, {branches} branches, max 1-F = {worst:.1e}, {took:.1?}",
        tables.len()
    ))
}

/// Truncated SVD of the realigned operator, mapped back to `H_A ⊗ H_B`.
fn svd_reconstruction(u: &CMatrix, m: usize, n: usize, rank: usize) -> CMatrix {
    let r = realign(u, m, n).unwrap();
    let (rows, cols) = r.shape();
    let svd = r.svd(true, true);
    let (left, right) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut rk = CMatrix::zeros(rows, cols);
    for &k in order.iter().take(rank) {
        rk += left.column(k) * right.row(k) * C64::new(svd.singular_values[k], 0.0);
    }
    CMatrix::from_fn(m * n, m * n, |row, col| {
        let (a, b, ap, bp) = (row / n, row % n, col / n, col % n);
        rk[(a * m + ap, b * n + bp)]
    })
}

fn schmidt_rank() -> Outcome {
    let start = Instant::now();
    let tables = small_tables(4);
    let (mut worst_svd, mut worst_form) = (0.0f64, 0.0f64);
    for f in &tables {
        let (m, n, nf) = (f.domain_size(), f.codomain_size(), distinct(f));
        let u = u_f(f);
        let lib = oracle_matrix(f).map_err(|e| e.to_string())?;
        ensure((&lib - &u).camax() == 0.0, || format!("{:?}: oracle_matrix differs", f.table()))?;
        let rank = operator_schmidt_rank(&lib, m, n).map_err(|e| e.to_string())?;
        ensure(rank == nf && build_partition(f).n_f == nf, || {
            format!("{:?}: rank {rank}, n_f {nf}", f.table())
        })?;
        let dev = (svd_reconstruction(&u, m, n, nf) - &u).camax();
        worst_svd = worst_svd.max(dev);
        ensure(dev <= 1e-10, || format!("{:?}: SVD reconstruction off by {dev:e}", f.table()))?;
        let form = schmidt_decompose_oracle(f).map_err(|e| e.to_string())?;
        let dev = (form.reconstruct() - &u).camax().max(form.orthonormality_deviation());
        worst_form = worst_form.max(dev);
        ensure(form.rank() == nf && dev <= 1e-10, || {
            format!("{:?}: analytic form rank {} deviation {dev:e}", f.table(), form.rank())
        })?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {took:.1?}"))?;
    Ok(format!(
        "{} tables with M,N <= 4, max deviation SVD {worst_svd:.1e} / analytic {worst_form:.1e}, {took:.1?}",
        tables.len()
    ))
}

fn entangling_capacity() -> Outcome {
    let tables = small_tables(4);
    let mut worst = 0.0f64;
    for f in &tables {
        let (_, ebits) = entangle_protocol(f).map_err(|e| e.to_string())?;
        let dev = (ebits - (distinct(f) as f64).log2()).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-10, || format!("{:?}: {ebits} ebits", f.table()))?;
    }
    let constant = entangle_protocol(&FunctionTable::constant(3, 3, 2).unwrap()).unwrap().1;
    let cnot = entangle_protocol(&FunctionTable::identity(2).unwrap()).unwrap().1;
    ensure(constant.abs() <= 1e-10, || format!("constant f gives {constant} ebits"))?;
    ensure((cnot - 1.0).abs() <= 1e-10, || format!("CNOT gives {cnot} ebits"))?;
    Ok(format!(
        "{} tables, max deviation {worst:.1e}, constant {constant:.1e}, CNOT {cnot}",
        tables.len()
    ))
}

fn classical_protocols() -> Outcome {
    let mut tables = small_tables(3);
    let exhaustive = tables.len();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    tables.extend((0..250).map(|_| random_table(&mut rng, 4)));
    let mut messages = 0;
    for f in &tables {
        for msg in 0..distinct(f) {
            for (dir, res) in [("forward", send_forward(f, msg)), ("backward", send_backward(f, msg))] {
                let res = res.map_err(|e| e.to_string())?;
                let p = res.outcome_probabilities[msg];
                ensure(res.success && p >= 1.0 - 1e-10, || {
                    format!("{dir} {:?} message {msg}: probability {p}", f.table())
                })?;
                messages += 1;
            }
        }
    }
    let (mut perms, mut pairs) = (0, 0);
    for m in 1..=4 {
        for f in enumerate_permutations(m) {
            for r in 0..m {
                for s in 0..m {
                    let res = send_bidirectional(&f, r, s).map_err(|e| e.to_string())?;
                    let p = res.outcome_probabilities[r * m + s];
                    ensure(res.success && p >= 1.0 - 1e-10, || {
                        format!("bidirectional {:?} ({r}, {s}): probability {p}", f.table())
                    })?;
                    pairs += 1;
                }
            }
            let bits = bidirectional_bits(m);
            let realized = ((m * m) as f64).log2();
            ensure((bits - 2.0 * (m as f64).log2()).abs() <= 1e-12 && (bits - realized).abs() <= 1e-12, || {
                format!("degree {m}: {bits} bits reported, {realized} realized")
            })?;
            perms += 1;
        }
    }
    ensure(perms == 33 && pairs == 447, || format!("{perms} permutations, {pairs} pairs"))?;
    Ok(format!(
        "{exhaustive} exhaustive + 250 random tables ({messages} one-way messages), {perms} permutations / {pairs} pairs"
    ))
}

fn resource_ledger() -> Outcome {
    let mut tables = small_tables(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    tables.extend((0..100).map(|_| random_table(&mut rng, 6)));
    let mut runs = 0;
    for f in &tables {
        let nf = distinct(f);
        let (h, w) = ((nf as f64).log2(), ceil_log2(nf));
        for seed in 0..3 {
            let psi = random_input(f.domain_size(), f.codomain_size(), &mut rng);
            let (_, t, l) = run_locc(f, &psi, seed).map_err(|e| e.to_string())?;
            let widths: Vec<u32> = t
                .messages
                .iter()
                .filter_map(|m| match &m.payload {
                    Payload::ClassicalValue(cv) => Some(cv.bit_width),
                    _ => None,
                })
                .collect();
            let ok = (l.ebits_consumed - h).abs() <= 1e-10
                && (l.initial_ancilla_entropy - h).abs() <= 1e-10
                && l.final_ancilla_entropy.abs() <= 1e-10
                && (l.bits_forward_info - h).abs() <= 1e-10
                && (l.bits_backward_info - h).abs() <= 1e-10
                && l.bits_forward_wire == w
                && l.bits_backward_wire == w
                && widths == [w, w]
                && t.validate().is_ok();
            ensure(ok, || format!("{:?} seed {seed}: {l:?}, widths {widths:?}", f.table()))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} seeded runs over {} tables", tables.len()))
}

fn branch_distribution(f: &FunctionTable, psi: &StateVector) -> Result<Vec<f64>, String> {
    Ok(run_locc_all_branches(f, psi)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|b| b.probability)
        .collect())
}

fn transcript_uniformity() -> Outcome {
    let tables = small_tables(3);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut by_nf: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for f in &tables {
        let nf = distinct(f);
        let p1 = branch_distribution(f, &random_input(f.domain_size(), f.codomain_size(), &mut rng))?;
        let p2 = branch_distribution(f, &random_input(f.domain_size(), f.codomain_size(), &mut rng))?;
        let uniform = 1.0 / (nf * nf) as f64;
        ensure(p1.len() == nf * nf && p1.iter().all(|p| (p - uniform).abs() <= 1e-10), || {
            format!("{:?}: {p1:?}", f.table())
        })?;
        let gap = p1.iter().zip(&p2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(gap <= 1e-10, || format!("{:?}: inputs differ by {gap:e}", f.table()))?;
        let reference = by_nf.entry(nf).or_insert_with(|| p1.clone());
        let gap = reference.iter().zip(&p1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(gap <= 1e-10, || format!("{:?}: differs from another n_f = {nf} table", f.table()))?;
    }
    Ok(format!("{} tables, two inputs each, n_f classes {:?}", tables.len(), by_nf.keys().collect::<Vec<_>>()))
}

fn phase_identity() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=8 {
        let e = phase_exponential(n, 1.0).map_err(|e| e.to_string())?;
        for y in 0..n {
            for row in 0..n {
                let want = if row == (y + 1) % n { 1.0 } else { 0.0 };
                worst = worst.max((e[(row, y)] - C64::new(want, 0.0)).norm());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("N = 1..8, all y, max deviation {worst:.1e}"))
}

fn minimal_oracle_equivalence() -> Outcome {
    let (mut count, mut worst) = (0, 0.0f64);
    for m in 1..=4 {
        let id = CMatrix::identity(m, m);
        let u_id = u_f(&FunctionTable::identity(m).unwrap());
        for f in enumerate_permutations(m) {
            let q = minimal_oracle(&f).map_err(|e| e.to_string())?;
            let q_direct = CMatrix::from_fn(m, m, |r, c| C64::new(if r == f.table()[c] { 1.0 } else { 0.0 }, 0.0));
            ensure(q == q_direct, || format!("{:?}: Q_f differs", f.table()))?;
            let rhs = q.adjoint().kronecker(&id) * &u_id * q.kronecker(&id);
            let dev = (u_f(&f) - rhs).camax();
            let lib = local_equivalence_deviation(&f).map_err(|e| e.to_string())?;
            worst = worst.max(dev).max(lib);
            ensure(dev <= 1e-10 && lib <= 1e-10, || format!("{:?}: deviation {dev:e} / {lib:e}", f.table()))?;
            count += 1;
        }
    }
    Ok(format!("{count} permutations, max deviation {worst:.1e}"))
}

fn cfg() -> NetConfig {
    NetConfig {
        timeout: Duration::from_secs(5),
    }
}

#[derive(Clone, Copy, Debug)]
enum Forgery {
    /// Operation on one foreign register.
    Operate(&'static str),
    /// Operation on an own register together with a foreign one.
    Joint(&'static str, &'static str),
    Measure(&'static str),
}

/// An honest role that forges its request for one step.
struct Tamper {
    inner: Box<dyn Role>,
    step: u8,
    forgery: Forgery,
    dims: BTreeMap<&'static str, usize>,
}

impl Tamper {
    fn forge(&self, payloads: Vec<Payload>) -> Vec<Payload> {
        payloads
            .into_iter()
            .map(|p| {
                let step = match &p {
                    Payload::OpRequest(op) => op.step,
                    Payload::MeasureRequest(mr) => mr.step,
                    _ => return p,
                };
                if step != self.step {
                    return p;
                }
                let op = |targets: Vec<&str>| {
                    let d: usize = targets.iter().map(|t| self.dims[t]).product();
                    let shift = CMatrix::from_fn(d, d, |r, c| C64::new(if r == (c + 1) % d { 1.0 } else { 0.0 }, 0.0));
                    Payload::OpRequest(OpRequest {
                        step,
                        description: "forged".into(),
                        targets: targets.into_iter().map(String::from).collect(),
                        matrix: matrix_to_wire(&shift),
                    })
                };
                match self.forgery {
                    Forgery::Operate(t) => op(vec![t]),
                    Forgery::Joint(own, t) => op(vec![own, t]),
                    Forgery::Measure(t) => Payload::MeasureRequest(MeasureRequest {
                        step,
                        description: "forged".into(),
                        target: t.into(),
                    }),
                }
            })
            .collect()
    }
}

impl Role for Tamper {
    fn party(&self) -> Party {
        self.inner.party()
    }

    fn handshake(&self) -> oracle_locc::netsim::Handshake {
        self.inner.handshake()
    }

    fn start(&mut self) -> Result<Vec<Payload>, NetError> {
        let out = self.inner.start()?;
        Ok(self.forge(out))
    }

    fn on_message(&mut self, msg: &WireMessage) -> Result<Vec<Payload>, NetError> {
        let out = self.inner.on_message(msg)?;
        Ok(self.forge(out))
    }

    fn is_done(&self) -> bool {
        self.inner.is_done()
    }
}

/// Forged requests through the normal role machinery, on every transport.
fn tamper_cases(results: &mut Vec<(String, Option<ErrorCode>)>) {
    let tables = [
        FunctionTable::identity(3).unwrap(),
        FunctionTable::new(4, 3, vec![2, 0, 2, 1]).unwrap(),
    ];
    for f in &tables {
        let setup = LoccSetup::new(f);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = random_input(f.domain_size(), f.codomain_size(), &mut rng);
        let dims = BTreeMap::from([
            ("A", f.domain_size()),
            ("a", setup.n_f()),
            ("B", f.codomain_size()),
            ("b", setup.n_f()),
        ]);
        for kind in [TransportKind::Direct, TransportKind::InProcess, TransportKind::Socket] {
            for step in 1..=7u8 {
                let (party, own, foreign) = if matches!(step, 1 | 2 | 7) {
                    (Party::Alice, "A", ["B", "b"])
                } else {
                    (Party::Bob, "B", ["A", "a"])
                };
                for t in foreign {
                    for forgery in [Forgery::Operate(t), Forgery::Joint(own, t), Forgery::Measure(t)] {
                        let (alice, bob): (Box<dyn Role>, Box<dyn Role>) =
                            (Box::new(AliceRole::new(setup.clone())), Box::new(BobRole::new(setup.clone())));
                        let wrap = |inner| -> Box<dyn Role> {
                            Box::new(Tamper {
                                inner,
                                step,
                                forgery,
                                dims: dims.clone(),
                            })
                        };
                        let (alice, bob) = match party {
                            Party::Alice => (wrap(alice), bob),
                            Party::Bob => (alice, wrap(bob)),
                        };
                        let referee = locc_referee(&setup, &psi, 3).unwrap();
                        let code = kind.run(referee, alice, bob, &cfg()).err().map(|e| e.code());
                        results.push((format!("{kind} {:?} step {step} {forgery:?}", f.table()), code));
                    }
                }
            }
        }
    }
}

/// Messages whose sender field names the other party, written straight onto
/// a referee socket.
fn spoof_cases(results: &mut Vec<(String, Option<ErrorCode>)>) {
    let f = FunctionTable::new(3, 2, vec![0, 1, 1]).unwrap();
    let setup = LoccSetup::new(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let psi = random_input(3, 2, &mut rng);
    let one = matrix_to_wire(&CMatrix::identity(2, 2));
    for on_conn in [Endpoint::Alice, Endpoint::Bob] {
        let claimed = if on_conn == Endpoint::Alice { Endpoint::Bob } else { Endpoint::Alice };
        let (op_target, measure_target, step) = if claimed == Endpoint::Bob { ("b", "b", 3) } else { ("a", "a", 1) };
        let forged = [
            Payload::OpRequest(OpRequest {
                step,
                description: "spoofed".into(),
                targets: vec![op_target.into()],
                matrix: one.clone(),
            }),
            Payload::MeasureRequest(MeasureRequest {
                step,
                description: "spoofed".into(),
                target: measure_target.into(),
            }),
            Payload::ClassicalValue(ClassicalValue {
                value: 0,
                bit_width: 1,
            }),
        ];
        for payload in forged {
            let label = format!("raw socket: {on_conn:?} connection sends {:?} as {claimed:?}", payload.kind());
            let listener = TcpListener::bind("127.0.0.1:0").unwrap();
            let addr = listener.local_addr().unwrap();
            let referee = locc_referee(&setup, &psi, 0).unwrap();
            let hello = |role| WireMessage {
                seq: 0,
                sender: role,
                payload: Payload::Handshake(handshake(&setup, role)),
            };
            let (ha, hb) = (hello(Endpoint::Alice), hello(Endpoint::Bob));
            let client = thread::spawn(move || {
                let mut a = TcpStream::connect(addr).unwrap();
                let mut b = TcpStream::connect(addr).unwrap();
                a.write_all(&encode_wire(&ha).unwrap()).unwrap();
                b.write_all(&encode_wire(&hb).unwrap()).unwrap();
                let spoof = WireMessage {
                    seq: 1,
                    sender: claimed,
                    payload,
                };
                let conn = if on_conn == Endpoint::Alice { &mut a } else { &mut b };
                conn.write_all(&encode_wire(&spoof).unwrap()).unwrap();
                let mut told = None;
                while let Ok(frame) = read_frame(&mut *conn) {
                    if let Ok(WireMessage {
                        payload: Payload::Error(e),
                        ..
                    }) = decode_wire(&frame)
                    {
                        told = Some(e.code);
                    }
                }
                told
            });
            let code = serve_tcp(&listener, referee, &cfg()).err().map(|e| e.code());
            let told = client.join().unwrap();
            // the offending client must also be told why
            let code = if told == code { code } else { None };
            results.push((label, code));
        }
    }
}

fn run_bin(args: &[&str]) -> Result<(), String> {
    let status = Command::new(BIN)
        .args(args)
        .env_remove("ORACLE_LOCC_LOG")
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("`oracle-locc {}` exited with {status}", args.join(" ")))
}

fn two_process_matches(dir: &std::path::Path, table: &str, seed: &str, tag: usize) -> Result<(), String> {
    let served = dir.join(format!("served{tag}.json"));
    let local = dir.join(format!("local{tag}.json"));
    let mut server = Command::new(BIN)
        .args(["serve", "--f", table, "--seed", seed, "--port", "0", "--out", served.to_str().unwrap()])
        .env_remove("ORACLE_LOCC_LOG")
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut line = String::new();
    BufReader::new(server.stdout.take().unwrap())
        .read_line(&mut line)
        .map_err(|e| e.to_string())?;
    let port = line.trim().rsplit(':').next().unwrap_or_default().to_string();
    let parties: Vec<_> = ["alice", "bob"]
        .iter()
        .map(|role| {
            Command::new(BIN)
                .args(["connect", "--f", table, "--role", role, "--port", &port])
                .env_remove("ORACLE_LOCC_LOG")
                .spawn()
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for mut p in parties {
        let status = p.wait().map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("connect exited with {status}"))?;
    }
    let status = server.wait().map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("serve exited with {status}"))?;
    run_bin(&["run", "--f", table, "--seed", seed, "--transport", "in-process", "--out", local.to_str().unwrap()])?;
    let (a, b) = (std::fs::read(&served).unwrap(), std::fs::read(&local).unwrap());
    ensure(a == b, || format!("{table} seed {seed}: served and in-process transcripts differ"))
}

fn transport_independence() -> Outcome {
    let tables = [
        FunctionTable::new(4, 3, vec![2, 0, 2, 1]).unwrap(),
        FunctionTable::identity(2).unwrap(),
        FunctionTable::constant(3, 2, 1).unwrap(),
        FunctionTable::new(5, 5, vec![3, 1, 0, 2, 4]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0;
    for f in &tables {
        let psi = random_input(f.domain_size(), f.codomain_size(), &mut rng);
        for seed in [0, 7, 12345] {
            let reference = run_locc(f, &psi, seed).map_err(|e| e.to_string())?.1.to_json();
            for kind in [TransportKind::InProcess, TransportKind::Socket] {
                let t = run_locc_over(f, &psi, seed, kind, &cfg()).map_err(|e| e.to_string())?.1;
                ensure(t.to_json() == reference, || format!("{kind} {:?} seed {seed}", f.table()))?;
                compared += 1;
            }
        }
    }

    let dir = std::env::temp_dir().join(format!("oracle-locc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let runs = [
        (r#"{"M":4,"N":4,"table":[0,0,1,2]}"#, "7"),
        (r#"{"M":2,"N":2,"table":[0,1]}"#, "0"),
        (r#"{"M":3,"N":5,"table":[4,4,4]}"#, "99"),
    ];
    let binary = runs
        .iter()
        .enumerate()
        .try_for_each(|(i, (table, seed))| two_process_matches(&dir, table, seed, i));
    let _ = std::fs::remove_dir_all(&dir);
    binary?;

    let mut negatives = Vec::new();
    tamper_cases(&mut negatives);
    spoof_cases(&mut negatives);
    let rejected = negatives
        .iter()
        .filter(|(_, c)| *c == Some(ErrorCode::LocalityViolation))
        .count();
    if let Some((label, code)) = negatives.iter().find(|(_, c)| *c != Some(ErrorCode::LocalityViolation)) {
        return Err(format!(
            "{rejected}/{} locality violations rejected; `{label}` gave {code:?}",
            negatives.len()
        ));
    }
    Ok(format!(
        "{compared} library transcripts and {} two-process runs byte-identical, {rejected}/{} locality violations rejected",
        runs.len(),
        negatives.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("LOCC correctness", locc_correctness),
        ("Schmidt rank equals n_f", schmidt_rank),
        ("entangling capacity", entangling_capacity),
        ("classical protocols", classical_protocols),
        ("resource ledger", resource_ledger),
        ("transcript uniformity", transcript_uniformity),
        ("phase-operator identity", phase_identity),
        ("minimal-oracle equivalence", minimal_oracle_equivalence),
        ("transport independence", transport_independence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

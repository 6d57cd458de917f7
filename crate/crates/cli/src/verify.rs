//! The `verify` sweep: every invariant of the library, checked over all
//! tables with `M, N ≤ 3` and over random samples beyond that.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use oracle_locc::oracle::{
    apply_oracle, enumerate_functions, local_equivalence_deviation, oracle_matrix, phase_exponential,
    schmidt_decompose_oracle,
};
use oracle_locc::protocols::{entangle_protocol, send_backward, send_bidirectional, send_forward};
use oracle_locc::quantum::{operator_schmidt_rank, unitarity_deviation, CMatrix};
use oracle_locc::{
    build_partition, run_locc, run_locc_all_branches, FunctionTable, Party, StateVector, Subsystem,
    C64,
};

use crate::commands::load_function;
use crate::{CliError, VerifyArgs};

/// Largest `M` or `N` accepted for a sweep.
pub const SWEEP_GUARD: usize = 6;
/// Largest `M` or `N` enumerated exhaustively.
pub const EXHAUSTIVE_BOUND: usize = 3;
/// Largest `M · N` accepted for a single-table verification.
pub const SINGLE_GUARD: usize = 256;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub tolerance: f64,
    pub cases: usize,
    pub failures: usize,
    pub max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check {
            name,
            tolerance,
            cases: 0,
            failures: 0,
            max_deviation: 0.0,
            first_failure: None,
        }
    }

    fn record(&mut self, deviation: f64, context: impl FnOnce() -> String) {
        self.cases += 1;
        self.max_deviation = self.max_deviation.max(deviation);
        if deviation.is_nan() || deviation > self.tolerance {
            self.failures += 1;
            self.first_failure.get_or_insert_with(context);
        }
    }

    fn absorb(&mut self, other: Check) {
        self.cases += other.cases;
        self.failures += other.failures;
        self.max_deviation = self.max_deviation.max(other.max_deviation);
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure;
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub max_m: usize,
    pub max_n: usize,
    pub seed: u64,
    pub trials: usize,
    pub functions: usize,
    pub exhaustive_functions: usize,
    pub sampled_functions: usize,
    pub passed: bool,
    pub first_failure: Option<String>,
    pub checks: Vec<Check>,
}

fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_input(m: usize, n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..m * n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::normalized(
        vec![
            Subsystem::new("A", m, Party::Alice),
            Subsystem::new("B", n, Party::Bob),
        ],
        amps,
    )
    .expect("random amplitudes are nonzero")
}

fn fresh_checks() -> Vec<Check> {
    vec![
        Check::new("partition", 0.0),
        Check::new("oracle_definition", 1e-10),
        Check::new("oracle_unitary", 1e-10),
        Check::new("schmidt_rank_equals_n_f", 0.0),
        Check::new("schmidt_reconstruction", 1e-10),
        Check::new("entangling_ebits", 1e-10),
        Check::new("forward_decoding", 1e-10),
        Check::new("backward_decoding", 1e-10),
        Check::new("bidirectional_decoding", 1e-10),
        Check::new("minimal_oracle_equivalence", 1e-10),
        Check::new("locc_branch_fidelity", 1e-10),
        Check::new("locc_branch_uniformity", 1e-10),
        Check::new("locc_ledger", 1e-10),
        Check::new("locc_transcript", 0.0),
    ]
}

/// Runs every per-function check; `rng` supplies the random inputs.
fn check_function(f: &FunctionTable, trials: usize, seed: u64, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut c = fresh_checks();
    let (m, n) = (f.domain_size(), f.codomain_size());
    let tag = || f.to_json();
    let p = build_partition(f);
    let nf = p.n_f;

    // value partition
    let mut bad = 0.0;
    let mut seen = vec![false; m];
    for (j, class) in p.classes.iter().enumerate() {
        for &x in class {
            if seen[x] || f.eval(x) != p.values[j] {
                bad = 1.0;
            }
            seen[x] = true;
        }
        if class.iter().min() != Some(&p.reps[j]) {
            bad = 1.0;
        }
    }
    if seen.iter().any(|s| !s) || p.values.windows(2).any(|w| w[0] >= w[1]) || nf != p.values.len() {
        bad = 1.0;
    }
    c[0].record(bad, tag);

    // U_f
    let u = match oracle_matrix(f) {
        Ok(u) => u,
        Err(e) => {
            c[1].record(f64::NAN, || format!("{}: {e}", tag()));
            return c;
        }
    };
    let mut expected = CMatrix::zeros(m * n, m * n);
    for x in 0..m {
        for y in 0..n {
            expected[(x * n + (y + f.eval(x)) % n, x * n + y)] = C64::new(1.0, 0.0);
        }
    }
    c[1].record(max_entry_diff(&u, &expected), tag);
    c[2].record(unitarity_deviation(&u), tag);

    // operator Schmidt decomposition
    match operator_schmidt_rank(&u, m, n) {
        Ok(rank) => c[3].record(rank.abs_diff(nf) as f64, || format!("{}: rank {rank}, n_f {nf}", tag())),
        Err(e) => c[3].record(f64::NAN, || format!("{}: {e}", tag())),
    }
    match schmidt_decompose_oracle(f) {
        Ok(form) => c[4].record(max_entry_diff(&form.reconstruct(), &u), tag),
        Err(e) => c[4].record(f64::NAN, || format!("{}: {e}", tag())),
    }

    // one-use protocols
    match entangle_protocol(f) {
        Ok((_, ebits)) => c[5].record((ebits - p.log2_n_f()).abs(), tag),
        Err(e) => c[5].record(f64::NAN, || format!("{}: {e}", tag())),
    }
    for msg in 0..nf {
        for (idx, res) in [(6, send_forward(f, msg)), (7, send_backward(f, msg))] {
            match res {
                Ok(r) => {
                    let dev = (1.0 - r.outcome_probabilities[msg]).abs() + r.other_probability;
                    let dev = if r.success { dev } else { dev.max(1.0) };
                    c[idx].record(dev, || format!("{}: message {msg}", tag()));
                }
                Err(e) => c[idx].record(f64::NAN, || format!("{}: {e}", tag())),
            }
        }
    }
    if f.is_permutation() {
        for r in 0..m {
            for s in 0..m {
                match send_bidirectional(f, r, s) {
                    Ok(res) => {
                        let dev = (1.0 - res.outcome_probabilities[r * m + s]).abs() + res.other_probability;
                        let dev = if res.success { dev } else { dev.max(1.0) };
                        c[8].record(dev, || format!("{}: (r, s) = ({r}, {s})", tag()));
                    }
                    Err(e) => c[8].record(f64::NAN, || format!("{}: {e}", tag())),
                }
            }
        }
        match local_equivalence_deviation(f) {
            Ok(dev) => c[9].record(dev, tag),
            Err(e) => c[9].record(f64::NAN, || format!("{}: {e}", tag())),
        }
    }

    // distributed implementation
    let mut reference: Option<Vec<f64>> = None;
    for t in 0..trials {
        let input = random_input(m, n, rng);
        let want = apply_oracle(f, &input, "A", "B").expect("dimensions match");
        let branches = match run_locc_all_branches(f, &input) {
            Ok(b) => b,
            Err(e) => {
                c[10].record(f64::NAN, || format!("{}: {e}", tag()));
                continue;
            }
        };
        for b in &branches {
            let fid = b.state.fidelity(&want).unwrap_or(0.0);
            c[10].record(1.0 - fid, || format!("{}: trial {t}, branch ({}, {})", tag(), b.r, b.s));
        }
        let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        let uniform = 1.0 / (nf * nf) as f64;
        let mut dev = probs.iter().map(|q| (q - uniform).abs()).fold(0.0, f64::max);
        if probs.len() != nf * nf {
            dev = 1.0;
        }
        if let Some(r) = &reference {
            dev = dev.max(r.iter().zip(&probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        reference.get_or_insert(probs);
        c[11].record(dev, || format!("{}: trial {t}", tag()));

        if t == 0 {
            match run_locc(f, &input, seed) {
                Ok((ab, transcript, ledger)) => {
                    let width = (nf as f64).log2().ceil() as u32;
                    let mut dev = (ledger.ebits_consumed - p.log2_n_f()).abs()
                        .max((ledger.initial_ancilla_entropy - p.log2_n_f()).abs())
                        .max(ledger.final_ancilla_entropy.abs())
                        .max(1.0 - ab.fidelity(&want).unwrap_or(0.0));
                    if ledger.bits_forward_wire != width || ledger.bits_backward_wire != width {
                        dev = dev.max(1.0);
                    }
                    c[12].record(dev, tag);
                    let valid = transcript.validate();
                    c[13].record(if valid.is_ok() { 0.0 } else { 1.0 }, || {
                        format!("{}: {}", tag(), valid.unwrap_err())
                    });
                }
                Err(e) => {
                    c[12].record(f64::NAN, || format!("{}: {e}", tag()));
                    c[13].record(f64::NAN, || format!("{}: {e}", tag()));
                }
            }
        }
    }
    c
}

fn phase_check(max_n: usize) -> Check {
    let mut c = Check::new("phase_shift_identity", 1e-12);
    for n in 1..=max_n.max(8) {
        let shift = phase_exponential(n, 1.0).expect("n >= 1");
        for y in 0..n {
            let dev = (0..n)
                .map(|row| {
                    let want = if row == (y + 1) % n { 1.0 } else { 0.0 };
                    (shift[(row, y)] - C64::new(want, 0.0)).norm()
                })
                .fold(0.0, f64::max);
            c.record(dev, || format!("N = {n}, y = {y}"));
        }
    }
    c
}

/// The sweep's function list: every table for `M, N ≤ 3`, `samples` random
/// tables for each larger pair. Returns the list and the exhaustive count.
fn sweep_functions(max_m: usize, max_n: usize, samples: usize, seed: u64) -> (Vec<FunctionTable>, usize) {
    let mut exhaustive = Vec::new();
    let mut sampled = Vec::new();
    for m in 1..=max_m {
        for n in 1..=max_n {
            if m <= EXHAUSTIVE_BOUND && n <= EXHAUSTIVE_BOUND {
                exhaustive.extend(enumerate_functions(m, n));
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((m as u64) << 32) | n as u64);
                for _ in 0..samples {
                    let table = (0..m).map(|_| rng.random_range(0..n)).collect();
                    sampled.push(FunctionTable::new(m, n, table).expect("valid table"));
                }
            }
        }
    }
    let count = exhaustive.len();
    exhaustive.extend(sampled);
    (exhaustive, count)
}

pub fn run_verify(
    functions: &[FunctionTable],
    exhaustive: usize,
    max_m: usize,
    max_n: usize,
    trials: usize,
    seed: u64,
) -> Report {
    let per_function: Vec<Vec<Check>> = functions
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            check_function(f, trials, seed, &mut rng)
        })
        .collect();
    let mut checks = vec![phase_check(max_n)];
    let mut totals = fresh_checks();
    for fc in per_function {
        for (total, c) in totals.iter_mut().zip(fc) {
            total.absorb(c);
        }
    }
    checks.extend(totals);
    let first_failure = checks.iter().find(|c| c.failures > 0).map(|c| {
        format!(
            "{} ({})",
            c.name,
            c.first_failure.as_deref().unwrap_or("no detail")
        )
    });
    Report {
        max_m,
        max_n,
        seed,
        trials,
        functions: functions.len(),
        exhaustive_functions: exhaustive,
        sampled_functions: functions.len() - exhaustive,
        passed: first_failure.is_none(),
        first_failure,
        checks,
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let report = match &args.f {
        Some(arg) => {
            let f = load_function(arg)?;
            let (m, n) = (f.domain_size(), f.codomain_size());
            if m * n > SINGLE_GUARD {
                return Err(CliError::Config(format!(
                    "M·N = {} exceeds the single-table guard {SINGLE_GUARD}",
                    m * n
                )));
            }
            let exhaustive = usize::from(m <= EXHAUSTIVE_BOUND && n <= EXHAUSTIVE_BOUND);
            run_verify(&[f], exhaustive, m, n, args.trials, args.seed)
        }
        None => {
            for (flag, v) in [("--max-m", args.max_m), ("--max-n", args.max_n)] {
                if v == 0 || v > SWEEP_GUARD {
                    return Err(CliError::Config(format!(
                        "{flag} must be between 1 and {SWEEP_GUARD}, got {v}"
                    )));
                }
            }
            let (functions, exhaustive) = sweep_functions(args.max_m, args.max_n, args.samples, args.seed);
            run_verify(&functions, exhaustive, args.max_m, args.max_n, args.trials, args.seed)
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    write_report(args.out.as_deref(), &text)?;
    eprintln!(
        "verify: {} functions ({} exhaustive, {} sampled), {} checks, {}",
        report.functions,
        report.exhaustive_functions,
        report.sampled_functions,
        report.checks.len(),
        if report.passed { "all passed" } else { "FAILED" }
    );
    match report.first_failure {
        None => Ok(()),
        Some(what) => Err(CliError::Verification(what)),
    }
}

fn write_report(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| CliError::Config(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_counts() {
        let (fs, ex) = sweep_functions(2, 2, 20, 0);
        assert_eq!((fs.len(), ex), (8, 8));
        let (fs, ex) = sweep_functions(3, 3, 20, 0);
        assert_eq!((fs.len(), ex), (56, 56));
        let (fs, ex) = sweep_functions(4, 3, 5, 0);
        assert_eq!((fs.len(), ex), (56 + 3 * 5, 56));
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sweep_functions(4, 4, 7, 9).0;
        let b = sweep_functions(4, 4, 7, 9).0;
        assert_eq!(a, b);
    }

    #[test]
    fn small_sweep_passes() {
        let (fs, ex) = sweep_functions(2, 3, 0, 1);
        let report = run_verify(&fs, ex, 2, 3, 2, 1);
        assert!(report.passed, "{:?}", report.first_failure);
        assert!(report.checks.iter().all(|c| c.failures == 0));
    }

    #[test]
    fn check_records_first_failure_only() {
        let mut c = Check::new("x", 0.5);
        c.record(0.1, || "a".into());
        c.record(0.9, || "b".into());
        c.record(f64::NAN, || "c".into());
        assert_eq!((c.cases, c.failures), (3, 2));
        assert_eq!(c.first_failure.as_deref(), Some("b"));
    }
}

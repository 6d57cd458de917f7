//! Distributed implementation of `U_f` by local operations and classical
//! communication.
//!
//! Alice holds the control register `A` (dimension `M`) and an ancilla `a`;
//! Bob holds the target register `B` (dimension `N`) and an ancilla `b`. The
//! ancillas have dimension `n_f`, basis state `j` standing for the class
//! representative `x_j`, and start maximally entangled. Seven steps follow:
//!
//! 1. Alice applies `Ω = Σ_k P_k ⊗ V_k` to `(A, a)`.
//! 2. Alice measures `a`, obtaining `r`, and sends it to Bob.
//! 3. Bob relabels `b` by `j ↦ r ⊖ j`.
//! 4. Bob applies `|n⟩|k⟩ ↦ |n ⊕ f_k⟩|k⟩` to `(B, b)`.
//! 5. Bob applies the DFT to `b`.
//! 6. Bob measures `b`, obtaining `s`, and sends it to Alice.
//! 7. Alice applies `T^s` to `A`.
//!
//! Afterwards `AB` holds `U_f |Φ⟩` and the ancillas are in `|r⟩|s⟩`, for
//! every pair of outcomes.
//!
//! The step functions below act on the full `[A, a, B, b]` state and are
//! used for exhaustive branch enumeration. [`run_locc`] instead runs the two
//! roles against a referee, which samples the measurements.

pub mod operators;
mod roles;
mod transcript;

use crate::error::{Error, Result};
use crate::netsim::{
    run_direct, NetConfig, NetError, Payload, Referee, RefereeLog, Role, TransportKind,
};
use crate::oracle::{build_partition, FunctionTable, Partition};
use crate::quantum::{
    apply_local, collapse, entanglement_entropy, tensor, LocalOperator, Party, StateVector,
    Subsystem, C64, NORM_TOL,
};

pub use roles::{handshake, script, AliceRole, BobRole};
pub use transcript::{ResourceLedger, StepRecord, Transcript};

pub const LABEL_A: &str = "A";
pub const LABEL_SA: &str = "a";
pub const LABEL_B: &str = "B";
pub const LABEL_SB: &str = "b";

/// A function together with its value partition.
#[derive(Debug, Clone, PartialEq)]
pub struct LoccSetup {
    pub f: FunctionTable,
    pub partition: Partition,
    /// Class index `k` of every `x ∈ Z_M`.
    pub class_index: Vec<usize>,
}

impl LoccSetup {
    pub fn new(f: &FunctionTable) -> Self {
        let partition = build_partition(f);
        let class_index = partition.class_index(f.domain_size());
        LoccSetup {
            f: f.clone(),
            partition,
            class_index,
        }
    }

    pub fn n_f(&self) -> usize {
        self.partition.n_f
    }
}

/// One measurement branch of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub r: usize,
    pub s: usize,
    pub probability: f64,
    /// Final state of `[A, B]`.
    pub state: StateVector,
}

fn check_input(setup: &LoccSetup, input: &StateVector) -> Result<StateVector> {
    let (m, n) = (setup.f.domain_size(), setup.f.codomain_size());
    if input.subsystems().len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "input must consist of exactly the subsystems A and B, got {:?}",
            input.labels()
        )));
    }
    let ab = input.reorder(&[LABEL_A, LABEL_B])?;
    let want = [(LABEL_A, m, Party::Alice), (LABEL_B, n, Party::Bob)];
    for (sub, (label, dim, owner)) in ab.subsystems().iter().zip(want) {
        if sub.dim != dim {
            return Err(Error::DimensionMismatch(format!(
                "`{label}` has dimension {}, f needs {dim}",
                sub.dim
            )));
        }
        if sub.owner != owner {
            return Err(Error::InvalidSelection(format!("`{label}` must be owned by {owner}")));
        }
    }
    let norm = ab.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    Ok(ab)
}

/// `n_f^{-1/2} Σ_j |j⟩_a |j⟩_b`.
pub fn ancilla_pair(n_f: usize) -> StateVector {
    let w = C64::new(1.0 / (n_f as f64).sqrt(), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); n_f * n_f];
    for j in 0..n_f {
        amps[j * n_f + j] = w;
    }
    StateVector::new(
        vec![
            Subsystem::new(LABEL_SA, n_f, Party::Alice),
            Subsystem::new(LABEL_SB, n_f, Party::Bob),
        ],
        amps,
    )
    .expect("maximally entangled pair is normalized")
}

/// Input on `A, B` together with the ancilla pair, ordered `[A, a, B, b]`.
pub fn initial_state(setup: &LoccSetup, input: &StateVector) -> Result<StateVector> {
    let ab = check_input(setup, input)?;
    tensor(&[ab, ancilla_pair(setup.n_f())])?.reorder(&[LABEL_A, LABEL_SA, LABEL_B, LABEL_SB])
}

fn apply(state: &StateVector, targets: &[&str], matrix: crate::quantum::CMatrix) -> Result<StateVector> {
    let op = LocalOperator::unitary(targets.iter().copied(), matrix)?;
    apply_local(state, &op)
}

pub fn step1_omega(setup: &LoccSetup, state: &StateVector) -> Result<StateVector> {
    apply(state, &[LABEL_A, LABEL_SA], operators::omega(setup))
}

/// Post-measurement state for outcome `r` on `a`, with its probability.
pub fn step2_measure(state: &StateVector, r: usize) -> Result<(f64, StateVector)> {
    collapse(state, LABEL_SA, r)
}

pub fn step3_bob_shift(setup: &LoccSetup, state: &StateVector, r: usize) -> Result<StateVector> {
    apply(state, &[LABEL_SB], operators::bob_shift(setup.n_f(), r))
}

pub fn step4_local_oracle(setup: &LoccSetup, state: &StateVector) -> Result<StateVector> {
    apply(state, &[LABEL_B, LABEL_SB], operators::local_oracle(setup))
}

pub fn step5_dft(setup: &LoccSetup, state: &StateVector) -> Result<StateVector> {
    apply(state, &[LABEL_SB], operators::dft(setup.n_f()))
}

pub fn step6_measure(state: &StateVector, s: usize) -> Result<(f64, StateVector)> {
    collapse(state, LABEL_SB, s)
}

pub fn step7_phase_t(setup: &LoccSetup, state: &StateVector, s: usize) -> Result<StateVector> {
    apply(state, &[LABEL_A], operators::phase_t(setup, s))
}

/// Drops the ancillas, which must be in `|r⟩_a |s⟩_b`.
pub fn extract_ab(state: &StateVector, r: usize, s: usize) -> Result<StateVector> {
    state
        .remove_basis_factor(LABEL_SA, r)?
        .remove_basis_factor(LABEL_SB, s)
}

/// Every `(r, s)` branch with its exact probability, in lexicographic order.
pub fn run_locc_all_branches(f: &FunctionTable, input: &StateVector) -> Result<Vec<Branch>> {
    let setup = LoccSetup::new(f);
    let nf = setup.n_f();
    let phi1 = step1_omega(&setup, &initial_state(&setup, input)?)?;
    let mut out = Vec::with_capacity(nf * nf);
    for r in 0..nf {
        let (p_r, phi2) = step2_measure(&phi1, r)?;
        let phi3 = step3_bob_shift(&setup, &phi2, r)?;
        let phi4 = step4_local_oracle(&setup, &phi3)?;
        let phi5 = step5_dft(&setup, &phi4)?;
        for s in 0..nf {
            let (p_s, phi6) = step6_measure(&phi5, s)?;
            let phi7 = step7_phase_t(&setup, &phi6, s)?;
            out.push(Branch {
                r,
                s,
                probability: p_r * p_s,
                state: extract_ab(&phi7, r, s)?,
            });
        }
    }
    Ok(out)
}

/// A referee loaded with the initial state and the LOCC script.
pub fn locc_referee(setup: &LoccSetup, input: &StateVector, seed: u64) -> Result<Referee> {
    let state = initial_state(setup, input)?;
    Ok(Referee::new(
        state,
        script(),
        seed,
        handshake(setup, crate::netsim::Endpoint::Referee),
    ))
}

pub fn locc_roles(setup: &LoccSetup) -> (Box<dyn Role>, Box<dyn Role>) {
    (
        Box::new(AliceRole::new(setup.clone())),
        Box::new(BobRole::new(setup.clone())),
    )
}

/// Builds the run's outputs from what the referee recorded.
pub fn finish_run(
    setup: &LoccSetup,
    input: &StateVector,
    seed: u64,
    log: RefereeLog,
) -> Result<(StateVector, Transcript, ResourceLedger)> {
    let outcome = |step: u8| {
        log.outcomes
            .iter()
            .find(|(st, _)| *st == step)
            .map(|&(_, o)| o)
            .ok_or_else(|| Error::Internal(format!("no measurement recorded at step {step}")))
    };
    let (r, s) = (outcome(2)?, outcome(6)?);
    let initial = initial_state(setup, input)?;
    let initial_ancilla_entropy = entanglement_entropy(&initial, &[LABEL_SA])?;
    let final_ancilla_entropy = entanglement_entropy(&log.final_state, &[LABEL_SA])?;
    let wire_bits = |from: crate::netsim::Endpoint| {
        log.messages
            .iter()
            .filter(|m| m.sender == from)
            .map(|m| match &m.payload {
                Payload::ClassicalValue(cv) => cv.bit_width,
                _ => 0,
            })
            .sum()
    };
    let info = setup.partition.log2_n_f();
    let ledger = ResourceLedger {
        ebits_consumed: initial_ancilla_entropy - final_ancilla_entropy,
        initial_ancilla_entropy,
        final_ancilla_entropy,
        bits_forward_info: info,
        bits_backward_info: info,
        bits_forward_wire: wire_bits(crate::netsim::Endpoint::Alice),
        bits_backward_wire: wire_bits(crate::netsim::Endpoint::Bob),
    };
    let ab = extract_ab(&log.final_state, r, s)?;
    let transcript = Transcript {
        f: setup.f.clone(),
        seed,
        r,
        s,
        ancilla_basis: setup.partition.reps.clone(),
        steps: log.steps,
        messages: log.messages,
        ledger: ledger.clone(),
    };
    Ok((ab, transcript, ledger))
}

/// One seeded run, with Alice, Bob and the referee in a single thread.
pub fn run_locc(
    f: &FunctionTable,
    input: &StateVector,
    seed: u64,
) -> Result<(StateVector, Transcript, ResourceLedger)> {
    let setup = LoccSetup::new(f);
    let referee = locc_referee(&setup, input, seed)?;
    let (alice, bob) = locc_roles(&setup);
    let log = run_direct(referee, alice, bob).map_err(|e| match e {
        NetError::Sim(e) => e,
        other => Error::Internal(other.to_string()),
    })?;
    finish_run(&setup, input, seed, log)
}

/// One seeded run over the chosen transport.
pub fn run_locc_over(
    f: &FunctionTable,
    input: &StateVector,
    seed: u64,
    transport: TransportKind,
    cfg: &NetConfig,
) -> Result<(StateVector, Transcript, ResourceLedger), NetError> {
    let setup = LoccSetup::new(f);
    let referee = locc_referee(&setup, input, seed)?;
    let (alice, bob) = locc_roles(&setup);
    let log = transport.run(referee, alice, bob, cfg)?;
    Ok(finish_run(&setup, input, seed, log)?)
}

//! Entanglement creation and classical communication with one use of `U_f`.
//!
//! Every decoding probability here is computed from amplitudes; nothing is
//! sampled. A decoding counts as successful when the encoded message has
//! probability at least `1 − 1e-10` and the residual weight outside the
//! decoding family is at most `1e-10`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::oracle::{apply_oracle, build_partition, phase_states, FunctionTable, Partition};
use crate::quantum::{
    apply_local, branch_probabilities, diagonal, entanglement_entropy, family_probabilities,
    permutation_matrix, tensor, CVector, LocalOperator, Party, StateVector, Subsystem, C64,
};

pub const DECODE_TOL: f64 = 1e-10;

/// What the receiving side(s) read off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    Single(usize),
    Pair { r: usize, s: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub decoded: Decoded,
    pub success: bool,
    pub final_state: StateVector,
    /// Probability of each decodable message. For the bidirectional protocol
    /// this is the joint distribution, indexed `r · M + s`.
    pub outcome_probabilities: Vec<f64>,
    /// Weight outside the decoding family.
    pub other_probability: f64,
}

/// Prepares `n_f^{-1/2} Σ_j |x_j⟩_A ⊗ |0⟩_B`, applies `U_f`, and returns the
/// output state with its A:B entanglement in ebits.
pub fn entangle_protocol(f: &FunctionTable) -> Result<(StateVector, f64)> {
    let p = build_partition(f);
    let a = uniform_over(&p.reps, f.domain_size(), "A", Party::Alice, |_| 0.0)?;
    let b = StateVector::basis("B", f.codomain_size(), Party::Bob, 0)?;
    let out = apply_oracle(f, &tensor(&[a, b])?, "A", "B")?;
    let ebits = entanglement_entropy(&out, &["A"])?;
    Ok((out, ebits))
}

/// Alice sends `r < n_f` by preparing `|x_r⟩`; Bob reads `f_r` from B.
pub fn send_forward(f: &FunctionTable, r: usize) -> Result<ProtocolResult> {
    let p = build_partition(f);
    check_range(r, p.n_f)?;
    let a = StateVector::basis("A", f.domain_size(), Party::Alice, p.reps[r])?;
    let b = StateVector::basis("B", f.codomain_size(), Party::Bob, 0)?;
    let out = apply_oracle(f, &tensor(&[a, b])?, "A", "B")?;

    let on_b = branch_probabilities(&out, "B")?;
    let probs: Vec<f64> = p.values.iter().map(|&v| on_b[v]).collect();
    let other = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Ok(decode_single(r, out, probs, other))
}

/// Bob's phase-encoding gate `G`: `G|N ⊖ f_j⟩ = e^{2πij/n_f}|N ⊖ f_j⟩`,
/// extended by the identity off `span{|N ⊖ f_j⟩}`.
pub fn backward_phase_gate(p: &Partition, n: usize, power: usize) -> crate::quantum::CMatrix {
    let nf = p.n_f;
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for (j, &v) in p.values.iter().enumerate() {
        let k = (j * power) % nf;
        phases[(n - v) % n] = C64::from_polar(1.0, 2.0 * PI * k as f64 / nf as f64);
    }
    diagonal(phases)
}

/// Alice's decoding family `n_f^{-1/2} Σ_j e^{2πijs/n_f} |x_j⟩`, `s < n_f`.
pub fn backward_decoding_family(p: &Partition, m: usize) -> Vec<CVector> {
    let nf = p.n_f;
    let w = 1.0 / (nf as f64).sqrt();
    (0..nf)
        .map(|s| {
            let mut v = CVector::zeros(m);
            for (j, &x) in p.reps.iter().enumerate() {
                v[x] = C64::from_polar(w, 2.0 * PI * ((j * s) % nf) as f64 / nf as f64);
            }
            v
        })
        .collect()
}

/// Bob sends `s < n_f` by applying `G^s` to his half of
/// `n_f^{-1/2} Σ_j |x_j⟩|N ⊖ f_j⟩`; Alice discriminates the resulting
/// phase pattern on A.
pub fn send_backward(f: &FunctionTable, s: usize) -> Result<ProtocolResult> {
    let (m, n) = (f.domain_size(), f.codomain_size());
    let p = build_partition(f);
    check_range(s, p.n_f)?;
    let w = 1.0 / (p.n_f as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); m * n];
    for (&x, &v) in p.reps.iter().zip(&p.values) {
        amps[x * n + (n - v) % n] = C64::new(w, 0.0);
    }
    let psi = StateVector::new(ab_layout(m, n), amps)?;

    let g = LocalOperator::unitary(["B"], backward_phase_gate(&p, n, s))?;
    let encoded = apply_local(&psi, &g)?;
    let out = apply_oracle(f, &encoded, "A", "B")?;

    let (probs, other) = family_probabilities(&out, "A", &backward_decoding_family(&p, m))?;
    Ok(decode_single(s, out, probs, other))
}

/// Simultaneous two-way communication through `U_f` for a permutation `f`:
/// Alice sends `r < M`, Bob sends `s < M`.
pub fn send_bidirectional(f: &FunctionTable, r: usize, s: usize) -> Result<ProtocolResult> {
    let inverse = f.inverse()?;
    let m = f.domain_size();
    check_range(r, m)?;
    check_range(s, m)?;

    let w = 1.0 / (m as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); m * m];
    for x in 0..m {
        amps[x * m + (m - x) % m] = C64::new(w, 0.0);
    }
    let psi = StateVector::new(ab_layout(m, m), amps)?;

    // Alice: |x⟩ ↦ |f⁻¹(x ⊕ r)⟩
    let alice_encode = permutation_matrix(m, |x| inverse[(x + r) % m]);
    // Bob: |M ⊖ x⟩ ↦ e^{2πisx/M} |M ⊖ x⟩
    let bob_encode = diagonal((0..m).map(|y| {
        let x = (m - y) % m;
        C64::from_polar(1.0, 2.0 * PI * ((s * x) % m) as f64 / m as f64)
    }));
    // Bob: Σ_{r'} |r'⟩⟨M ⊕ r'|, the identity under mod-M indexing.
    let mut bob_relabel = crate::quantum::CMatrix::zeros(m, m);
    for r_out in 0..m {
        bob_relabel[(r_out, (m + r_out) % m)] = C64::new(1.0, 0.0);
    }

    let mut state = apply_local(&psi, &LocalOperator::unitary(["A"], alice_encode.clone())?)?;
    state = apply_local(&state, &LocalOperator::unitary(["B"], bob_encode)?)?;
    state = apply_oracle(f, &state, "A", "B")?;
    state = apply_local(&state, &LocalOperator::unitary(["A"], alice_encode.adjoint())?)?;
    state = apply_local(&state, &LocalOperator::unitary(["B"], bob_relabel)?)?;

    // Joint product measurement: Alice in the phase basis, Bob computational.
    let phases = phase_states(m)?;
    let mut joint = vec![0.0; m * m];
    for (s_out, phi) in phases.iter().enumerate() {
        for r_out in 0..m {
            let amp: C64 = (0..m)
                .map(|x| phi[x].conj() * state.amps()[x * m + r_out])
                .sum();
            joint[r_out * m + s_out] = amp.norm_sqr();
        }
    }
    let other = (1.0 - joint.iter().sum::<f64>()).max(0.0);
    let (best, p_best) = argmax(&joint);
    let decoded = Decoded::Pair {
        r: best / m,
        s: best % m,
    };
    let success =
        decoded == Decoded::Pair { r, s } && p_best >= 1.0 - DECODE_TOL && other <= DECODE_TOL;
    Ok(ProtocolResult {
        decoded,
        success,
        final_state: state,
        outcome_probabilities: joint,
        other_probability: other,
    })
}

/// Bits conveyed in total by one bidirectional use: `2 log₂ M`.
pub fn bidirectional_bits(m: usize) -> f64 {
    2.0 * (m as f64).log2()
}

fn decode_single(
    message: usize,
    final_state: StateVector,
    probs: Vec<f64>,
    other: f64,
) -> ProtocolResult {
    let (best, p_best) = argmax(&probs);
    let success = best == message && p_best >= 1.0 - DECODE_TOL && other <= DECODE_TOL;
    ProtocolResult {
        decoded: Decoded::Single(best),
        success,
        final_state,
        outcome_probabilities: probs,
        other_probability: other,
    }
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best })
}

fn check_range(value: usize, bound: usize) -> Result<()> {
    if value >= bound {
        Err(Error::MessageOutOfRange { value, bound })
    } else {
        Ok(())
    }
}

fn ab_layout(m: usize, n: usize) -> Vec<Subsystem> {
    vec![
        Subsystem::new("A", m, Party::Alice),
        Subsystem::new("B", n, Party::Bob),
    ]
}

/// Equal superposition over `indices` with per-term phase `phase(j)`.
pub(crate) fn uniform_over(
    indices: &[usize],
    dim: usize,
    label: &str,
    owner: Party,
    phase: impl Fn(usize) -> f64,
) -> Result<StateVector> {
    let w = 1.0 / (indices.len() as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (j, &x) in indices.iter().enumerate() {
        amps[x] = C64::from_polar(w, phase(j));
    }
    StateVector::single(label, owner, amps)
}

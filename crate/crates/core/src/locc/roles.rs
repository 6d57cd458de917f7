use log::debug;

use super::{operators, LoccSetup, LABEL_A, LABEL_B, LABEL_SA, LABEL_SB};
use crate::netsim::{
    bit_width_for, check_width, matrix_to_wire, Action, ClassicalValue, Endpoint, Handshake,
    MeasureRequest, NetError, OpRequest, Payload, Role, ScriptEntry, WireMessage,
};
use crate::quantum::{CMatrix, Party};

/// The order in which the referee accepts requests.
pub fn script() -> Vec<ScriptEntry> {
    use Action::*;
    use Party::*;
    [
        (1, Alice, Operate),
        (2, Alice, Measure),
        (3, Alice, Send),
        (3, Bob, Operate),
        (4, Bob, Operate),
        (5, Bob, Operate),
        (6, Bob, Measure),
        (6, Bob, Send),
        (7, Alice, Operate),
    ]
    .into_iter()
    .map(|(step, party, action)| ScriptEntry { step, party, action })
    .collect()
}

pub fn handshake(setup: &LoccSetup, role: Endpoint) -> Handshake {
    Handshake {
        role,
        m: setup.f.domain_size(),
        n: setup.f.codomain_size(),
        f_digest: setup.f.digest(),
    }
}

fn op(step: u8, description: &str, targets: &[&str], matrix: &CMatrix) -> Payload {
    Payload::OpRequest(OpRequest {
        step,
        description: description.to_string(),
        targets: targets.iter().map(|t| t.to_string()).collect(),
        matrix: matrix_to_wire(matrix),
    })
}

fn measure(step: u8, description: &str, target: &str) -> Payload {
    Payload::MeasureRequest(MeasureRequest {
        step,
        description: description.to_string(),
        target: target.to_string(),
    })
}

/// Reads a classical value below `n_f` from a message sent by `from`.
fn classical_from(msg: &WireMessage, from: Endpoint, n_f: usize) -> Result<Option<usize>, NetError> {
    let Payload::ClassicalValue(cv) = &msg.payload else {
        return Ok(None);
    };
    if msg.sender != from {
        return Err(NetError::ProtocolOrder(format!(
            "classical value relayed from {:?}, expected {from:?}",
            msg.sender
        )));
    }
    check_width(cv)?;
    if cv.bit_width != bit_width_for(n_f) || cv.value >= n_f as u64 {
        return Err(NetError::InvalidRequest(format!(
            "classical value {} (width {}) is not an index below {n_f}",
            cv.value, cv.bit_width
        )));
    }
    Ok(Some(cv.value as usize))
}

fn outcome(msg: &WireMessage, step: u8, n_f: usize) -> Result<Option<usize>, NetError> {
    let Payload::MeasureResult(res) = &msg.payload else {
        return Ok(None);
    };
    if res.step != step || res.outcome >= n_f as u64 {
        return Err(NetError::InvalidRequest(format!(
            "unexpected measurement result {} at step {}",
            res.outcome, res.step
        )));
    }
    Ok(Some(res.outcome as usize))
}

fn send(value: usize, n_f: usize) -> Payload {
    Payload::ClassicalValue(ClassicalValue {
        value: value as u64,
        bit_width: bit_width_for(n_f),
    })
}

fn unexpected(party: Party, msg: &WireMessage) -> NetError {
    NetError::ProtocolOrder(format!("{party} did not expect {:?} now", msg.kind()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Idle,
    AwaitFirst,
    AwaitSecond,
    Done,
}

pub struct AliceRole {
    setup: LoccSetup,
    stage: Stage,
}

impl AliceRole {
    pub fn new(setup: LoccSetup) -> Self {
        AliceRole {
            setup,
            stage: Stage::Idle,
        }
    }
}

impl Role for AliceRole {
    fn party(&self) -> Party {
        Party::Alice
    }

    fn handshake(&self) -> Handshake {
        handshake(&self.setup, Endpoint::Alice)
    }

    fn start(&mut self) -> Result<Vec<Payload>, NetError> {
        self.stage = Stage::AwaitFirst;
        Ok(vec![
            op(
                1,
                "Omega = sum_k P_k (x) V_k, V_k: |j> -> |j + k mod n_f>",
                &[LABEL_A, LABEL_SA],
                &operators::omega(&self.setup),
            ),
            measure(2, "computational-basis measurement of a, result r", LABEL_SA),
        ])
    }

    fn on_message(&mut self, msg: &WireMessage) -> Result<Vec<Payload>, NetError> {
        let nf = self.setup.n_f();
        match self.stage {
            Stage::AwaitFirst => {
                let r = outcome(msg, 2, nf)?.ok_or_else(|| unexpected(Party::Alice, msg))?;
                debug!("alice measured r = {r}");
                self.stage = Stage::AwaitSecond;
                Ok(vec![send(r, nf)])
            }
            Stage::AwaitSecond => {
                let s = classical_from(msg, Endpoint::Bob, nf)?
                    .ok_or_else(|| unexpected(Party::Alice, msg))?;
                debug!("alice received s = {s}");
                self.stage = Stage::Done;
                Ok(vec![op(
                    7,
                    &format!("T^{s}, T = sum_k exp(-2 pi i k / n_f) P_k"),
                    &[LABEL_A],
                    &operators::phase_t(&self.setup, s),
                )])
            }
            Stage::Idle | Stage::Done => Err(unexpected(Party::Alice, msg)),
        }
    }

    fn is_done(&self) -> bool {
        self.stage == Stage::Done
    }
}

pub struct BobRole {
    setup: LoccSetup,
    stage: Stage,
}

impl BobRole {
    pub fn new(setup: LoccSetup) -> Self {
        BobRole {
            setup,
            stage: Stage::Idle,
        }
    }
}

impl Role for BobRole {
    fn party(&self) -> Party {
        Party::Bob
    }

    fn handshake(&self) -> Handshake {
        handshake(&self.setup, Endpoint::Bob)
    }

    fn start(&mut self) -> Result<Vec<Payload>, NetError> {
        self.stage = Stage::AwaitFirst;
        Ok(Vec::new())
    }

    fn on_message(&mut self, msg: &WireMessage) -> Result<Vec<Payload>, NetError> {
        let nf = self.setup.n_f();
        match self.stage {
            Stage::AwaitFirst => {
                let r = classical_from(msg, Endpoint::Alice, nf)?
                    .ok_or_else(|| unexpected(Party::Bob, msg))?;
                debug!("bob received r = {r}");
                self.stage = Stage::AwaitSecond;
                Ok(vec![
                    op(
                        3,
                        &format!("relabel b: |{r} - k mod n_f> -> |k>"),
                        &[LABEL_SB],
                        &operators::bob_shift(nf, r),
                    ),
                    op(
                        4,
                        "|n>_B |k>_b -> |n + f_k mod N>_B |k>_b",
                        &[LABEL_B, LABEL_SB],
                        &operators::local_oracle(&self.setup),
                    ),
                    op(
                        5,
                        "discrete Fourier transform on b",
                        &[LABEL_SB],
                        &operators::dft(nf),
                    ),
                    measure(6, "computational-basis measurement of b, result s", LABEL_SB),
                ])
            }
            Stage::AwaitSecond => {
                let s = outcome(msg, 6, nf)?.ok_or_else(|| unexpected(Party::Bob, msg))?;
                debug!("bob measured s = {s}");
                self.stage = Stage::Done;
                Ok(vec![send(s, nf)])
            }
            Stage::Idle | Stage::Done => Err(unexpected(Party::Bob, msg)),
        }
    }

    fn is_done(&self) -> bool {
        self.stage == Stage::Done
    }
}

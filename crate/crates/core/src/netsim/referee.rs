use log::debug;

use super::wire::{check_width, matrix_from_wire};
use super::{
    Endpoint, Handshake, MeasureResult, NetError, Payload, WireMessage,
};
use crate::locc::StepRecord;
use crate::quantum::{apply_local, measure_with_rng, seeded_rng, LocalOperator, Party, SimRng, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Operate,
    Measure,
    Send,
}

/// One expected request in a protocol script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptEntry {
    pub step: u8,
    pub party: Party,
    pub action: Action,
}

/// Everything the referee observed during a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RefereeLog {
    pub final_state: StateVector,
    pub steps: Vec<StepRecord>,
    /// Relayed CLASSICAL_VALUE messages as sent by their originators.
    pub messages: Vec<WireMessage>,
    /// `(step, outcome)` of every measurement, in order.
    pub outcomes: Vec<(u8, usize)>,
}

/// Holder of the global state. Applies only requests that respect subsystem
/// ownership and follow the script, one at a time.
pub struct Referee {
    state: StateVector,
    script: Vec<ScriptEntry>,
    cursor: usize,
    rng: SimRng,
    instance: Handshake,
    in_seq: [Option<u64>; 2],
    out_seq: [u64; 2],
    handshaken: [bool; 2],
    steps: Vec<StepRecord>,
    messages: Vec<WireMessage>,
    outcomes: Vec<(u8, usize)>,
}

fn slot(p: Party) -> usize {
    match p {
        Party::Alice => 0,
        Party::Bob => 1,
    }
}

impl Referee {
    /// `instance` carries the M, N and function digest every party must
    /// present in its handshake (its `role` field is ignored).
    pub fn new(state: StateVector, script: Vec<ScriptEntry>, seed: u64, instance: Handshake) -> Self {
        Referee {
            state,
            script,
            cursor: 0,
            rng: seeded_rng(seed),
            instance: Handshake {
                role: Endpoint::Referee,
                ..instance
            },
            in_seq: [None; 2],
            out_seq: [0; 2],
            handshaken: [false; 2],
            steps: Vec::new(),
            messages: Vec::new(),
            outcomes: Vec::new(),
        }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn is_finished(&self) -> bool {
        self.cursor == self.script.len()
    }

    pub fn finish(self) -> Result<RefereeLog, NetError> {
        if !self.is_finished() {
            return Err(NetError::ProtocolOrder(format!(
                "run ended after {} of {} script entries",
                self.cursor,
                self.script.len()
            )));
        }
        Ok(RefereeLog {
            final_state: self.state,
            steps: self.steps,
            messages: self.messages,
            outcomes: self.outcomes,
        })
    }

    /// An ERROR message addressed to `to`.
    pub fn error_message(&mut self, to: Party, err: &NetError) -> WireMessage {
        self.outgoing(to, Payload::Error(err.to_payload()))
    }

    /// Processes one message from `from`; returns the messages to deliver.
    pub fn handle(&mut self, from: Party, msg: WireMessage) -> Result<Vec<(Party, WireMessage)>, NetError> {
        if msg.sender != Endpoint::from(from) {
            return Err(NetError::LocalityViolation(format!(
                "{from} connection sent a message signed {:?}",
                msg.sender
            )));
        }
        let idx = slot(from);
        match self.in_seq[idx] {
            None if !matches!(msg.payload, Payload::Handshake(_)) => {
                return Err(NetError::ProtocolOrder(format!(
                    "first message from {from} must be HANDSHAKE"
                )))
            }
            Some(last) if msg.seq <= last => {
                return Err(NetError::ProtocolOrder(format!(
                    "{from} sent sequence number {} after {last}",
                    msg.seq
                )))
            }
            _ => {}
        }
        self.in_seq[idx] = Some(msg.seq);
        debug!("referee <- {from}: {:?} seq {}", msg.kind(), msg.seq);

        match &msg.payload {
            Payload::Handshake(h) => {
                if self.handshaken[idx] {
                    return Err(NetError::ProtocolOrder(format!("{from} repeated HANDSHAKE")));
                }
                if h.role != Endpoint::from(from) {
                    return Err(NetError::HandshakeMismatch(format!(
                        "{from} connection announced role {:?}",
                        h.role
                    )));
                }
                if (h.m, h.n, &h.f_digest) != (self.instance.m, self.instance.n, &self.instance.f_digest) {
                    return Err(NetError::HandshakeMismatch(format!(
                        "{from} expects M={} N={} digest {}; referee runs M={} N={} digest {}",
                        h.m, h.n, h.f_digest, self.instance.m, self.instance.n, self.instance.f_digest
                    )));
                }
                self.handshaken[idx] = true;
                let ack = Payload::Handshake(self.instance.clone());
                Ok(vec![(from, self.outgoing(from, ack))])
            }
            Payload::OpRequest(op) => {
                self.check_locality(from, &op.targets)?;
                self.expect(from, Action::Operate, Some(op.step))?;
                let matrix = matrix_from_wire(&op.matrix)?;
                let local = LocalOperator::unitary(op.targets.iter().cloned(), matrix)
                    .map_err(|e| NetError::InvalidRequest(e.to_string()))?;
                self.state = apply_local(&self.state, &local)
                    .map_err(|e| NetError::InvalidRequest(e.to_string()))?;
                self.record(op.step, from, &op.description, op.targets.clone());
                Ok(Vec::new())
            }
            Payload::MeasureRequest(req) => {
                self.check_locality(from, std::slice::from_ref(&req.target))?;
                self.expect(from, Action::Measure, Some(req.step))?;
                let rec = measure_with_rng(&self.state, &req.target, &mut self.rng)?;
                self.state = rec.post_state;
                self.outcomes.push((req.step, rec.outcome));
                self.record(req.step, from, &req.description, vec![req.target.clone()]);
                let reply = Payload::MeasureResult(MeasureResult {
                    step: req.step,
                    target: req.target.clone(),
                    outcome: rec.outcome as u64,
                });
                Ok(vec![(from, self.outgoing(from, reply))])
            }
            Payload::ClassicalValue(cv) => {
                check_width(cv)?;
                self.expect(from, Action::Send, None)?;
                let to = from.other();
                if !self.handshaken[slot(to)] {
                    return Err(NetError::ProtocolOrder(format!("{to} has not connected")));
                }
                self.messages.push(msg.clone());
                let seq = self.next_out(to);
                let forwarded = WireMessage {
                    seq,
                    sender: msg.sender,
                    payload: msg.payload.clone(),
                };
                Ok(vec![(to, forwarded)])
            }
            Payload::Error(e) => Err(NetError::Remote {
                code: e.code,
                message: e.message.clone(),
            }),
            Payload::MeasureResult(_) => Err(NetError::InvalidRequest(
                "parties cannot send MEASURE_RESULT".into(),
            )),
        }
    }

    fn check_locality(&self, from: Party, targets: &[String]) -> Result<(), NetError> {
        for t in targets {
            let owner = self
                .state
                .owner_of(t)
                .map_err(|e| NetError::InvalidRequest(e.to_string()))?;
            if owner != from {
                return Err(NetError::LocalityViolation(format!(
                    "{from} requested an action on `{t}`, owned by {owner}"
                )));
            }
        }
        Ok(())
    }

    fn expect(&mut self, from: Party, action: Action, step: Option<u8>) -> Result<(), NetError> {
        let Some(entry) = self.script.get(self.cursor).copied() else {
            return Err(NetError::ProtocolOrder("script already complete".into()));
        };
        let step_ok = step.is_none_or(|s| s == entry.step);
        if entry.party != from || entry.action != action || !step_ok {
            return Err(NetError::ProtocolOrder(format!(
                "expected {:?} by {} at step {}, got {action:?} by {from}{}",
                entry.action,
                entry.party,
                entry.step,
                step.map(|s| format!(" at step {s}")).unwrap_or_default()
            )));
        }
        self.cursor += 1;
        Ok(())
    }

    fn record(&mut self, step: u8, party: Party, description: &str, targets: Vec<String>) {
        self.steps.push(StepRecord {
            step,
            party,
            description: description.to_string(),
            targets,
        });
    }

    fn next_out(&mut self, to: Party) -> u64 {
        let s = &mut self.out_seq[slot(to)];
        let seq = *s;
        *s += 1;
        seq
    }

    fn outgoing(&mut self, to: Party, payload: Payload) -> WireMessage {
        WireMessage {
            seq: self.next_out(to),
            sender: Endpoint::Referee,
            payload,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{matrix_to_wire, ClassicalValue, ErrorCode, MeasureRequest, OpRequest};
    use crate::quantum::{permutation_matrix, tensor};

    fn instance(role: Endpoint) -> Handshake {
        Handshake {
            role,
            m: 2,
            n: 2,
            f_digest: "d".into(),
        }
    }

    fn referee() -> Referee {
        let state = tensor(&[
            StateVector::basis("A", 2, Party::Alice, 0).unwrap(),
            StateVector::basis("B", 2, Party::Bob, 0).unwrap(),
        ])
        .unwrap();
        let script = vec![
            ScriptEntry { step: 1, party: Party::Alice, action: Action::Operate },
            ScriptEntry { step: 2, party: Party::Alice, action: Action::Send },
            ScriptEntry { step: 3, party: Party::Bob, action: Action::Measure },
        ];
        Referee::new(state, script, 0, instance(Endpoint::Referee))
    }

    fn msg(seq: u64, sender: Party, payload: Payload) -> WireMessage {
        WireMessage { seq, sender: sender.into(), payload }
    }

    fn flip(step: u8, target: &str) -> Payload {
        Payload::OpRequest(OpRequest {
            step,
            description: "X".into(),
            targets: vec![target.into()],
            matrix: matrix_to_wire(&permutation_matrix(2, |j| 1 - j)),
        })
    }

    fn greet(r: &mut Referee) {
        for p in [Party::Alice, Party::Bob] {
            let role = Endpoint::from(p);
            let out = r.handle(p, msg(0, p, Payload::Handshake(instance(role)))).unwrap();
            assert_eq!(out.len(), 1);
            assert_eq!(out[0].1.payload, Payload::Handshake(instance(Endpoint::Referee)));
        }
    }

    #[test]
    fn scripted_run() {
        let mut r = referee();
        greet(&mut r);
        assert!(r.handle(Party::Alice, msg(1, Party::Alice, flip(1, "A"))).unwrap().is_empty());
        let cv = Payload::ClassicalValue(ClassicalValue { value: 1, bit_width: 1 });
        let out = r.handle(Party::Alice, msg(2, Party::Alice, cv.clone())).unwrap();
        assert_eq!(out, vec![(Party::Bob, WireMessage { seq: 1, sender: Endpoint::Alice, payload: cv })]);
        let req = Payload::MeasureRequest(MeasureRequest {
            step: 3,
            description: "m".into(),
            target: "B".into(),
        });
        let out = r.handle(Party::Bob, msg(1, Party::Bob, req)).unwrap();
        assert!(matches!(&out[0].1.payload, Payload::MeasureResult(m) if m.outcome == 0));
        assert!(r.is_finished());
        let log = r.finish().unwrap();
        assert_eq!(log.final_state.amps()[2].re, 1.0);
        assert_eq!(log.outcomes, vec![(3, 0)]);
        assert_eq!(log.steps.len(), 2);
    }

    #[test]
    fn handshake_must_come_first_and_match() {
        let mut r = referee();
        let err = r.handle(Party::Alice, msg(0, Party::Alice, flip(1, "A"))).unwrap_err();
        assert_eq!(err.code(), ErrorCode::ProtocolOrder);

        let mut r = referee();
        let mut wrong = instance(Endpoint::Alice);
        wrong.f_digest = "e".into();
        let err = r.handle(Party::Alice, msg(0, Party::Alice, Payload::Handshake(wrong))).unwrap_err();
        assert_eq!(err.code(), ErrorCode::HandshakeMismatch);

        let mut r = referee();
        let err = r
            .handle(Party::Alice, msg(0, Party::Alice, Payload::Handshake(instance(Endpoint::Bob))))
            .unwrap_err();
        assert_eq!(err.code(), ErrorCode::HandshakeMismatch);
    }

    #[test]
    fn sequence_numbers_must_increase() {
        let mut r = referee();
        greet(&mut r);
        let err = r.handle(Party::Alice, msg(0, Party::Alice, flip(1, "A"))).unwrap_err();
        assert_eq!(err.code(), ErrorCode::ProtocolOrder);
    }

    #[test]
    fn spoofed_sender_is_a_locality_violation() {
        let mut r = referee();
        let spoof = msg(0, Party::Bob, Payload::Handshake(instance(Endpoint::Bob)));
        let err = r.handle(Party::Alice, spoof).unwrap_err();
        assert_eq!(err.code(), ErrorCode::LocalityViolation);
    }

    #[test]
    fn locality_checked_before_order() {
        let mut r = referee();
        greet(&mut r);
        // Bob acting on A is rejected for locality even though it is also out of turn.
        let err = r.handle(Party::Bob, msg(1, Party::Bob, flip(1, "A"))).unwrap_err();
        assert_eq!(err.code(), ErrorCode::LocalityViolation);
        let err = r.handle(Party::Bob, msg(2, Party::Bob, flip(1, "B"))).unwrap_err();
        assert_eq!(err.code(), ErrorCode::ProtocolOrder);
        let err = r.handle(Party::Alice, msg(1, Party::Alice, flip(1, "Z"))).unwrap_err();
        assert_eq!(err.code(), ErrorCode::InvalidRequest);
    }

    #[test]
    fn non_unitary_and_wrong_step_rejected() {
        let mut r = referee();
        greet(&mut r);
        let bad = Payload::OpRequest(OpRequest {
            step: 1,
            description: "scale".into(),
            targets: vec!["A".into()],
            matrix: vec![vec![[2.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]],
        });
        let err = r.handle(Party::Alice, msg(1, Party::Alice, bad)).unwrap_err();
        assert_eq!(err.code(), ErrorCode::InvalidRequest);

        let mut r = referee();
        greet(&mut r);
        let err = r.handle(Party::Alice, msg(1, Party::Alice, flip(5, "A"))).unwrap_err();
        assert_eq!(err.code(), ErrorCode::ProtocolOrder);
    }

    #[test]
    fn unfinished_script_is_an_error() {
        let mut r = referee();
        greet(&mut r);
        assert_eq!(r.finish().unwrap_err().code(), ErrorCode::ProtocolOrder);
    }
}

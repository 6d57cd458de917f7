use serde::Serialize;

use crate::netsim::{Endpoint, Payload, WireMessage};
use crate::oracle::FunctionTable;
use crate::quantum::Party;

/// One quantum step as executed by the referee.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub step: u8,
    pub party: Party,
    pub description: String,
    pub targets: Vec<String>,
}

/// Entanglement and communication spent by one run.
///
/// `*_info` is the information content `log₂ n_f` of each message; `*_wire`
/// counts the bits actually declared on the wire.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceLedger {
    pub ebits_consumed: f64,
    pub initial_ancilla_entropy: f64,
    pub final_ancilla_entropy: f64,
    pub bits_forward_info: f64,
    pub bits_backward_info: f64,
    pub bits_forward_wire: u32,
    pub bits_backward_wire: u32,
}

/// Full record of one run. Serializes with a fixed key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub f: FunctionTable,
    pub seed: u64,
    pub r: usize,
    pub s: usize,
    /// `ancilla_basis[j]` is the domain element `x_j` that ancilla basis
    /// state `j` stands for.
    pub ancilla_basis: Vec<usize>,
    pub steps: Vec<StepRecord>,
    pub messages: Vec<WireMessage>,
    pub ledger: ResourceLedger,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcripts serialize")
    }

    /// Checks step order, the two classical messages and step locality.
    pub fn validate(&self) -> Result<(), String> {
        let order: Vec<u8> = self.steps.iter().map(|s| s.step).collect();
        if order != (1..=7).collect::<Vec<u8>>() {
            return Err(format!("steps ran in order {order:?}"));
        }
        for rec in &self.steps {
            let allowed: &[&str] = match rec.party {
                Party::Alice => &["A", "a"],
                Party::Bob => &["B", "b"],
            };
            if let Some(t) = rec.targets.iter().find(|t| !allowed.contains(&t.as_str())) {
                return Err(format!("step {} by {} touches `{t}`", rec.step, rec.party));
            }
        }
        let sent: Vec<(Endpoint, u64)> = self
            .messages
            .iter()
            .filter_map(|m| match &m.payload {
                Payload::ClassicalValue(cv) => Some((m.sender, cv.value)),
                _ => None,
            })
            .collect();
        let expected = [(Endpoint::Alice, self.r as u64), (Endpoint::Bob, self.s as u64)];
        if sent.len() != self.messages.len() || sent != expected {
            return Err(format!("classical messages {sent:?}, expected {expected:?}"));
        }
        Ok(())
    }
}

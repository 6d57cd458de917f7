use super::{Endpoint, Handshake, NetError, Payload, WireMessage};
use crate::quantum::Party;

/// Classical control logic of one party, written as an event handler.
///
/// `start` returns the requests issued before anything is received; each
/// incoming message may trigger further requests. The party is finished once
/// `is_done` returns true.
pub trait Role: Send {
    fn party(&self) -> Party;

    /// Handshake announcing this role and the protocol instance.
    fn handshake(&self) -> Handshake;

    fn start(&mut self) -> Result<Vec<Payload>, NetError>;

    fn on_message(&mut self, msg: &WireMessage) -> Result<Vec<Payload>, NetError>;

    fn is_done(&self) -> bool;
}

/// Wraps a [`Role`] with per-connection sequence numbering and checks on
/// incoming messages.
pub struct PartyEndpoint {
    role: Box<dyn Role>,
    next_seq: u64,
    last_in: Option<u64>,
}

impl PartyEndpoint {
    pub fn new(role: Box<dyn Role>) -> Self {
        PartyEndpoint {
            role,
            next_seq: 0,
            last_in: None,
        }
    }

    pub fn party(&self) -> Party {
        self.role.party()
    }

    pub fn is_done(&self) -> bool {
        self.role.is_done()
    }

    /// Handshake followed by the role's opening requests.
    pub fn open(&mut self) -> Result<Vec<WireMessage>, NetError> {
        let mut out = vec![self.wrap(Payload::Handshake(self.role.handshake()))];
        for p in self.role.start()? {
            out.push(self.wrap(p));
        }
        Ok(out)
    }

    pub fn deliver(&mut self, msg: WireMessage) -> Result<Vec<WireMessage>, NetError> {
        // The referee may abort before it has answered our handshake.
        if let Payload::Error(e) = &msg.payload {
            return Err(NetError::Remote {
                code: e.code,
                message: e.message.clone(),
            });
        }
        match self.last_in {
            None if !matches!(msg.payload, Payload::Handshake(_)) => {
                return Err(NetError::ProtocolOrder(
                    "first message from the referee must be HANDSHAKE".into(),
                ))
            }
            Some(last) if msg.seq <= last => {
                return Err(NetError::ProtocolOrder(format!(
                    "sequence number {} after {last}",
                    msg.seq
                )))
            }
            _ => {}
        }
        self.last_in = Some(msg.seq);
        if let Payload::Handshake(h) = &msg.payload {
            let ours = self.role.handshake();
            if h.role != Endpoint::Referee
                || (h.m, h.n, &h.f_digest) != (ours.m, ours.n, &ours.f_digest)
            {
                return Err(NetError::HandshakeMismatch(format!(
                    "referee announced M={} N={} digest {}",
                    h.m, h.n, h.f_digest
                )));
            }
            return Ok(Vec::new());
        }
        let replies = self.role.on_message(&msg)?;
        Ok(replies.into_iter().map(|p| self.wrap(p)).collect())
    }

    fn wrap(&mut self, payload: Payload) -> WireMessage {
        let seq = self.next_seq;
        self.next_seq += 1;
        WireMessage {
            seq,
            sender: self.role.party().into(),
            payload,
        }
    }
}

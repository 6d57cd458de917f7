//! Two-party execution environment.
//!
//! A [`Referee`] owns the global state vector and the measurement RNG. The
//! parties hold only classical knowledge: they drive the protocol by sending
//! operation and measurement requests, and exchange classical values through
//! the referee, which relays and records them. Every request is checked
//! against the acting party's subsystem ownership and against the protocol
//! script before it touches the state.
//!
//! The same [`Role`] implementations run over three transports: a direct
//! single-threaded event loop, in-process channels between threads, and TCP.

mod endpoint;
mod referee;
mod transport;
mod wire;

use thiserror::Error;

pub use endpoint::{PartyEndpoint, Role};
pub use referee::{Action, Referee, RefereeLog, ScriptEntry};
pub use transport::{
    connect_tcp, run_direct, run_in_process, run_party, run_tcp_local, serve, serve_tcp,
    ChannelSink, ChannelSource, FrameSink, FrameSource, NetConfig, TcpSink, TcpSource,
    TransportKind,
};
pub use wire::{
    bit_width_for, check_width, decode_wire, encode_wire, matrix_from_wire, matrix_to_wire,
    read_frame, to_json, write_frame, ClassicalValue, Endpoint, ErrorCode, ErrorPayload,
    Handshake, MeasureRequest, MeasureResult, MessageKind, OpRequest, Payload, WireMessage,
    MAX_FRAME_BYTES,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("LOCALITY_VIOLATION: {0}")]
    LocalityViolation(String),

    #[error("PROTOCOL_ORDER: {0}")]
    ProtocolOrder(String),

    #[error("TRANSPORT: {0}")]
    Transport(String),

    #[error("HANDSHAKE_MISMATCH: {0}")]
    HandshakeMismatch(String),

    #[error("malformed frame: {0}")]
    MalformedFrame(String),

    #[error("unknown message kind `{0}`")]
    UnknownKind(String),

    #[error("frame of {0} bytes exceeds the 1 MiB limit")]
    OversizeFrame(usize),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("remote error {code:?}: {message}")]
    Remote { code: ErrorCode, message: String },

    #[error(transparent)]
    Sim(#[from] crate::error::Error),
}

impl NetError {
    pub fn code(&self) -> ErrorCode {
        match self {
            NetError::LocalityViolation(_) => ErrorCode::LocalityViolation,
            NetError::ProtocolOrder(_) => ErrorCode::ProtocolOrder,
            NetError::Transport(_) => ErrorCode::Transport,
            NetError::HandshakeMismatch(_) => ErrorCode::HandshakeMismatch,
            NetError::MalformedFrame(_) | NetError::UnknownKind(_) | NetError::OversizeFrame(_) => {
                ErrorCode::MalformedFrame
            }
            NetError::InvalidRequest(_) | NetError::Sim(_) => ErrorCode::InvalidRequest,
            NetError::Remote { code, .. } => *code,
        }
    }

    pub fn to_payload(&self) -> ErrorPayload {
        ErrorPayload {
            code: self.code(),
            message: self.to_string(),
        }
    }
}

impl From<std::io::Error> for NetError {
    fn from(e: std::io::Error) -> Self {
        NetError::Transport(e.to_string())
    }
}

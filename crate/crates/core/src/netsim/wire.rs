//! Wire format: a 4-byte little-endian length prefix followed by a UTF-8 JSON
//! object with exactly the keys `seq`, `sender`, `kind`, `payload`, in that
//! order.

use std::io::{Read, Write};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::NetError;
use crate::quantum::{CMatrix, C64};

/// Largest accepted JSON body.
pub const MAX_FRAME_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Alice,
    Bob,
    Referee,
}

impl From<crate::quantum::Party> for Endpoint {
    fn from(p: crate::quantum::Party) -> Self {
        match p {
            crate::quantum::Party::Alice => Endpoint::Alice,
            crate::quantum::Party::Bob => Endpoint::Bob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MessageKind {
    ClassicalValue,
    OpRequest,
    MeasureRequest,
    MeasureResult,
    Handshake,
    Error,
}

impl MessageKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "CLASSICAL_VALUE" => MessageKind::ClassicalValue,
            "OP_REQUEST" => MessageKind::OpRequest,
            "MEASURE_REQUEST" => MessageKind::MeasureRequest,
            "MEASURE_RESULT" => MessageKind::MeasureResult,
            "HANDSHAKE" => MessageKind::Handshake,
            "ERROR" => MessageKind::Error,
            _ => return None,
        })
    }
}

/// A classical value together with the bit width it is declared to occupy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalValue {
    pub value: u64,
    pub bit_width: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpRequest {
    pub step: u8,
    pub description: String,
    pub targets: Vec<String>,
    /// Row-major `[re, im]` entries.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureRequest {
    pub step: u8,
    pub description: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureResult {
    pub step: u8,
    pub target: String,
    pub outcome: u64,
}

/// First message on every connection: identifies the role and pins the
/// protocol instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Handshake {
    pub role: Endpoint,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub f_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    LocalityViolation,
    ProtocolOrder,
    Transport,
    HandshakeMismatch,
    MalformedFrame,
    InvalidRequest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorPayload {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Payload {
    ClassicalValue(ClassicalValue),
    OpRequest(OpRequest),
    MeasureRequest(MeasureRequest),
    MeasureResult(MeasureResult),
    Handshake(Handshake),
    Error(ErrorPayload),
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::ClassicalValue(_) => MessageKind::ClassicalValue,
            Payload::OpRequest(_) => MessageKind::OpRequest,
            Payload::MeasureRequest(_) => MessageKind::MeasureRequest,
            Payload::MeasureResult(_) => MessageKind::MeasureResult,
            Payload::Handshake(_) => MessageKind::Handshake,
            Payload::Error(_) => MessageKind::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireMessage {
    pub seq: u64,
    pub sender: Endpoint,
    pub payload: Payload,
}

impl WireMessage {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}

#[derive(Serialize)]
struct FrameOut<'a> {
    seq: u64,
    sender: Endpoint,
    kind: MessageKind,
    payload: &'a Payload,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameIn {
    seq: u64,
    sender: Endpoint,
    kind: String,
    payload: serde_json::Value,
}

impl Serialize for WireMessage {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FrameOut {
            seq: self.seq,
            sender: self.sender,
            kind: self.kind(),
            payload: &self.payload,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WireMessage {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = FrameIn::deserialize(d)?;
        from_raw(raw).map_err(|e| D::Error::custom(e.to_string()))
    }
}

fn from_raw(raw: FrameIn) -> Result<WireMessage, NetError> {
    let kind = MessageKind::parse(&raw.kind).ok_or_else(|| NetError::UnknownKind(raw.kind.clone()))?;
    fn body<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T, NetError> {
        serde_json::from_value(v).map_err(|e| NetError::MalformedFrame(e.to_string()))
    }
    let payload = match kind {
        MessageKind::ClassicalValue => {
            let cv: ClassicalValue = body(raw.payload)?;
            check_width(&cv)?;
            Payload::ClassicalValue(cv)
        }
        MessageKind::OpRequest => Payload::OpRequest(body(raw.payload)?),
        MessageKind::MeasureRequest => Payload::MeasureRequest(body(raw.payload)?),
        MessageKind::MeasureResult => Payload::MeasureResult(body(raw.payload)?),
        MessageKind::Handshake => Payload::Handshake(body(raw.payload)?),
        MessageKind::Error => Payload::Error(body(raw.payload)?),
    };
    Ok(WireMessage {
        seq: raw.seq,
        sender: raw.sender,
        payload,
    })
}

/// The value must fit in the declared width.
pub fn check_width(cv: &ClassicalValue) -> Result<(), NetError> {
    let fits = cv.bit_width >= 64 || cv.value < (1u64 << cv.bit_width);
    if fits {
        Ok(())
    } else {
        Err(NetError::MalformedFrame(format!(
            "value {} does not fit in {} bits",
            cv.value, cv.bit_width
        )))
    }
}

/// Bits needed to carry a value below `n`: `⌈log₂ n⌉`, 0 for `n ≤ 1`.
pub fn bit_width_for(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// JSON body without the length prefix.
pub fn to_json(msg: &WireMessage) -> String {
    serde_json::to_string(msg).expect("wire messages serialize")
}

pub fn encode_wire(msg: &WireMessage) -> Result<Vec<u8>, NetError> {
    if let Payload::ClassicalValue(cv) = &msg.payload {
        check_width(cv)?;
    }
    let body = to_json(msg).into_bytes();
    if body.len() > MAX_FRAME_BYTES {
        return Err(NetError::OversizeFrame(body.len()));
    }
    let mut out = Vec::with_capacity(4 + body.len());
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

/// Decodes exactly one frame; trailing or missing bytes are malformed.
pub fn decode_wire(bytes: &[u8]) -> Result<WireMessage, NetError> {
    if bytes.len() < 4 {
        return Err(NetError::MalformedFrame(format!(
            "{} bytes is shorter than the length prefix",
            bytes.len()
        )));
    }
    let len = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    if len > MAX_FRAME_BYTES {
        return Err(NetError::OversizeFrame(len));
    }
    if bytes.len() - 4 != len {
        return Err(NetError::MalformedFrame(format!(
            "length prefix says {len} bytes, frame carries {}",
            bytes.len() - 4
        )));
    }
    decode_body(&bytes[4..])
}

fn decode_body(body: &[u8]) -> Result<WireMessage, NetError> {
    let text = std::str::from_utf8(body).map_err(|e| NetError::MalformedFrame(e.to_string()))?;
    let raw: FrameIn =
        serde_json::from_str(text).map_err(|e| NetError::MalformedFrame(e.to_string()))?;
    from_raw(raw)
}

/// Reads one length-prefixed frame (prefix included in the returned bytes).
pub fn read_frame<R: Read>(mut r: R) -> std::io::Result<Vec<u8>> {
    let mut prefix = [0u8; 4];
    r.read_exact(&mut prefix)?;
    let len = u32::from_le_bytes(prefix) as usize;
    if len > MAX_FRAME_BYTES {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("frame of {len} bytes exceeds {MAX_FRAME_BYTES}"),
        ));
    }
    let mut out = vec![0u8; 4 + len];
    out[..4].copy_from_slice(&prefix);
    r.read_exact(&mut out[4..])?;
    Ok(out)
}

pub fn write_frame<W: Write>(mut w: W, frame: &[u8]) -> std::io::Result<()> {
    w.write_all(frame)?;
    w.flush()
}

pub fn matrix_to_wire(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_wire(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, NetError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(NetError::InvalidRequest("operator matrix must be square and nonempty".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

use std::collections::VecDeque;
use std::fmt;
use std::io::ErrorKind;
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};

use super::endpoint::{PartyEndpoint, Role};
use super::wire::{decode_wire, encode_wire, read_frame, write_frame};
use super::{Endpoint, NetError, Payload, Referee, RefereeLog, WireMessage};
use crate::quantum::Party;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    /// Longest wait for any single message.
    pub timeout: Duration,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            timeout: Duration::from_secs(5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransportKind {
    #[default]
    Direct,
    InProcess,
    Socket,
}

impl TransportKind {
    pub fn run(
        self,
        referee: Referee,
        alice: Box<dyn Role>,
        bob: Box<dyn Role>,
        cfg: &NetConfig,
    ) -> Result<RefereeLog, NetError> {
        match self {
            TransportKind::Direct => run_direct(referee, alice, bob),
            TransportKind::InProcess => run_in_process(referee, alice, bob, cfg),
            TransportKind::Socket => run_tcp_local(referee, alice, bob, cfg),
        }
    }
}

impl fmt::Display for TransportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransportKind::Direct => "direct",
            TransportKind::InProcess => "in-process",
            TransportKind::Socket => "socket",
        })
    }
}

impl FromStr for TransportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(TransportKind::Direct),
            "in-process" => Ok(TransportKind::InProcess),
            "socket" => Ok(TransportKind::Socket),
            other => Err(format!("unknown transport `{other}` (direct, in-process, socket)")),
        }
    }
}

pub trait FrameSink: Send {
    fn send(&mut self, frame: &[u8]) -> Result<(), NetError>;
}

pub trait FrameSource: Send {
    /// Next complete frame; `None` waits indefinitely.
    fn recv(&mut self, timeout: Option<Duration>) -> Result<Vec<u8>, NetError>;
}

pub struct ChannelSink(pub Sender<Vec<u8>>);

pub struct ChannelSource(pub Receiver<Vec<u8>>);

impl FrameSink for ChannelSink {
    fn send(&mut self, frame: &[u8]) -> Result<(), NetError> {
        self.0
            .send(frame.to_vec())
            .map_err(|_| NetError::Transport("channel closed".into()))
    }
}

impl FrameSource for ChannelSource {
    fn recv(&mut self, timeout: Option<Duration>) -> Result<Vec<u8>, NetError> {
        match timeout {
            None => self
                .0
                .recv()
                .map_err(|_| NetError::Transport("channel closed".into())),
            Some(t) => self.0.recv_timeout(t).map_err(|e| match e {
                RecvTimeoutError::Timeout => NetError::Transport(format!("no message within {t:?}")),
                RecvTimeoutError::Disconnected => NetError::Transport("channel closed".into()),
            }),
        }
    }
}

/// Connected channel pair: frames sent on the sink arrive at the source.
pub fn channel() -> (ChannelSink, ChannelSource) {
    let (tx, rx) = mpsc::channel();
    (ChannelSink(tx), ChannelSource(rx))
}

pub struct TcpSink(TcpStream);

pub struct TcpSource(TcpStream);

impl TcpSink {
    pub fn new(stream: TcpStream) -> Self {
        TcpSink(stream)
    }
}

impl TcpSource {
    pub fn new(stream: TcpStream) -> Self {
        TcpSource(stream)
    }
}

impl FrameSink for TcpSink {
    fn send(&mut self, frame: &[u8]) -> Result<(), NetError> {
        write_frame(&mut self.0, frame)?;
        Ok(())
    }
}

// Shutting the socket down also wakes any reader blocked on a clone of it.
impl Drop for TcpSink {
    fn drop(&mut self) {
        let _ = self.0.shutdown(Shutdown::Both);
    }
}

impl FrameSource for TcpSource {
    fn recv(&mut self, timeout: Option<Duration>) -> Result<Vec<u8>, NetError> {
        self.0.set_read_timeout(timeout)?;
        read_frame(&mut self.0).map_err(|e| match e.kind() {
            ErrorKind::WouldBlock | ErrorKind::TimedOut => {
                NetError::Transport(format!("no message within {timeout:?}"))
            }
            ErrorKind::UnexpectedEof => NetError::Transport("connection closed".into()),
            ErrorKind::InvalidData => NetError::OversizeFrame(0),
            _ => NetError::Transport(e.to_string()),
        })
    }
}

fn tcp_pair(stream: TcpStream) -> Result<Conn, NetError> {
    stream.set_nodelay(true)?;
    let reader = stream.try_clone()?;
    Ok((Box::new(TcpSink::new(stream)), Box::new(TcpSource::new(reader))))
}

fn send_msg(sink: &mut dyn FrameSink, msg: &WireMessage) -> Result<(), NetError> {
    sink.send(&encode_wire(msg)?)
}

enum Hop {
    ToReferee(Party, Vec<u8>),
    ToParty(Party, Vec<u8>),
}

/// Runs both roles and the referee in a single thread. Every message still
/// passes through the wire encoding.
pub fn run_direct(
    mut referee: Referee,
    alice: Box<dyn Role>,
    bob: Box<dyn Role>,
) -> Result<RefereeLog, NetError> {
    let mut endpoints = [PartyEndpoint::new(alice), PartyEndpoint::new(bob)];
    let mut queue = VecDeque::new();
    for ep in endpoints.iter_mut() {
        let party = ep.party();
        for msg in ep.open()? {
            queue.push_back(Hop::ToReferee(party, encode_wire(&msg)?));
        }
    }
    while let Some(hop) = queue.pop_front() {
        match hop {
            Hop::ToReferee(from, frame) => {
                let msg = decode_wire(&frame)?;
                for (to, out) in referee.handle(from, msg)? {
                    queue.push_back(Hop::ToParty(to, encode_wire(&out)?));
                }
            }
            Hop::ToParty(to, frame) => {
                let msg = decode_wire(&frame)?;
                let ep = endpoints
                    .iter_mut()
                    .find(|e| e.party() == to)
                    .expect("both parties present");
                for out in ep.deliver(msg)? {
                    queue.push_back(Hop::ToReferee(to, encode_wire(&out)?));
                }
            }
        }
    }
    if let Some(ep) = endpoints.iter().find(|e| !e.is_done()) {
        return Err(NetError::ProtocolOrder(format!(
            "{} stalled before finishing",
            ep.party()
        )));
    }
    referee.finish()
}

/// Drives one party over an established connection until its role is done.
pub fn run_party(
    role: Box<dyn Role>,
    mut sink: Box<dyn FrameSink>,
    mut source: Box<dyn FrameSource>,
    cfg: &NetConfig,
) -> Result<(), NetError> {
    let mut ep = PartyEndpoint::new(role);
    let party = ep.party();
    for msg in ep.open()? {
        send_msg(sink.as_mut(), &msg)?;
    }
    while !ep.is_done() {
        let step = source
            .recv(Some(cfg.timeout))
            .and_then(|frame| decode_wire(&frame))
            .and_then(|msg| ep.deliver(msg));
        match step {
            Ok(replies) => {
                for msg in replies {
                    send_msg(sink.as_mut(), &msg)?;
                }
            }
            Err(e) => {
                debug!("{party} aborting: {e}");
                if !matches!(e, NetError::Remote { .. } | NetError::Transport(_)) {
                    let notice = WireMessage {
                        seq: u64::MAX,
                        sender: party.into(),
                        payload: Payload::Error(e.to_payload()),
                    };
                    let _ = send_msg(sink.as_mut(), &notice);
                }
                return Err(e);
            }
        }
    }
    debug!("{party} finished");
    Ok(())
}

type Conn = (Box<dyn FrameSink>, Box<dyn FrameSource>);

/// Referee side of a run over arbitrary connections. The role behind each
/// connection is learned from its handshake.
pub fn serve(referee: Referee, conns: Vec<Conn>, cfg: &NetConfig) -> Result<RefereeLog, NetError> {
    let mut referee = referee;
    let mut sinks: [Option<Box<dyn FrameSink>>; 2] = [None, None];
    let result = serve_inner(&mut referee, conns, &mut sinks, cfg);
    match result {
        Ok(()) => referee.finish(),
        Err(e) => {
            warn!("referee aborting run: {e}");
            for (i, sink) in sinks.iter_mut().enumerate() {
                if let Some(sink) = sink {
                    let party = if i == 0 { Party::Alice } else { Party::Bob };
                    let notice = referee.error_message(party, &e);
                    let _ = send_msg(sink.as_mut(), &notice);
                }
            }
            Err(e)
        }
    }
}

fn index(p: Party) -> usize {
    match p {
        Party::Alice => 0,
        Party::Bob => 1,
    }
}

fn serve_inner(
    referee: &mut Referee,
    conns: Vec<Conn>,
    sinks: &mut [Option<Box<dyn FrameSink>>; 2],
    cfg: &NetConfig,
) -> Result<(), NetError> {
    if conns.len() != 2 {
        return Err(NetError::Transport(format!("expected 2 connections, got {}", conns.len())));
    }
    let mut greeted = Vec::new();
    let mut sources: Vec<(Party, Box<dyn FrameSource>)> = Vec::new();
    for (sink, mut source) in conns {
        let hello = decode_wire(&source.recv(Some(cfg.timeout))?)?;
        let party = match hello.sender {
            Endpoint::Alice => Party::Alice,
            Endpoint::Bob => Party::Bob,
            Endpoint::Referee => {
                return Err(NetError::HandshakeMismatch("peer claims the referee role".into()))
            }
        };
        if sinks[index(party)].is_some() {
            return Err(NetError::HandshakeMismatch(format!("two connections claim {party}")));
        }
        sinks[index(party)] = Some(sink);
        sources.push((party, source));
        greeted.push((party, hello));
    }
    for (party, hello) in greeted {
        dispatch(referee, sinks, party, hello)?;
    }

    let (tx, rx) = mpsc::channel::<(Party, Result<Vec<u8>, NetError>)>();
    for (party, mut source) in sources {
        let tx = tx.clone();
        thread::spawn(move || loop {
            let r = source.recv(None);
            let stop = r.is_err();
            if tx.send((party, r)).is_err() || stop {
                break;
            }
        });
    }
    drop(tx);

    let mut closed = [false; 2];
    while !referee.is_finished() {
        let (party, frame) = match rx.recv_timeout(cfg.timeout) {
            Ok(x) => x,
            Err(RecvTimeoutError::Timeout) => {
                return Err(NetError::Transport(format!(
                    "no message from either party within {:?}",
                    cfg.timeout
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(NetError::Transport("both parties disconnected".into()))
            }
        };
        match frame {
            Ok(frame) => {
                let msg = decode_wire(&frame)?;
                dispatch(referee, sinks, party, msg)?;
            }
            Err(e) => {
                // A party that has finished its part closes its connection;
                // that is only an error if the script still needs it.
                debug!("{party} connection ended: {e}");
                closed[index(party)] = true;
                if closed.iter().all(|&c| c) {
                    return Err(NetError::Transport("both parties disconnected".into()));
                }
            }
        }
    }
    Ok(())
}

fn dispatch(
    referee: &mut Referee,
    sinks: &mut [Option<Box<dyn FrameSink>>; 2],
    from: Party,
    msg: WireMessage,
) -> Result<(), NetError> {
    for (to, out) in referee.handle(from, msg)? {
        let sink = sinks[index(to)]
            .as_mut()
            .ok_or_else(|| NetError::Transport(format!("{to} is not connected")))?;
        send_msg(sink.as_mut(), &out)?;
    }
    Ok(())
}

/// Threads connected by in-memory channels.
pub fn run_in_process(
    referee: Referee,
    alice: Box<dyn Role>,
    bob: Box<dyn Role>,
    cfg: &NetConfig,
) -> Result<RefereeLog, NetError> {
    let mut conns: Vec<Conn> = Vec::new();
    let mut handles = Vec::new();
    for role in [alice, bob] {
        let (up_tx, up_rx) = channel();
        let (down_tx, down_rx) = channel();
        conns.push((Box::new(down_tx), Box::new(up_rx)));
        let cfg = *cfg;
        handles.push(thread::spawn(move || {
            run_party(role, Box::new(up_tx), Box::new(down_rx), &cfg)
        }));
    }
    let served = serve(referee, conns, cfg);
    join_parties(served, handles)
}

fn join_parties(
    served: Result<RefereeLog, NetError>,
    handles: Vec<thread::JoinHandle<Result<(), NetError>>>,
) -> Result<RefereeLog, NetError> {
    let mut party_err = None;
    for h in handles {
        match h.join() {
            Ok(Ok(())) => {}
            Ok(Err(e)) => {
                party_err.get_or_insert(e);
            }
            Err(_) => {
                party_err.get_or_insert(NetError::Transport("party thread panicked".into()));
            }
        }
    }
    let log = served?;
    match party_err {
        Some(e) => Err(e),
        None => Ok(log),
    }
}

/// Accepts the two party connections on `listener` and runs the referee.
pub fn serve_tcp(listener: &TcpListener, referee: Referee, cfg: &NetConfig) -> Result<RefereeLog, NetError> {
    let deadline = Instant::now() + cfg.timeout;
    listener.set_nonblocking(true)?;
    let mut conns: Vec<Conn> = Vec::new();
    while conns.len() < 2 {
        match listener.accept() {
            Ok((stream, peer)) => {
                debug!("accepted connection from {peer}");
                stream.set_nonblocking(false)?;
                conns.push(tcp_pair(stream)?);
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => {
                if Instant::now() >= deadline {
                    return Err(NetError::Transport(format!(
                        "only {} of 2 parties connected within {:?}",
                        conns.len(),
                        cfg.timeout
                    )));
                }
                thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(e.into()),
        }
    }
    listener.set_nonblocking(false)?;
    serve(referee, conns, cfg)
}

/// Connects to a referee at `addr` and plays `role` to completion.
pub fn connect_tcp(addr: &str, role: Box<dyn Role>, cfg: &NetConfig) -> Result<(), NetError> {
    let addrs: Vec<SocketAddr> = addr
        .to_socket_addrs()
        .map_err(|e| NetError::Transport(format!("cannot resolve `{addr}`: {e}")))?
        .collect();
    let deadline = Instant::now() + cfg.timeout;
    let stream = loop {
        let attempt = addrs
            .iter()
            .find_map(|a| TcpStream::connect_timeout(a, cfg.timeout).ok());
        match attempt {
            Some(s) => break s,
            None if Instant::now() < deadline => thread::sleep(Duration::from_millis(20)),
            None => return Err(NetError::Transport(format!("cannot connect to `{addr}`"))),
        }
    };
    let (sink, source) = tcp_pair(stream)?;
    run_party(role, sink, source, cfg)
}

/// Loopback TCP run with both parties on local threads.
pub fn run_tcp_local(
    referee: Referee,
    alice: Box<dyn Role>,
    bob: Box<dyn Role>,
    cfg: &NetConfig,
) -> Result<RefereeLog, NetError> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?.to_string();
    let handles = [alice, bob]
        .into_iter()
        .map(|role| {
            let addr = addr.clone();
            let cfg = *cfg;
            thread::spawn(move || connect_tcp(&addr, role, &cfg))
        })
        .collect();
    let served = serve_tcp(&listener, referee, cfg);
    join_parties(served, handles)
}

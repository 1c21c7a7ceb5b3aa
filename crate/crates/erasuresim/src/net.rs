//! Lockstep execution over TCP through an erasing relay.
//!
//! Every physical channel use is one 5-byte frame: a big-endian `u32`
//! sequence number followed by a kind byte. Sequence numbers count frames per
//! direction from 1. The relay maps a frame to its global timestep from the
//! direction and sequence number, so its noise decisions match the simulator.
//!
//! Kinds: `0x00` silence (or an idle unary slot), `0x01..=0x04` a 4-ary
//! symbol as `info + 2 * parity + 1`, `0x05` unary energy, `0xFE` an erasure
//! written by the relay, `0xFF` end of run. End frames are never erased and
//! are not channel uses.

use std::io::{self, Read, Write};
use std::net::{Shutdown, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;

use erasuresim_core::ags::{AgsAlice, AgsBob};
use erasuresim_core::codec::Layer;
use erasuresim_core::fixed::{FixedAlice, FixedBob};
use erasuresim_core::{
    Adversary, ChannelToken, ContractViolation, NoisePattern, NoiseSource, PartyInput, PatternAdversary, Protocol,
    Role, SchemeKind, Symbol4, Transcript, WireSlot,
};

pub const FRAME_LEN: usize = 5;
pub const KIND_SILENCE: u8 = 0x00;
pub const KIND_ENERGY: u8 = 0x05;
pub const KIND_ERASURE: u8 = 0xFE;
pub const KIND_END: u8 = 0xFF;

/// Read timeout on every socket; a stalled peer becomes a transport error.
pub const IO_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frame {
    pub seq: u32,
    pub kind: u8,
}

impl Frame {
    pub fn to_bytes(self) -> [u8; FRAME_LEN] {
        let s = self.seq.to_be_bytes();
        [s[0], s[1], s[2], s[3], self.kind]
    }

    pub fn from_bytes(b: [u8; FRAME_LEN]) -> Self {
        Frame { seq: u32::from_be_bytes([b[0], b[1], b[2], b[3]]), kind: b[4] }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("transport: {0}")]
    Transport(#[from] io::Error),
    #[error("expected frame {expected}, got {got}")]
    SeqGap { expected: u32, got: u32 },
    #[error("frame kind {0:#04x} is not valid here")]
    BadKind(u8),
    #[error("peer ended the run early")]
    UnexpectedEnd,
    #[error("a party sent an erasure mark")]
    ErasureFromParty,
    #[error("{0} has no frame encoding")]
    Unsupported(SchemeKind),
    #[error("no exit within {0} rounds")]
    RoundCap(u32),
    #[error(transparent)]
    Contract(#[from] ContractViolation),
    #[error("worker thread panicked")]
    Panic,
}

impl NetError {
    /// Framing and ordering errors, as opposed to socket failures.
    pub fn is_protocol_violation(&self) -> bool {
        matches!(
            self,
            NetError::SeqGap { .. } | NetError::BadKind(_) | NetError::UnexpectedEnd | NetError::ErasureFromParty
        )
    }
}

/// Schemes whose physical slots have a frame kind.
pub fn supported(scheme: SchemeKind) -> bool {
    matches!(scheme.layer(), Layer::Direct | Layer::Unary)
}

fn slot_kind(slot: WireSlot) -> Result<u8, NetError> {
    match slot {
        WireSlot::Token(ChannelToken::Silence) | WireSlot::Silent => Ok(KIND_SILENCE),
        WireSlot::Token(ChannelToken::Symbol(s)) => Ok(s.index() + 1),
        WireSlot::Energy => Ok(KIND_ENERGY),
        WireSlot::Token(ChannelToken::Erasure) => Err(ContractViolation::SendErasure.into()),
        WireSlot::Bit(_) => Err(NetError::BadKind(0)),
    }
}

fn kind_slot(layer: Layer, kind: u8) -> Result<Option<WireSlot>, NetError> {
    Ok(Some(match (layer, kind) {
        (_, KIND_ERASURE) => return Ok(None),
        (Layer::Direct, KIND_SILENCE) => WireSlot::Token(ChannelToken::Silence),
        (Layer::Direct, 1..=4) => WireSlot::Token(ChannelToken::Symbol(Symbol4::from_index(kind - 1).expect("1..=4"))),
        (Layer::Unary, KIND_SILENCE) => WireSlot::Silent,
        (Layer::Unary, KIND_ENERGY) => WireSlot::Energy,
        _ => return Err(NetError::BadKind(kind)),
    }))
}

/// Reads one frame; `None` on a clean close at a frame boundary.
fn read_frame(r: &mut impl Read) -> Result<Option<Frame>, NetError> {
    let mut buf = [0u8; FRAME_LEN];
    let mut got = 0;
    while got < FRAME_LEN {
        match r.read(&mut buf[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(io::Error::from(io::ErrorKind::UnexpectedEof).into()),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Some(Frame::from_bytes(buf)))
}

/// Per-party counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LinkStats {
    pub frames_sent: u64,
    pub frames_received: u64,
    /// Non-silent tokens sent; silence a terminated party keeps sending is
    /// not counted.
    pub symbols_sent: u64,
    /// Tokens that decoded to an erasure.
    pub erasures_received: u64,
    /// Frames that arrived as `0xFE`.
    pub slots_erased: u64,
}

/// One party's framed connection.
pub struct Link<S> {
    stream: S,
    layer: Layer,
    next_out: u32,
    next_in: u32,
    pub stats: LinkStats,
}

impl<S: Read + Write> Link<S> {
    pub fn new(stream: S, scheme: SchemeKind) -> Result<Self, NetError> {
        if !supported(scheme) {
            return Err(NetError::Unsupported(scheme));
        }
        Ok(Link { stream, layer: scheme.layer(), next_out: 1, next_in: 1, stats: LinkStats::default() })
    }

    fn write(&mut self, kinds: &[u8]) -> Result<(), NetError> {
        let mut buf = Vec::with_capacity(kinds.len() * FRAME_LEN);
        for &kind in kinds {
            buf.extend_from_slice(&Frame { seq: self.next_out, kind }.to_bytes());
            self.next_out += 1;
        }
        self.stream.write_all(&buf)?;
        self.stream.flush()?;
        self.stats.frames_sent += kinds.len() as u64;
        Ok(())
    }

    pub fn send(&mut self, token: ChannelToken, counted: bool) -> Result<(), NetError> {
        let word = self.layer.encode(token)?;
        let kinds = word.as_slice().iter().map(|&s| slot_kind(s)).collect::<Result<Vec<_>, _>>()?;
        self.write(&kinds)?;
        if counted && token.is_symbol() {
            self.stats.symbols_sent += 1;
        }
        Ok(())
    }

    pub fn send_end(&mut self) -> Result<(), NetError> {
        self.write(&[KIND_END])
    }

    fn next(&mut self) -> Result<Frame, NetError> {
        let frame = read_frame(&mut self.stream)?.ok_or(NetError::UnexpectedEnd)?;
        if frame.seq != self.next_in {
            return Err(NetError::SeqGap { expected: self.next_in, got: frame.seq });
        }
        self.next_in += 1;
        self.stats.frames_received += 1;
        Ok(frame)
    }

    /// The next token, or `None` if the peer ended the run.
    pub fn recv(&mut self) -> Result<Option<ChannelToken>, NetError> {
        let width = self.layer.width();
        let mut slots = [None; 4];
        for (j, slot) in slots.iter_mut().take(width).enumerate() {
            let frame = self.next()?;
            if frame.kind == KIND_END {
                return if j == 0 { Ok(None) } else { Err(NetError::UnexpectedEnd) };
            }
            *slot = kind_slot(self.layer, frame.kind)?;
            if slot.is_none() {
                self.stats.slots_erased += 1;
            }
        }
        let token = self.layer.decode(&slots[..width])?;
        if token.is_erasure() {
            self.stats.erasures_received += 1;
        }
        Ok(Some(token))
    }

    pub fn into_inner(self) -> S {
        self.stream
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartyReport {
    pub role: Role,
    pub output: Transcript,
    /// Round in which the party exited; AGS Bob stops only when Alice ends
    /// the run.
    pub exit_round: Option<u32>,
    /// Rounds the party took part in.
    pub rounds: u32,
    pub stats: LinkStats,
}

/// Runs one party to completion over `stream`.
pub fn serve_party<S: Read + Write>(
    role: Role,
    scheme: SchemeKind,
    protocol: &Protocol,
    input: &PartyInput,
    stream: S,
    max_rounds: u32,
) -> Result<PartyReport, NetError> {
    let mut link = Link::new(stream, scheme)?;
    let mut rounds = 0u32;
    let mut tick = || {
        rounds += 1;
        if rounds > max_rounds {
            Err(NetError::RoundCap(max_rounds))
        } else {
            Ok(rounds)
        }
    };
    let (output, exit_round) = match (scheme.is_ags(), role) {
        (false, Role::Alice) => {
            let mut a = FixedAlice::new();
            let mut exit = 0;
            while !a.terminated {
                exit = tick()?;
                let (next, tok) = a.odd_step(input, protocol)?;
                link.send(tok, true)?;
                let rx = link.recv()?.ok_or(NetError::UnexpectedEnd)?;
                a = next.even_step(rx, protocol)?;
            }
            // Silence until Bob hears it.
            loop {
                link.send(ChannelToken::Silence, false)?;
                if link.recv()?.is_none() {
                    break;
                }
                tick()?;
            }
            (a.transcript, Some(exit))
        }
        (false, Role::Bob) => {
            let mut b = FixedBob::new();
            loop {
                let round = tick()?;
                let rx = link.recv()?.ok_or(NetError::UnexpectedEnd)?;
                b = b.odd_step(rx)?;
                if b.terminated {
                    link.send_end()?;
                    break (b.transcript, Some(round));
                }
                let (next, tok) = b.even_step(input, protocol)?;
                b = next;
                link.send(tok, true)?;
            }
        }
        (true, Role::Alice) => {
            let mut a = AgsAlice::new();
            loop {
                let round = tick()?;
                let (next, tok) = a.odd_step(input, protocol)?;
                link.send(tok, true)?;
                let rx = link.recv()?.ok_or(NetError::UnexpectedEnd)?;
                a = next.even_step(rx, input, protocol)?;
                if a.terminated {
                    link.send_end()?;
                    break (a.transcript, Some(round));
                }
            }
        }
        (true, Role::Bob) => {
            let mut b = AgsBob::new();
            while let Some(rx) = link.recv()? {
                tick()?;
                b = b.odd_step(rx, input, protocol)?;
                let (next, tok) = b.even_step()?;
                b = next;
                link.send(tok, true)?;
            }
            (b.transcript, None)
        }
    };
    Ok(PartyReport { role, output, exit_round, rounds, stats: link.stats })
}

/// Connects to a relay port with the socket options the lockstep exchange
/// needs.
pub fn connect(addr: impl ToSocketAddrs) -> io::Result<TcpStream> {
    let s = TcpStream::connect(addr)?;
    tune(&s)?;
    Ok(s)
}

fn tune(s: &TcpStream) -> io::Result<()> {
    s.set_nodelay(true)?;
    s.set_read_timeout(Some(IO_TIMEOUT))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DirectionStats {
    /// Data frames forwarded, end markers excluded.
    pub frames: u64,
    pub erased: u64,
    pub ended: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RelayStats {
    pub alice_to_bob: DirectionStats,
    pub bob_to_alice: DirectionStats,
}

impl RelayStats {
    pub fn erased(&self) -> u64 {
        self.alice_to_bob.erased + self.bob_to_alice.erased
    }
}

/// The adversary the simulator would use for `noise` on `scheme`.
pub fn adversary_for(scheme: SchemeKind, noise: &NoiseSource) -> Box<dyn Adversary + Send> {
    match noise {
        NoiseSource::None => Box::new(PatternAdversary::new(NoisePattern::none())),
        NoiseSource::Pattern(p) => Box::new(PatternAdversary::new(p.clone())),
        NoiseSource::Greedy { budget } => Box::new(scheme.greedy(*budget)),
    }
}

struct Noise<'a> {
    adversary: &'a mut (dyn Adversary + Send),
    budget: u64,
    spent: u64,
}

/// Forwards frames between Alice's and Bob's connections until both
/// directions end, erasing the channel uses the adversary picks.
///
/// The adversary sees no history: the relay only learns slots as they pass.
pub fn relay(
    alice: TcpStream,
    bob: TcpStream,
    scheme: SchemeKind,
    adversary: &mut (dyn Adversary + Send),
) -> Result<RelayStats, NetError> {
    if !supported(scheme) {
        return Err(NetError::Unsupported(scheme));
    }
    tune(&alice)?;
    tune(&bob)?;
    let width = scheme.layer().width() as u64;
    let budget = adversary.budget();
    let noise = Mutex::new(Noise { adversary, budget, spent: 0 });
    let (a_read, b_write) = (alice.try_clone()?, bob.try_clone()?);
    let (b_read, a_write) = (bob, alice);
    std::thread::scope(|s| {
        let ab = s.spawn(|| forward(a_read, b_write, Role::Alice, scheme.layer(), width, &noise));
        let ba = s.spawn(|| forward(b_read, a_write, Role::Bob, scheme.layer(), width, &noise));
        let ab = ab.join().map_err(|_| NetError::Panic)?;
        let ba = ba.join().map_err(|_| NetError::Panic)?;
        Ok(RelayStats { alice_to_bob: ab?, bob_to_alice: ba? })
    })
}

fn forward(
    mut from: TcpStream,
    mut to: TcpStream,
    sender: Role,
    layer: Layer,
    width: u64,
    noise: &Mutex<Noise<'_>>,
) -> Result<DirectionStats, NetError> {
    let mut stats = DirectionStats::default();
    let mut expected = 1u32;
    let result = (|| loop {
        let Some(mut frame) = read_frame(&mut from)? else {
            return Ok(());
        };
        if frame.seq != expected {
            return Err(NetError::SeqGap { expected, got: frame.seq });
        }
        expected += 1;
        if frame.kind == KIND_END {
            to.write_all(&frame.to_bytes())?;
            stats.ended = true;
            return Ok(());
        }
        if frame.kind == KIND_ERASURE {
            return Err(NetError::ErasureFromParty);
        }
        let slot = kind_slot(layer, frame.kind)?.expect("not an erasure");
        let index = u64::from(frame.seq) - 1;
        let tau = 2 * (index / width) + if sender == Role::Alice { 1 } else { 2 };
        let t = (tau - 1) * width + index % width + 1;
        let erase = {
            let mut n = noise.lock().expect("relay noise lock");
            let erase = n.spent < n.budget && n.adversary.decide(t, &slot, &[]);
            n.spent += u64::from(erase);
            erase
        };
        if erase {
            frame.kind = KIND_ERASURE;
            stats.erased += 1;
        }
        stats.frames += 1;
        to.write_all(&frame.to_bytes())?;
    })();
    // The peer must not wait on a direction that is finished; after an error
    // neither direction may continue.
    if result.is_ok() {
        let _ = to.shutdown(Shutdown::Write);
    } else {
        let _ = to.shutdown(Shutdown::Both);
        let _ = from.shutdown(Shutdown::Both);
    }
    result.map(|()| stats)
}

/// Outputs and counters of a run over loopback TCP.
#[derive(Clone, Debug, Serialize)]
pub struct NetOutcome {
    pub alice: PartyReport,
    pub bob: PartyReport,
    pub relay: RelayStats,
}

impl NetOutcome {
    pub fn cc_sym(&self) -> u64 {
        self.alice.stats.symbols_sent + self.bob.stats.symbols_sent
    }

    pub fn erasures_logical(&self) -> u64 {
        self.alice.stats.erasures_received + self.bob.stats.erasures_received
    }
}

/// Runs both parties and a relay in this process, over 127.0.0.1.
pub fn run_over_loopback(
    scheme: SchemeKind,
    protocol: &Protocol,
    x: &PartyInput,
    y: &PartyInput,
    noise: &NoiseSource,
    max_rounds: u32,
) -> Result<NetOutcome, NetError> {
    if !supported(scheme) {
        return Err(NetError::Unsupported(scheme));
    }
    let la = TcpListener::bind("127.0.0.1:0")?;
    let lb = TcpListener::bind("127.0.0.1:0")?;
    let (pa, pb) = (la.local_addr()?, lb.local_addr()?);
    let mut adversary = adversary_for(scheme, noise);
    std::thread::scope(|s| {
        let relay = s.spawn(|| -> Result<RelayStats, NetError> {
            let (a, _) = la.accept()?;
            let (b, _) = lb.accept()?;
            relay(a, b, scheme, adversary.as_mut())
        });
        let alice = s.spawn(|| serve_party(Role::Alice, scheme, protocol, x, connect(pa)?, max_rounds));
        let bob = s.spawn(|| serve_party(Role::Bob, scheme, protocol, y, connect(pb)?, max_rounds));
        let alice = alice.join().map_err(|_| NetError::Panic)?;
        let bob = bob.join().map_err(|_| NetError::Panic)?;
        let relay = relay.join().map_err(|_| NetError::Panic)?;
        Ok(NetOutcome { alice: alice?, bob: bob?, relay: relay? })
    })
}

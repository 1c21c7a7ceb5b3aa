//! Lockstep simulator.
//!
//! A run alternates Alice's and Bob's step functions one 4-ary timestep at a
//! time. Each token is carried by the scheme's [`Layer`] over `width()`
//! physical channel uses, and noise is decided per physical use. Noise
//! patterns, adversaries and `rc_timesteps` therefore count physical
//! timesteps; for `basic4` and `ags4` these coincide with 4-ary timesteps.
//!
//! Fixed schemes stop when Bob hears silence. Once Alice has exited the
//! simulator injects that silence in her timesteps; it is erasable and is not
//! counted as communication. AGS schemes stop when Alice exits and then run
//! `settle_rounds` noise-free rounds in which Bob must stay silent.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::ags::{AgsAlice, AgsBob, CostLedger, Phase};
use crate::bits::{PartyInput, Transcript};
use crate::channel::{Adversary, ChannelToken, ChannelUse, GreedyAdversary, NoisePattern, PatternAdversary};
use crate::codec::Layer;
use crate::error::ContractViolation;
use crate::fixed::{FixedAlice, FixedBob};
use crate::protocol::{reference_transcript, Protocol, Role};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SchemeKind {
    Basic4,
    Basic2,
    Ecc3,
    Ags4,
    Ags1,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] =
        [SchemeKind::Basic4, SchemeKind::Basic2, SchemeKind::Ecc3, SchemeKind::Ags4, SchemeKind::Ags1];

    pub const fn name(self) -> &'static str {
        match self {
            SchemeKind::Basic4 => "basic4",
            SchemeKind::Basic2 => "basic2",
            SchemeKind::Ecc3 => "ecc3",
            SchemeKind::Ags4 => "ags4",
            SchemeKind::Ags1 => "ags1",
        }
    }

    pub const fn layer(self) -> Layer {
        match self {
            SchemeKind::Basic4 | SchemeKind::Ags4 => Layer::Direct,
            SchemeKind::Basic2 => Layer::Binary2,
            SchemeKind::Ecc3 => Layer::Ecc3,
            SchemeKind::Ags1 => Layer::Unary,
        }
    }

    pub const fn is_ags(self) -> bool {
        matches!(self, SchemeKind::Ags4 | SchemeKind::Ags1)
    }

    /// Bits charged per non-silent token: two for a 4-ary symbol, the word
    /// length for binary layers, one energy slot for unary blocks.
    pub const fn bits_per_symbol(self) -> u64 {
        match self {
            SchemeKind::Basic4 | SchemeKind::Basic2 | SchemeKind::Ags4 => 2,
            SchemeKind::Ecc3 => 3,
            SchemeKind::Ags1 => 1,
        }
    }

    /// The greedy adversary matched to this scheme's layer.
    pub fn greedy(self, budget: u64) -> GreedyAdversary {
        let layer = self.layer();
        GreedyAdversary::new(budget, layer.width() as u64, layer.threshold() as u64)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scheme {0:?}; expected basic4, basic2, ecc3, ags4 or ags1")]
pub struct ParseSchemeError(pub String);

impl FromStr for SchemeKind {
    type Err = ParseSchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| ParseSchemeError(s.into()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoiseSource {
    None,
    Pattern(NoisePattern),
    Greedy { budget: u64 },
}

impl NoiseSource {
    pub fn budget(&self) -> u64 {
        match self {
            NoiseSource::None => 0,
            NoiseSource::Pattern(p) => p.len() as u64,
            NoiseSource::Greedy { budget } => *budget,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub protocol: Protocol,
    pub x: PartyInput,
    pub y: PartyInput,
    pub noise: NoiseSource,
    /// Defaults to `4 * (N + 4 * budget) + 16`.
    pub max_rounds: Option<u32>,
    pub settle_rounds: u32,
    pub record_trace: bool,
}

impl RunConfig {
    pub fn new(scheme: SchemeKind, protocol: Protocol, x: PartyInput, y: PartyInput) -> Self {
        RunConfig {
            scheme,
            protocol,
            x,
            y,
            noise: NoiseSource::None,
            max_rounds: None,
            settle_rounds: 3,
            record_trace: true,
        }
    }

    pub fn with_noise(mut self, noise: NoiseSource) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_pattern(self, pattern: impl IntoIterator<Item = u64>) -> Self {
        self.with_noise(NoiseSource::Pattern(pattern.into_iter().collect()))
    }

    pub fn without_trace(mut self) -> Self {
        self.record_trace = false;
        self
    }

    /// Never below N/2.
    pub fn round_cap(&self, budget: u64) -> u32 {
        let n = self.protocol.len() as u64;
        let default = 4 * (n + 4 * budget) + 16;
        let cap = self.max_rounds.map_or(default, u64::from);
        cap.max(n / 2).min(u32::MAX as u64) as u32
    }
}

/// Both parties' states after a timestep.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum Snapshot {
    Fixed { alice: FixedAlice, bob: FixedBob },
    Ags { alice: AgsAlice, bob: AgsBob },
}

impl Snapshot {
    /// `(r_A, r_B)`.
    pub fn rounds(&self) -> (u32, u32) {
        match self {
            Snapshot::Fixed { alice, bob } => (alice.round, bob.round),
            Snapshot::Ags { alice, bob } => (alice.round, bob.round),
        }
    }

    pub fn transcripts(&self) -> (&Transcript, &Transcript) {
        match self {
            Snapshot::Fixed { alice, bob } => (&alice.transcript, &bob.transcript),
            Snapshot::Ags { alice, bob } => (&alice.transcript, &bob.transcript),
        }
    }

    pub fn alice_terminated(&self) -> bool {
        match self {
            Snapshot::Fixed { alice, .. } => alice.terminated,
            Snapshot::Ags { alice, .. } => alice.terminated,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Event {
    AliceTerminated,
    BobTerminated,
    TerminationPhase,
}

/// One 4-ary timestep.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    pub timestep: u64,
    pub sender: Role,
    pub sent: ChannelToken,
    pub received: ChannelToken,
    /// Physical timesteps erased while carrying this token.
    pub erased_slots: Vec<u64>,
    /// Received physical slots for layered schemes: bits or unary glyphs,
    /// `x` where erased.
    pub wire: Option<String>,
    /// Silence the simulator supplied for a party that has exited.
    pub injected: bool,
    /// Noise-free round after the run, certifying semi-termination.
    pub settle: bool,
    pub state: Snapshot,
    pub ledger: CostLedger,
    pub events: Vec<Event>,
}

impl StepRecord {
    pub fn erased(&self) -> bool {
        !self.erased_slots.is_empty()
    }

    /// 1-based round of this timestep.
    pub fn round(&self) -> u32 {
        self.timestep.div_ceil(2) as u32
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceHeader {
    pub scheme: SchemeKind,
    pub n_bits: usize,
    pub x: PartyInput,
    pub y: PartyInput,
    pub reference: Transcript,
    pub settle_rounds: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunTrace {
    pub header: TraceHeader,
    pub records: Vec<StepRecord>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    /// Round in which Alice exited.
    pub t_a: u32,
    /// Round in which Bob exited; AGS Bob never exits.
    pub t_b: Option<u32>,
    pub semi_terminated_at: Option<u32>,
    pub semi_terminated: bool,
    /// Tokens sent by the parties, injected silence excluded.
    pub transmissions: u64,
    /// Non-silent tokens sent.
    pub cc_sym: u64,
    pub cc_bits: u64,
    /// Physical timesteps until both parties exited or semi-terminated.
    pub rc_timesteps: u64,
    /// Erased physical timesteps inside that window.
    pub erasures_counted: u64,
    /// Tokens received as erasures inside that window.
    pub erasures_logical: u64,
    /// Bob's termination-phase answers that Alice received as erasures.
    pub erased_final_answers: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub trace: RunTrace,
    pub metrics: Metrics,
    pub alice_output: Transcript,
    pub bob_output: Transcript,
}

impl RunOutcome {
    pub fn reference(&self) -> &Transcript {
        &self.trace.header.reference
    }

    pub fn outputs_correct(&self) -> bool {
        self.alice_output == self.trace.header.reference && self.bob_output == self.trace.header.reference
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("run exceeded {cap} rounds without terminating")]
    RoundCap { cap: u32, partial: Box<RunOutcome> },
    #[error("contract violation: {0}")]
    Contract(#[from] ContractViolation),
}

/// Erasures inside the live window of a trace. Settle rounds are noise-free
/// and anything scheduled after the run never reached the channel.
pub fn noise_used(trace: &RunTrace) -> u64 {
    trace.records.iter().filter(|r| !r.settle).map(|r| r.erased_slots.len() as u64).sum()
}

pub fn run(config: &RunConfig) -> Result<RunOutcome, HarnessError> {
    match &config.noise {
        NoiseSource::None => run_with_adversary(config, &mut PatternAdversary::new(NoisePattern::none())),
        NoiseSource::Pattern(p) => run_with_adversary(config, &mut PatternAdversary::new(p.clone())),
        NoiseSource::Greedy { budget } => run_with_adversary(config, &mut config.scheme.greedy(*budget)),
    }
}

pub fn run_with_adversary(config: &RunConfig, adversary: &mut dyn Adversary) -> Result<RunOutcome, HarnessError> {
    let mut engine = Engine::new(config, adversary);
    if config.scheme.is_ags() {
        engine.run_ags()
    } else {
        engine.run_fixed()
    }
}

struct Received {
    token: ChannelToken,
    erased: u8,
    wire: Option<String>,
}

struct Engine<'a> {
    cfg: &'a RunConfig,
    layer: Layer,
    adversary: &'a mut dyn Adversary,
    budget: u64,
    spent: u64,
    history: Vec<ChannelUse>,
    ledger: CostLedger,
    erasures_logical: u64,
    erased_final_answers: u64,
    records: Vec<StepRecord>,
    cap: u32,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a RunConfig, adversary: &'a mut dyn Adversary) -> Self {
        let budget = adversary.budget();
        Engine {
            cfg,
            layer: cfg.scheme.layer(),
            adversary,
            budget,
            spent: 0,
            history: Vec::new(),
            ledger: CostLedger::default(),
            erasures_logical: 0,
            erased_final_answers: 0,
            records: Vec::new(),
            cap: cfg.round_cap(budget),
        }
    }

    fn width(&self) -> u64 {
        self.layer.width() as u64
    }

    fn channel(
        &mut self,
        tau: u64,
        sender: Role,
        sent: ChannelToken,
        noisy: bool,
    ) -> Result<Received, ContractViolation> {
        let word = self.layer.encode(sent)?;
        let width = self.width();
        let mut rx = [None; 4];
        let mut erased = 0u8;
        for (j, slot) in word.as_slice().iter().enumerate() {
            let t = (tau - 1) * width + j as u64 + 1;
            let erase = noisy && self.spent < self.budget && self.adversary.decide(t, slot, &self.history);
            if erase {
                self.spent += 1;
                erased |= 1 << j;
            }
            if self.adversary.observes_history() {
                self.history.push(ChannelUse { timestep: t, sender, sent: *slot, erased: erase });
            }
            rx[j] = (!erase).then_some(*slot);
        }
        let token = self.layer.decode(&rx[..word.as_slice().len()])?;
        let wire = (self.cfg.record_trace && self.layer != Layer::Direct).then(|| {
            let unary = self.layer == Layer::Unary;
            rx[..word.as_slice().len()].iter().map(|s| s.map_or('x', |s| s.glyph(unary))).collect()
        });
        Ok(Received { token, erased, wire })
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        tau: u64,
        sender: Role,
        sent: ChannelToken,
        rx: Received,
        injected: bool,
        settle: bool,
        state: impl FnOnce() -> Snapshot,
        events: Vec<Event>,
    ) {
        if !settle {
            self.ledger.record(sender, sent, rx.token);
            if rx.token.is_erasure() {
                self.erasures_logical += 1;
            }
        }
        if !self.cfg.record_trace {
            return;
        }
        let width = self.width();
        let erased_slots = (0..width).filter(|j| rx.erased >> j & 1 == 1).map(|j| (tau - 1) * width + j + 1).collect();
        self.records.push(StepRecord {
            timestep: tau,
            sender,
            sent,
            received: rx.token,
            erased_slots,
            wire: rx.wire,
            injected,
            settle,
            state: state(),
            ledger: self.ledger,
            events,
        });
    }

    fn header(&self) -> TraceHeader {
        let c = self.cfg;
        TraceHeader {
            scheme: c.scheme,
            n_bits: c.protocol.len(),
            x: c.x.clone(),
            y: c.y.clone(),
            reference: reference_transcript(&c.protocol, &c.x, &c.y),
            settle_rounds: c.settle_rounds,
        }
    }

    fn finish(&mut self, mut metrics: Metrics, alice: Transcript, bob: Transcript) -> RunOutcome {
        metrics.transmissions = self.ledger.cc_sym();
        metrics.cc_sym = self.ledger.cc_sym();
        metrics.cc_bits = metrics.cc_sym * self.cfg.scheme.bits_per_symbol();
        metrics.erasures_counted = self.spent;
        metrics.erasures_logical = self.erasures_logical;
        metrics.erased_final_answers = self.erased_final_answers;
        RunOutcome {
            trace: RunTrace { header: self.header(), records: core::mem::take(&mut self.records) },
            metrics,
            alice_output: alice,
            bob_output: bob,
        }
    }

    fn run_fixed(&mut self) -> Result<RunOutcome, HarnessError> {
        let (cfg, p) = (self.cfg, &self.cfg.protocol);
        let mut alice = FixedAlice::new();
        let mut bob = FixedBob::new();
        let mut metrics = Metrics::default();
        let mut tau = 0u64;
        loop {
            tau += 1;
            let round = tau.div_ceil(2) as u32;
            if round > self.cap {
                let cap = self.cap;
                let partial = self.finish(metrics, alice.transcript, bob.transcript);
                return Err(HarnessError::RoundCap { cap, partial: Box::new(partial) });
            }
            let mut events = Vec::new();
            if tau % 2 == 1 {
                let (sent, injected) = if alice.terminated {
                    (ChannelToken::Silence, true)
                } else {
                    let (a, tok) = alice.odd_step(&cfg.x, p)?;
                    alice = a;
                    (tok, false)
                };
                let rx = self.channel(tau, Role::Alice, sent, true)?;
                bob = bob.odd_step(rx.token)?;
                let done = bob.terminated;
                if done {
                    events.push(Event::BobTerminated);
                    metrics.t_b = Some(round);
                }
                self.record(tau, Role::Alice, sent, rx, injected, false, || fixed_snap(&alice, &bob), events);
                if done {
                    break;
                }
            } else {
                let (b, sent) = bob.even_step(&cfg.y, p)?;
                bob = b;
                let rx = self.channel(tau, Role::Bob, sent, true)?;
                if !alice.terminated {
                    alice = alice.even_step(rx.token, p)?;
                    if alice.terminated {
                        metrics.t_a = round;
                        events.push(Event::AliceTerminated);
                    }
                }
                self.record(tau, Role::Bob, sent, rx, false, false, || fixed_snap(&alice, &bob), events);
            }
        }
        metrics.rc_timesteps = tau * self.width();
        Ok(self.finish(metrics, alice.transcript, bob.transcript))
    }

    fn run_ags(&mut self) -> Result<RunOutcome, HarnessError> {
        let (cfg, p) = (self.cfg, &self.cfg.protocol);
        let mut alice = AgsAlice::new();
        let mut bob = AgsBob::new();
        let mut metrics = Metrics::default();
        let mut tau = 0u64;
        loop {
            tau += 1;
            let round = tau.div_ceil(2) as u32;
            if round > self.cap {
                let cap = self.cap;
                let partial = self.finish(metrics, alice.transcript, bob.transcript);
                return Err(HarnessError::RoundCap { cap, partial: Box::new(partial) });
            }
            let mut events = Vec::new();
            if tau % 2 == 1 {
                let (a, sent) = alice.odd_step(&cfg.x, p)?;
                alice = a;
                let rx = self.channel(tau, Role::Alice, sent, true)?;
                let before = bob.phase;
                bob = bob.odd_step(rx.token, &cfg.y, p)?;
                if before != bob.phase {
                    events.push(Event::TerminationPhase);
                }
                self.record(tau, Role::Alice, sent, rx, false, false, || ags_snap(&alice, &bob), events);
            } else {
                let (b, sent) = bob.even_step()?;
                bob = b;
                let rx = self.channel(tau, Role::Bob, sent, true)?;
                if bob.phase == Phase::Termination && sent.is_symbol() && rx.token.is_erasure() {
                    self.erased_final_answers += 1;
                }
                alice = alice.even_step(rx.token, &cfg.x, p)?;
                let done = alice.terminated;
                if done {
                    metrics.t_a = round;
                    events.push(Event::AliceTerminated);
                }
                self.record(tau, Role::Bob, sent, rx, false, false, || ags_snap(&alice, &bob), events);
                if done {
                    break;
                }
            }
        }
        metrics.rc_timesteps = tau * self.width();
        metrics.semi_terminated_at = Some(metrics.t_a);

        let mut silent = cfg.settle_rounds > 0 && bob.phase == Phase::Termination;
        for _ in 0..cfg.settle_rounds {
            tau += 1;
            let rx = self.channel(tau, Role::Alice, ChannelToken::Silence, false)?;
            bob = bob.odd_step(rx.token, &cfg.y, p)?;
            self.record(tau, Role::Alice, ChannelToken::Silence, rx, true, true, || ags_snap(&alice, &bob), Vec::new());
            tau += 1;
            let (b, sent) = bob.even_step()?;
            bob = b;
            silent &= sent.is_silence();
            let rx = self.channel(tau, Role::Bob, sent, false)?;
            self.record(tau, Role::Bob, sent, rx, false, true, || ags_snap(&alice, &bob), Vec::new());
        }
        metrics.semi_terminated = silent;
        Ok(self.finish(metrics, alice.transcript, bob.transcript))
    }
}

fn fixed_snap(alice: &FixedAlice, bob: &FixedBob) -> Snapshot {
    Snapshot::Fixed { alice: alice.clone(), bob: bob.clone() }
}

fn ags_snap(alice: &AgsAlice, bob: &AgsBob) -> Snapshot {
    Snapshot::Ags { alice: alice.clone(), bob: bob.clone() }
}

//! The scheme for the setting where silence is free and a party may choose
//! not to transmit.
//!
//! Silence doubles as a negative acknowledgement: a party that received an
//! erasure stays silent in its next timestep, prompting the other side to
//! retransmit. Alice only commits bits in pairs, after a matching answer.
//! Once Bob has the full transcript he answers only matching-parity queries
//! and never exits, so the run semi-terminates: Alice exits and both stay
//! silent from then on.

use crate::bits::{PartyInput, Transcript};
use crate::channel::{ChannelToken, Symbol4};
use crate::error::ContractViolation;
use crate::protocol::{Protocol, Role};

const fn parity(round: u32) -> bool {
    round % 2 == 1
}

const INITIAL: ChannelToken = ChannelToken::Symbol(Symbol4::new(false, false));

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgsAlice {
    pub transcript: Transcript,
    pub round: u32,
    pub last_received: ChannelToken,
    pub terminated: bool,
    pub awaiting: bool,
}

impl Default for AgsAlice {
    fn default() -> Self {
        AgsAlice { transcript: Transcript::new(), round: 0, last_received: INITIAL, terminated: false, awaiting: false }
    }
}

impl AgsAlice {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn odd_step(mut self, x: &PartyInput, protocol: &Protocol) -> Result<(Self, ChannelToken), ContractViolation> {
        if self.terminated {
            return Err(ContractViolation::AfterTermination { party: "alice" });
        }
        if self.awaiting {
            return Err(ContractViolation::OutOfOrder { party: "alice", detail: "two odd steps in a row" });
        }
        self.round += 1;
        self.awaiting = true;
        let token = if self.last_received.is_erasure() {
            ChannelToken::Silence
        } else {
            ChannelToken::symbol(protocol.next_bit(Role::Alice, x, self.transcript.bits()), parity(self.round))
        };
        Ok((self, token))
    }

    pub fn even_step(
        mut self,
        received: ChannelToken,
        x: &PartyInput,
        protocol: &Protocol,
    ) -> Result<Self, ContractViolation> {
        if self.terminated {
            return Err(ContractViolation::AfterTermination { party: "alice" });
        }
        if !self.awaiting {
            return Err(ContractViolation::OutOfOrder { party: "alice", detail: "even step before odd step" });
        }
        self.awaiting = false;
        match received {
            ChannelToken::Symbol(s) if s.parity == parity(self.round) => {
                if self.transcript.len() + 2 > protocol.len() {
                    return Err(ContractViolation::TranscriptOverflow);
                }
                let b = protocol.next_bit(Role::Alice, x, self.transcript.bits());
                self.transcript.push(b);
                self.transcript.push(s.info);
            }
            _ => self.round -= 1,
        }
        self.last_received = received;
        self.terminated = self.round == protocol.rounds();
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Phase {
    #[default]
    Simulating,
    Termination,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgsBob {
    pub transcript: Transcript,
    pub round: u32,
    pub b_send: bool,
    pub last_received: ChannelToken,
    pub phase: Phase,
    pub answering: bool,
}

impl Default for AgsBob {
    fn default() -> Self {
        AgsBob {
            transcript: Transcript::new(),
            round: 0,
            b_send: false,
            last_received: INITIAL,
            phase: Phase::Simulating,
            answering: false,
        }
    }
}

impl AgsBob {
    pub fn new() -> Self {
        Self::default()
    }

    /// Switches to the termination phase once N/2 rounds are simulated.
    pub fn odd_step(
        mut self,
        received: ChannelToken,
        y: &PartyInput,
        protocol: &Protocol,
    ) -> Result<Self, ContractViolation> {
        if self.answering {
            return Err(ContractViolation::OutOfOrder { party: "bob", detail: "two odd steps in a row" });
        }
        self.answering = true;
        if self.phase == Phase::Simulating && received.has_parity(!parity(self.round)) {
            let s = received.as_symbol().expect("parity implies symbol");
            if self.transcript.len() + 2 > protocol.len() {
                return Err(ContractViolation::TranscriptOverflow);
            }
            self.round += 1;
            self.transcript.push(s.info);
            self.b_send = protocol.next_bit(Role::Bob, y, self.transcript.bits());
            self.transcript.push(self.b_send);
            if self.round == protocol.rounds() {
                self.phase = Phase::Termination;
            }
        }
        self.last_received = received;
        Ok(self)
    }

    pub fn even_step(mut self) -> Result<(Self, ChannelToken), ContractViolation> {
        if !self.answering {
            return Err(ContractViolation::OutOfOrder { party: "bob", detail: "even step before odd step" });
        }
        self.answering = false;
        let answer = ChannelToken::symbol(self.b_send, parity(self.round));
        let token = match self.phase {
            Phase::Simulating if self.last_received.is_erasure() => ChannelToken::Silence,
            Phase::Simulating => answer,
            Phase::Termination if self.last_received.has_parity(parity(self.round)) => answer,
            Phase::Termination => ChannelToken::Silence,
        };
        Ok((self, token))
    }
}

/// Running communication and noise costs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostLedger {
    /// Alice's non-silent sends.
    pub c_a: u64,
    /// Bob's non-silent sends.
    pub c_b: u64,
    /// Erasures received by either party.
    pub c_ch: u64,
}

impl CostLedger {
    /// Accounts one timestep. Injected silence is never sent by a party.
    pub fn record(&mut self, sender: Role, sent: ChannelToken, received: ChannelToken) {
        if sent.is_symbol() {
            match sender {
                Role::Alice => self.c_a += 1,
                Role::Bob => self.c_b += 1,
            }
        }
        if received.is_erasure() {
            self.c_ch += 1;
        }
    }

    pub fn cc_sym(&self) -> u64 {
        self.c_a + self.c_b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se4() -> Protocol {
        Protocol::string_exchange(4).unwrap()
    }

    fn input(s: &str) -> PartyInput {
        s.parse().unwrap()
    }

    fn t(s: &str) -> Transcript {
        s.parse().unwrap()
    }

    #[test]
    fn alice_first_send() {
        let (a, tok) = AgsAlice::new().odd_step(&input("10"), &se4()).unwrap();
        assert_eq!(tok, ChannelToken::symbol(true, true));
        assert_eq!(a.round, 1);
        assert!(a.transcript.is_empty());
    }

    #[test]
    fn alice_silent_after_erasure_only() {
        let a = AgsAlice { last_received: ChannelToken::Erasure, ..Default::default() };
        let (_, tok) = a.odd_step(&input("10"), &se4()).unwrap();
        assert_eq!(tok, ChannelToken::Silence);
        let a = AgsAlice { last_received: ChannelToken::Silence, ..Default::default() };
        let (_, tok) = a.odd_step(&input("10"), &se4()).unwrap();
        assert!(tok.is_symbol());
    }

    #[test]
    fn alice_even_step() {
        let (a, _) = AgsAlice::new().odd_step(&input("10"), &se4()).unwrap();
        let ok = a.clone().even_step(ChannelToken::symbol(false, true), &input("10"), &se4()).unwrap();
        assert_eq!((ok.round, ok.transcript), (1, t("10")));
        let hush = a.clone().even_step(ChannelToken::Silence, &input("10"), &se4()).unwrap();
        assert_eq!((hush.round, hush.transcript.len()), (0, 0));
        let lost = a.even_step(ChannelToken::Erasure, &input("10"), &se4()).unwrap();
        assert_eq!(lost.round, 0);
        let (_, next) = lost.odd_step(&input("10"), &se4()).unwrap();
        assert_eq!(next, ChannelToken::Silence);
    }

    #[test]
    fn bob_accepts_next_parity() {
        let b = AgsBob::new().odd_step(ChannelToken::symbol(true, true), &input("01"), &se4()).unwrap();
        assert_eq!((b.round, b.transcript.clone()), (1, t("10")));
        let (_, tok) = b.even_step().unwrap();
        assert_eq!(tok, ChannelToken::symbol(false, true));
    }

    #[test]
    fn bob_silent_after_erasure() {
        let b = AgsBob::new().odd_step(ChannelToken::Erasure, &input("01"), &se4()).unwrap();
        assert_eq!(b.round, 0);
        let (_, tok) = b.even_step().unwrap();
        assert_eq!(tok, ChannelToken::Silence);
    }

    #[test]
    fn bob_repeats_on_stale() {
        let b = AgsBob { transcript: t("10"), round: 1, ..Default::default() };
        let b = b.odd_step(ChannelToken::symbol(true, true), &input("01"), &se4()).unwrap();
        assert_eq!(b.round, 1);
        let (_, tok) = b.even_step().unwrap();
        assert_eq!(tok, ChannelToken::symbol(false, true));
    }

    #[test]
    fn bob_termination_phase() {
        let b = AgsBob { transcript: t("10"), round: 1, b_send: false, ..Default::default() };
        let b = b.odd_step(ChannelToken::symbol(false, false), &input("01"), &se4()).unwrap();
        assert_eq!(b.phase, Phase::Termination);
        assert_eq!(b.transcript, t("1001"));
        let (b, tok) = b.even_step().unwrap();
        assert_eq!(tok, ChannelToken::symbol(true, false));
        for heard in [ChannelToken::Silence, ChannelToken::Erasure, ChannelToken::symbol(true, true)] {
            let (b2, tok) = b.clone().odd_step(heard, &input("01"), &se4()).unwrap().even_step().unwrap();
            assert_eq!(tok, ChannelToken::Silence);
            assert_eq!(b2.transcript, t("1001"));
        }
        let (_, tok) =
            b.odd_step(ChannelToken::symbol(true, false), &input("01"), &se4()).unwrap().even_step().unwrap();
        assert_eq!(tok, ChannelToken::symbol(true, false));
    }

    #[test]
    fn ledger_counts() {
        let mut l = CostLedger::default();
        l.record(Role::Alice, ChannelToken::symbol(true, true), ChannelToken::Erasure);
        l.record(Role::Bob, ChannelToken::Silence, ChannelToken::Silence);
        l.record(Role::Bob, ChannelToken::symbol(true, true), ChannelToken::symbol(true, true));
        assert_eq!(l, CostLedger { c_a: 1, c_b: 1, c_ch: 1 });
        assert_eq!(l.cc_sym(), 2);
    }
}

//! The challenge/response scheme for the setting where an active party must
//! speak in every one of its timesteps.
//!
//! Each round Alice sends her next bit tagged with the round parity and Bob
//! answers with his. Bob stores his last answer and repeats it whenever
//! Alice's token is erased or carries a stale parity. Alice rolls back her
//! last bit whenever Bob's answer is erased or stale. Bob exits on the first
//! silence he hears, which the simulator injects once Alice has exited.

use crate::bits::{PartyInput, Transcript};
use crate::channel::{ChannelToken, Symbol4};
use crate::error::ContractViolation;
use crate::protocol::{Protocol, Role};

const fn parity(round: u32) -> bool {
    round % 2 == 1
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixedAlice {
    pub transcript: Transcript,
    pub round: u32,
    pub terminated: bool,
    /// Sent this round, waiting for Bob's answer.
    pub awaiting: bool,
}

impl FixedAlice {
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
        if self.transcript.len() >= protocol.len() {
            return Err(ContractViolation::TranscriptOverflow);
        }
        self.round += 1;
        let b = protocol.next_bit(Role::Alice, x, self.transcript.bits());
        self.transcript.push(b);
        self.awaiting = true;
        let token = ChannelToken::symbol(b, parity(self.round));
        Ok((self, token))
    }

    /// Terminates once N/2 rounds are confirmed.
    pub fn even_step(mut self, received: ChannelToken, protocol: &Protocol) -> Result<Self, ContractViolation> {
        if self.terminated {
            return Err(ContractViolation::AfterTermination { party: "alice" });
        }
        if !self.awaiting {
            return Err(ContractViolation::OutOfOrder { party: "alice", detail: "even step before odd step" });
        }
        self.awaiting = false;
        match received {
            ChannelToken::Silence => return Err(ContractViolation::UnexpectedSilence),
            ChannelToken::Symbol(s) if s.parity == parity(self.round) => self.transcript.push(s.info),
            _ => {
                self.transcript.pop();
                self.round -= 1;
            }
        }
        self.terminated = self.round == protocol.rounds();
        Ok(self)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixedBob {
    pub transcript: Transcript,
    pub round: u32,
    pub err: bool,
    pub saved: Symbol4,
    pub terminated: bool,
    /// Heard Alice this round, owes an answer.
    pub answering: bool,
}

impl FixedBob {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn odd_step(mut self, received: ChannelToken) -> Result<Self, ContractViolation> {
        if self.terminated {
            return Err(ContractViolation::AfterTermination { party: "bob" });
        }
        if self.answering {
            return Err(ContractViolation::OutOfOrder { party: "bob", detail: "two odd steps in a row" });
        }
        match received {
            ChannelToken::Silence => {
                self.terminated = true;
                return Ok(self);
            }
            ChannelToken::Symbol(s) if s.parity != parity(self.round) => {
                self.transcript.push(s.info);
                self.err = false;
            }
            _ => self.err = true,
        }
        self.answering = true;
        Ok(self)
    }

    pub fn even_step(mut self, y: &PartyInput, protocol: &Protocol) -> Result<(Self, ChannelToken), ContractViolation> {
        if self.terminated {
            return Err(ContractViolation::AfterTermination { party: "bob" });
        }
        if !self.answering {
            return Err(ContractViolation::OutOfOrder { party: "bob", detail: "even step before odd step" });
        }
        self.answering = false;
        if !self.err {
            if self.transcript.len() >= protocol.len() {
                return Err(ContractViolation::TranscriptOverflow);
            }
            let b = protocol.next_bit(Role::Bob, y, self.transcript.bits());
            self.transcript.push(b);
            self.round += 1;
            self.saved = Symbol4::new(b, parity(self.round));
        }
        let token = ChannelToken::Symbol(self.saved);
        Ok((self, token))
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
    fn alice_first_round() {
        let (a, tok) = FixedAlice::new().odd_step(&input("10"), &se4()).unwrap();
        assert_eq!(tok, ChannelToken::symbol(true, true));
        assert_eq!((a.round, a.transcript.clone()), (1, t("1")));
        let a = a.even_step(ChannelToken::symbol(false, true), &se4()).unwrap();
        assert_eq!((a.round, a.transcript), (1, t("10")));
    }

    #[test]
    fn alice_second_round_parity_zero() {
        let a = FixedAlice { transcript: t("10"), round: 1, ..Default::default() };
        let (a, tok) = a.odd_step(&input("10"), &se4()).unwrap();
        assert_eq!(tok, ChannelToken::symbol(false, false));
        assert_eq!(a.round, 2);
    }

    #[test]
    fn alice_rolls_back_on_erasure_or_stale() {
        for reply in [ChannelToken::Erasure, ChannelToken::symbol(true, false)] {
            let (a, _) = FixedAlice::new().odd_step(&input("10"), &se4()).unwrap();
            let a = a.even_step(reply, &se4()).unwrap();
            assert_eq!((a.round, a.transcript.len()), (0, 0));
        }
    }

    #[test]
    fn alice_rejects_silence_and_misuse() {
        let (a, _) = FixedAlice::new().odd_step(&input("10"), &se4()).unwrap();
        assert_eq!(a.clone().even_step(ChannelToken::Silence, &se4()), Err(ContractViolation::UnexpectedSilence));
        assert!(a.odd_step(&input("10"), &se4()).is_err());
        let done = FixedAlice { terminated: true, ..Default::default() };
        assert!(done.odd_step(&input("10"), &se4()).is_err());
    }

    #[test]
    fn alice_never_silent() {
        let mut a = FixedAlice::new();
        for _ in 0..2 {
            let (next, tok) = a.odd_step(&input("11"), &se4()).unwrap();
            assert!(tok.is_symbol());
            let p = next.round % 2 == 1;
            a = next.even_step(ChannelToken::symbol(false, p), &se4()).unwrap();
        }
        assert!(a.terminated);
        assert_eq!(a.transcript, t("1010"));
    }

    #[test]
    fn bob_steps() {
        let b = FixedBob::new().odd_step(ChannelToken::symbol(true, true)).unwrap();
        assert_eq!((b.transcript.clone(), b.err), (t("1"), false));
        let (b, tok) = b.even_step(&input("01"), &se4()).unwrap();
        assert_eq!(tok, ChannelToken::symbol(false, true));
        assert_eq!((b.transcript, b.round), (t("10"), 1));
    }

    #[test]
    fn bob_repeats_saved_on_error() {
        let b = FixedBob::new().odd_step(ChannelToken::Erasure).unwrap();
        assert!(b.err);
        assert!(b.transcript.is_empty());
        let (b, tok) = b.even_step(&input("01"), &se4()).unwrap();
        assert_eq!(tok, ChannelToken::symbol(false, false));
        assert_eq!(b.round, 0);

        let b = FixedBob { transcript: t("10"), round: 1, saved: Symbol4::new(false, true), ..Default::default() };
        let b = b.odd_step(ChannelToken::symbol(true, true)).unwrap();
        assert!(b.err);
        let (b, tok) = b.even_step(&input("01"), &se4()).unwrap();
        assert_eq!(tok, ChannelToken::symbol(false, true));
        assert_eq!((b.round, b.transcript), (1, t("10")));
    }

    #[test]
    fn bob_exits_on_silence() {
        let b = FixedBob { transcript: t("10"), round: 1, ..Default::default() };
        let b = b.odd_step(ChannelToken::Silence).unwrap();
        assert!(b.terminated);
        assert_eq!(b.transcript, t("10"));
        assert!(b.odd_step(ChannelToken::Silence).is_err());
    }
}

//! The per-timestep erasure channel.
//!
//! Parties send [`ChannelToken`]s (a 4-ary symbol or silence). The channel
//! either delivers a token unchanged or replaces it with
//! [`ChannelToken::Erasure`]; it never substitutes content. Layered schemes
//! send several physical [`WireSlot`]s per token, and noise is applied per slot.

use alloc::collections::BTreeSet;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::error::ContractViolation;
use crate::protocol::Role;

/// A 4-ary channel symbol: one information bit plus the round parity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Symbol4 {
    pub info: bool,
    pub parity: bool,
}

impl Symbol4 {
    pub const fn new(info: bool, parity: bool) -> Self {
        Symbol4 { info, parity }
    }

    /// `info + 2 * parity`, in `0..4`.
    pub const fn index(self) -> u8 {
        self.info as u8 + 2 * self.parity as u8
    }

    pub const fn from_index(i: u8) -> Option<Self> {
        if i < 4 {
            Some(Symbol4 { info: i & 1 == 1, parity: i & 2 == 2 })
        } else {
            None
        }
    }

    pub fn all() -> impl Iterator<Item = Symbol4> {
        (0..4).filter_map(Symbol4::from_index)
    }
}

/// What one timestep carries at the 4-ary layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelToken {
    Symbol(Symbol4),
    Silence,
    /// Produced only by the channel; never sent.
    Erasure,
}

impl ChannelToken {
    pub const fn symbol(info: bool, parity: bool) -> Self {
        ChannelToken::Symbol(Symbol4::new(info, parity))
    }

    pub const fn as_symbol(self) -> Option<Symbol4> {
        match self {
            ChannelToken::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub const fn is_symbol(self) -> bool {
        matches!(self, ChannelToken::Symbol(_))
    }

    pub const fn is_erasure(self) -> bool {
        matches!(self, ChannelToken::Erasure)
    }

    pub const fn is_silence(self) -> bool {
        matches!(self, ChannelToken::Silence)
    }

    /// True iff this is a symbol carrying `parity`. Silence and erasures
    /// carry no parity and always fail the test.
    pub fn has_parity(self, parity: bool) -> bool {
        matches!(self, ChannelToken::Symbol(s) if s.parity == parity)
    }

    /// The five tokens a party may put on the channel.
    pub fn sendable() -> impl Iterator<Item = ChannelToken> {
        Symbol4::all().map(ChannelToken::Symbol).chain(core::iter::once(ChannelToken::Silence))
    }
}

impl fmt::Display for ChannelToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelToken::Symbol(s) => write!(f, "({},{})", s.info as u8, s.parity as u8),
            ChannelToken::Silence => f.write_str("silence"),
            ChannelToken::Erasure => f.write_str("erasure"),
        }
    }
}

/// Error parsing a [`ChannelToken`] from its display form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid channel token {0:?}")]
pub struct ParseTokenError(pub String);

impl FromStr for ChannelToken {
    type Err = ParseTokenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseTokenError(s.into());
        match s {
            "silence" => Ok(ChannelToken::Silence),
            "erasure" => Ok(ChannelToken::Erasure),
            _ => {
                let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
                let (i, p) = inner.split_once(',').ok_or_else(bad)?;
                let bit = |v: &str| match v.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(bad()),
                };
                Ok(ChannelToken::symbol(bit(i)?, bit(p)?))
            }
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ChannelToken {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for ChannelToken {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One use of the erasure channel.
///
/// Silence is erasable like any symbol. Sending an erasure mark is a
/// contract violation.
pub fn transmit(token: ChannelToken, erase: bool) -> Result<ChannelToken, ContractViolation> {
    if token.is_erasure() {
        return Err(ContractViolation::SendErasure);
    }
    Ok(if erase { ChannelToken::Erasure } else { token })
}

/// A finite set of erased global timesteps (1-based).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoisePattern {
    erase: BTreeSet<u64>,
}

impl NoisePattern {
    pub fn none() -> Self {
        NoisePattern::default()
    }

    pub fn contains(&self, t: u64) -> bool {
        self.erase.contains(&t)
    }

    pub fn len(&self) -> usize {
        self.erase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erase.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.erase.iter().copied()
    }

    pub fn insert(&mut self, t: u64) -> bool {
        self.erase.insert(t)
    }

    pub fn last(&self) -> Option<u64> {
        self.erase.last().copied()
    }
}

impl FromIterator<u64> for NoisePattern {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        NoisePattern { erase: iter.into_iter().collect() }
    }
}

impl fmt::Display for NoisePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.erase.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}

/// What occupies one physical channel use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WireSlot {
    /// A whole 4-ary token (schemes without a lower layer).
    Token(ChannelToken),
    /// One bit of a binary codeword.
    Bit(bool),
    /// Unary energy.
    Energy,
    /// An idle slot: silence in the binary and unary layers.
    Silent,
}

impl WireSlot {
    /// Single-character rendering used in traces: `0`/`1` bits, `1`/`0`
    /// energy and idle in unary blocks, `-` idle in binary words.
    pub fn glyph(self, unary: bool) -> char {
        match self {
            WireSlot::Bit(false) => '0',
            WireSlot::Bit(true) | WireSlot::Energy => '1',
            WireSlot::Silent if unary => '0',
            WireSlot::Silent => '-',
            WireSlot::Token(_) => '#',
        }
    }
}

/// A physical channel use as seen by an online adversary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelUse {
    pub timestep: u64,
    pub sender: Role,
    pub sent: WireSlot,
    pub erased: bool,
}

/// An online noise strategy with a finite erasure budget.
///
/// The simulator asks `decide` once per physical channel use, in timestep
/// order, and never erases once `budget()` erasures have been spent.
pub trait Adversary {
    fn budget(&self) -> u64;

    fn decide(&mut self, timestep: u64, in_flight: &WireSlot, history: &[ChannelUse]) -> bool;

    /// Whether `decide` reads the history. The simulator skips recording
    /// it for oblivious strategies.
    fn observes_history(&self) -> bool {
        true
    }
}

/// The adversary induced by a static pattern: erase iff the timestep is listed.
#[derive(Clone, Debug)]
pub struct PatternAdversary {
    pattern: NoisePattern,
}

impl PatternAdversary {
    pub fn new(pattern: NoisePattern) -> Self {
        PatternAdversary { pattern }
    }
}

impl Adversary for PatternAdversary {
    fn budget(&self) -> u64 {
        self.pattern.len() as u64
    }

    fn decide(&mut self, timestep: u64, _: &WireSlot, _: &[ChannelUse]) -> bool {
        self.pattern.contains(timestep)
    }

    fn observes_history(&self) -> bool {
        false
    }
}

/// Spends the budget as early as possible, one corrupted round at a time.
///
/// In every round it erases the first `per_round` channel uses (the start of
/// Alice's transmission), which is the fewest erasures that make her
/// round-opening token undecodable. Each such round is wasted entirely.
#[derive(Clone, Debug)]
pub struct GreedyAdversary {
    budget: u64,
    round_len: u64,
    per_round: u64,
}

impl GreedyAdversary {
    /// `slots_per_token` physical uses per 4-ary timestep; `per_round`
    /// erasures spent at the start of each round.
    pub fn new(budget: u64, slots_per_token: u64, per_round: u64) -> Self {
        GreedyAdversary { budget, round_len: 2 * slots_per_token, per_round }
    }
}

impl Adversary for GreedyAdversary {
    fn budget(&self) -> u64 {
        self.budget
    }

    fn decide(&mut self, timestep: u64, _: &WireSlot, _: &[ChannelUse]) -> bool {
        (timestep - 1) % self.round_len < self.per_round
    }

    fn observes_history(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec::Vec;

    #[test]
    fn transmit_identity_and_erasure() {
        let s10 = ChannelToken::symbol(true, false);
        assert_eq!(transmit(s10, false), Ok(s10));
        assert_eq!(transmit(ChannelToken::Silence, true), Ok(ChannelToken::Erasure));
        assert_eq!(transmit(ChannelToken::symbol(false, true), true), Ok(ChannelToken::Erasure));
        assert_eq!(transmit(ChannelToken::Erasure, false), Err(ContractViolation::SendErasure));
    }

    #[test]
    fn transmit_never_substitutes() {
        for token in ChannelToken::sendable() {
            for erase in [false, true] {
                let out = transmit(token, erase).unwrap();
                assert!(out == token || out == ChannelToken::Erasure);
            }
        }
    }

    #[test]
    fn token_text_round_trip() {
        for token in ChannelToken::sendable().chain([ChannelToken::Erasure]) {
            assert_eq!(token.to_string().parse::<ChannelToken>(), Ok(token));
        }
        assert!("(2,0)".parse::<ChannelToken>().is_err());
        assert!("quiet".parse::<ChannelToken>().is_err());
    }

    #[test]
    fn symbol_index() {
        let idx: Vec<u8> = Symbol4::all().map(Symbol4::index).collect();
        assert_eq!(idx, [0, 1, 2, 3]);
        assert_eq!(Symbol4::new(true, false).index(), 1);
        assert_eq!(Symbol4::new(false, true).index(), 2);
        assert_eq!(Symbol4::from_index(4), None);
    }

    #[test]
    fn parity_test_rejects_non_symbols() {
        assert!(!ChannelToken::Silence.has_parity(false));
        assert!(!ChannelToken::Erasure.has_parity(true));
        assert!(ChannelToken::symbol(false, true).has_parity(true));
    }

    #[test]
    fn greedy_hits_round_starts() {
        let mut g = GreedyAdversary::new(10, 1, 1);
        let hits: Vec<u64> = (1..=8).filter(|&t| g.decide(t, &WireSlot::Silent, &[])).collect();
        assert_eq!(hits, [1, 3, 5, 7]);
        let mut g3 = GreedyAdversary::new(10, 3, 2);
        let hits: Vec<u64> = (1..=12).filter(|&t| g3.decide(t, &WireSlot::Silent, &[])).collect();
        assert_eq!(hits, [1, 2, 7, 8]);
    }

    #[test]
    fn pattern_display() {
        let p: NoisePattern = [3, 1].into_iter().collect();
        assert_eq!(p.to_string(), "{1,3}");
        assert_eq!(p.len(), 2);
    }
}

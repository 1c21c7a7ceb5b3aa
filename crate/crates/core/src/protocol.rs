//! Noiseless alternating protocols, represented as next-bit oracles.
//!
//! The coding schemes only ever ask "what bit does this party send next, given
//! its input and the transcript so far", so a protocol is a length plus a
//! [`BitOracle`]. Raw protocols with an arbitrary speaking order are turned
//! into alternating, even-length ones by [`normalize`].

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::{PartyInput, Transcript};
use crate::error::ProtocolError;

/// Which party holds a given position or timestep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    /// Speaker of 0-based transcript position `pos` in an alternating protocol.
    pub const fn of_position(pos: usize) -> Role {
        if pos.is_multiple_of(2) {
            Role::Alice
        } else {
            Role::Bob
        }
    }

    /// Sender of 1-based global timestep `t`: odd timesteps are Alice's.
    pub const fn of_timestep(t: u64) -> Role {
        if t % 2 == 1 {
            Role::Alice
        } else {
            Role::Bob
        }
    }

    pub const fn peer(self) -> Role {
        match self {
            Role::Alice => Role::Bob,
            Role::Bob => Role::Alice,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The next-bit function of a protocol. Must be pure.
pub trait BitOracle: Send + Sync {
    fn next_bit(&self, role: Role, input: &PartyInput, prefix: &[bool]) -> bool;
}

/// Adapts a closure into a [`BitOracle`].
pub struct FnOracle<F>(pub F);

impl<F> BitOracle for FnOracle<F>
where
    F: Fn(Role, &PartyInput, &[bool]) -> bool + Send + Sync,
{
    fn next_bit(&self, role: Role, input: &PartyInput, prefix: &[bool]) -> bool {
        (self.0)(role, input, prefix)
    }
}

/// Each party sends its own input bit for the current round: in round `r`
/// Alice sends `x_r` and Bob sends `y_r`.
#[derive(Clone, Copy, Debug, Default)]
pub struct StringExchange;

impl BitOracle for StringExchange {
    fn next_bit(&self, _role: Role, input: &PartyInput, prefix: &[bool]) -> bool {
        input.bit_or_zero(prefix.len() / 2)
    }
}

/// Always sends the same bit.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub bool);

impl BitOracle for Constant {
    fn next_bit(&self, _: Role, _: &PartyInput, _: &[bool]) -> bool {
        self.0
    }
}

/// A pseudo-random function of (role, input, prefix), keyed by a seed.
///
/// Behaves like a uniformly random input-dependent protocol table without
/// materializing it, which is what large fuzzing runs need.
#[derive(Clone, Copy, Debug)]
pub struct HashOracle {
    pub seed: u64,
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl BitOracle for HashOracle {
    fn next_bit(&self, role: Role, input: &PartyInput, prefix: &[bool]) -> bool {
        let mut h = mix(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        h = mix(h ^ role as u64 ^ ((input.len() as u64) << 8));
        for chunk in input.bits().chunks(64).chain(prefix.chunks(64)) {
            let word = chunk.iter().fold(0u64, |acc, &b| acc << 1 | b as u64);
            h = mix(h.wrapping_add(word) ^ chunk.len() as u64);
        }
        h = mix(h ^ prefix.len() as u64);
        h & 1 == 1
    }
}

/// Largest table protocol (in bits) that [`TableOracle`] will materialize.
pub const MAX_TABLE_BITS: usize = 24;

/// A full table from transcript prefix to next bit.
///
/// Entries are stored in a bitset indexed by `2^len + value(prefix)`, with the
/// first transcript bit most significant. Prefixes without an entry map to 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableOracle {
    n_bits: usize,
    words: Vec<u64>,
}

impl TableOracle {
    fn word_count(n_bits: usize) -> usize {
        (1usize << n_bits).div_ceil(64)
    }

    fn check_size(n_bits: usize) -> Result<(), ProtocolError> {
        if n_bits == 0 {
            return Err(ProtocolError::Empty);
        }
        if n_bits > MAX_TABLE_BITS {
            return Err(ProtocolError::TableTooLarge { got: n_bits, max: MAX_TABLE_BITS });
        }
        Ok(())
    }

    /// An all-zero table.
    pub fn zeros(n_bits: usize) -> Result<Self, ProtocolError> {
        Self::check_size(n_bits)?;
        Ok(TableOracle { n_bits, words: alloc::vec![0; Self::word_count(n_bits)] })
    }

    /// A table whose bitset is filled from `words`, e.g. a random stream.
    pub fn from_words(n_bits: usize, words: impl IntoIterator<Item = u64>) -> Result<Self, ProtocolError> {
        let mut table = Self::zeros(n_bits)?;
        for (slot, w) in table.words.iter_mut().zip(words) {
            *slot = w;
        }
        Ok(table)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    fn index(prefix: &[bool]) -> usize {
        prefix.iter().fold(1usize, |acc, &b| acc << 1 | b as usize)
    }

    pub fn set(&mut self, prefix: &[bool], bit: bool) -> Result<(), ProtocolError> {
        if prefix.len() >= self.n_bits {
            return Err(ProtocolError::KeyTooLong {
                key: Transcript::from_bits(prefix.to_vec()).to_bit_string(),
                n_bits: self.n_bits,
            });
        }
        let i = Self::index(prefix);
        if bit {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
        Ok(())
    }

    pub fn get(&self, prefix: &[bool]) -> bool {
        if prefix.len() >= self.n_bits {
            return false;
        }
        let i = Self::index(prefix);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }
}

impl BitOracle for TableOracle {
    fn next_bit(&self, _: Role, _: &PartyInput, prefix: &[bool]) -> bool {
        self.get(prefix)
    }
}

/// A protocol with an arbitrary (fixed) speaking order, before normalization.
#[derive(Clone)]
pub struct RawProtocol {
    speakers: Vec<Role>,
    oracle: Arc<dyn BitOracle>,
}

impl RawProtocol {
    pub fn new(speakers: Vec<Role>, oracle: Arc<dyn BitOracle>) -> Self {
        RawProtocol { speakers, oracle }
    }

    /// `n` bits with Alice speaking first and the parties alternating.
    pub fn alternating(n: usize, oracle: Arc<dyn BitOracle>) -> Self {
        RawProtocol { speakers: (0..n).map(Role::of_position).collect(), oracle }
    }

    pub fn len(&self) -> usize {
        self.speakers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speakers.is_empty()
    }

    pub fn speakers(&self) -> &[Role] {
        &self.speakers
    }

    pub fn oracle(&self) -> &Arc<dyn BitOracle> {
        &self.oracle
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Real,
    Pad,
}

/// A normalized noiseless protocol: alternating, Alice first, even length
/// (so Bob sends the last bit).
///
/// Padding positions introduced by [`normalize`] always carry 0 and can be
/// stripped from a transcript with [`Protocol::strip_padding`].
#[derive(Clone)]
pub struct Protocol {
    slots: Arc<[Slot]>,
    padded: bool,
    oracle: Arc<dyn BitOracle>,
}

impl fmt::Debug for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Protocol")
            .field("n_bits", &self.len())
            .field("padding", &self.padding_positions().collect::<Vec<_>>())
            .finish()
    }
}

impl Protocol {
    /// Wraps an oracle that already alternates. `n` must be positive and even.
    pub fn alternating(n: usize, oracle: Arc<dyn BitOracle>) -> Result<Self, ProtocolError> {
        if n == 0 {
            return Err(ProtocolError::Empty);
        }
        if n % 2 == 1 {
            return Err(ProtocolError::OddLength(n));
        }
        Ok(Protocol { slots: alloc::vec![Slot::Real; n].into(), padded: false, oracle })
    }

    pub fn string_exchange(n: usize) -> Result<Self, ProtocolError> {
        Self::alternating(n, Arc::new(StringExchange))
    }

    pub fn constant(n: usize, bit: bool) -> Result<Self, ProtocolError> {
        Self::alternating(n, Arc::new(Constant(bit)))
    }

    pub fn table(table: TableOracle) -> Result<Self, ProtocolError> {
        let n = table.n_bits();
        Self::alternating(n, Arc::new(table))
    }

    pub fn hashed(n: usize, seed: u64) -> Result<Self, ProtocolError> {
        Self::alternating(n, Arc::new(HashOracle { seed }))
    }

    /// Length N in bits.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Number of rounds, N/2.
    pub fn rounds(&self) -> u32 {
        (self.slots.len() / 2) as u32
    }

    pub fn is_padding(&self, pos: usize) -> bool {
        self.slots.get(pos) == Some(&Slot::Pad)
    }

    pub fn padding_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().enumerate().filter(|(_, s)| **s == Slot::Pad).map(|(i, _)| i)
    }

    /// The bit `role` sends after `prefix`.
    pub fn next_bit(&self, role: Role, input: &PartyInput, prefix: &[bool]) -> bool {
        if !self.padded {
            return self.oracle.next_bit(role, input, prefix);
        }
        if self.is_padding(prefix.len()) {
            return false;
        }
        let raw: Vec<bool> =
            prefix.iter().zip(self.slots.iter()).filter(|(_, s)| **s == Slot::Real).map(|(b, _)| *b).collect();
        self.oracle.next_bit(role, input, &raw)
    }

    /// Drops the padding positions, recovering the raw protocol's transcript.
    pub fn strip_padding(&self, t: &Transcript) -> Transcript {
        Transcript::from_bits(
            t.bits().iter().enumerate().filter(|(i, _)| !self.is_padding(*i)).map(|(_, b)| *b).collect(),
        )
    }

    /// This protocol viewed as a raw protocol (alternating speakers).
    pub fn to_raw(&self) -> RawProtocol {
        RawProtocol::alternating(self.len(), Arc::new(self.clone()))
    }
}

impl BitOracle for Protocol {
    fn next_bit(&self, role: Role, input: &PartyInput, prefix: &[bool]) -> bool {
        Protocol::next_bit(self, role, input, prefix)
    }
}

/// Makes a raw protocol alternating with Alice first and Bob last.
///
/// Wherever the raw order has the wrong speaker, a constant-0 bit from the
/// other party is inserted; an odd total gets one trailing pad from Bob. The
/// result has at most 2N bits and its non-pad positions replay the raw
/// protocol exactly.
pub fn normalize(raw: &RawProtocol) -> Result<Protocol, ProtocolError> {
    if raw.is_empty() {
        return Err(ProtocolError::Empty);
    }
    let mut slots = Vec::with_capacity(2 * raw.len());
    for &speaker in raw.speakers() {
        if Role::of_position(slots.len()) != speaker {
            slots.push(Slot::Pad);
        }
        slots.push(Slot::Real);
    }
    if slots.len() % 2 == 1 {
        slots.push(Slot::Pad);
    }
    let padded = slots.len() != raw.len();
    Ok(Protocol { slots: slots.into(), padded, oracle: raw.oracle().clone() })
}

/// Noise-free alternating execution of `protocol` on `(x, y)`.
pub fn reference_transcript(protocol: &Protocol, x: &PartyInput, y: &PartyInput) -> Transcript {
    let mut t = Transcript::new();
    for pos in 0..protocol.len() {
        let role = Role::of_position(pos);
        let input = if role == Role::Alice { x } else { y };
        let bit = protocol.next_bit(role, input, t.bits());
        t.push(bit);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn input(s: &str) -> PartyInput {
        s.parse().unwrap()
    }

    #[test]
    fn string_exchange_reference() {
        let p = Protocol::string_exchange(4).unwrap();
        let t = reference_transcript(&p, &input("10"), &input("01"));
        assert_eq!(t.to_string(), "1001");
    }

    #[test]
    fn empty_protocol_rejected() {
        assert_eq!(Protocol::string_exchange(0).unwrap_err(), ProtocolError::Empty);
        let raw = RawProtocol::new(Vec::new(), Arc::new(Constant(false)));
        assert_eq!(normalize(&raw).unwrap_err(), ProtocolError::Empty);
    }

    #[test]
    fn odd_alternating_rejected() {
        assert_eq!(Protocol::string_exchange(3).unwrap_err(), ProtocolError::OddLength(3));
    }

    #[test]
    fn constant_protocol_is_all_zero() {
        let p = Protocol::constant(6, false).unwrap();
        let t = reference_transcript(&p, &input("101"), &input("111"));
        assert_eq!(t.to_string(), "000000");
    }

    #[test]
    fn normalize_identity_when_already_alternating() {
        let raw = RawProtocol::alternating(4, Arc::new(StringExchange));
        let p = normalize(&raw).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.padding_positions().count(), 0);
        let t = reference_transcript(&p, &input("10"), &input("01"));
        assert_eq!(t.to_string(), "1001");
    }

    #[test]
    fn normalize_pads_odd_length_with_bob_zero() {
        let raw = RawProtocol::alternating(3, Arc::new(Constant(true)));
        let p = normalize(&raw).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.padding_positions().collect::<Vec<_>>(), [3]);
        assert_eq!(Role::of_position(3), Role::Bob);
        let t = reference_transcript(&p, &input("1"), &input("1"));
        assert_eq!(t.to_string(), "1110");
    }

    /// Direct replay of a raw protocol in its own speaking order.
    fn replay_raw(raw: &RawProtocol, x: &PartyInput, y: &PartyInput) -> Transcript {
        let mut t = Transcript::new();
        for &speaker in raw.speakers() {
            let input = if speaker == Role::Alice { x } else { y };
            let b = raw.oracle().next_bit(speaker, input, t.bits());
            t.push(b);
        }
        t
    }

    #[test]
    fn normalize_interleaves_dummy_bits() {
        // Alice sends her two input bits back to back, then Bob answers with
        // the xor of everything he has seen.
        let oracle = FnOracle(|role: Role, input: &PartyInput, prefix: &[bool]| match role {
            Role::Alice => input.bit_or_zero(prefix.len()),
            Role::Bob => prefix.iter().fold(input.bit_or_zero(0), |a, b| a ^ b),
        });
        let raw = RawProtocol::new(alloc::vec![Role::Alice, Role::Alice, Role::Bob], Arc::new(oracle));
        let p = normalize(&raw).unwrap();
        assert!(p.len() <= 2 * raw.len());
        assert_eq!(p.len() % 2, 0);
        assert_eq!(p.padding_positions().collect::<Vec<_>>(), [1]);
        for x in PartyInput::all(2) {
            for y in PartyInput::all(1) {
                let expected = replay_raw(&raw, &x, &y);
                let got = reference_transcript(&p, &x, &y);
                assert_eq!(p.strip_padding(&got), expected, "x={x} y={y}");
                for pos in p.padding_positions() {
                    assert!(!got.bits()[pos]);
                }
            }
        }
    }

    #[test]
    fn table_oracle_entries() {
        let mut table = TableOracle::zeros(4).unwrap();
        table.set(&[], true).unwrap();
        table.set(&[true, false, true], true).unwrap();
        assert!(table.get(&[]));
        assert!(!table.get(&[true]));
        assert!(table.get(&[true, false, true]));
        assert!(table.set(&[true; 4], true).is_err());
        assert!(TableOracle::zeros(MAX_TABLE_BITS + 1).is_err());
    }

    fn speakers() -> impl Strategy<Value = Vec<Role>> {
        prop::collection::vec(prop_oneof![Just(Role::Alice), Just(Role::Bob)], 1..12)
    }

    proptest! {
        #[test]
        fn reference_has_length_n(seed in any::<u64>(), half in 1usize..12, xv in any::<u16>(), yv in any::<u16>()) {
            let p = Protocol::hashed(2 * half, seed).unwrap();
            let x = PartyInput::from_bits((0..half).map(|i| xv >> i & 1 == 1).collect());
            let y = PartyInput::from_bits((0..half).map(|i| yv >> i & 1 == 1).collect());
            let t = reference_transcript(&p, &x, &y);
            prop_assert_eq!(t.len(), 2 * half);
            prop_assert_eq!(reference_transcript(&p, &x, &y), t);
        }

        #[test]
        fn normalize_is_idempotent(order in speakers(), seed in any::<u64>(), xv in any::<u8>(), yv in any::<u8>()) {
            let raw = RawProtocol::new(order, Arc::new(HashOracle { seed }));
            let once = normalize(&raw).unwrap();
            let twice = normalize(&once.to_raw()).unwrap();
            prop_assert_eq!(once.len(), twice.len());
            prop_assert_eq!(twice.padding_positions().count(), 0);
            prop_assert!(once.len() <= 2 * raw.len());
            let x = PartyInput::from_bits((0..8).map(|i| xv >> i & 1 == 1).collect());
            let y = PartyInput::from_bits((0..8).map(|i| yv >> i & 1 == 1).collect());
            let a = reference_transcript(&once, &x, &y);
            prop_assert_eq!(&reference_transcript(&twice, &x, &y), &a);
            prop_assert_eq!(once.strip_padding(&a), replay_raw(&raw, &x, &y));
        }
    }
}

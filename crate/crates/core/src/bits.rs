//! Bit strings: transcripts and party inputs.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::ProtocolError;

fn parse_bits(s: &str) -> Result<Vec<bool>, ProtocolError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(ProtocolError::InvalidBit(other)),
        })
        .collect()
}

fn write_bits(bits: &[bool], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for &b in bits {
        f.write_str(if b { "1" } else { "0" })?;
    }
    Ok(())
}

/// A (partial) transcript of a noiseless protocol: the bits exchanged so far.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transcript(Vec<bool>);

impl Transcript {
    pub const fn new() -> Self {
        Transcript(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Transcript(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn pop(&mut self) -> Option<bool> {
        self.0.pop()
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    pub fn is_prefix_of(&self, other: &Transcript) -> bool {
        other.0.starts_with(&self.0)
    }

    /// The first `len` bits, or `None` if the transcript is shorter.
    pub fn prefix(&self, len: usize) -> Option<Transcript> {
        self.0.get(..len).map(|s| Transcript(s.to_vec()))
    }

    pub fn to_bit_string(&self) -> String {
        alloc::format!("{self}")
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(&self.0, f)
    }
}

impl fmt::Debug for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transcript(\"{self}\")")
    }
}

impl FromStr for Transcript {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bits(s).map(Transcript)
    }
}

/// A party's private input.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct PartyInput(Vec<bool>);

impl PartyInput {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        PartyInput(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bit `i`, reading missing positions as 0.
    pub fn bit_or_zero(&self, i: usize) -> bool {
        self.0.get(i).copied().unwrap_or(false)
    }

    /// All inputs of `n` bits, in numeric order (MSB first).
    pub fn all(n: usize) -> impl Iterator<Item = PartyInput> {
        (0u64..1 << n).map(move |v| PartyInput((0..n).map(|i| v >> (n - 1 - i) & 1 == 1).collect()))
    }
}

impl fmt::Display for PartyInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(&self.0, f)
    }
}

impl fmt::Debug for PartyInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartyInput(\"{self}\")")
    }
}

impl FromStr for PartyInput {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bits(s).map(PartyInput)
    }
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for Transcript {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.collect_str(self)
        }
    }

    impl<'de> Deserialize<'de> for Transcript {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let s = String::deserialize(d)?;
            s.parse().map_err(D::Error::custom)
        }
    }

    impl Serialize for PartyInput {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.collect_str(self)
        }
    }

    impl<'de> Deserialize<'de> for PartyInput {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let s = String::deserialize(d)?;
            s.parse().map_err(D::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn parse_and_display() {
        let t: Transcript = "1001".parse().unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.to_string(), "1001");
        assert_eq!("10a".parse::<Transcript>(), Err(ProtocolError::InvalidBit('a')));
        assert_eq!("".parse::<Transcript>().unwrap(), Transcript::new());
    }

    #[test]
    fn prefixes() {
        let t: Transcript = "1001".parse().unwrap();
        let p: Transcript = "10".parse().unwrap();
        assert!(p.is_prefix_of(&t));
        assert!(!t.is_prefix_of(&p));
        assert_eq!(t.prefix(2), Some(p));
        assert_eq!(t.prefix(5), None);
    }

    #[test]
    fn enumerate_inputs() {
        let all: Vec<_> = PartyInput::all(2).map(|x| x.to_string()).collect();
        assert_eq!(all, ["00", "01", "10", "11"]);
        assert_eq!(PartyInput::all(0).count(), 1);
    }
}

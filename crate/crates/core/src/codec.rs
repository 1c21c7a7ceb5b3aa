//! Lower layers carrying 4-ary tokens over binary or unary channel uses.
//!
//! ECC-3 codeword map: `(0,0)->000`, `(1,0)->011`, `(0,1)->110`,
//! `(1,1)->101` (info, parity). The code has minimum distance 2, so any single
//! erased bit is recoverable.
//!
//! Silence in the binary layers is a word of idle slots. Received words are
//! decoded slot by slot with `None` marking an erased slot. In the 2-bit
//! layer any erased slot erases the whole word, silence included; in ECC-3 a
//! single visible idle slot identifies silence.

use crate::channel::{ChannelToken, Symbol4, WireSlot};
use crate::error::ContractViolation;
use crate::unary::{decode_block, encode_block, UnaryBlock, UnarySlot};

pub fn encode_binary2(s: Symbol4) -> [bool; 2] {
    [s.info, s.parity]
}

/// Any erased bit makes the word undecodable.
pub fn decode_binary2(word: [Option<bool>; 2]) -> ChannelToken {
    match word {
        [Some(info), Some(parity)] => ChannelToken::symbol(info, parity),
        _ => ChannelToken::Erasure,
    }
}

pub const ECC3_CODE: [[bool; 3]; 4] =
    [[false, false, false], [false, true, true], [true, true, false], [true, false, true]];

pub fn encode_ecc3(s: Symbol4) -> [bool; 3] {
    ECC3_CODE[s.index() as usize]
}

/// The unique codeword consistent with the unerased bits, else an erasure.
///
/// A fully visible word outside the code is a contract violation.
pub fn decode_ecc3(word: [Option<bool>; 3]) -> Result<ChannelToken, ContractViolation> {
    let consistent = |cw: &[bool; 3]| word.iter().zip(cw).all(|(r, c)| r.is_none_or(|b| b == *c));
    let mut matches = (0u8..4).filter(|&i| consistent(&ECC3_CODE[i as usize]));
    match (matches.next(), matches.next()) {
        (Some(i), None) => Ok(ChannelToken::Symbol(Symbol4::from_index(i).expect("index < 4"))),
        (None, _) if word.iter().all(Option::is_some) => Err(ContractViolation::NotACodeword),
        _ => Ok(ChannelToken::Erasure),
    }
}

/// The physical slots carrying one 4-ary token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    slots: [WireSlot; 4],
    len: u8,
}

impl Word {
    fn from_slice(slots: &[WireSlot]) -> Self {
        let mut w = Word { slots: [WireSlot::Silent; 4], len: slots.len() as u8 };
        w.slots[..slots.len()].copy_from_slice(slots);
        w
    }

    pub fn as_slice(&self) -> &[WireSlot] {
        &self.slots[..self.len as usize]
    }
}

/// How a 4-ary token is carried on the physical channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
    Direct,
    Binary2,
    Ecc3,
    Unary,
}

impl Layer {
    /// Physical channel uses per 4-ary timestep.
    pub const fn width(self) -> usize {
        match self {
            Layer::Direct => 1,
            Layer::Binary2 => 2,
            Layer::Ecc3 => 3,
            Layer::Unary => 4,
        }
    }

    /// Fewest erased slots that can make a symbol undecodable.
    pub const fn threshold(self) -> usize {
        match self {
            Layer::Ecc3 => 2,
            _ => 1,
        }
    }

    pub fn encode(self, token: ChannelToken) -> Result<Word, ContractViolation> {
        if token.is_erasure() {
            return Err(ContractViolation::SendErasure);
        }
        let bits = |bs: &[bool]| {
            let mut w = Word::from_slice(&[WireSlot::Silent; 3][..bs.len()]);
            for (slot, &b) in w.slots.iter_mut().zip(bs) {
                *slot = WireSlot::Bit(b);
            }
            w
        };
        Ok(match (self, token) {
            (Layer::Direct, t) => Word::from_slice(&[WireSlot::Token(t)]),
            (Layer::Binary2 | Layer::Ecc3, ChannelToken::Silence) => {
                Word::from_slice(&[WireSlot::Silent; 3][..self.width()])
            }
            (Layer::Binary2, ChannelToken::Symbol(s)) => bits(&encode_binary2(s)),
            (Layer::Ecc3, ChannelToken::Symbol(s)) => bits(&encode_ecc3(s)),
            (Layer::Unary, t) => {
                let block = encode_block(t)?;
                let mut w = Word::from_slice(&[WireSlot::Silent; 4]);
                for (slot, u) in w.slots.iter_mut().zip(block.0) {
                    if u == UnarySlot::Energy {
                        *slot = WireSlot::Energy;
                    }
                }
                w
            }
            (_, ChannelToken::Erasure) => unreachable!(),
        })
    }

    /// Decodes one received word of `width()` slots.
    pub fn decode(self, word: &[Option<WireSlot>]) -> Result<ChannelToken, ContractViolation> {
        if word.len() != self.width() {
            return Err(ContractViolation::ForeignSlot("word length"));
        }
        match self {
            Layer::Direct => match word[0] {
                None => Ok(ChannelToken::Erasure),
                Some(WireSlot::Token(t)) => Ok(t),
                Some(_) => Err(ContractViolation::ForeignSlot("direct layer carries tokens")),
            },
            Layer::Binary2 | Layer::Ecc3 => self.decode_binary(word),
            Layer::Unary => {
                let mut block = UnaryBlock::SILENT;
                for (out, slot) in block.0.iter_mut().zip(word) {
                    *out = match slot {
                        None => UnarySlot::Erased,
                        Some(WireSlot::Energy) => UnarySlot::Energy,
                        Some(WireSlot::Silent) => UnarySlot::Silent,
                        Some(_) => return Err(ContractViolation::ForeignSlot("unary layer carries energy")),
                    };
                }
                Ok(decode_block(&block))
            }
        }
    }

    fn decode_binary(self, word: &[Option<WireSlot>]) -> Result<ChannelToken, ContractViolation> {
        if self == Layer::Binary2 && word.contains(&None) {
            return Ok(ChannelToken::Erasure);
        }
        let silent = word.iter().filter(|s| **s == Some(WireSlot::Silent)).count();
        let mut bits = [None; 3];
        for (out, slot) in bits.iter_mut().zip(word) {
            *out = match slot {
                None | Some(WireSlot::Silent) => None,
                Some(WireSlot::Bit(b)) => Some(*b),
                Some(_) => return Err(ContractViolation::ForeignSlot("binary layer carries bits")),
            };
        }
        if silent > 0 {
            return if bits.iter().any(Option::is_some) {
                Err(ContractViolation::MixedBlock)
            } else {
                Ok(ChannelToken::Silence)
            };
        }
        match self {
            Layer::Binary2 => Ok(decode_binary2([bits[0], bits[1]])),
            _ => decode_ecc3(bits),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn masked<const W: usize>(cw: [bool; W], mask: u8) -> [Option<bool>; W] {
        core::array::from_fn(|i| if mask >> i & 1 == 1 { None } else { Some(cw[i]) })
    }

    #[test]
    fn binary2_examples() {
        let s = Symbol4::new(true, false);
        assert_eq!(encode_binary2(s), [true, false]);
        assert_eq!(decode_binary2([Some(true), Some(false)]), ChannelToken::Symbol(s));
        assert_eq!(decode_binary2([Some(true), None]), ChannelToken::Erasure);
        assert_eq!(decode_binary2([None, None]), ChannelToken::Erasure);
    }

    #[test]
    fn binary2_any_erasure_is_fatal() {
        for s in Symbol4::all() {
            for mask in 0u8..4 {
                let got = decode_binary2(masked(encode_binary2(s), mask));
                let want = if mask == 0 { ChannelToken::Symbol(s) } else { ChannelToken::Erasure };
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn ecc3_examples() {
        let o = |b| Some(b);
        assert_eq!(decode_ecc3([o(false), None, o(false)]), Ok(ChannelToken::symbol(false, false)));
        assert_eq!(decode_ecc3([None, None, o(false)]), Ok(ChannelToken::Erasure));
        assert_eq!(decode_ecc3([o(false), o(true), o(true)]), Ok(ChannelToken::symbol(true, false)));
        assert_eq!(decode_ecc3([o(true), o(true), o(true)]), Err(ContractViolation::NotACodeword));
    }

    #[test]
    fn ecc3_map_and_distance() {
        assert_eq!(encode_ecc3(Symbol4::new(false, false)), [false, false, false]);
        assert_eq!(encode_ecc3(Symbol4::new(true, false)), [false, true, true]);
        assert_eq!(encode_ecc3(Symbol4::new(false, true)), [true, true, false]);
        assert_eq!(encode_ecc3(Symbol4::new(true, true)), [true, false, true]);
        for (i, a) in ECC3_CODE.iter().enumerate() {
            for b in &ECC3_CODE[..i] {
                let d = a.iter().zip(b).filter(|(x, y)| x != y).count();
                assert_eq!(d, 2);
            }
        }
    }

    #[test]
    fn ecc3_exhaustive_masks() {
        for s in Symbol4::all() {
            for mask in 0u8..8 {
                let got = decode_ecc3(masked(encode_ecc3(s), mask)).unwrap();
                match mask.count_ones() {
                    0 | 1 => assert_eq!(got, ChannelToken::Symbol(s)),
                    _ => assert_eq!(got, ChannelToken::Erasure),
                }
            }
        }
    }

    #[test]
    fn layers_round_trip() {
        for layer in [Layer::Direct, Layer::Binary2, Layer::Ecc3, Layer::Unary] {
            for token in ChannelToken::sendable() {
                let word: alloc::vec::Vec<_> =
                    layer.encode(token).unwrap().as_slice().iter().copied().map(Some).collect();
                assert_eq!(word.len(), layer.width());
                assert_eq!(layer.decode(&word), Ok(token), "{layer:?} {token}");
            }
            assert!(layer.encode(ChannelToken::Erasure).is_err());
        }
    }

    #[test]
    fn silence_under_partial_erasure() {
        let silent = Some(WireSlot::Silent);
        assert_eq!(Layer::Ecc3.decode(&[None, silent, None]), Ok(ChannelToken::Silence));
        assert_eq!(Layer::Ecc3.decode(&[None, None, None]), Ok(ChannelToken::Erasure));
        assert_eq!(Layer::Binary2.decode(&[silent, None]), Ok(ChannelToken::Erasure));
        assert_eq!(Layer::Binary2.decode(&[silent, Some(WireSlot::Bit(true))]), Err(ContractViolation::MixedBlock));
        assert_eq!(Layer::Unary.decode(&[silent, None, silent, silent]), Ok(ChannelToken::Erasure));
    }
}

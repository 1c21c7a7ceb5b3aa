//! Temporal unary encoding: each 4-ary timestep becomes a block of four
//! slots in which a party either radiates energy or stays silent.
//!
//! `Symbol4 { info: b, parity: ρ }` puts its single energy slot at position
//! `b + 2ρ + 1` (1-based). Silence is an all-silent block. Every other
//! received block, including any block with an erased slot, decodes to an
//! erasure: the receiver cannot rule out energy in an erased slot.

use core::fmt;
use core::str::FromStr;

use crate::channel::{ChannelToken, Symbol4};
use crate::error::ContractViolation;

pub const BLOCK_LEN: usize = 4;

/// One received unary slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnarySlot {
    Energy,
    Silent,
    Erased,
}

impl UnarySlot {
    pub const fn glyph(self) -> char {
        match self {
            UnarySlot::Energy => '1',
            UnarySlot::Silent => '0',
            UnarySlot::Erased => 'x',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnaryBlock(pub [UnarySlot; BLOCK_LEN]);

impl UnaryBlock {
    pub const SILENT: UnaryBlock = UnaryBlock([UnarySlot::Silent; BLOCK_LEN]);

    pub fn slots(&self) -> &[UnarySlot; BLOCK_LEN] {
        &self.0
    }

    pub fn energy_count(&self) -> usize {
        self.0.iter().filter(|s| **s == UnarySlot::Energy).count()
    }

    /// The block with the slots in `mask` (bit i = slot i+1) erased.
    pub fn with_erasures(mut self, mask: u8) -> UnaryBlock {
        for (i, slot) in self.0.iter_mut().enumerate() {
            if mask >> i & 1 == 1 {
                *slot = UnarySlot::Erased;
            }
        }
        self
    }
}

impl fmt::Display for UnaryBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| fmt::Write::write_char(f, s.glyph()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("a unary block is four characters from '1', '0', 'x'")]
pub struct ParseBlockError;

impl FromStr for UnaryBlock {
    type Err = ParseBlockError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = UnaryBlock::SILENT;
        let mut chars = s.chars();
        for slot in out.0.iter_mut() {
            *slot = match chars.next() {
                Some('1') => UnarySlot::Energy,
                Some('0') => UnarySlot::Silent,
                Some('x') => UnarySlot::Erased,
                _ => return Err(ParseBlockError),
            };
        }
        if chars.next().is_some() {
            return Err(ParseBlockError);
        }
        Ok(out)
    }
}

/// 0-based slot index carrying the energy of `s`.
pub const fn energy_slot(s: Symbol4) -> usize {
    s.info as usize + 2 * s.parity as usize
}

pub fn encode_block(token: ChannelToken) -> Result<UnaryBlock, ContractViolation> {
    match token {
        ChannelToken::Erasure => Err(ContractViolation::SendErasure),
        ChannelToken::Silence => Ok(UnaryBlock::SILENT),
        ChannelToken::Symbol(s) => {
            let mut block = UnaryBlock::SILENT;
            block.0[energy_slot(s)] = UnarySlot::Energy;
            Ok(block)
        }
    }
}

pub fn decode_block(block: &UnaryBlock) -> ChannelToken {
    if block.0.contains(&UnarySlot::Erased) {
        return ChannelToken::Erasure;
    }
    let mut energy = block.0.iter().enumerate().filter(|(_, s)| **s == UnarySlot::Energy);
    match (energy.next(), energy.next()) {
        (None, _) => ChannelToken::Silence,
        (Some((i, _)), None) => ChannelToken::Symbol(Symbol4::from_index(i as u8).expect("slot < 4")),
        _ => ChannelToken::Erasure,
    }
}

//! Interactive coding over erasure channels with an unknown, unbounded number
//! of erasures.
//!
//! The crate is `no_std` (it needs `alloc`). It contains:
//!
//! * [`protocol`]: noiseless alternating protocols and their reference execution,
//! * [`channel`]: channel tokens, the erasure channel, noise patterns and adversaries,
//! * [`fixed`]: the challenge/response scheme where active parties always speak,
//! * [`ags`]: the scheme for the setting where silence is a free signal,
//! * [`codec`] and [`unary`]: binary, ECC-3 and temporal unary encodings of 4-ary symbols,
//! * [`sim`]: the lockstep simulator producing traces and metrics,
//! * [`verify`]: the per-round invariant checker for traces,
//! * [`search`]: exhaustive worst-case noise search and the unsynchronized termination demo,
//! * [`analysis`]: rate, waste and theorem bound helpers.
//!
//! IO, file formats, the network relay and the CLI live in the `erasuresim` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ags;
pub mod analysis;
pub mod bits;
pub mod channel;
pub mod codec;
pub mod error;
pub mod fixed;
pub mod protocol;
pub mod search;
pub mod sim;
pub mod unary;
pub mod verify;

pub use bits::{PartyInput, Transcript};
pub use channel::{
    transmit, Adversary, ChannelToken, ChannelUse, GreedyAdversary, NoisePattern, PatternAdversary, Symbol4, WireSlot,
};
pub use error::{ContractViolation, ProtocolError};
pub use protocol::{normalize, reference_transcript, Protocol, RawProtocol, Role};
pub use sim::{
    noise_used, run, run_with_adversary, HarnessError, Metrics, NoiseSource, RunConfig, RunOutcome, RunTrace,
    SchemeKind,
};
pub use verify::{verify_trace, VerifyReport};
